//! Verification engine for four-dimensional Ricci solitons with a
//! two-dimensional Abelian Killing algebra.

pub mod catalog;
pub mod cli;
pub mod fields;
pub mod geometry;
pub mod jets;
pub mod oracle;
pub mod pde;
