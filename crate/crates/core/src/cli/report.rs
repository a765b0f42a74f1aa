//! JSON report layout. Numbers are written with 17 significant digits;
//! non-finite values become `null`.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::catalog::Params;
use crate::geometry::{ClaimResult, ResidualReport};

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSection {
    pub window: [Num; 4],
    pub n1: usize,
    pub n2: usize,
    pub masked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSection {
    pub sup: Num,
    pub rms: Num,
    pub per_component: [[Num; 4]; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimSection {
    pub name: String,
    pub measured: Num,
    pub expected: Num,
    pub tolerance: Num,
    pub pass: bool,
}

impl From<&ClaimResult> for ClaimSection {
    fn from(c: &ClaimResult) -> Self {
        Self {
            name: c.name.clone(),
            measured: Num(c.measured),
            expected: Num(c.expected),
            tolerance: Num(c.tolerance),
            pass: c.pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub family: String,
    pub params: BTreeMap<&'static str, Num>,
    pub variant: Option<String>,
    pub grid: GridSection,
    pub residual: ResidualSection,
    pub claims: Vec<ClaimSection>,
    pub status: Status,
}

pub fn params_map(p: &Params) -> BTreeMap<&'static str, Num> {
    [
        ("lambda", p.lambda),
        ("eps0", p.eps0),
        ("eps", p.eps),
        ("c", p.c),
        ("c1", p.c1),
        ("k", p.k),
        ("a", p.a),
        ("a1", p.a1),
        ("a2", p.a2),
        ("a3", p.a3),
        ("a_slope", p.a_slope),
        ("a_offset", p.a_offset),
    ]
    .into_iter()
    .map(|(k, v)| (k, Num(v)))
    .collect()
}

impl Report {
    pub fn new(
        family: String,
        params: &Params,
        variant: Option<String>,
        scan: &ResidualReport,
        claims: &[ClaimResult],
    ) -> Self {
        let pass = claims.iter().all(|c| c.pass);
        Self {
            version: REPORT_VERSION,
            family,
            params: params_map(params),
            variant,
            grid: GridSection { window: scan.window.map(Num), n1: scan.n1, n2: scan.n2, masked: scan.points_masked },
            residual: ResidualSection {
                sup: Num(scan.sup_norm),
                rms: Num(scan.rms),
                per_component: scan.per_component.map(|row| row.map(Num)),
            },
            claims: claims.iter().map(ClaimSection::from).collect(),
            status: if pass { Status::Pass } else { Status::Fail },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjudicationRow {
    pub variant: String,
    pub sup: Num,
    pub rms: Num,
    pub tolerance: Num,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjudicationReport {
    pub version: &'static str,
    pub family: String,
    pub params: BTreeMap<&'static str, Num>,
    pub rows: Vec<AdjudicationRow>,
    pub passing: Vec<String>,
    pub status: Status,
}

impl AdjudicationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
