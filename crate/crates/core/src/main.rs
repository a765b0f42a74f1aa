use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use riccisol::cli::{list_families, run_adjudicate, run_solve, run_verify, RunConfig, RunError};

#[derive(Parser)]
#[command(
    name = "riccisol",
    version,
    about = "Verify Ricci soliton families with a two-dimensional Abelian Killing algebra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family from a config and check every claim
    Verify(RunArgs),
    /// Compare the printed variants of a family on identical slots
    Adjudicate(RunArgs),
    /// Solve the constraint equations requested in a config
    Solve(RunArgs),
    /// Print the catalog: slots, invariants, constraints and claims
    ListFamilies,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Variant name, or `all`
    #[arg(long)]
    variant: Option<String>,
    /// Grid resolution N (N x N nodes)
    #[arg(long)]
    grid: Option<usize>,
    /// Window t1_min,t1_max,t2_min,t2_max
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    window: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Soliton residual tolerance
    #[arg(long)]
    tolerance: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, RunError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(v) = &self.variant {
            cfg.variant = Some(v.clone());
        }
        if let Some(n) = self.grid {
            cfg.grid.n1 = n;
            cfg.grid.n2 = n;
        }
        if let Some(w) = &self.window {
            let w: [f64; 4] = w
                .as_slice()
                .try_into()
                .map_err(|_| RunError::Usage(format!("--window needs 4 values, got {}", w.len())))?;
            cfg.grid.window = Some(w);
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        if let Some(t) = self.tolerance {
            cfg.tolerances.residual = Some(t);
        }
        Ok(cfg)
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::ListFamilies => {
            emit(&list_families());
            Ok(0)
        }
        Command::Verify(args) => {
            let v = run_verify(&args.config()?)?;
            emit(&(v.report.to_json() + "\n"));
            for c in v.claims.iter().filter(|c| !c.pass) {
                error!("claim {} failed: measured {:e}, tolerance {:e}", c.name, c.measured, c.tolerance);
            }
            Ok(v.exit_code())
        }
        Command::Adjudicate(args) => {
            let rep = run_adjudicate(&args.config()?)?;
            emit(&(rep.to_json() + "\n"));
            Ok(if rep.passing.is_empty() { 1 } else { 0 })
        }
        Command::Solve(args) => {
            let cfg = args.config()?;
            let results = run_solve(&cfg, args.out.as_deref())?;
            for (slot, residual) in results {
                emit(&format!("{slot}: discrete residual {residual:.6e}\n"));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
