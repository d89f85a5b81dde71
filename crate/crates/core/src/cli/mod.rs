//! Command-line driver: `verify`, `audit`, `count-bc`, `run`.
//!
//! Exit codes: 0 pass, 1 tolerance failure or solver abort, 2 usage or
//! configuration error.

pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::boundary::{critical_mach_sq, sweep};
use crate::solver::{run_case, CaseConfig};
use crate::state::GasParams;
use report::{bc_table_csv, energy_csv, RunReport};
use verify::{run_suites, VerifyOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "skewns",
    version,
    about = "Skew-symmetric compressible Navier-Stokes: identities, energy audits, boundary counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the randomized identity suites.
    Verify(VerifyArgs),
    /// Run a case and check the discrete energy balance at every step.
    Audit(CaseArgs),
    /// Tabulate boundary-condition counts over a Mach sweep.
    CountBc(CountBcArgs),
    /// Run a case and write its report.
    Run(CaseArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random fields per suite (boundary suites always draw at least 1000 states).
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Perturb one entry of Atilde_1 by 1e-6 to check the suites can fail.
    #[arg(long)]
    pub inject_fault: bool,
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Serial evaluation and no timing fields, so outputs are byte-identical.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct CountBcArgs {
    #[arg(long, default_value_t = 1.4)]
    pub gamma: f64,
    /// Comma-separated M_n^2 values.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 0.9, 1.5, 4.0])]
    pub mn_sq: Vec<f64>,
    /// Append a row at the exact critical M_n^2.
    #[arg(long)]
    pub critical: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub reproducible: bool,
}

/// A finished command: exit code plus lines for stdout and stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<String>,
    pub stderr: Vec<String>,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stderr: vec![format!("error: {}", msg.into())],
            ..Default::default()
        }
    }

    fn fail(msg: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_FAIL,
            stderr: vec![format!("error: {}", msg.into())],
            ..Default::default()
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(path)
}

/// Reads a flat JSON case file. Parse errors carry line and column.
pub fn load_config(path: &Path) -> Result<CaseConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let cfg: CaseConfig =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    cfg.validate()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(cfg)
}

pub fn cmd_verify(args: &VerifyArgs) -> Outcome {
    if args.trials == 0 {
        return Outcome::usage("--trials must be at least 1");
    }
    let started = Instant::now();
    let opts = VerifyOptions {
        seed: args.seed,
        trials: args.trials,
        inject_fault: args.inject_fault,
    };
    let rep = match run_suites(&opts) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(format!("verify aborted: {e}")),
    };
    let mut out = Outcome::default();
    for s in &rep.suites {
        out.stdout.push(format!(
            "{} {:<20} worst={:.3e} tol={:.0e} samples={}",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.worst,
            s.tolerance,
            s.samples
        ));
    }
    for s in rep.failures() {
        out.stderr.push(format!(
            "identity {} ({}) failed: worst {:.3e} at {}",
            s.name, s.description, s.worst, s.worst_case
        ));
    }
    if let Some(dir) = &args.out {
        let mut v = serde_json::to_value(&rep).expect("serializable");
        if !args.reproducible {
            v["elapsed_seconds"] = started.elapsed().as_secs_f64().into();
        }
        let text = serde_json::to_string_pretty(&v).expect("serializable");
        if let Err(e) = write_file(dir, "report.json", &text) {
            return Outcome::fail(e);
        }
    }
    out.code = if rep.passed { EXIT_PASS } else { EXIT_FAIL };
    out
}

fn case_command(name: &str, args: &CaseArgs, enforce_balance: bool) -> Outcome {
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => return Outcome::usage(e),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if enforce_balance {
        cfg.record_energy = true;
    }
    if args.reproducible {
        cfg.parallel = false;
    }
    let started = Instant::now();
    let hist = match run_case(&cfg) {
        Ok(h) => h,
        Err(e) => return Outcome::fail(format!("{name} aborted: {e}")),
    };
    let mut rep = match RunReport::build(name, &cfg, &hist) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(e.to_string()),
    };
    if !args.reproducible {
        rep.elapsed_seconds = Some(started.elapsed().as_secs_f64());
    }
    let json = serde_json::to_string_pretty(&rep).expect("serializable");
    if let Err(e) = write_file(&args.out, "report.json", &json) {
        return Outcome::fail(e);
    }
    if cfg.record_energy {
        if let Err(e) = write_file(
            &args.out,
            "energy.csv",
            &energy_csv(&hist.times, &hist.energy),
        ) {
            return Outcome::fail(e);
        }
    }
    let s = &rep.summary;
    let mut out = Outcome::default();
    out.stdout.push(format!(
        "{name}: {} steps, dt={:.6e}, max relative residual {:.3e}, energy drift {:.3e}",
        s.steps, s.dt, s.max_relative_residual, s.energy_drift
    ));
    out.stderr
        .extend(hist.warnings.iter().map(|w| format!("warning: {w}")));
    if enforce_balance && !s.passed {
        out.stderr.push(format!(
            "error: energy balance residual {:.3e} exceeds {:.0e} (relative)",
            s.max_relative_residual, s.tolerance
        ));
        out.code = EXIT_FAIL;
    }
    out
}

pub fn cmd_audit(args: &CaseArgs) -> Outcome {
    case_command("audit", args, true)
}

pub fn cmd_run(args: &CaseArgs) -> Outcome {
    case_command("run", args, false)
}

pub fn cmd_count_bc(args: &CountBcArgs) -> Outcome {
    let g = match GasParams::inviscid(args.gamma) {
        Ok(g) => g,
        Err(e) => return Outcome::usage(format!("--gamma: {e}")),
    };
    if let Some(m) = args.mn_sq.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
        return Outcome::usage(format!(
            "--mn-sq values must be finite and non-negative, got {m}"
        ));
    }
    let mut mn = args.mn_sq.clone();
    if args.critical {
        mn.push(critical_mach_sq(&g));
    }
    let rows = match sweep(&g, &mn, &[-1, 1]) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(e.to_string()),
    };
    if let Err(e) = write_file(&args.out, "bc_table.csv", &bc_table_csv(&rows)) {
        return Outcome::fail(e);
    }
    let mut out = Outcome::default();
    for r in &rows {
        let label = if r.u_n_sign > 0 { "outflow" } else { "inflow" };
        match (r.count, r.degeneracy) {
            (Some(c), _) => out
                .stdout
                .push(format!("{label:<7} Mn^2={:<10} count={c}", r.mach_n_sq)),
            (None, Some(d)) => out.stdout.push(format!(
                "{label:<7} Mn^2={:<10} degenerate ({d})",
                r.mach_n_sq
            )),
            (None, None) => unreachable!("rows are counted or flagged"),
        }
    }
    let mismatched: Vec<_> = rows
        .iter()
        .filter(|r| r.count != r.dense_negative)
        .collect();
    if !mismatched.is_empty() {
        for r in mismatched {
            out.stderr.push(format!(
                "error: count {:?} disagrees with dense signature {:?} at u_n sign {} Mn^2 {}",
                r.count, r.dense_negative, r.u_n_sign, r.mach_n_sq
            ));
        }
        out.code = EXIT_FAIL;
    }
    out
}

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Audit(a) => cmd_audit(a),
        Command::CountBc(a) => cmd_count_bc(a),
        Command::Run(a) => cmd_run(a),
    }
}

/// Parses arguments, runs the command, prints its output and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let out = dispatch(&cli);
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    for l in &out.stdout {
        let _ = writeln!(so, "{l}");
    }
    for l in &out.stderr {
        eprintln!("{l}");
    }
    out.code
}
