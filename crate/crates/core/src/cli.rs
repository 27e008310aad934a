//! Command-line front end: `cycle`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 invalid cycle parameters,
//! 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, ConfigError, ConfigFile};
use crate::engine::{self, CycleMode, CycleParams, EnergyLedger, EngineError, Validity};
use crate::sweep::{self, SweepError, SweepSpec};
use crate::verify::{self, Perturbation, VerifyGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID_CYCLE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// `b` used by `cycle` when neither the flags nor a config file set it.
pub const DEFAULT_B: f64 = std::f64::consts::LN_2;

#[derive(Debug, Parser)]
#[command(
    name = "qmengine",
    version,
    about = "Single-qubit engine fueled by general measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one cycle and print its energy ledger.
    Cycle(CycleArgs),
    /// Evaluate a parameter grid and write it as CSV.
    Sweep(SweepArgs),
    /// Check numeric evolution against the closed forms.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CycleArgs {
    /// Cycle mode: three or five.
    #[arg(long)]
    pub mode: Option<CycleMode>,
    /// Dimensionless inverse temperature βħω₀.
    #[arg(long)]
    pub b: Option<f64>,
    /// Strength fraction γ, with P = γ(1 - e^{-b}).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Frequency ratio ω/ω₀ (five-stroke only).
    #[arg(long)]
    pub r: Option<f64>,
    /// Print the closed-form ledger only.
    #[arg(long, conflicts_with_all = ["numeric", "both"])]
    pub analytic: bool,
    /// Print the numerically evolved ledger only (default).
    #[arg(long, conflicts_with = "both")]
    pub numeric: bool,
    /// Print both ledgers and their largest disagreement.
    #[arg(long)]
    pub both: bool,
    /// key=value file supplying defaults for the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub mode: Option<CycleMode>,
    #[arg(long = "b-values", value_delimiter = ',')]
    pub b_values: Vec<f64>,
    #[arg(long = "gamma-values", value_delimiter = ',')]
    pub gamma_values: Vec<f64>,
    /// Defaults to 1.
    #[arg(long = "r-values", value_delimiter = ',')]
    pub r_values: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "grid-b", value_delimiter = ',')]
    pub grid_b: Vec<f64>,
    #[arg(long = "grid-gamma", value_delimiter = ',')]
    pub grid_gamma: Vec<f64>,
    #[arg(long = "grid-r", value_delimiter = ',')]
    pub grid_r: Vec<f64>,
    /// Inject a fault into numeric ledgers: qin, qout, wapi, wapii, delta, wext or eta.
    #[arg(long)]
    pub perturb: Option<Perturbation>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    InvalidCycle(String),
    VerifyFailed,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::InvalidCycle(_) => EXIT_INVALID_CYCLE,
            CliError::VerifyFailed => EXIT_VERIFY_FAILED,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::InvalidCycle(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Range { .. } => CliError::InvalidCycle(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Params(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("output error: {e}"))
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Cycle(a) => cmd_cycle(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            match &e {
                CliError::Usage(m) => {
                    let _ = writeln!(err, "error: {m}");
                }
                CliError::InvalidCycle(m) => {
                    let _ = writeln!(err, "error: {m}");
                }
                CliError::VerifyFailed => {}
            }
            e.code()
        }
    }
}

fn read_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    match path {
        Some(p) => Ok(config::load_config(p)?),
        None => Ok(ConfigFile::default()),
    }
}

fn resolve_cycle(a: &CycleArgs) -> Result<CycleParams, CliError> {
    let cfg = read_config(&a.config)?;
    let mode = a
        .mode
        .or(cfg.mode)
        .ok_or_else(|| CliError::Usage("--mode is required (three or five)".into()))?;
    let gamma = a
        .gamma
        .or(cfg.gamma)
        .ok_or_else(|| CliError::Usage("--gamma is required".into()))?;
    let b = a.b.or(cfg.b).unwrap_or(DEFAULT_B);
    let r = a.r.or(cfg.r).unwrap_or(1.0);
    Ok(CycleParams::new(mode, b, gamma, r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Numeric,
    Analytic,
    Both,
}

fn cmd_cycle(a: &CycleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = resolve_cycle(a)?;
    let source = if a.analytic {
        Source::Analytic
    } else if a.both {
        Source::Both
    } else {
        Source::Numeric
    };

    let numeric = match source {
        Source::Analytic => None,
        _ => Some(engine::run_numeric(&params)?),
    };
    let analytic = match source {
        Source::Numeric => None,
        _ => Some(engine::run_analytic(&params)?),
    };
    let label = match source {
        Source::Numeric => "numeric",
        Source::Analytic => "analytic",
        Source::Both => "both",
    };
    writeln!(
        out,
        "{} cycle  b = {}  gamma = {}  r = {}  P = {}  source = {label}",
        params.mode(),
        params.b(),
        params.gamma(),
        params.r(),
        params.strength()
    )?;
    for ledger in numeric.iter().chain(analytic.iter()) {
        write_ledger(out, ledger)?;
    }
    if let (Some(n), Some(an)) = (&numeric, &analytic) {
        let worst = n
            .scalar_entries()
            .iter()
            .zip(an.scalar_entries())
            .map(|((_, x), (_, y))| (x - y).abs())
            .fold(0.0, f64::max);
        writeln!(out, "max |numeric - analytic| = {worst:e}")?;
    }
    Ok(())
}

fn write_ledger(out: &mut dyn Write, l: &EnergyLedger) -> std::io::Result<()> {
    writeln!(out)?;
    let validity = match l.validity {
        Validity::Valid => "valid",
        Validity::FormulaOnly => "formula-only (second channel unrealizable for gamma < 1/2)",
        Validity::OutOfRange => "outside the engine gamma range",
    };
    writeln!(out, "[{}]  {validity}", l.source)?;
    writeln!(out, "{:<6} {:>20} {:>20}", "stroke", "energy", "entropy")?;
    for s in &l.strokes {
        writeln!(
            out,
            "{:<6} {:>20.15} {:>20.15}",
            s.name.to_string(),
            s.energy_after,
            s.entropy_after
        )?;
    }
    let rows = [
        ("q_in", l.q_in),
        ("q_out", l.q_out),
        ("w_api", l.w_api),
        ("w_apii", l.w_apii),
        ("delta", l.delta),
        ("w_ext", l.w_ext),
        ("eta", l.eta),
    ];
    for (name, v) in rows {
        writeln!(out, "{name:<20} = {v:.15}")?;
    }
    match l.q_used {
        Some(q) => writeln!(out, "{:<20} = {q:.15}", "q_used")?,
        None => writeln!(out, "{:<20} = n/a", "q_used")?,
    }
    if l.eta_undefined {
        writeln!(out, "note: q_in = 0, eta defined as 0")?;
    }
    writeln!(out, "{:<20} = {:e}", "first_law_residual", l.balance_residual())
}

fn resolve_sweep(a: &SweepArgs) -> Result<SweepSpec, CliError> {
    let cfg = read_config(&a.config)?;
    let pick = |flag: &Vec<f64>, file: &Option<Vec<f64>>| -> Option<Vec<f64>> {
        if flag.is_empty() {
            file.clone()
        } else {
            Some(flag.clone())
        }
    };
    let mode = a
        .mode
        .or(cfg.mode)
        .ok_or_else(|| CliError::Usage("--mode is required (three or five)".into()))?;
    let b_values = pick(&a.b_values, &cfg.b_values).ok_or_else(|| CliError::Usage("--b-values is required".into()))?;
    let gamma_values =
        pick(&a.gamma_values, &cfg.gamma_values).ok_or_else(|| CliError::Usage("--gamma-values is required".into()))?;
    let r_values = pick(&a.r_values, &cfg.r_values).unwrap_or_else(|| vec![1.0]);
    let output_path = a
        .out
        .clone()
        .or(cfg.output)
        .ok_or_else(|| CliError::Usage("--out is required".into()))?;
    Ok(SweepSpec {
        mode,
        b_values,
        gamma_values,
        r_values,
        output_path,
    })
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = resolve_sweep(a)?;
    let n = sweep::write_sweep(&spec)?;
    writeln!(out, "wrote {n} rows to {}", spec.output_path.display())?;
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let defaults = VerifyGrid::default();
    let or_default = |v: &Vec<f64>, d: Vec<f64>| if v.is_empty() { d } else { v.clone() };
    let grid = VerifyGrid {
        b: or_default(&a.grid_b, defaults.b),
        gamma: or_default(&a.grid_gamma, defaults.gamma),
        r: or_default(&a.grid_r, defaults.r),
    };
    if let Some(p) = a.perturb {
        writeln!(out, "fault injection: {p:?} shifted by {}", Perturbation::SHIFT)?;
    }
    let report = verify::run_verify(&grid, a.perturb);
    for f in &report.failures {
        writeln!(out, "FAIL {f}")?;
    }
    writeln!(
        out,
        "checks run: {}  failures: {}  elapsed: {:.3} ms",
        report.checks_run,
        report.failures.len(),
        report.elapsed.as_secs_f64() * 1e3
    )?;
    if report.passed() {
        writeln!(out, "verify: PASS")?;
        Ok(())
    } else {
        writeln!(out, "verify: FAIL")?;
        Err(CliError::VerifyFailed)
    }
}
