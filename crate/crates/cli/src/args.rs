use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtmpade::{Problem, RecurrenceMode};

#[derive(Debug, Parser)]
#[command(
    name = "dtmpade",
    version,
    about = "DTM-Padé and shooting solvers for boundary-layer similarity problems",
    args_override_self = true,
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the DTM series coefficients F(k) and Θ(k).
    Series(SeriesArgs),
    /// Solve for f″(0), θ′(0) by DTM-Padé closure at infinity.
    Solve(CommonArgs),
    /// Solve for f″(0), θ′(0) with the RK4 shooting oracle.
    Shoot(CommonArgs),
    /// Tabulate (η, f, f′, θ) from the series, the integrator, or both.
    Profile(ProfileArgs),
    /// DTM-Padé roots side by side with the shooting oracle.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    FreeConvection,
    Blasius,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::FreeConvection => Problem::FreeConvection,
            ProblemArg::Blasius => Problem::Blasius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Corrected,
    Paper,
}

impl From<ModeArg> for RecurrenceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Corrected => RecurrenceMode::Corrected,
            ModeArg::Paper => RecurrenceMode::PaperFidelity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Series,
    Integrator,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "free-convection")]
    pub problem: ProblemArg,
    /// Prandtl number.
    #[arg(long, default_value_t = 1.0)]
    pub pr: f64,
    /// Series truncation order (derived from --pade when omitted).
    #[arg(long)]
    pub order: Option<usize>,
    /// Diagonal Padé degree(s) n, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub pade: Vec<usize>,
    #[arg(long, value_enum, default_value = "corrected")]
    pub mode: ModeArg,
    /// f″(0).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// θ′(0).
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 8.0)]
    pub eta_max: f64,
    /// RK4 step size.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Residual tolerance (1e-10 for closure solves, 1e-8 for shooting).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Initial guess "a,b" (or "a" for Blasius).
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub guess: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Significant digits for table and CSV output.
    #[arg(long, default_value_t = 10)]
    pub digits: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file using the flag names; command-line flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Compare paper-mode coefficients at A = B = 1 with the published series.
    #[arg(long)]
    pub check_paper: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "series")]
    pub source: Source,
    /// start:end:step, inclusive.
    #[arg(long, default_value = "0:1:0.1")]
    pub grid: String,
}

/// Splices the entries of any `--config` file into `argv` right after the
/// subcommand, so that flags given on the command line override them.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut i = 0;
    while i < argv.len() {
        if argv[i] == "--config" {
            path = argv.get(i + 1).cloned();
            break;
        }
        if let Some(p) = argv[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            break;
        }
        i += 1;
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key=value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "config" {
            return Err(format!(
                "{path}:{}: nested config files are not supported",
                lineno + 1
            ));
        }
        match value {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => {
                extra.push(format!("--{key}"));
                extra.push(value.to_string());
            }
        }
    }
    let sub = argv
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 1)
        .ok_or_else(|| "--config needs a subcommand".to_string())?;
    let mut out = argv[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(format!("grid must be start:end:step, got {text:?}"));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad grid value {s:?}: {e}"))
    };
    dtmpade::profile::uniform_grid(num(start)?, num(end)?, num(step)?).map_err(|e| e.to_string())
}
