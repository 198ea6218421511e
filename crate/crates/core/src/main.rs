use clap::{Args, Parser, Subcommand};
use schaeffer_core::harness::commands::{cmd_asymptotics, cmd_bounds, cmd_coeffs, cmd_growth};
use schaeffer_core::harness::config::{Settings, StudyConfig};
use schaeffer_core::harness::output::{emit, Table};
use schaeffer_core::{validation, Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Studies of Blaschke-power coefficients, truncated Wiener quotient norms,
/// resolvent bounds and their asymptotics.
#[derive(Parser)]
#[command(name = "schaeffer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients of (1 - z²) b_λ^n and their sup norms.
    Coeffs(StudyArgs),
    /// Lower bound, truncated φ and sqrt(en) per n.
    Growth(StudyArgs),
    /// Optimised and closed-form resolvent bounds.
    Bounds(StudyArgs),
    /// Saddle-point estimates against exact coefficients, with decay fits.
    Asymptotics(StudyArgs),
    /// Runs the acceptance criteria (all, or the listed ones).
    Validate {
        /// Criterion numbers, e.g. `3 11`.
        ids: Vec<u8>,
    },
}

#[derive(Args)]
struct StudyArgs {
    /// Comma-separated eigenvalues; complex values as `a+bi`.
    #[arg(long)]
    lambda: Option<String>,
    /// Strictly increasing sizes, e.g. `256,512` or `4..=8`.
    #[arg(long)]
    n: Option<String>,
    /// Coefficient indices to report.
    #[arg(long)]
    k: Option<String>,
    /// Evaluation points of the resolvent bounds.
    #[arg(long)]
    zeta: Option<String>,
    /// Power-bound constant (at least 1).
    #[arg(long = "C", id = "C")]
    c: Option<String>,
    /// Left exponential threshold, in (0, α₀).
    #[arg(long)]
    alpha: Option<String>,
    /// Stationary-phase threshold, in (α₀, 1).
    #[arg(long)]
    beta: Option<String>,
    /// Starting truncation degree of the linear programs.
    #[arg(long)]
    degree: Option<String>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// `csv` or `json`.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<String>,
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl StudyArgs {
    fn resolve(self) -> Result<StudyConfig> {
        let base = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            lambda: self.lambda,
            n: self.n,
            k: self.k,
            zeta: self.zeta,
            c: self.c,
            alpha: self.alpha,
            beta: self.beta,
            degree: self.degree,
            out: self.out,
            format: self.format,
            workers: self.workers,
            ..Default::default()
        };
        base.overridden_by(flags).resolve()
    }
}

fn is_usage(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Domain(_) | Error::Mode(_) | Error::Precondition(_))
}

fn study(args: StudyArgs, f: fn(&StudyConfig) -> Result<Vec<Table>>) -> Result<()> {
    let cfg = args.resolve()?;
    let tables = f(&cfg)?;
    let written = emit(&tables, cfg.out.as_deref(), cfg.format, &mut std::io::stdout().lock())?;
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn validate(ids: Vec<u8>) -> ExitCode {
    let ids = if ids.is_empty() { validation::ALL.to_vec() } else { ids };
    if let Some(bad) = ids.iter().find(|id| !validation::ALL.contains(id)) {
        eprintln!("error: no criterion {bad}");
        return ExitCode::from(EXIT_USAGE);
    }
    let mut failed = 0;
    for id in ids {
        let o = validation::run(id);
        println!("{}", o.line());
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::from(EXIT_FAILURE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Coeffs(a) => study(a, cmd_coeffs),
        Command::Growth(a) => study(a, cmd_growth),
        Command::Bounds(a) => study(a, cmd_bounds),
        Command::Asymptotics(a) => study(a, cmd_asymptotics),
        Command::Validate { ids } => return validate(ids),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_usage(&e) { EXIT_USAGE } else { EXIT_FAILURE })
        }
    }
}
