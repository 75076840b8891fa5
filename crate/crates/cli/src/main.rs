use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use simo_ee::Scheme;
use simo_ee_cli::commands::{cmd_allocate, cmd_dist, cmd_sweep, cmd_validate, Range, SweepVar};
use simo_ee_cli::scenario::Scenario;
use simo_ee_cli::CliError;

/// Energy-efficient power and rate allocation for interference-limited SIMO links.
#[derive(Parser)]
#[command(name = "simo-ee", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file; omitted fields take reference values
    #[arg(long)]
    scenario: PathBuf,
    /// Write output here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Log-spaced instead of linear
    #[arg(long)]
    log: bool,
}

impl RangeArgs {
    fn range(&self) -> Range {
        Range {
            from: self.from,
            to: self.to,
            points: self.points,
            log: self.log,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal (p0, r0) for the scenario as one JSON record
    Allocate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
    },
    /// Optima across a range of one scenario field, as CSV
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        var: SweepVar,
        #[command(flatten)]
        range: RangeArgs,
        /// Schemes to include (repeat or comma-separate); all by default
        #[arg(long, value_parser = parse_scheme, value_delimiter = ',')]
        scheme: Vec<Scheme>,
    },
    /// Analytic CDF curves of the combiner output, as CSV
    Dist {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
        #[command(flatten)]
        range: RangeArgs,
        /// Add the exact column
        #[arg(long)]
        exact: bool,
        /// Transmit power in watts for the SC/SSC curves
        #[arg(long, default_value_t = 1.0)]
        p0: f64,
    },
    /// Check the allocation against Monte-Carlo simulation and grid search
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
        #[arg(long, default_value_t = 10_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = simo_ee::oracle::DEFAULT_GRID_POINTS)]
        grid_points: usize,
    },
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: simo_ee::Error| e.to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    // Commands that can fail after producing output hand the output back
    // alongside the error so it is still written.
    let (common, result) = match cli.command {
        Command::Allocate { common, scheme } => {
            let s = Scenario::load(&common.scenario)?;
            (common, cmd_allocate(&s, scheme))
        }
        Command::Sweep { common, var, range, scheme } => {
            let s = Scenario::load(&common.scenario)?;
            let schemes = if scheme.is_empty() { Scheme::ALL.to_vec() } else { scheme };
            let r = cmd_sweep(&s, var, range.range(), &schemes).map_err(|e| (String::new(), e));
            (common, r)
        }
        Command::Dist { common, scheme, range, exact, p0 } => {
            let s = Scenario::load(&common.scenario)?;
            let scheme = scheme.unwrap_or(s.scheme);
            let r = cmd_dist(&s, scheme, range.range(), exact, p0).map_err(|e| (String::new(), e));
            (common, r)
        }
        Command::Validate { common, scheme, samples, seed, grid_points } => {
            let s = Scenario::load(&common.scenario)?;
            (common, cmd_validate(&s, scheme, samples, seed, grid_points))
        }
    };
    match result {
        Ok(text) => emit(&text, common.out.as_deref()),
        Err((text, err)) => {
            if !text.is_empty() {
                emit(&text, common.out.as_deref())?;
            }
            Err(err)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simo-ee: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
