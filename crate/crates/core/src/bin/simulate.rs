//! `simulate --scenario <path> --out <dir> [--method <name> ...] [--verbose]`
//!
//! Exit codes: 0 success, 1 I/O failure, 2 schema or compatibility error,
//! 3 numerical failure (breakup branch or quadrature tolerance).

use std::path::PathBuf;
use std::process::ExitCode;

use bec_oscillator::{run_scenario, write_outputs, Error, Method, Scenario};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(version, about = "Moment dynamics of an oscillator monitored by a condensate meter")]
struct Args {
    /// Scenario document.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for the CSV files and manifest.
    #[arg(long)]
    out: PathBuf,
    /// Run only these methods (discrete, continuum, approx, closed_form).
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long, short)]
    verbose: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 1,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let mut scenario = Scenario::from_path(&args.scenario)?;
    if !args.methods.is_empty() {
        let methods = args.methods.iter().map(|m| m.parse()).collect::<Result<Vec<Method>, _>>()?;
        scenario.set_methods(methods)?;
    }
    let output = run_scenario(&scenario)?;
    for path in write_outputs(&output, &args.out)? {
        log::info!("wrote {}", path.display());
    }
    for w in &output.manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
