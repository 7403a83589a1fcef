use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use pdeform::cli::{exit_code, parse_scenario, run_command, Options, COMMANDS, EXIT_INPUT};

/// Exact deformation theory of Poisson maps on scenario files.
#[derive(Parser, Debug)]
#[command(name = "pdeform", version)]
struct Args {
    /// One of: validate, cohomology, pd, pd1, audit-exactness, first-order,
    /// obstruct, lift, stability, costability, factor, normal-compare.
    command: String,
    /// Scenario file.
    scenario: PathBuf,
    /// Monomial window D for section spaces.
    #[arg(long)]
    window: Option<i32>,
    /// Parameter order MU.
    #[arg(long)]
    order: Option<u32>,
    /// Seed for the lift choices of `obstruct`.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if !COMMANDS.contains(&args.command.as_str()) {
        eprintln!("error: unknown command `{}`; expected one of {}", args.command, COMMANDS.join(", "));
        return ExitCode::from(EXIT_INPUT as u8);
    }
    let text = match std::fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.scenario.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let opts = Options { window: args.window, order: args.order, seed: args.seed };
    let result = parse_scenario(&text).and_then(|scn| run_command(&args.command, &scn, &opts));
    match result {
        Ok(report) => {
            print!("{}", if args.json { report.json() } else { report.text() });
            ExitCode::from(report.status as u8)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", args.command);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
