use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relaxwave::harness::{emit_outputs, profile, run_experiment, simulate, ExperimentConfig, ExperimentKind, Format};
use relaxwave::Error;

#[derive(Parser)]
#[command(name = "relaxwave", version, about = "Composite-wave experiments for the relaxed Navier-Stokes system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the shock profile and write its nodes.
    Profile(Common),
    /// One coupled run of the configured perturbation.
    Simulate(Common),
    /// Perturbed and unperturbed runs with decay statistics.
    Stability(Common),
    /// Relaxed runs over a list of relaxation times against the classical run.
    RelaxSweep(Common),
    /// Entropy balance on the configured grid and on one twice as fine.
    EntropyCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file; the built-in preset is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, default_value = "csv,json,svg")]
    format: String,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    let (args, kind) = match &command {
        Command::Profile(a) => (a, ExperimentKind::ProfileOnly),
        Command::Simulate(a) => (a, ExperimentKind::Stability),
        Command::Stability(a) => (a, ExperimentKind::Stability),
        Command::RelaxSweep(a) => (a, ExperimentKind::RelaxSweep),
        Command::EntropyCheck(a) => (a, ExperimentKind::EntropyCheck),
    };
    let formats = Format::parse_list(&args.format)?;
    if args.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(kind),
    };
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    let outcome = match &command {
        Command::Profile(_) => profile(&config)?,
        Command::Simulate(_) => simulate(&config)?,
        _ if config.experiment != kind => {
            return Err(Error::Config(format!(
                "config describes experiment \"{}\", not \"{kind}\"",
                config.experiment
            )))
        }
        _ => run_experiment(&config, args.jobs)?,
    };
    let files = emit_outputs(
        &config.output_dir,
        &outcome.summary,
        &outcome.artifacts,
        &config.to_toml_string()?,
        &formats,
    )?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    match outcome.passed {
        Some(true) => println!("all checks passed"),
        Some(false) => println!("some checks failed; see summary.json"),
        None => {}
    }
    Ok(())
}
