//! `gtaxo`: generate, perturb, train, profile and taxonomize graph datasets.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gtaxo::Error;

#[derive(Parser, Debug)]
#[command(name = "gtaxo", version, about = "Perturbation sensitivity profiles and taxonomies of graph datasets")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset directory.
    Generate(commands::GenerateArgs),
    /// Per-class structural statistics and spectral diagnostics.
    Stats(commands::StatsArgs),
    /// Apply one perturbation to a dataset.
    Perturb(commands::PerturbArgs),
    /// Train the reference model on one split.
    Train(commands::TrainArgs),
    /// Run the dataset × perturbation grid.
    Profile(commands::ProfileArgs),
    /// Cluster, project and correlate a sensitivity matrix.
    Taxonomize(commands::TaxonomizeArgs),
    /// Bundle a matrix and its taxonomy into a summary.
    Report(commands::ReportArgs),
}

const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Numerical(_) => 1,
        Error::InputFormat(_) | Error::Shape(_) | Error::Unsupported(_) | Error::Io(_) | Error::Json(_) => EXIT_INPUT,
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report_error("usage", e.to_string().trim());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            report_error("usage", "--jobs must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            report_error("resource", &e.to_string());
            return ExitCode::from(EXIT_RESOURCE);
        }
    }
    let recorded = commands::recorded_command(&argv[1..]);
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a, recorded),
        Command::Stats(a) => commands::stats(a),
        Command::Perturb(a) => commands::perturb(a, recorded),
        Command::Train(a) => commands::train(a, recorded),
        Command::Profile(a) => commands::profile(a, recorded),
        Command::Taxonomize(a) => commands::taxonomize(a, recorded),
        Command::Report(a) => commands::report(a, recorded),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(exit_code(&e))
        }
    }
}
