//! Command-line front end for descentlab: `run`, `verify`, `table`, `suite`.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{ConstantsSource, Options, TableArgs};

#[derive(Debug, Parser)]
#[command(name = "descentlab", version, about = "First-order optimization experiments and bound checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for traces, manifests and reports.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for parallel trials.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Replace the configured base seed.
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured algorithm and write a CSV trace.
    Run,
    /// Check a convergence bound against measured runs.
    Verify,
    /// Print the iteration-complexity table.
    Table {
        /// Take constants from a catalogue fixture.
        #[arg(long, conflicts_with = "constants")]
        fixture: Option<String>,
        /// Take constants from a TOML file (`[constants]`, `[init]`, `batch_size`).
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Target accuracy.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Minibatch size for the mini-SGD row.
        #[arg(long)]
        b: Option<usize>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the inequality property suite on a problem.
    Suite {
        #[arg(long)]
        fixture: Option<String>,
        /// Random points (or pairs) per inequality.
        #[arg(long)]
        samples: Option<usize>,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("warning: --jobs ignored: {e}");
        }
    }
    let opts = Options {
        config: cli.config.clone(),
        out_dir: cli.out_dir.clone(),
        seed_override: cli.seed_override,
    };
    let result = match &cli.command {
        Command::Run => commands::cmd_run(&opts),
        Command::Verify => commands::cmd_verify(&opts),
        Command::Table {
            fixture,
            constants,
            epsilon,
            b,
            csv,
        } => {
            let source = match (fixture, constants) {
                (Some(f), _) => ConstantsSource::Fixture(f.clone()),
                (None, Some(p)) => ConstantsSource::File(p.clone()),
                (None, None) => ConstantsSource::Config,
            };
            commands::cmd_table(
                &opts,
                &TableArgs {
                    source,
                    epsilon: *epsilon,
                    b: *b,
                    csv: csv.clone(),
                },
            )
        }
        Command::Suite { fixture, samples } => commands::cmd_suite(&opts, fixture.as_deref(), *samples),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}
