//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use logdos::cli::{self, config, CliError};

#[derive(Parser)]
#[command(
    name = "logdos",
    about = "Simulator for Bloom-filter GET-logging DDoS defenses in path-identifier ICNs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write CSV output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config file's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the config's single scenario.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Execute every point of the config's sweep cross product.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Emit the filter-size table (bits, megabits, megabytes).
    Storage {
        /// Optional config; without one the default grid is used.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Emit D-PID victim-rate curves with an Even-logging comparison.
    Dpid {
        #[arg(long)]
        config: PathBuf,
    },
    /// Emit topology statistics (node/edge counts, path lengths).
    Topostats {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // argument misuse is a configuration error
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("could not size the thread pool: {e}")))?;
    }

    let load = |path: &PathBuf| -> Result<config::ExperimentSpec, CliError> {
        let mut spec = config::parse_config(path)?;
        if let Some(seed) = cli.seed {
            // overrides run randomness only; the topology seed stays as parsed
            spec.base.master_seed = seed;
        }
        Ok(spec)
    };

    let run = |writer: &mut dyn std::io::Write| -> Result<(), CliError> {
        match &cli.command {
            Command::Run { config } => cli::cmd_run(&load(config)?, writer),
            Command::Sweep { config } => cli::cmd_sweep(&load(config)?, writer),
            Command::Storage { config } => {
                let spec = match config {
                    Some(path) => load(path)?.storage,
                    None => config::StorageSpec::default(),
                };
                cli::cmd_storage(&spec, writer)
            }
            Command::Dpid { config } => cli::cmd_dpid(&load(config)?, writer),
            Command::Topostats { config } => cli::cmd_topostats(&load(config)?, writer),
        }
    };

    match &cli.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            let mut writer = std::io::BufWriter::new(file);
            run(&mut writer)?;
            use std::io::Write;
            writer.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            run(&mut lock)?;
        }
    }
    Ok(())
}
