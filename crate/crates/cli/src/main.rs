use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coopsearch::sim::{self, ScenarioConfig, SimError};

#[derive(Parser)]
#[command(name = "coopsearch", version, about = "Cooperative multi-robot target search simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and write its metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several trials for every value of one config field.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. `15,25,35,45`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
    },
    /// Check the closed forms against the Monte Carlo oracles.
    Validate {
        /// Monte Carlo samples per check; 0 skips the suite.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Render SVG charts for a run or sweep output directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn execute(command: Command) -> Result<ExitCode, SimError> {
    match command {
        Command::Run { config, seed, out } => {
            let mut config = ScenarioConfig::load(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let metrics = sim::run_trial(&config)?;
            print_written(&sim::write_run(&out, &metrics, &config)?);
            println!(
                "final entropy {:.4}, true targets {}, false targets {}",
                metrics.final_entropy(),
                metrics.final_true(),
                metrics.final_false()
            );
        }
        Command::Sweep { config, axis, values, trials, out } => {
            let config = ScenarioConfig::load(&config)?;
            let result = sim::sweep(&config, &axis, &values, trials)?;
            print_written(&sim::write_sweep(&out, &result)?);
        }
        Command::Validate { budget, seed } => {
            let report = sim::validate(budget, seed);
            print!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Plot { input } => print_written(&sim::render_plots(&input)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
