use std::path::PathBuf;
use std::process::ExitCode;

use aerocell_cli::{load_config, run_with_threads, Overrides};
use aerocell_core::{ArrayMode, Scenario};
use clap::{Args, Parser, Subcommand};

/// Monte Carlo downlink simulator for aerial and ground UEs in a hexagonal
/// macro-cell network.
#[derive(Debug, Parser)]
#[command(name = "aerocell", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dedicated command-and-control channel: association and SNR per altitude.
    Cnc(RunArgs),
    /// Shared payload channel: sum-rate distribution per aerial UE count.
    Shared(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON or TOML config file; unspecified keys take the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo drops per altitude or aerial UE count.
    #[arg(long)]
    drops: Option<usize>,
    /// Base-station antenna mode.
    #[arg(long, value_parser = ["fixed", "bf3d"])]
    mode: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match cli.command {
        Command::Cnc(a) => (Scenario::Cnc, a),
        Command::Shared(a) => (Scenario::Shared, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        drops: args.drops,
        mode: args
            .mode
            .map(|m| m.parse::<ArrayMode>().expect("validated by clap")),
    };
    let result = load_config(scenario, args.config.as_deref(), &overrides)
        .and_then(|config| run_with_threads(&config, &args.out, args.threads));
    match result {
        Ok(manifest) => {
            for f in &manifest.outputs {
                println!("{}", args.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
