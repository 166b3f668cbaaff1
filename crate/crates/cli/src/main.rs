use std::path::PathBuf;

use clap::Parser;

use rbe_slab_cli::run::{init_thread_pool, resolve_threads, run, Mode, RunArgs, EXIT_CONFIG};
use rbe_slab_cli::{parse_config, RunConfig};

/// Steady-state slab solver for the relativistic Boltzmann equation.
#[derive(Parser)]
#[command(name = "rbe-slab", disable_help_subcommand = true)]
struct Cli {
    /// solve | check-boundary | norms | oracle | bench
    mode: Mode,
    /// TOML configuration file; defaults apply for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single-key overrides, e.g. --set n_x=65 (repeatable).
    #[arg(long = "set")]
    sets: Vec<String>,
    /// Output directory for report.json, timings.json, and field dumps.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (overrides RBE_SLAB_THREADS and the config file).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed of the sampling-based oracles (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let mut config: RunConfig = match parse_config(cli.config.as_deref(), &cli.sets) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(EXIT_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    init_thread_pool(resolve_threads(cli.threads, &config));
    let code = run(&RunArgs { mode: cli.mode, config, out: cli.out });
    std::process::exit(code);
}
