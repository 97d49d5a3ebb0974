//! Batch command-line front end: evaluate the fractional Green's function
//! over parameter grids, inspect the underlying H-functions, dump oracle
//! comparison tables, run the validation suites, and drive Born-series
//! experiments.

mod commands;
mod config;
mod output;
mod validate;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fracgreen",
    about = "Green's function of the space-time-fractional Schrödinger equation",
    version
)]
struct Cli {
    /// Worker threads (default: all cores; env FRACGREEN_THREADS as fallback)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate G over a (dist, dt) grid in the requested forms
    Green {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or json
        #[arg(long)]
        format: Option<String>,
    },
    /// Evaluate an H-function family over a z grid and report its
    /// convergence conditions
    Hfun {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Dump (x, I_series, I_quad, rel_err) comparison tables
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Run the cross-validation suites
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run a single suite by name
        #[arg(long)]
        suite: Option<String>,
    },
    /// Run a Born-series experiment and write per-order fields
    Born {
        #[arg(long)]
        config: PathBuf,
        /// Output path prefix for the per-order field files
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
}

fn init_threads(cli_threads: Option<usize>) {
    let n = cli_threads.or_else(|| {
        std::env::var("FRACGREEN_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    let result = match cli.command {
        Command::Green { config, out, format } => commands::cmd_green(&config, out, format),
        Command::Hfun { config, out, format } => commands::cmd_hfun(&config, out, format),
        Command::Oracle { config, out, format } => commands::cmd_oracle(&config, out, format),
        Command::Validate { config, suite } => validate::cmd_validate(config, suite),
        Command::Born { config, out, format } => commands::cmd_born(&config, out, format),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
