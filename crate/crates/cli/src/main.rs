mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Computes and verifies pure-strategy Bayes-Nash equilibria of combinatorial auctions.
#[derive(Debug, Parser)]
#[command(name = "bne", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `--set domain=...` (llg or llllgg).
    #[arg(long)]
    domain: Option<String>,
    /// Shorthand for `--set mechanism=...`, e.g. llg.proxy.
    #[arg(long)]
    mechanism: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    target_epsilon: Option<String>,
    #[arg(long)]
    workers: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for an equilibrium from truthful bidding and verify it.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory receiving the run folder.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Verify a stored profile, or the truthful one.
    VerifyOnly {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, conflicts_with = "truthful", required_unless_present = "truthful")]
        strategy: Option<PathBuf>,
        /// Verify truthful bidding instead of a stored profile.
        #[arg(long)]
        truthful: bool,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Distance between a stored local strategy and a closed-form equilibrium.
    Compare {
        #[arg(long)]
        strategy: PathBuf,
        /// Built-in oracle key (`llg.nearest_bid`).
        #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
        oracle: Option<String>,
        /// Analytic strategy file with a section matching the stored setting.
        #[arg(long)]
        formula: Option<PathBuf>,
        #[arg(long, default_value_t = 10_001)]
        probes: usize,
        /// Per-probe CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Theorem bound and grid estimate for a range of verification grid sizes.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Profile to verify; solved first when absent.
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// Smallest grid is 2^min_exp points per axis.
        #[arg(long, default_value_t = 1)]
        min_exp: u32,
        #[arg(long, default_value_t = 13)]
        max_exp: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve { config, out } => commands::solve(&config, &out),
        Command::VerifyOnly { config, strategy, truthful, out } => {
            commands::verify_only(&config, strategy.as_deref(), truthful, &out)
        }
        Command::Compare { strategy, oracle, formula, probes, csv } => {
            commands::compare(&strategy, oracle.as_deref(), formula.as_deref(), probes, csv.as_deref())
        }
        Command::Sweep { config, strategy, min_exp, max_exp, csv } => {
            commands::sweep(&config, strategy.as_deref(), min_exp, max_exp, csv.as_deref())
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
