#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logistic_steady::families::LambdaChoice;

use commands::{exit_code_for, Run};
use config::{RunConfig, Variant};

/// Certified positive steady states of logistic equations with harvesting.
#[derive(Parser)]
#[command(name = "logistic-steady", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline variant at one harvesting level.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Solve on an evenly spaced harvesting range and bisect the threshold.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu_max: f64,
        #[arg(long, default_value_t = 16)]
        steps: usize,
    },
    /// Principal eigenvalues and the admissible window for lambda.
    Eigen {
        #[command(flatten)]
        common: Common,
        /// Fixes lambda before the window check.
        #[arg(long)]
        lambda: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Grid intervals.
    #[arg(long)]
    grid_nodes: Option<usize>,
    #[arg(long)]
    r_infinity: Option<f64>,
    /// Projected-gradient tolerance of the minimizer.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write minimizer convergence traces under `traces/`.
    #[arg(long)]
    trace: bool,
    /// Seed of the random gradient-check directions.
    #[arg(long, env = "LOGISTIC_STEADY_SEED", default_value_t = 20240917)]
    seed: u64,
}

impl Common {
    fn load(&self) -> logistic_steady::Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(n) = self.grid_nodes {
            cfg.grid.intervals = n;
        }
        if let Some(r) = self.r_infinity {
            cfg.grid.r_infinity = Some(r);
        }
        if let Some(t) = self.tol {
            cfg.solver.tol = t;
        }
        if self.trace {
            cfg.solver.record_trace = true;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> logistic_steady::Result<i32> {
    let common = match &cli.command {
        Command::Solve { common, .. } | Command::Sweep { common, .. } | Command::Eigen { common, .. } => common,
    };
    let mut config = common.load()?;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| logistic_steady::Error::Config(format!("threads: {e}")))?;
    }
    match &cli.command {
        Command::Solve { variant, mu, .. } => {
            if let Some(mu) = mu {
                config.mu = Some(*mu);
            }
            if let Some(v) = variant {
                config.variant = Some(*v);
            }
            config.check()?;
            let variant = config.default_variant();
            commands::solve(Run { config, out_dir: &common.out_dir, seed: common.seed, threads: common.threads }, variant)
        }
        Command::Sweep { mu_max, steps, .. } => {
            commands::sweep(Run { config, out_dir: &common.out_dir, seed: common.seed, threads: common.threads }, *mu_max, *steps)
        }
        Command::Eigen { lambda, .. } => {
            if let Some(l) = lambda {
                config.lambda = Some(LambdaChoice::Value(*l));
            }
            commands::eigen(Run { config, out_dir: &common.out_dir, seed: common.seed, threads: common.threads })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_variant_is_a_usage_error() {
        let r = Cli::try_parse_from(["logistic-steady", "solve", "--config", "x.json", "--variant", "nope"]);
        assert!(r.is_err());
    }
}
