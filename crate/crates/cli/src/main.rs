// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod verify;

use config::RunConfig;
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "emden-lab", version, about = "Groundstates of -Δu = V(|x|)|u|^{p-1}u on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; without it the main table goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Seed for the random starts (overrides the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true)]
    dim: Option<usize>,

    #[arg(long, global = true)]
    p: Option<f64>,

    /// Shell radius R.
    #[arg(long, global = true)]
    radius: Option<f64>,

    #[arg(long, global = true)]
    alpha: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Dimensional constants for (N, p).
    Constants,
    /// Radial groundstate on a graded grid.
    SolveRadial,
    /// Radial and unrestricted groundstates, with the symmetry gap.
    SolveBall,
    /// Paired solves over the configured α values.
    Sweep,
    /// Best Sobolev constants for the configured exponents.
    Sobolev,
    /// Sweep with shell radius α^{-δ}.
    MovingShell,
    /// S_α as R approaches 0 or 1.
    Continuity,
    /// Identity and invariant checks.
    Verify,
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.solver.seed = seed;
        }
        if let Some(dim) = self.dim {
            cfg.problem.dim = dim;
        }
        if let Some(p) = self.p {
            cfg.problem.p = Some(p);
        }
        if let Some(r) = self.radius {
            cfg.problem.radius = r;
        }
        if let Some(a) = self.alpha {
            cfg.problem.alpha = a;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = cli.run_config()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let outcome = match cli.command {
        Command::Constants => commands::constants(&cfg, cli.format)?,
        Command::SolveRadial => commands::solve_radial_cmd(&cfg, cli.format)?,
        Command::SolveBall => commands::solve_ball_cmd(&cfg, cli.format)?,
        Command::Sweep => commands::sweep(&cfg, cli.format)?,
        Command::Sobolev => commands::sobolev_cmd(&cfg, cli.format)?,
        Command::MovingShell => commands::moving_shell_cmd(&cfg, cli.format)?,
        Command::Continuity => commands::continuity_cmd(&cfg, cli.format)?,
        Command::Verify => verify::verify(&cfg, cli.format)?,
    };
    match &cli.out {
        Some(dir) => {
            let mut all = vec![outcome.main];
            all.extend(outcome.extra);
            for path in output::write_all(dir, &all)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => std::io::stdout().write_all(&outcome.main.bytes)?,
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some rows did not complete; see the status column");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
