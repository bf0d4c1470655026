use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ltlab::commands::{self, EXIT_INPUT};
use ltlab::{Overrides, RunConfig};

/// Numerical checks of the kinetic energy inequality for orthonormal
/// families on a grid.
#[derive(Parser)]
#[command(name = "ltlab", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Ball mass target, also the small-mass threshold.
    #[arg(long, global = true)]
    target_mass: Option<f64>,
    /// Dimension of the generated grid.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Ensemble JSON file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay the covering proof and write a certificate.
    Verify,
    /// Build the mass-target ball covering of the density.
    Cover(CoverArgs),
    /// Neumann spectral gaps of balls.
    Gap(GapArgs),
    /// Minimize the kinetic energy quotient over orthonormal frames.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct CoverArgs {
    /// Number of 2x refinement levels to sweep.
    #[arg(long)]
    refine: Option<usize>,
    /// Multiplicity ceiling for the sweep.
    #[arg(long)]
    ceiling: Option<usize>,
}

#[derive(Args)]
struct GapArgs {
    /// Ball center, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    center: Option<Vec<f64>>,
    /// Ball radius; repeat or comma-separate for a sweep.
    #[arg(long, value_delimiter = ',')]
    radius: Vec<f64>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    step_size: Option<f64>,
    #[arg(long)]
    family_size: Option<usize>,
}

fn run(cli: Cli) -> ltlab::Result<commands::Outcome> {
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
        target_mass: cli.target_mass,
        dim: cli.dim,
        input: cli.input,
    };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Verify => commands::verify(&cfg),
        Command::Cover(a) => {
            if let Some(r) = a.refine {
                cfg.cover.refine_levels = r;
            }
            if a.ceiling.is_some() {
                cfg.cover.ceiling = a.ceiling;
            }
            commands::cover(&cfg)
        }
        Command::Gap(a) => {
            if !a.radius.is_empty() {
                let center = match a.center {
                    Some(c) => c,
                    None => {
                        let g = cfg.grid()?;
                        (0..g.dim()).map(|ax| g.extent(ax)).map(|(lo, hi)| 0.5 * (lo + hi)).collect()
                    }
                };
                cfg.gap.sweep = Some(ltlab::config::SweepSpec { center, radii: a.radius });
            }
            commands::gap(&cfg)
        }
        Command::Optimize(a) => {
            if let Some(s) = a.steps {
                cfg.optimize.steps = s;
            }
            if let Some(s) = a.step_size {
                cfg.optimize.step_size = s;
            }
            if let Some(n) = a.family_size {
                cfg.optimize.family_size = n;
            }
            commands::optimize(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
