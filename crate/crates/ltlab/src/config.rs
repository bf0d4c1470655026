//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use ltlab_core::certificate::CertificateConfig;
use ltlab_core::fields::{Ball, Ensemble, Grid};
use ltlab_core::generate;
use ltlab_core::optimize::OptimizerConfig;
use ltlab_core::spectral::EigenConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::format::{read_ensemble, read_json, GridSpec};

/// Analytic or seeded ensembles built on the configured grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// One normalized Gaussian.
    Gaussian {
        #[serde(default)]
        center: Vec<f64>,
        width: f64,
    },
    /// One normalized `sech`.
    Sech {
        #[serde(default)]
        center: Vec<f64>,
        width: f64,
    },
    /// Projector onto the first `count` Hermite functions.
    Hermite {
        #[serde(default)]
        center: Vec<f64>,
        width: f64,
        count: usize,
    },
    /// Seeded random family (uses the run seed).
    Random {
        members: usize,
        #[serde(default)]
        complex: bool,
    },
    /// Projector onto the lowest Neumann modes of a ball.
    NeumannModes { center: Vec<f64>, radius: f64, count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapOptions {
    pub balls: Vec<BallSpec>,
    pub sweep: Option<SweepSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverOptions {
    /// Number of 2× refinements of the density to sweep (0 disables).
    pub refine_levels: usize,
    /// Multiplicity ceiling checked by the sweep; defaults to 2 in 1D and
    /// 19 in 2D, none in 3D.
    pub ceiling: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeOptions {
    pub steps: usize,
    pub step_size: f64,
    pub family_size: usize,
    pub grad_tol: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        OptimizeOptions {
            steps: d.steps,
            step_size: d.step_size,
            family_size: d.family_size,
            grad_tol: d.grad_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Ensemble JSON file; takes precedence over `generator`.
    pub input: Option<PathBuf>,
    pub generator: Option<GeneratorSpec>,
    pub grid: Option<GridSpec>,
    /// Dimension of the default grid, or override of `grid.dim`.
    pub dim: Option<usize>,
    pub out: PathBuf,
    pub seed: u64,
    pub target_mass: f64,
    pub slack: f64,
    pub eigen: EigenConfig,
    pub cover: CoverOptions,
    pub gap: GapOptions,
    pub optimize: OptimizeOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cert = CertificateConfig::default();
        RunConfig {
            input: None,
            generator: None,
            grid: None,
            dim: None,
            out: PathBuf::from("out"),
            seed: 1,
            target_mass: cert.target_mass,
            slack: cert.slack,
            eigen: cert.eigen,
            cover: CoverOptions::default(),
            gap: GapOptions::default(),
            optimize: OptimizeOptions::default(),
        }
    }
}

/// Flags shared by every subcommand. `None` leaves the config value alone.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub target_mass: Option<f64>,
    pub dim: Option<usize>,
    pub input: Option<PathBuf>,
}

fn default_points(dim: usize) -> usize {
    match dim {
        1 => 2048,
        2 => 128,
        _ => 32,
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg: RunConfig = match path {
            Some(p) => read_json(p)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &overrides.out {
            cfg.out = out.clone();
        }
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(m) = overrides.target_mass {
            cfg.target_mass = m;
        }
        if let Some(d) = overrides.dim {
            cfg.dim = Some(d);
        }
        if let Some(input) = &overrides.input {
            cfg.input = Some(input.clone());
        }
        Ok(cfg)
    }

    /// Checks paths and creates the output directory.
    pub fn prepare(&self) -> Result<()> {
        if let Some(input) = &self.input {
            let meta = std::fs::metadata(input).map_err(CliError::io(input))?;
            if !meta.is_file() {
                return Err(CliError::Config(format!("{} is not a file", input.display())));
            }
        }
        std::fs::create_dir_all(&self.out).map_err(CliError::io(&self.out))
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        let spec = match (&self.grid, self.dim) {
            (Some(g), None) => g.clone(),
            (Some(g), Some(d)) if g.dim == d => g.clone(),
            (Some(g), Some(d)) => {
                if g.extent.len() > 1 || g.points.len() > 1 {
                    return Err(CliError::Config(format!(
                        "--dim {d} conflicts with a {}-axis grid; give one extent and one point count",
                        g.dim
                    )));
                }
                GridSpec { dim: d, ..g.clone() }
            }
            (None, d) => {
                let d = d.unwrap_or(1);
                GridSpec { dim: d, extent: vec![[-8.0, 8.0]], points: vec![default_points(d)] }
            }
        };
        spec.build()
    }

    pub fn certificate(&self) -> CertificateConfig {
        CertificateConfig {
            target_mass: self.target_mass,
            window: None,
            eigen: self.eigen,
            slack: self.slack,
        }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        let o = &self.optimize;
        OptimizerConfig {
            steps: o.steps,
            step_size: o.step_size,
            seed: self.seed,
            family_size: o.family_size,
            grad_tol: o.grad_tol,
        }
    }

    pub fn has_ensemble(&self) -> bool {
        self.input.is_some() || self.generator.is_some()
    }

    /// The input file if given, otherwise the generator on [`RunConfig::grid`].
    pub fn ensemble(&self) -> Result<Ensemble> {
        if let Some(path) = &self.input {
            return read_ensemble(path);
        }
        let spec = self
            .generator
            .as_ref()
            .ok_or_else(|| CliError::Config("no input file or generator given".into()))?;
        let grid = self.grid()?;
        let center = |c: &Vec<f64>| -> Result<Vec<f64>> {
            if c.is_empty() {
                Ok((0..grid.dim()).map(|a| grid.extent(a)).map(|(lo, hi)| 0.5 * (lo + hi)).collect())
            } else if c.len() == grid.dim() {
                Ok(c.clone())
            } else {
                Err(CliError::Config(format!("center has {} coordinates, grid has {}", c.len(), grid.dim())))
            }
        };
        let e = match spec {
            GeneratorSpec::Gaussian { center: c, width } => {
                Ensemble::projector(vec![generate::gaussian(&grid, &center(c)?, *width)?])?
            }
            GeneratorSpec::Sech { center: c, width } => {
                Ensemble::projector(vec![generate::sech(&grid, &center(c)?, *width)?])?
            }
            GeneratorSpec::Hermite { center: c, width, count } => {
                Ensemble::projector(generate::hermite_family(&grid, &center(c)?, *width, *count)?)?
            }
            GeneratorSpec::Random { members, complex } => {
                let spec = generate::RandomSpec {
                    members: *members,
                    complex: *complex,
                    ..generate::RandomSpec::default()
                };
                generate::random_ensemble(&grid, &spec, self.seed)?
            }
            GeneratorSpec::NeumannModes { center: c, radius, count } => {
                let ball = Ball::around(&grid, &center(c)?, *radius)?;
                generate::neumann_mode_ensemble(&ball, &grid, *count)?
            }
        };
        Ok(e)
    }
}
