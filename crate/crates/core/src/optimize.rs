//! Projected gradient descent of `Tr(−Δγ)/∫ρ^{1+2/d}` over orthonormal
//! frames, with re-orthonormalization as the retraction.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fields::{
    density_values, for_each_forward_pair, lt_exponent, orthonormalize, weighted_energy, Ensemble,
    Field, Grid,
};
use crate::fields::{gradient_energy, lt_integral};
use crate::generate::{random_ensemble, RandomSpec};
use crate::{Complex64, Error, Result};

/// Halvings tried before a step is declared stalled.
pub const MAX_HALVINGS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub steps: usize,
    /// Initial and maximal step length.
    pub step_size: f64,
    /// Seed of the random starting frame built by [`initial_ensemble`].
    pub seed: u64,
    /// Frame size `N`.
    pub family_size: usize,
    /// Stop once the projected gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { steps: 200, step_size: 1e-2, seed: 1, family_size: 1, grad_tol: 1e-6 }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::BadConfig("step_size must be positive"));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::BadConfig("grad_tol must be nonnegative"));
        }
        Ok(())
    }
}

/// Seeded random orthonormal frame of `cfg.family_size` members, all weights 1.
pub fn initial_ensemble(grid: &Grid, cfg: &OptimizerConfig) -> Result<Ensemble> {
    let spec = RandomSpec { members: cfg.family_size, ..RandomSpec::default() };
    let (_, fields) = random_ensemble(grid, &spec, cfg.seed)?.into_parts();
    Ensemble::projector(fields)
}

/// `y = L x` for the full-grid forward-difference form, `⟨x, Lx⟩·vol = ∫|∇x|²`.
fn apply_laplacian(grid: &Grid, x: &[Complex64], y: &mut [Complex64]) {
    y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for_each_forward_pair(grid, 0..grid.cell_count(), |i, j, inv_h2| {
        let d = (x[j] - x[i]) * inv_h2;
        y[i] -= d;
        y[j] += d;
    });
}

struct Evaluation {
    quotient: f64,
    gradient: Vec<Vec<Complex64>>,
}

fn evaluate(grid: &Grid, weights: &[f64], fields: &[Field]) -> Result<Evaluation> {
    let dim = grid.dim();
    let p = lt_exponent(dim);
    let rho = density_values(weights, fields);
    let r = lt_integral(&rho, grid, None);
    if !(r > 0.0) {
        return Err(Error::ZeroDensity);
    }
    let t = weighted_energy(weights, fields, |f| gradient_energy(f, None));
    let q = t / r;
    let rho_pow: Vec<f64> = rho.iter().map(|&x| p * libm::pow(x, p - 1.0)).collect();
    let mut lu = alloc::vec![Complex64::new(0.0, 0.0); grid.cell_count()];
    let gradient = weights
        .iter()
        .zip(fields)
        .map(|(&w, f)| {
            apply_laplacian(grid, f.values(), &mut lu);
            f.values()
                .iter()
                .zip(&lu)
                .zip(&rho_pow)
                .map(|((&u, &l), &rp)| (l - u * (q * rp)) * (2.0 * w / r))
                .collect()
        })
        .collect();
    Ok(Evaluation { quotient: q, gradient })
}

/// Gradient of the quotient in the discrete `L²` pairing: the directional
/// derivative along `δ` is `Σ_n Re⟨G_n, δ_n⟩`. Orthonormality is not used.
pub fn quotient_gradient(e: &Ensemble) -> Result<Vec<Field>> {
    let grid = *e.grid();
    let ev = evaluate(&grid, e.weights(), e.fields())?;
    Ok(ev.gradient.into_iter().map(|g| Field::from_parts_unchecked(grid, g)).collect())
}

/// `G − U·Herm(Uᴴ G)`: the component tangent to the orthonormal frames.
fn project_tangent(vol: f64, frame: &[Field], grad: &mut [Vec<Complex64>]) {
    let n = frame.len();
    let mut a = alloc::vec![Complex64::new(0.0, 0.0); n * n];
    for (m, u) in frame.iter().enumerate() {
        for (k, g) in grad.iter().enumerate() {
            a[m * n + k] = u.values().iter().zip(g).map(|(x, y)| x.conj() * y).sum::<Complex64>() * vol;
        }
    }
    let herm: Vec<Complex64> = (0..n * n)
        .map(|idx| {
            let (m, k) = (idx / n, idx % n);
            (a[m * n + k] + a[k * n + m].conj()) * 0.5
        })
        .collect();
    for (k, g) in grad.iter_mut().enumerate() {
        for (m, u) in frame.iter().enumerate() {
            let c = herm[m * n + k];
            for (gv, uv) in g.iter_mut().zip(u.values()) {
                *gv -= uv * c;
            }
        }
    }
}

fn norm(vol: f64, grad: &[Vec<Complex64>]) -> f64 {
    libm::sqrt(grad.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() * vol)
}

/// Projected gradient of the quotient at a projector frame.
pub fn projected_gradient_norm(e: &Ensemble) -> Result<f64> {
    let grid = *e.grid();
    let mut ev = evaluate(&grid, e.weights(), e.fields())?;
    project_tangent(grid.cell_volume(), e.fields(), &mut ev.gradient);
    Ok(norm(grid.cell_volume(), &ev.gradient))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub quotient: f64,
    /// Step length accepted for this row (the configured length for row 0).
    pub step_size: f64,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimized {
    pub ensemble: Ensemble,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

/// Descends from `init`, a projector (all weights 1).
///
/// Each step moves along the projected gradient, re-orthonormalizes, and
/// halves the step until the quotient does not increase. After an accepted
/// step the next trial length doubles, capped at `cfg.step_size`.
pub fn minimize_quotient(init: &Ensemble, cfg: &OptimizerConfig) -> Result<Optimized> {
    cfg.validate()?;
    if init.weights().iter().any(|&w| w != 1.0) {
        return Err(Error::BadConfig("the optimizer needs a projector (all weights 1)"));
    }
    init.verify_orthonormal()?;
    let grid = *init.grid();
    let vol = grid.cell_volume();
    let weights = init.weights().to_vec();
    let mut frame = init.fields().to_vec();

    let mut ev = evaluate(&grid, &weights, &frame)?;
    project_tangent(vol, &frame, &mut ev.gradient);
    let mut gnorm = norm(vol, &ev.gradient);
    let mut trace = alloc::vec![TraceRow {
        step: 0,
        quotient: ev.quotient,
        step_size: cfg.step_size,
        gradient_norm: gnorm,
    }];
    let mut alpha = cfg.step_size;
    let mut converged = gnorm <= cfg.grad_tol;

    for step in 1..=cfg.steps {
        if converged {
            break;
        }
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<Field> = frame
                .iter()
                .zip(&ev.gradient)
                .map(|(u, g)| {
                    let values = u.values().iter().zip(g).map(|(&x, &d)| x - d * alpha).collect();
                    Field::from_parts_unchecked(grid, values)
                })
                .collect();
            let trial = match orthonormalize(&trial) {
                Ok(t) => t,
                Err(Error::RankDeficient { .. }) => {
                    alpha *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let next = evaluate(&grid, &weights, &trial)?;
            if next.quotient <= ev.quotient {
                accepted = Some((trial, next));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, next)) = accepted else {
            // a stalled line search at a numerically flat point is convergence
            if gnorm <= 1e-4 {
                converged = true;
                break;
            }
            return Err(Error::LineSearchStalled { step });
        };
        frame = trial;
        ev = next;
        project_tangent(vol, &frame, &mut ev.gradient);
        gnorm = norm(vol, &ev.gradient);
        trace.push(TraceRow { step, quotient: ev.quotient, step_size: alpha, gradient_norm: gnorm });
        converged = gnorm <= cfg.grad_tol;
        alpha = (2.0 * alpha).min(cfg.step_size);
    }

    Ok(Optimized { ensemble: Ensemble::new(weights, frame)?, trace, converged })
}
