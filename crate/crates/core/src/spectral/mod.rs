//! Neumann spectra of ball masks, the Hoffmann-Ostenhof check, local
//! uncertainty measurements and Sobolev quotients.

mod banded;
mod lanczos;
mod laplacian;

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fields::{
    density_values, gradient_energy, gradient_energy_real, kinetic_energy, local_kinetic_energy,
    lt_power, neumann_energy, neumann_energy_real, Ball, Ensemble, Field, Grid, Mask,
};
use crate::{Error, Result};

use banded::BandedCholesky;
pub use laplacian::NeumannOperator;

/// Slack used by the exact discrete inequality checks, scaled by
/// `max(1, |rhs|)`.
pub const EXACT_SLACK: f64 = 1e-9;

/// Bound on `‖L·1‖∞ / max diag(L)` accepted as a zero eigenvalue.
pub const KERNEL_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenConfig {
    /// Masks with at most this many cells use a dense eigensolve.
    pub dense_limit: usize,
    /// Relative Ritz residual at which Lanczos stops.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { dense_limit: 400, tol: 1e-9, max_iter: 500, seed: 0x5eed_1a2c }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    Lanczos,
}

/// Second-smallest Neumann eigenvalue of a mask and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskSpectrum {
    pub gap: f64,
    pub method: EigenMethod,
    pub iterations: usize,
    pub kernel_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub ball: Ball,
    pub center: Vec<f64>,
    pub radius: f64,
    pub cells: usize,
    pub volume: f64,
    /// Second-smallest eigenvalue of the Neumann Laplacian on the mask.
    pub gap: f64,
    /// `gap · |B|^{2/d}`, dimensionless.
    pub gap_times_volume_pow: f64,
    pub method: EigenMethod,
    pub iterations: usize,
    pub kernel_residual: f64,
}

/// Neumann Laplacian of the ball's mask.
pub fn neumann_laplacian(ball: &Ball, grid: &Grid) -> Result<NeumannOperator> {
    NeumannOperator::new(grid, ball.mask(grid))
}

/// `x^{2/d}`.
pub(crate) fn pow_two_over_d(x: f64, dim: usize) -> f64 {
    match dim {
        1 => x * x,
        2 => x,
        _ => libm::pow(x, 2.0 / dim as f64),
    }
}

fn bounding_diameter(grid: &Grid, mask: &Mask) -> f64 {
    let dim = grid.dim();
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for cell in mask.iter() {
        let c = grid.coords_of(cell);
        for axis in 0..dim {
            lo[axis] = lo[axis].min(c[axis]);
            hi[axis] = hi[axis].max(c[axis]);
        }
    }
    let s: f64 = (0..dim)
        .map(|a| {
            let len = (hi[a] - lo[a] + 1) as f64 * grid.spacing()[a];
            len * len
        })
        .sum();
    libm::sqrt(s)
}

/// Spectral gap of an assembled operator.
///
/// Small masks use a dense symmetric eigensolve. Larger ones run Lanczos on
/// `(L + σI)^{-1}` restricted to the complement of the constant vector, with
/// `σ = (π/D)²` for the mask diameter `D`, and a banded Cholesky solve.
pub fn operator_gap(grid: &Grid, op: &NeumannOperator, cfg: &EigenConfig) -> Result<MaskSpectrum> {
    let n = op.dim();
    if n < 2 {
        return Err(Error::GapUndefined);
    }
    let kernel_residual = op.kernel_residual();
    if kernel_residual > KERNEL_RESIDUAL_TOL {
        return Err(Error::SolverNoConvergence { iterations: 0 });
    }
    if n <= cfg.dense_limit {
        let values = dense_eigenvalues(op);
        return Ok(MaskSpectrum { gap: values[1], method: EigenMethod::Dense, iterations: n, kernel_residual });
    }
    let shift = {
        let d = bounding_diameter(grid, op.mask());
        let k = core::f64::consts::PI / d;
        k * k
    };
    let chol = BandedCholesky::factor(op, shift)?;
    let deflate = alloc::vec![1.0 / libm::sqrt(n as f64); n];
    let pair = lanczos::largest_eigenpair(
        n,
        |x, y| {
            y.copy_from_slice(x);
            chol.solve_in_place(y);
        },
        &deflate,
        cfg.seed,
        cfg.tol,
        cfg.max_iter,
    )?;
    Ok(MaskSpectrum {
        gap: 1.0 / pair.value - shift,
        method: EigenMethod::Lanczos,
        iterations: pair.iterations,
        kernel_residual,
    })
}

fn dense_eigenvalues(op: &NeumannOperator) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(op.to_dense());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Spectral gap of an arbitrary connected mask.
pub fn mask_gap(grid: &Grid, mask: &Mask, cfg: &EigenConfig) -> Result<MaskSpectrum> {
    if mask.len() == 1 {
        return Err(Error::GapUndefined);
    }
    operator_gap(grid, &NeumannOperator::new(grid, mask.clone())?, cfg)
}

pub fn neumann_gap(ball: &Ball, grid: &Grid, cfg: &EigenConfig) -> Result<GapReport> {
    let mask = ball.mask(grid);
    let spectrum = mask_gap(grid, &mask, cfg)?;
    let volume = mask.volume(grid);
    Ok(GapReport {
        ball: ball.clone(),
        center: ball.center_point(grid),
        radius: ball.radius(),
        cells: mask.len(),
        volume,
        gap: spectrum.gap,
        gap_times_volume_pow: spectrum.gap * pow_two_over_d(volume, grid.dim()),
        method: spectrum.method,
        iterations: spectrum.iterations,
        kernel_residual: spectrum.kernel_residual,
    })
}

/// The `k` lowest Neumann eigenpairs of a ball, as fields normalized in the
/// discrete `L²` norm and extended by zero outside the mask.
///
/// Always uses a dense eigensolve, so keep masks small.
pub fn neumann_modes(ball: &Ball, grid: &Grid, k: usize) -> Result<Vec<(f64, Field)>> {
    let op = neumann_laplacian(ball, grid)?;
    let n = op.dim();
    if k > n {
        return Err(Error::BadConfig("more modes requested than mask cells"));
    }
    let eig = nalgebra::SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = 1.0 / libm::sqrt(grid.cell_volume());
    let mut out = Vec::with_capacity(k);
    for &col in order.iter().take(k) {
        let v = eig.eigenvectors.column(col);
        let sign = v.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
        let mut values = alloc::vec![Complex64::new(0.0, 0.0); grid.cell_count()];
        for (p, cell) in op.mask().iter().enumerate() {
            values[cell] = Complex64::new(sign * scale * v[p], 0.0);
        }
        out.push((eig.eigenvalues[col], Field::new(*grid, values)?));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoCheck {
    /// `∫|∇√ρ|²`.
    pub lhs: f64,
    /// `Tr(−Δγ)`.
    pub rhs: f64,
    pub holds: bool,
}

fn ho_check(lhs: f64, rhs: f64) -> HoCheck {
    HoCheck { lhs, rhs, holds: lhs <= rhs + EXACT_SLACK * rhs.abs().max(1.0) }
}

pub(crate) fn sqrt_density(rho: &[f64]) -> Vec<f64> {
    rho.iter().map(|&r| libm::sqrt(r)).collect()
}

/// `∫|∇√ρ|² <= Tr(−Δγ)` with forward differences (base-cell mask rule).
///
/// Exact on the grid: per difference, `|√Σ|b_k|² − √Σ|a_k|²| <= √Σ|b_k − a_k|²`.
pub fn hoffmann_ostenhof_check(e: &Ensemble, mask: Option<&Mask>) -> HoCheck {
    let rho = density_values(e.weights(), e.fields());
    let lhs = gradient_energy_real(&sqrt_density(&rho), e.grid(), mask);
    ho_check(lhs, kinetic_energy(e, mask))
}

/// The same inequality for the Neumann form of a mask.
pub fn hoffmann_ostenhof_local(e: &Ensemble, mask: &Mask) -> HoCheck {
    let rho = density_values(e.weights(), e.fields());
    let lhs = neumann_energy_real(&sqrt_density(&rho), e.grid(), mask);
    ho_check(lhs, local_kinetic_energy(e, mask))
}

/// Local uncertainty functionals of a field on a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub ball: Ball,
    pub cells: usize,
    pub volume: f64,
    /// `∫_B |∇g|²` (Neumann form of the mask).
    pub kinetic: f64,
    /// `∫_B |g|^{2(1+2/d)} / (∫_B |g|²)^{2/d}`.
    pub interaction: f64,
    /// `|B|^{−2/d} ∫_B |g|²`.
    pub volume_term: f64,
    /// Smallest `C >= 1` with `kinetic >= interaction / C − C · volume_term`.
    pub fitted_constant: f64,
}

/// Smallest `C >= 1` with `k >= i/C − C v`: the positive root of
/// `v C² + k C − i = 0`, written without cancellation.
pub(crate) fn fit_uncertainty_constant(kinetic: f64, interaction: f64, volume_term: f64) -> f64 {
    let disc = libm::sqrt(kinetic * kinetic + 4.0 * volume_term * interaction);
    let denom = kinetic + disc;
    let root = if denom > 0.0 { 2.0 * interaction / denom } else { 0.0 };
    root.max(1.0)
}

/// Uncertainty report from `|g|²` samples and a precomputed kinetic term.
pub(crate) fn uncertainty_from_modulus_sq(
    ball: &Ball,
    grid: &Grid,
    mask: &Mask,
    modulus_sq: &[f64],
    kinetic: f64,
) -> Result<UncertaintyReport> {
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let l2: f64 = mask.iter().map(|c| modulus_sq[c]).sum::<f64>() * vol;
    if l2 <= 0.0 {
        return Err(Error::ZeroOnBall);
    }
    let lp: f64 = mask.iter().map(|c| lt_power(modulus_sq[c], dim)).sum::<f64>() * vol;
    let volume = mask.volume(grid);
    let interaction = lp / pow_two_over_d(l2, dim);
    let volume_term = l2 / pow_two_over_d(volume, dim);
    Ok(UncertaintyReport {
        ball: ball.clone(),
        cells: mask.len(),
        volume,
        kinetic,
        interaction,
        volume_term,
        fitted_constant: fit_uncertainty_constant(kinetic, interaction, volume_term),
    })
}

pub fn local_uncertainty_measure(g: &Field, ball: &Ball) -> Result<UncertaintyReport> {
    let grid = g.grid();
    let mask = ball.mask(grid);
    let modulus_sq: Vec<f64> = g.values().iter().map(|v| v.norm_sqr()).collect();
    uncertainty_from_modulus_sq(ball, grid, &mask, &modulus_sq, neumann_energy(g, &mask))
}

/// `∫|∇g|² (∫|g|²)^{2/d} / ∫|g|^{2(1+2/d)}` over the whole grid.
pub fn sobolev_quotient(g: &Field) -> Result<f64> {
    let grid = g.grid();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let l2: f64 = g.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * vol;
    if l2 <= 0.0 {
        return Err(Error::ZeroField);
    }
    let lp: f64 = g.values().iter().map(|v| lt_power(v.norm_sqr(), dim)).sum::<f64>() * vol;
    Ok(gradient_energy(g, None) * pow_two_over_d(l2, dim) / lp)
}

/// [`sobolev_quotient`] of real samples.
pub(crate) fn sobolev_quotient_real(values: &[f64], grid: &Grid) -> Result<f64> {
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let l2: f64 = values.iter().map(|v| v * v).sum::<f64>() * vol;
    if l2 <= 0.0 {
        return Err(Error::ZeroField);
    }
    let lp: f64 = values.iter().map(|v| lt_power(v * v, dim)).sum::<f64>() * vol;
    Ok(gradient_energy_real(values, grid, None) * pow_two_over_d(l2, dim) / lp)
}

#[cfg(test)]
mod tests;
