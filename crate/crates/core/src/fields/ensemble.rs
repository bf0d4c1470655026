use alloc::vec::Vec;

use num_complex::Complex64;

use super::field::{gradient_energy, inner_product, neumann_energy};
use super::{Field, Grid, Mask};
use crate::{Error, Result};

/// Maximum deviation of the Gram matrix from the identity.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Relative residual norm below which Gram–Schmidt declares rank deficiency.
pub const RANK_TOL: f64 = 1e-8;

/// Weighted orthonormal family `(λ_n, u_n)`, the finite-rank operator
/// `γ = Σ λ_n |u_n⟩⟨u_n|` with `0 <= λ_n <= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    grid: Grid,
    weights: Vec<f64>,
    fields: Vec<Field>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        let e = Self::from_parts(weights, fields)?;
        e.verify_orthonormal()?;
        Ok(e)
    }

    /// All weights equal to one.
    pub fn projector(fields: Vec<Field>) -> Result<Self> {
        Self::new(alloc::vec![1.0; fields.len()], fields)
    }

    fn from_parts(weights: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        let first = fields.first().ok_or(Error::Empty)?;
        let grid = *first.grid();
        if weights.len() != fields.len() {
            return Err(Error::LengthMismatch { expected: fields.len(), found: weights.len() });
        }
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::WeightOutOfRange { index, weight: w });
            }
        }
        Ok(Ensemble { grid, weights, fields })
    }

    /// Checks `|⟨u_m, u_n⟩ − δ_mn| <= ORTHONORMALITY_TOL` for every pair.
    pub fn verify_orthonormal(&self) -> Result<()> {
        for m in 0..self.fields.len() {
            for n in m..self.fields.len() {
                let g = inner_product(&self.fields[m], &self.fields[n])?;
                let target = if m == n { 1.0 } else { 0.0 };
                let deviation = (g - Complex64::new(target, 0.0)).norm();
                if deviation > ORTHONORMALITY_TOL {
                    return Err(Error::NotOrthonormal { m, n, deviation });
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<Field>) {
        (self.weights, self.fields)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Applies [`Field::dilate`] to every member.
    pub fn dilate(&self, scale: f64) -> Ensemble {
        let fields: Vec<Field> = self.fields.iter().map(|f| f.dilate(scale)).collect();
        Ensemble { grid: *fields[0].grid(), weights: self.weights.clone(), fields }
    }
}

/// `1 + 2/d`.
pub fn lt_exponent(dim: usize) -> f64 {
    1.0 + 2.0 / dim as f64
}

/// `x^{1+2/d}` with exact products where the exponent is an integer.
pub fn lt_power(x: f64, dim: usize) -> f64 {
    match dim {
        1 => x * x * x,
        2 => x * x,
        _ => libm::pow(x, lt_exponent(dim)),
    }
}

pub(crate) fn density_values(weights: &[f64], fields: &[Field]) -> Vec<f64> {
    let cells = fields.first().map_or(0, |f| f.values().len());
    let mut rho = alloc::vec![0.0; cells];
    for (w, f) in weights.iter().zip(fields) {
        for (r, v) in rho.iter_mut().zip(f.values()) {
            *r += w * v.norm_sqr();
        }
    }
    rho
}

/// `ρ = Σ λ_n |u_n|²`, pointwise.
pub fn density(e: &Ensemble) -> Field {
    let rho = density_values(&e.weights, &e.fields);
    Field::from_parts_unchecked(e.grid, rho.into_iter().map(|r| Complex64::new(r, 0.0)).collect())
}

/// `∫ ρ^{1+2/d}` over `mask` (all cells when `None`).
pub(crate) fn lt_integral(rho: &[f64], grid: &Grid, mask: Option<&Mask>) -> f64 {
    let dim = grid.dim();
    let s: f64 = match mask {
        Some(m) => m.iter().map(|c| lt_power(rho[c], dim)).sum(),
        None => rho.iter().map(|&r| lt_power(r, dim)).sum(),
    };
    s * grid.cell_volume()
}

pub(crate) fn mass(rho: &[f64], grid: &Grid, mask: Option<&Mask>) -> f64 {
    let s: f64 = match mask {
        Some(m) => m.iter().map(|c| rho[c]).sum(),
        None => rho.iter().sum(),
    };
    s * grid.cell_volume()
}

pub(crate) fn weighted_energy(
    weights: &[f64],
    fields: &[Field],
    energy: impl Fn(&Field) -> f64,
) -> f64 {
    weights.iter().zip(fields).map(|(w, f)| w * energy(f)).sum()
}

/// `Tr(−Δγ) = Σ λ_n ∫|∇u_n|²`, forward differences with the base-cell rule
/// of [`gradient_energy`].
pub fn kinetic_energy(e: &Ensemble, mask: Option<&Mask>) -> f64 {
    weighted_energy(&e.weights, &e.fields, |f| gradient_energy(f, mask))
}

/// `Tr(−Δ_B γ)` measured with the Neumann form of the mask.
pub fn local_kinetic_energy(e: &Ensemble, mask: &Mask) -> f64 {
    weighted_energy(&e.weights, &e.fields, |f| neumann_energy(f, mask))
}

/// `Tr(−Δγ) / ∫ρ^{1+2/d}`.
pub fn lt_quotient(e: &Ensemble) -> Result<f64> {
    family_quotient(&e.weights, &e.fields)
}

/// The same quotient for an arbitrary weighted family, orthonormal or not.
pub(crate) fn family_quotient(weights: &[f64], fields: &[Field]) -> Result<f64> {
    let grid = *fields.first().ok_or(Error::Empty)?.grid();
    let rho = density_values(weights, fields);
    let denom = lt_integral(&rho, &grid, None);
    if denom <= 0.0 {
        return Err(Error::ZeroDensity);
    }
    Ok(weighted_energy(weights, fields, |f| gradient_energy(f, None)) / denom)
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
pub fn orthonormalize(fields: &[Field]) -> Result<Vec<Field>> {
    let Some(first) = fields.first() else {
        return Ok(Vec::new());
    };
    let vol = first.grid().cell_volume();
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(fields.len());
    for (index, f) in fields.iter().enumerate() {
        f.same_grid(first)?;
        let mut v = f.values().to_vec();
        let norm0 = sq_norm(&v, vol);
        if norm0 == 0.0 {
            return Err(Error::RankDeficient { index });
        }
        for _pass in 0..2 {
            for q in &out {
                let c: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>() * vol;
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
        }
        let norm = sq_norm(&v, vol);
        if libm::sqrt(norm / norm0) < RANK_TOL {
            return Err(Error::RankDeficient { index });
        }
        let inv = 1.0 / libm::sqrt(norm);
        v.iter_mut().for_each(|x| *x *= inv);
        out.push(v);
    }
    Ok(out.into_iter().map(|v| Field::from_parts_unchecked(*first.grid(), v)).collect())
}

fn sq_norm(v: &[Complex64], vol: f64) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>() * vol
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid1() -> Grid {
        Grid::new(1, &[(-10.0, 10.0)], &[2000]).unwrap()
    }

    fn gaussian(grid: Grid, c: f64) -> Field {
        Field::from_fn(grid, move |x| libm::pow(PI, -0.25) * libm::exp(-(x[0] - c) * (x[0] - c) / 2.0))
            .unwrap()
    }

    #[test]
    fn single_gaussian_quantities() {
        let e = Ensemble::projector(alloc::vec![gaussian(grid1(), 0.0)]).unwrap();
        let rho = density(&e);
        let mass: f64 = rho.re().iter().sum::<f64>() * e.grid().cell_volume();
        assert!((mass - 1.0).abs() < 1e-10);
        let center = e.grid().nearest_cell(&[0.0]).unwrap();
        // cell centers sit at ±h/2, so ρ there is π^{-1/2} e^{-h²/4}
        assert!((rho.values()[center].re - 1.0 / libm::sqrt(PI)).abs() < 1e-3);
        let t = kinetic_energy(&e, None);
        assert!((t - 0.5).abs() < 1e-3, "{t}");
        let q = lt_quotient(&e).unwrap();
        let exact = PI * libm::sqrt(3.0) / 2.0;
        assert!((q / exact - 1.0).abs() < 5e-3, "{q} vs {exact}");
    }

    #[test]
    fn empty_mask_and_zero_weights() {
        let e = Ensemble::new(alloc::vec![0.0], alloc::vec![gaussian(grid1(), 0.0)]).unwrap();
        assert_eq!(kinetic_energy(&e, None), 0.0);
        assert_eq!(lt_quotient(&e), Err(Error::ZeroDensity));
        let e = Ensemble::projector(alloc::vec![gaussian(grid1(), 0.0)]).unwrap();
        assert_eq!(kinetic_energy(&e, Some(&Mask::empty())), 0.0);
    }

    #[test]
    fn orthonormalize_distinct_gaussians() {
        let fs = orthonormalize(&[gaussian(grid1(), -1.0), gaussian(grid1(), 1.5)]).unwrap();
        for m in 0..2 {
            for n in 0..2 {
                let g = inner_product(&fs[m], &fs[n]).unwrap();
                let t = if m == n { 1.0 } else { 0.0 };
                assert!((g.re - t).abs() < 1e-13 && g.im.abs() < 1e-13);
            }
        }
        let e = Ensemble::projector(fs).unwrap();
        let rho = density(&e);
        assert!((rho.norm_sq() > 0.0) && (mass(&rho.re(), e.grid(), None) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn orthonormalize_fixed_point_and_rank() {
        let fs = orthonormalize(&[gaussian(grid1(), -1.0), gaussian(grid1(), 1.5)]).unwrap();
        let again = orthonormalize(&fs).unwrap();
        for (a, b) in fs.iter().zip(&again) {
            let d = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(d < 1e-12);
        }
        let g = gaussian(grid1(), 0.0);
        assert_eq!(orthonormalize(&[g.clone(), g]), Err(Error::RankDeficient { index: 1 }));
    }

    #[test]
    fn ensemble_validation() {
        let g = gaussian(grid1(), 0.0);
        assert!(matches!(
            Ensemble::new(alloc::vec![1.5], alloc::vec![g.clone()]),
            Err(Error::WeightOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            Ensemble::projector(alloc::vec![g.clone(), g.clone()]),
            Err(Error::NotOrthonormal { m: 0, n: 1, .. })
        ));
        assert!(matches!(
            Ensemble::projector(alloc::vec![g.scaled(Complex64::new(2.0, 0.0))]),
            Err(Error::NotOrthonormal { .. })
        ));
        assert_eq!(Ensemble::projector(Vec::new()), Err(Error::Empty));
    }

    #[test]
    fn masked_energies_partition_the_total() {
        let fs = orthonormalize(&[gaussian(grid1(), -1.0), gaussian(grid1(), 2.0)]).unwrap();
        let e = Ensemble::new(alloc::vec![0.7, 0.4], fs).unwrap();
        let g = *e.grid();
        let a = Mask::new(&g, (0..700).collect()).unwrap();
        let b = Mask::new(&g, (700..1234).collect()).unwrap();
        let c = Mask::new(&g, (1234..2000).collect()).unwrap();
        let parts = kinetic_energy(&e, Some(&a)) + kinetic_energy(&e, Some(&b)) + kinetic_energy(&e, Some(&c));
        let total = kinetic_energy(&e, None);
        assert!((parts - total).abs() <= 1e-12 * total);
    }
}
