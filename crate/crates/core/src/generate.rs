//! Deterministic test ensembles: Gaussians, Hermite functions, `sech`,
//! Neumann modes of a ball, and seeded random families.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::{orthonormalize, Ball, Ensemble, Field, Grid};
use crate::spectral::neumann_modes;
use crate::{Complex64, Error, Result};

fn normalized(f: Field) -> Result<Field> {
    let n = f.norm_sq();
    if n <= 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(f.scaled(Complex64::new(1.0 / libm::sqrt(n), 0.0)))
}

fn dist_sq(x: &[f64], center: &[f64]) -> f64 {
    x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(−|x − c|²/(2w²))`, normalized in the discrete `L²` norm.
pub fn gaussian(grid: &Grid, center: &[f64], width: f64) -> Result<Field> {
    let s = 1.0 / (2.0 * width * width);
    normalized(Field::from_fn(*grid, |x| libm::exp(-dist_sq(x, center) * s))?)
}

/// `sech(|x − c|/w)`, normalized in the discrete `L²` norm.
pub fn sech(grid: &Grid, center: &[f64], width: f64) -> Result<Field> {
    normalized(Field::from_fn(*grid, |x| 1.0 / libm::cosh(libm::sqrt(dist_sq(x, center)) / width))?)
}

/// Hermite function `h_k(t)` via the stable three-term recurrence.
fn hermite_function(k: usize, t: f64) -> f64 {
    let g = libm::exp(-0.5 * t * t);
    let mut prev = 0.0;
    let mut cur = g;
    for n in 0..k {
        let next = libm::sqrt(2.0 / (n + 1) as f64) * t * cur - libm::sqrt(n as f64 / (n + 1) as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Advances `idx` lexicographically with entries in `0..=max`.
fn advance(idx: &mut [usize], max: usize) -> bool {
    for a in (0..idx.len()).rev() {
        if idx[a] < max {
            idx[a] += 1;
            return true;
        }
        idx[a] = 0;
    }
    false
}

/// Multi-indices of `dim` axes in order of total degree, then lexicographic.
fn multi_indices(dim: usize, count: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(count);
    let mut degree = 0;
    while out.len() < count {
        let mut idx = [0usize; 3];
        loop {
            if idx[..dim].iter().sum::<usize>() == degree && out.len() < count {
                out.push(idx);
            }
            if !advance(&mut idx[..dim], degree) {
                break;
            }
        }
        degree += 1;
    }
    out
}

/// The first `count` tensor Hermite functions with length scale `width`,
/// centered at `center` and orthonormalized on the grid.
pub fn hermite_family(grid: &Grid, center: &[f64], width: f64, count: usize) -> Result<Vec<Field>> {
    let dim = grid.dim();
    let fields = multi_indices(dim, count)
        .into_iter()
        .map(|idx| {
            Field::from_fn(*grid, |x| {
                (0..dim).map(|a| hermite_function(idx[a], (x[a] - center[a]) / width)).product()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    orthonormalize(&fields)
}

/// Projector onto the `k` lowest Neumann modes of a ball.
pub fn neumann_mode_ensemble(ball: &Ball, grid: &Grid, k: usize) -> Result<Ensemble> {
    let fields = neumann_modes(ball, grid, k)?.into_iter().map(|(_, f)| f).collect();
    Ensemble::projector(fields)
}

/// Shape of a seeded random ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub members: usize,
    /// Gaussian bumps superposed per member before orthonormalization.
    pub bumps: usize,
    pub complex: bool,
    /// Bump centers are drawn from the middle `spread` fraction of each axis.
    pub spread: f64,
    /// Bump widths are drawn from this range, as fractions of the box length.
    pub width: (f64, f64),
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { members: 3, bumps: 3, complex: false, spread: 0.5, width: (0.03, 0.12) }
    }
}

/// Random smooth orthonormal family with weights drawn from `(0, 1]`.
pub fn random_ensemble(grid: &Grid, spec: &RandomSpec, seed: u64) -> Result<Ensemble> {
    if spec.members == 0 || spec.bumps == 0 {
        return Err(Error::BadConfig("random ensemble needs members and bumps"));
    }
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(spec.members);
    for _ in 0..spec.members {
        let mut bumps = Vec::with_capacity(spec.bumps);
        for _ in 0..spec.bumps {
            let mut center = [0.0; 3];
            let mut width = [0.0; 3];
            for a in 0..dim {
                let (lo, hi) = grid.extent(a);
                let len = hi - lo;
                let mid = 0.5 * (lo + hi);
                center[a] = mid + spec.spread * len * (rng.random::<f64>() - 0.5);
                width[a] = len * rng.random_range(spec.width.0..=spec.width.1);
            }
            let amp = Complex64::new(rng.random::<f64>() * 2.0 - 1.0, 0.0);
            let amp = if spec.complex {
                amp + Complex64::new(0.0, rng.random::<f64>() * 2.0 - 1.0)
            } else {
                amp
            };
            let wave = if spec.complex { rng.random::<f64>() * 4.0 - 2.0 } else { 0.0 };
            bumps.push((center, width, amp, wave));
        }
        let values = (0..grid.cell_count())
            .map(|cell| {
                let x = grid.cell_center(cell);
                bumps.iter().fold(Complex64::new(0.0, 0.0), |acc, (c, w, amp, wave)| {
                    let mut e = 0.0;
                    let mut phase = 0.0;
                    for a in 0..dim {
                        let t = (x[a] - c[a]) / w[a];
                        e += 0.5 * t * t;
                        phase += wave * t;
                    }
                    acc + amp * Complex64::from_polar(libm::exp(-e), phase)
                })
            })
            .collect();
        raw.push(Field::new(*grid, values)?);
    }
    let fields = orthonormalize(&raw)?;
    let weights = (0..spec.members).map(|_| 1.0 - rng.random::<f64>()).collect();
    Ensemble::new(weights, fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::inner_product;

    #[test]
    fn hermite_family_is_orthonormal() {
        let g = Grid::new(2, &[(-8.0, 8.0)], &[64]).unwrap();
        let fam = hermite_family(&g, &[0.0, 0.0], 1.0, 6).unwrap();
        for (i, f) in fam.iter().enumerate() {
            for (j, h) in fam.iter().enumerate() {
                let ip = inner_product(f, h).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - want).abs() < 1e-10 && ip.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn multi_indices_by_degree() {
        assert_eq!(multi_indices(1, 3), alloc::vec![[0, 0, 0], [1, 0, 0], [2, 0, 0]]);
        assert_eq!(
            multi_indices(2, 4),
            alloc::vec![[0, 0, 0], [0, 1, 0], [1, 0, 0], [0, 2, 0]]
        );
        assert_eq!(multi_indices(3, 10).len(), 10);
    }

    #[test]
    fn hermite_function_norm() {
        // ∫ h_k² = √π with this unnormalized recurrence
        let h = 1e-3;
        for k in 0..5 {
            let s: f64 = (-12000..12000)
                .map(|i| {
                    let v = hermite_function(k, (i as f64 + 0.5) * h);
                    v * v
                })
                .sum::<f64>()
                * h;
            assert!((s - libm::sqrt(core::f64::consts::PI)).abs() < 1e-9, "{k}: {s}");
        }
    }

    #[test]
    fn random_ensemble_is_seeded() {
        let g = Grid::new(1, &[(-5.0, 5.0)], &[256]).unwrap();
        let spec = RandomSpec { complex: true, ..RandomSpec::default() };
        let a = random_ensemble(&g, &spec, 11).unwrap();
        let b = random_ensemble(&g, &spec, 11).unwrap();
        let c = random_ensemble(&g, &spec, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.weights().iter().all(|&w| w > 0.0 && w <= 1.0));
        assert!(!a.fields()[0].is_real());
    }
}
