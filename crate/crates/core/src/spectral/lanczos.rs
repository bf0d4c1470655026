//! Lanczos iteration with full reorthogonalization for the largest eigenpair
//! of a symmetric operator on the orthogonal complement of a unit vector.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub(crate) struct Eigenpair {
    pub value: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Stops once the Ritz residual `β_j |s_j|` drops below `tol · |θ|`.
pub(crate) fn largest_eigenpair(
    n: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    deflate: &[f64],
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpair> {
    let free_dims = n.saturating_sub(1);
    if free_dims == 0 {
        return Err(Error::GapUndefined);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let c = dot(&v, deflate);
    axpy(-c, deflate, &mut v);
    let norm = libm::sqrt(dot(&v, &v));
    v.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = alloc::vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = alloc::vec![0.0; n];
    let limit = max_iter.min(free_dims);

    for j in 0..limit {
        apply(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        for _pass in 0..2 {
            let c = dot(&w, deflate);
            axpy(-c, deflate, &mut w);
            for q in &basis {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        let b = libm::sqrt(dot(&w, &w));

        let m = j + 1;
        let mut t = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            t[(k, k)] = alpha[k];
            if k + 1 < m {
                t[(k, k + 1)] = beta[k];
                t[(k + 1, k)] = beta[k];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (top, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, x)| if x > acc.1 { (k, x) } else { acc });
        let residual = b * eig.eigenvectors[(m - 1, top)].abs();
        let exhausted = m == free_dims || b <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE);
        if residual <= tol * theta.abs() || exhausted {
            return Ok(Eigenpair { value: theta, iterations: m });
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::SolverNoConvergence { iterations: limit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator_with_deflation() {
        // eigenvalues 1..=n along the axes; deflate the top axis
        let n = 60;
        let mut deflate = alloc::vec![0.0; n];
        deflate[n - 1] = 1.0;
        let out = largest_eigenpair(
            n,
            |x, y| {
                for i in 0..n {
                    y[i] = (i + 1) as f64 * x[i];
                }
            },
            &deflate,
            7,
            1e-10,
            n,
        )
        .unwrap();
        assert!((out.value - (n - 1) as f64).abs() < 1e-8, "{}", out.value);
    }
}
