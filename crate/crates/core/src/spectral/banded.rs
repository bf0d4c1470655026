use alloc::vec::Vec;

use super::NeumannOperator;
use crate::{Error, Result};

/// Cholesky factor of `L + σI` in lower band storage.
///
/// Row `i` stores `l(i, j)` for `j ∈ [i − bw, i]` at `i·(bw+1) + (j + bw − i)`.
pub(crate) struct BandedCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    pub(crate) fn factor(op: &NeumannOperator, shift: f64) -> Result<Self> {
        let n = op.dim();
        let bw = op.bandwidth();
        let stride = bw + 1;
        let mut data = alloc::vec![0.0; n * stride];
        for i in 0..n {
            data[i * stride + bw] = op.diagonal()[i] + shift;
            for (j, w) in op.neighbors(i) {
                if j < i {
                    data[i * stride + (j + bw - i)] = -w;
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let row_i = &data[i * stride + (k0 + bw - i)..i * stride + (j + bw - i)];
                let row_j = &data[j * stride + (k0 + bw - j)..j * stride + bw];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let s = data[i * stride + (j + bw - i)] - dot;
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::SolverNoConvergence { iterations: 0 });
                    }
                    data[i * stride + bw] = libm::sqrt(s);
                } else {
                    data[i * stride + (j + bw - i)] = s / data[j * stride + bw];
                }
            }
        }
        Ok(BandedCholesky { n, bw, data })
    }

    /// Overwrites `x` with `(L + σI)^{-1} x`.
    pub(crate) fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, stride) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let row = &self.data[i * stride + (j0 + bw - i)..i * stride + bw];
            let dot: f64 = row.iter().zip(&x[j0..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - dot) / self.data[i * stride + bw];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for r in i + 1..(i + bw + 1).min(n) {
                s -= self.data[r * stride + (i + bw - r)] * x[r];
            }
            x[i] = s / self.data[i * stride + bw];
        }
    }
}
