use alloc::collections::VecDeque;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::fields::{Grid, Mask};
use crate::{Error, Result};

/// Graph Laplacian of a cell mask with natural (Neumann) boundary: every
/// axis-adjacent pair inside the mask contributes `(f_i − f_j)² / h²`.
///
/// Rows and columns are indexed by position in the sorted mask.
#[derive(Clone, Debug)]
pub struct NeumannOperator {
    mask: Mask,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl NeumannOperator {
    /// Assembles the operator; rejects empty and disconnected masks.
    pub fn new(grid: &Grid, mask: Mask) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::Empty);
        }
        let dim = grid.dim();
        let strides = grid.strides();
        let points = grid.points();
        let inv_h2: Vec<f64> = grid.spacing().iter().map(|h| 1.0 / (h * h)).collect();

        let n = mask.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut diag = Vec::with_capacity(n);
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * dim);
        for cell in mask.iter() {
            let c = grid.coords_of(cell);
            row.clear();
            for axis in 0..dim {
                if c[axis] > 0 {
                    if let Some(q) = mask.position(cell - strides[axis]) {
                        row.push((q, inv_h2[axis]));
                    }
                }
                if c[axis] + 1 < points[axis] {
                    if let Some(q) = mask.position(cell + strides[axis]) {
                        row.push((q, inv_h2[axis]));
                    }
                }
            }
            row.sort_by_key(|&(q, _)| q);
            let mut d = 0.0;
            for &(q, w) in &row {
                cols.push(q);
                weights.push(w);
                d += w;
            }
            diag.push(d);
            row_ptr.push(cols.len());
        }
        let op = NeumannOperator { mask, diag, row_ptr, cols, weights };
        if !op.is_connected() {
            return Err(Error::DisconnectedMask);
        }
        Ok(op)
    }

    fn is_connected(&self) -> bool {
        let n = self.dim();
        let mut seen = alloc::vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(p) = queue.pop_front() {
            for &q in &self.cols[self.row_ptr[p]..self.row_ptr[p + 1]] {
                if !seen[q] {
                    seen[q] = true;
                    count += 1;
                    queue.push_back(q);
                }
            }
        }
        count == n
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries `(column, weight)` of a row; the matrix entry is
    /// `−weight`.
    pub fn neighbors(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// `y = L x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (p, yp) in y.iter_mut().enumerate() {
            let mut s = self.diag[p] * x[p];
            for (q, w) in self.neighbors(p) {
                s -= w * x[q];
            }
            *yp = s;
        }
    }

    /// Largest distance between adjacent positions.
    pub fn bandwidth(&self) -> usize {
        (0..self.dim())
            .flat_map(|p| self.neighbors(p).map(move |(q, _)| p.abs_diff(q)))
            .max()
            .unwrap_or(0)
    }

    /// Max-norm of `L·1`, relative to the largest diagonal entry.
    pub fn kernel_residual(&self) -> f64 {
        let ones = alloc::vec![1.0; self.dim()];
        let mut y = alloc::vec![0.0; self.dim()];
        self.apply(&ones, &mut y);
        let scale = self.diag.iter().copied().fold(1.0, f64::max);
        y.iter().map(|v| v.abs()).fold(0.0, f64::max) / scale
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for p in 0..n {
            m[(p, p)] = self.diag[p];
            for (q, w) in self.neighbors(p) {
                m[(p, q)] = -w;
            }
        }
        m
    }
}
