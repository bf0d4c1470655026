use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default cap on the number of cells of a grid.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 22;

/// Uniform tensor mesh over a box in R^d, `d <= 3`.
///
/// Cells are numbered in row-major order: the last axis varies fastest.
/// Values live at cell centers `lo + (k + 1/2) h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    lo: [f64; 3],
    hi: [f64; 3],
    points: [usize; 3],
    spacing: [f64; 3],
}

impl Grid {
    /// Builds a grid with the default cell budget.
    ///
    /// `extent` and `points` either have one entry per axis or a single entry
    /// that is broadcast to every axis.
    pub fn new(dim: usize, extent: &[(f64, f64)], points: &[usize]) -> Result<Self> {
        Self::with_budget(dim, extent, points, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(
        dim: usize,
        extent: &[(f64, f64)],
        points: &[usize],
        budget: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        let pick = |len: usize, axis: usize| -> Result<usize> {
            match len {
                1 => Ok(0),
                l if l == dim => Ok(axis),
                _ => Err(Error::LengthMismatch { expected: dim, found: len }),
            }
        };
        let mut grid = Grid {
            dim,
            lo: [0.0; 3],
            hi: [0.0; 3],
            points: [1; 3],
            spacing: [1.0; 3],
        };
        let mut cells: u128 = 1;
        for axis in 0..dim {
            let (lo, hi) = extent[pick(extent.len(), axis)?];
            let n = points[pick(points.len(), axis)?];
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::BadExtent { axis, lo, hi });
            }
            if n == 0 {
                return Err(Error::BadPoints { axis });
            }
            cells *= n as u128;
            grid.lo[axis] = lo;
            grid.hi[axis] = hi;
            grid.points[axis] = n;
            grid.spacing[axis] = (hi - lo) / n as f64;
        }
        if cells > budget as u128 {
            return Err(Error::BudgetExceeded { cells, budget });
        }
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_count(&self) -> usize {
        self.points[..self.dim].iter().product()
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn extent(&self, axis: usize) -> (f64, f64) {
        (self.lo[axis], self.hi[axis])
    }

    /// Uniform quadrature weight, the product of the spacings.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when all axes share the same spacing bit for bit.
    pub fn is_isotropic(&self) -> bool {
        self.spacing().iter().all(|&h| h == self.spacing[0])
    }

    /// Euclidean length of the box diagonal.
    pub fn diagonal(&self) -> f64 {
        let s: f64 = (0..self.dim)
            .map(|a| (self.hi[a] - self.lo[a]) * (self.hi[a] - self.lo[a]))
            .sum();
        libm::sqrt(s)
    }

    /// Row-major stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.points[axis + 1..self.dim].iter().product()
    }

    pub fn strides(&self) -> [usize; 3] {
        let mut s = [0; 3];
        for (axis, st) in s.iter_mut().enumerate().take(self.dim) {
            *st = self.stride(axis);
        }
        s
    }

    /// Multi-index of a cell; unused trailing entries are zero.
    pub fn coords_of(&self, cell: usize) -> [usize; 3] {
        let mut c = [0; 3];
        let mut rest = cell;
        for axis in (0..self.dim).rev() {
            c[axis] = rest % self.points[axis];
            rest /= self.points[axis];
        }
        c
    }

    pub fn index_of(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.dim {
            return None;
        }
        let mut idx = 0;
        for (axis, &k) in coords.iter().enumerate() {
            if k >= self.points[axis] {
                return None;
            }
            idx = idx * self.points[axis] + k;
        }
        Some(idx)
    }

    /// Physical position of a cell center.
    pub fn cell_center(&self, cell: usize) -> [f64; 3] {
        let c = self.coords_of(cell);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.lo[axis] + (c[axis] as f64 + 0.5) * self.spacing[axis];
        }
        x
    }

    /// Cell whose center is nearest to `point` (clamped to the box).
    pub fn nearest_cell(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim {
            return None;
        }
        let mut coords = [0usize; 3];
        for axis in 0..self.dim {
            let t = (point[axis] - self.lo[axis]) / self.spacing[axis] - 0.5;
            let k = libm::round(t).max(0.0) as usize;
            coords[axis] = k.min(self.points[axis] - 1);
        }
        self.index_of(&coords[..self.dim])
    }

    /// The grid scaled by `1/scale` about the origin: same points, spacing
    /// `h / scale`.
    pub fn dilate(&self, scale: f64) -> Self {
        let mut g = *self;
        for axis in 0..self.dim {
            g.lo[axis] = self.lo[axis] / scale;
            g.hi[axis] = self.hi[axis] / scale;
            g.spacing[axis] = self.spacing[axis] / scale;
        }
        g
    }

    pub(crate) fn check_cell(&self, cell: usize) -> Result<()> {
        if cell < self.cell_count() {
            Ok(())
        } else {
            Err(Error::CellOutOfGrid { cell })
        }
    }
}
