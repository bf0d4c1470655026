use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Grid, Mask};
use crate::{Error, Result};

/// A ball centered at a cell center, with radius quantized to half-integer
/// multiples of the smallest spacing.
///
/// A cell belongs to the ball when its center lies strictly inside the
/// radius. Cells exactly on the sphere are included only when their offset
/// along the last axis is `<= 0`. In 1D this makes a ball of `m` half-steps
/// contain exactly `m` cells (away from the box boundary).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    center: usize,
    half_steps: u64,
    radius: f64,
}

/// Squared distances measured in units of `(h_min / 2)²`.
struct Metric {
    dim: usize,
    weight: [f64; 3],
    tie_tol: f64,
    m2: f64,
}

impl Metric {
    fn new(grid: &Grid, half_steps: u64) -> Self {
        let hmin = grid.min_spacing();
        let mut weight = [0.0; 3];
        for (axis, h) in grid.spacing().iter().enumerate() {
            let r = h / hmin;
            weight[axis] = 4.0 * r * r;
        }
        let m2 = (half_steps as f64) * (half_steps as f64);
        // Isotropic grids compare exact integers; anisotropic ones need a tie band.
        let tie_tol = if grid.is_isotropic() { 0.0 } else { 1e-9 * m2 };
        Metric { dim: grid.dim(), weight, tie_tol, m2 }
    }

    fn classify(&self, dist: f64) -> Ordering {
        if dist < self.m2 - self.tie_tol {
            Ordering::Less
        } else if dist > self.m2 + self.tie_tol {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }

    /// Largest `k >= 0` with offset `+k` (resp. `-k`) on the last axis inside,
    /// given the outer-axis contribution `partial`.
    fn last_axis_extent(&self, partial: f64) -> (i64, i64) {
        let wl = self.weight[self.dim - 1];
        let pos = |k: i64| k == 0 || self.classify(partial + wl * (k * k) as f64) == Ordering::Less;
        let neg = |k: i64| self.classify(partial + wl * (k * k) as f64) != Ordering::Greater;
        let est = libm::floor(libm::sqrt((self.m2 - partial).max(0.0) / wl)) as i64;
        let grow = |f: &dyn Fn(i64) -> bool| {
            let mut k = est;
            while f(k + 1) {
                k += 1;
            }
            while k > 0 && !f(k) {
                k -= 1;
            }
            k
        };
        (grow(&neg), grow(&pos))
    }
}

impl Ball {
    pub fn new(grid: &Grid, center: usize, half_steps: u64) -> Result<Self> {
        grid.check_cell(center)?;
        if half_steps == 0 {
            return Err(Error::BadConfig("ball radius must be at least half a cell"));
        }
        Ok(Ball { center, half_steps, radius: half_steps as f64 * grid.min_spacing() / 2.0 })
    }

    /// Rounds `radius` to the nearest half-step (at least one).
    pub fn with_radius(grid: &Grid, center: usize, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::BadConfig("ball radius must be positive"));
        }
        let m = libm::round(2.0 * radius / grid.min_spacing()).max(1.0) as u64;
        Self::new(grid, center, m)
    }

    /// Ball around the cell nearest to `point`.
    pub fn around(grid: &Grid, point: &[f64], radius: f64) -> Result<Self> {
        let center = grid
            .nearest_cell(point)
            .ok_or(Error::LengthMismatch { expected: grid.dim(), found: point.len() })?;
        Self::with_radius(grid, center, radius)
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn half_steps(&self) -> u64 {
        self.half_steps
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center_point(&self, grid: &Grid) -> Vec<f64> {
        grid.cell_center(self.center)[..grid.dim()].to_vec()
    }

    pub fn contains(&self, grid: &Grid, cell: usize) -> bool {
        if cell >= grid.cell_count() {
            return false;
        }
        let metric = Metric::new(grid, self.half_steps);
        let c = grid.coords_of(self.center);
        let x = grid.coords_of(cell);
        let dim = grid.dim();
        let mut dist = 0.0;
        let mut k = 0i64;
        for axis in 0..dim {
            k = x[axis] as i64 - c[axis] as i64;
            dist += metric.weight[axis] * (k * k) as f64;
        }
        match metric.classify(dist) {
            Ordering::Less => true,
            Ordering::Equal => k <= 0,
            Ordering::Greater => false,
        }
    }

    /// Visits the ball one last-axis row at a time, in ascending cell order:
    /// `visit(row_base, lo, hi)` covers cells `row_base + lo ..= row_base + hi`.
    pub fn for_each_row(&self, grid: &Grid, mut visit: impl FnMut(usize, usize, usize)) {
        let metric = Metric::new(grid, self.half_steps);
        let dim = grid.dim();
        let last = dim - 1;
        let c = grid.coords_of(self.center);
        let points = grid.points();
        let strides = grid.strides();
        let m = self.half_steps as f64;

        let mut k_lo = [0i64; 2];
        let mut k_hi = [0i64; 2];
        for axis in 0..last {
            let reach = libm::floor(m / libm::sqrt(metric.weight[axis])) as i64 + 1;
            k_lo[axis] = (-reach).max(-(c[axis] as i64));
            k_hi[axis] = reach.min((points[axis] - 1 - c[axis]) as i64);
        }
        let mut k = k_lo;
        loop {
            let mut partial = 0.0;
            let mut base = 0usize;
            for axis in 0..last {
                partial += metric.weight[axis] * (k[axis] * k[axis]) as f64;
                base += (c[axis] as i64 + k[axis]) as usize * strides[axis];
            }
            if metric.classify(partial) != Ordering::Greater {
                let (neg, pos) = metric.last_axis_extent(partial);
                let cl = c[last] as i64;
                let lo = (cl - neg).max(0) as usize;
                let hi = (cl + pos).min(points[last] as i64 - 1) as usize;
                visit(base, lo, hi);
            }
            // odometer over the outer axes, last outer axis fastest
            let mut axis = last;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                if k[axis] < k_hi[axis] {
                    k[axis] += 1;
                    break;
                }
                k[axis] = k_lo[axis];
            }
        }
    }

    pub fn mask(&self, grid: &Grid) -> Mask {
        let mut cells = Vec::new();
        self.for_each_row(grid, |base, lo, hi| cells.extend(base + lo..=base + hi));
        Mask::from_sorted(cells)
    }

    pub fn cell_count(&self, grid: &Grid) -> usize {
        let mut n = 0;
        self.for_each_row(grid, |_, lo, hi| n += hi - lo + 1);
        n
    }

    /// `|B|` as cell count times cell volume.
    pub fn volume(&self, grid: &Grid) -> f64 {
        self.cell_count(grid) as f64 * grid.cell_volume()
    }
}
