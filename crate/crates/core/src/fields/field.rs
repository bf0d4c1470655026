use alloc::vec::Vec;

use num_complex::Complex64;

use super::{Grid, Mask};
use crate::{Error, Result};

/// Complex scalar function sampled at the cell centers of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::LengthMismatch { expected: grid.cell_count(), found: values.len() });
        }
        if let Some(cell) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { cell });
        }
        Ok(Field { grid, values })
    }

    pub fn real(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(|re| Complex64::new(re, 0.0)).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: alloc::vec![Complex64::new(0.0, 0.0); grid.cell_count()] }
    }

    /// Samples a real function of the cell-center position.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let values = (0..grid.cell_count())
            .map(|cell| {
                let x = grid.cell_center(cell);
                Complex64::new(f(&x[..dim]), 0.0)
            })
            .collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Real parts; the caller decides whether dropping `im` is meaningful.
    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Discrete `L²` norm squared.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn scaled(&self, factor: Complex64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// `L²`-preserving dilation `u(x) ↦ s^{d/2} u(s x)`: same samples on the
    /// grid shrunk by `s`.
    pub fn dilate(&self, scale: f64) -> Field {
        let amp = libm::pow(scale, self.grid.dim() as f64 / 2.0);
        Field {
            grid: self.grid.dilate(scale),
            values: self.values.iter().map(|v| v * amp).collect(),
        }
    }

    pub(crate) fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Discrete `L²` pairing `Σ conj(f) g · vol`, summed in ascending cell order.
pub fn inner_product(f: &Field, g: &Field) -> Result<Complex64> {
    f.same_grid(g)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in f.values.iter().zip(&g.values) {
        acc += a.conj() * b;
    }
    Ok(acc * f.grid.cell_volume())
}

/// Calls `visit(i, j, 1/h²)` for every forward pair `(i, i + e_axis)` whose
/// base cell `i` is yielded by `cells`. Pairs leaving the box are skipped.
pub(crate) fn for_each_forward_pair(
    grid: &Grid,
    cells: impl Iterator<Item = usize>,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let dim = grid.dim();
    let strides = grid.strides();
    let points = grid.points();
    let mut inv_h2 = [0.0; 3];
    for (axis, h) in grid.spacing().iter().enumerate() {
        inv_h2[axis] = 1.0 / (h * h);
    }
    for i in cells {
        let c = grid.coords_of(i);
        for axis in 0..dim {
            if c[axis] + 1 < points[axis] {
                visit(i, i + strides[axis], inv_h2[axis]);
            }
        }
    }
}

fn forward_energy(values: &[Complex64], grid: &Grid, mask: Option<&Mask>) -> f64 {
    let mut acc = 0.0;
    let mut visit = |i: usize, j: usize, w: f64| acc += (values[j] - values[i]).norm_sqr() * w;
    match mask {
        Some(m) => for_each_forward_pair(grid, m.iter(), &mut visit),
        None => for_each_forward_pair(grid, 0..grid.cell_count(), &mut visit),
    }
    acc * grid.cell_volume()
}

/// `∫|∇f|²` with forward differences. A difference counts when its base cell
/// lies in `mask` (all cells when `None`), so energies over disjoint masks
/// add up to the full energy.
pub fn gradient_energy(f: &Field, mask: Option<&Mask>) -> f64 {
    forward_energy(&f.values, &f.grid, mask)
}

pub(crate) fn gradient_energy_real(values: &[f64], grid: &Grid, mask: Option<&Mask>) -> f64 {
    let mut acc = 0.0;
    let mut visit = |i: usize, j: usize, w: f64| {
        let d = values[j] - values[i];
        acc += d * d * w;
    };
    match mask {
        Some(m) => for_each_forward_pair(grid, m.iter(), &mut visit),
        None => for_each_forward_pair(grid, 0..grid.cell_count(), &mut visit),
    }
    acc * grid.cell_volume()
}

/// The Neumann quadratic form of `mask`: only differences with both cells in
/// the mask count. This is the form of the Neumann Laplacian on the mask.
pub fn neumann_energy(f: &Field, mask: &Mask) -> f64 {
    let values = &f.values;
    let mut acc = 0.0;
    for_each_forward_pair(&f.grid, mask.iter(), |i, j, w| {
        if mask.contains(j) {
            acc += (values[j] - values[i]).norm_sqr() * w;
        }
    });
    acc * f.grid.cell_volume()
}

pub(crate) fn neumann_energy_real(values: &[f64], grid: &Grid, mask: &Mask) -> f64 {
    let mut acc = 0.0;
    for_each_forward_pair(grid, mask.iter(), |i, j, w| {
        if mask.contains(j) {
            let d = values[j] - values[i];
            acc += d * d * w;
        }
    });
    acc * grid.cell_volume()
}
