use alloc::vec::Vec;

use super::Grid;
use crate::Result;

/// A set of grid cells, stored sorted and without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Mask {
    cells: Vec<usize>,
}

impl Mask {
    pub fn new(grid: &Grid, mut cells: Vec<usize>) -> Result<Self> {
        cells.sort_unstable();
        cells.dedup();
        if let Some(&last) = cells.last() {
            grid.check_cell(last)?;
        }
        Ok(Mask { cells })
    }

    /// Caller guarantees `cells` is strictly increasing and inside the grid.
    pub(crate) fn from_sorted(cells: Vec<usize>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        Mask { cells }
    }

    pub fn full(grid: &Grid) -> Self {
        Mask { cells: (0..grid.cell_count()).collect() }
    }

    pub fn empty() -> Self {
        Mask::default()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    /// Position of `cell` in the sorted cell list.
    pub fn position(&self, cell: usize) -> Option<usize> {
        self.cells.binary_search(&cell).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().copied()
    }

    /// `|B|`: cell count times cell volume.
    pub fn volume(&self, grid: &Grid) -> f64 {
        self.cells.len() as f64 * grid.cell_volume()
    }
}
