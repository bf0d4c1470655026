//! Mass-`target` ball radii and the greedy Besicovitch covering.
//!
//! Every support cell `x` of a density gets the smallest ball `B_x` around it
//! holding at least the target mass. The covering then keeps picking the
//! largest candidate whose center is not yet covered by a chosen ball
//! (ties: smallest center index) until every center is covered.

use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::fields::{Ball, Field, Grid, Mask};
use crate::{Error, Result};

/// Support threshold relative to `max ρ`.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

pub const DEFAULT_TARGET_MASS: f64 = 2.0;

/// Cells with `ρ > SUPPORT_THRESHOLD · max ρ`.
pub fn support(rho: &[f64], grid: &Grid) -> Mask {
    let max = rho.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Mask::empty();
    }
    let cut = SUPPORT_THRESHOLD * max;
    let cells = rho.iter().enumerate().filter(|(_, &r)| r > cut).map(|(c, _)| c).collect();
    debug_assert!(grid.cell_count() == rho.len());
    Mask::from_sorted(cells)
}

/// Row prefix sums of a density, for `O(rows)` ball masses.
pub struct MassIndex {
    grid: Grid,
    row_len: usize,
    prefix: Vec<f64>,
    max_density: f64,
}

impl MassIndex {
    pub fn new(grid: &Grid, rho: &[f64]) -> Result<Self> {
        if rho.len() != grid.cell_count() {
            return Err(Error::LengthMismatch { expected: grid.cell_count(), found: rho.len() });
        }
        let row_len = grid.points()[grid.dim() - 1];
        let rows = rho.len() / row_len;
        let mut prefix = Vec::with_capacity(rows * (row_len + 1));
        for row in rho.chunks(row_len) {
            let mut acc = 0.0;
            prefix.push(acc);
            for &r in row {
                acc += r;
                prefix.push(acc);
            }
        }
        let max_density = rho.iter().copied().fold(0.0, f64::max);
        Ok(MassIndex { grid: *grid, row_len, prefix, max_density })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn max_density(&self) -> f64 {
        self.max_density
    }

    /// `∫_B ρ`.
    pub fn ball_mass(&self, ball: &Ball) -> f64 {
        let stride = self.row_len + 1;
        let mut acc = 0.0;
        ball.for_each_row(&self.grid, |base, lo, hi| {
            let p = (base / self.row_len) * stride;
            acc += self.prefix[p + hi + 1] - self.prefix[p + lo];
        });
        acc * self.grid.cell_volume()
    }

    /// Half-steps of a ball around any cell that reaches every cell.
    fn covering_half_steps(&self) -> u64 {
        libm::ceil(2.0 * self.grid.diagonal() / self.grid.min_spacing()) as u64 + 2
    }

    /// Mass of the whole box, summed exactly as a covering ball would be.
    pub fn total_mass(&self) -> f64 {
        let ball = Ball::new(&self.grid, 0, self.covering_half_steps()).expect("cell 0 exists");
        self.ball_mass(&ball)
    }

    /// Smallest quantized radius around `center` whose ball holds at least
    /// `target` mass, by bisection on the monotone map `m ↦ ∫_{B(center, m)} ρ`.
    pub fn radius_for_mass(&self, center: usize, target: f64) -> Result<Candidate> {
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::BadTargetMass(target));
        }
        let mut hi = self.covering_half_steps();
        let full = Ball::new(&self.grid, center, hi)?;
        let mut hi_mass = self.ball_mass(&full);
        if hi_mass < target {
            return Err(Error::InsufficientMass { available: hi_mass, target });
        }
        // invariant: mass(lo) < target <= mass(hi), with mass(0) = 0
        let mut lo = 0u64;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let m = self.ball_mass(&Ball::new(&self.grid, center, mid)?);
            if m >= target {
                hi = mid;
                hi_mass = m;
            } else {
                lo = mid;
            }
        }
        Ok(Candidate { ball: Ball::new(&self.grid, center, hi)?, mass: hi_mass })
    }

    /// Number of cells entering the ball at its last half-step.
    pub fn shell_cells(&self, ball: &Ball) -> usize {
        let inner = if ball.half_steps() > 1 {
            Ball::new(&self.grid, ball.center(), ball.half_steps() - 1)
                .map_or(0, |b| b.cell_count(&self.grid))
        } else {
            0
        };
        ball.cell_count(&self.grid) - inner
    }
}

/// A ball together with the mass it encloses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub ball: Ball,
    pub mass: f64,
}

/// [`MassIndex::radius_for_mass`] on a density field (real parts are used).
pub fn radius_for_mass(rho: &Field, center: usize, target: f64) -> Result<Candidate> {
    MassIndex::new(rho.grid(), &rho.re())?.radius_for_mass(center, target)
}

/// One mass-`target` ball per support cell, in ascending cell order.
pub fn candidate_balls(rho: &Field, target: f64) -> Result<Vec<Candidate>> {
    let values = rho.re();
    let index = MassIndex::new(rho.grid(), &values)?;
    candidates_from_index(&index, &support(&values, rho.grid()), target)
}

pub(crate) fn candidates_from_index(
    index: &MassIndex,
    support: &Mask,
    target: f64,
) -> Result<Vec<Candidate>> {
    if support.is_empty() {
        return Ok(Vec::new());
    }
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::BadTargetMass(target));
    }
    let total = index.total_mass();
    if total < target {
        return Err(Error::InsufficientMass { available: total, target });
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        support.cells().par_iter().map(|&c| index.radius_for_mass(c, target)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        support.iter().map(|c| index.radius_for_mass(c, target)).collect()
    }
}

/// Result of the greedy selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    /// Selected balls in selection order (radii non-increasing).
    pub balls: Vec<Ball>,
    /// Indices of the selected balls in the candidate list.
    pub selected: Vec<usize>,
    pub support: Mask,
    /// Max number of selected balls containing one support cell.
    pub multiplicity: usize,
    /// Every support cell lies in at least one selected ball.
    pub covered: bool,
    /// Max overlap over all grid cells, support or not.
    pub max_overlap: usize,
}

/// Greedy Besicovitch selection.
///
/// Requires every support cell to be the center of exactly one candidate.
pub fn besicovitch_select(grid: &Grid, candidates: &[Ball], support: &Mask) -> Result<Covering> {
    let mut centers: Vec<usize> = candidates.iter().map(Ball::center).collect();
    centers.sort_unstable();
    for cell in support.iter() {
        let lo = centers.partition_point(|&c| c < cell);
        let hi = centers.partition_point(|&c| c <= cell);
        match hi - lo {
            0 => return Err(Error::MissingCenter { cell }),
            1 => {}
            _ => return Err(Error::DuplicateCenter { cell }),
        }
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| (Reverse(candidates[i].half_steps()), candidates[i].center()));

    let mut counts = alloc::vec![0u32; grid.cell_count()];
    let mut selected = Vec::new();
    for i in order {
        let ball = &candidates[i];
        if counts[ball.center()] > 0 {
            continue;
        }
        ball.for_each_row(grid, |base, lo, hi| {
            for c in &mut counts[base + lo..=base + hi] {
                *c += 1;
            }
        });
        selected.push(i);
    }

    let multiplicity = support.iter().map(|c| counts[c]).max().unwrap_or(0) as usize;
    let covered = support.iter().all(|c| counts[c] > 0);
    let max_overlap = counts.iter().copied().max().unwrap_or(0) as usize;
    Ok(Covering {
        balls: selected.iter().map(|&i| candidates[i].clone()).collect(),
        selected,
        support: support.clone(),
        multiplicity,
        covered,
        max_overlap,
    })
}

/// Recounts the covering multiplicity cell by cell with [`Ball::contains`].
pub fn multiplicity(grid: &Grid, cov: &Covering) -> usize {
    cov.support
        .iter()
        .map(|c| cov.balls.iter().filter(|b| b.contains(grid, c)).count())
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Field;

    fn line(n: usize, len: f64) -> Grid {
        Grid::new(1, &[(0.0, len)], &[n]).unwrap()
    }

    #[test]
    fn uniform_density_radius() {
        let g = line(1000, 100.0);
        let c = 0.37;
        let rho = Field::real(g, alloc::vec![c; 1000]).unwrap();
        let got = radius_for_mass(&rho, 500, 2.0).unwrap();
        assert!((got.ball.radius() - 1.0 / c).abs() <= 0.1, "{}", got.ball.radius());
        let cell_mass = c * 0.1;
        assert!(got.mass >= 2.0 && got.mass <= 2.0 + cell_mass + 1e-12);
    }

    #[test]
    fn insufficient_mass() {
        let g = line(100, 1.0);
        let rho = Field::real(g, alloc::vec![1.5; 100]).unwrap();
        assert!(matches!(
            radius_for_mass(&rho, 10, 2.0),
            Err(Error::InsufficientMass { .. })
        ));
        assert!(matches!(candidate_balls(&rho, 2.0), Err(Error::InsufficientMass { .. })));
        assert!(matches!(radius_for_mass(&rho, 10, -1.0), Err(Error::BadTargetMass(_))));
    }

    #[test]
    fn concentrated_mass_gives_single_cell_ball() {
        let g = Grid::new(2, &[(0.0, 1.0)], &[10]).unwrap();
        let mut v = alloc::vec![0.0; 100];
        v[55] = 300.0; // 3.0 of mass in one cell
        let rho = Field::real(g, v).unwrap();
        let got = radius_for_mass(&rho, 55, 2.0).unwrap();
        assert_eq!(got.ball.half_steps(), 1);
        assert_eq!(got.ball.mask(&g).cells(), &[55]);
    }

    #[test]
    fn empty_support_gives_no_candidates() {
        let rho = Field::zeros(line(10, 1.0));
        assert!(candidate_balls(&rho, 2.0).unwrap().is_empty());
    }

    #[test]
    fn two_unit_bumps_force_wide_balls() {
        let g = line(400, 40.0);
        // unit-mass bumps on [5,6] and [30,31]
        let rho = Field::from_fn(g, |x| {
            if (5.0..6.0).contains(&x[0]) || (30.0..31.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let cands = candidate_balls(&rho, 2.0).unwrap();
        assert_eq!(cands.len(), 20);
        for c in &cands {
            let m = c.ball.mask(&g);
            assert!(m.contains(55) || m.contains(50));
            assert!(m.contains(305) || m.contains(309));
            assert!((c.mass - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_bump_center_balls_are_smaller() {
        let g = line(2000, 20.0);
        let rho = Field::from_fn(g, |x| {
            let t = x[0] - 10.0;
            2.0 / libm::sqrt(core::f64::consts::PI) * libm::exp(-t * t)
        })
        .unwrap();
        let cands = candidate_balls(&rho, 1.9).unwrap();
        let center = cands.iter().find(|c| c.ball.center() == 1000).unwrap();
        let edge = cands.iter().find(|c| c.ball.center() == 1300).unwrap();
        assert!(center.ball.radius() < edge.ball.radius());
    }

    #[test]
    fn concentric_candidates_select_one() {
        let g = line(50, 5.0);
        let b = Ball::new(&g, 25, 8).unwrap();
        let cands = alloc::vec![b.clone(), b.clone(), b];
        let support = Mask::new(&g, alloc::vec![25]).unwrap();
        assert!(matches!(
            besicovitch_select(&g, &cands, &support),
            Err(Error::DuplicateCenter { cell: 25 })
        ));
        let single = Ball::new(&g, 25, 8).unwrap();
        let cov = besicovitch_select(&g, &[single], &support).unwrap();
        assert_eq!(cov.balls.len(), 1);
        assert_eq!(cov.multiplicity, 1);
        assert!(cov.covered);
    }

    #[test]
    fn missing_center_is_rejected() {
        let g = line(10, 1.0);
        let support = Mask::new(&g, alloc::vec![2, 3]).unwrap();
        let cands = alloc::vec![Ball::new(&g, 2, 3).unwrap()];
        assert!(matches!(
            besicovitch_select(&g, &cands, &support),
            Err(Error::MissingCenter { cell: 3 })
        ));
    }

    #[test]
    fn spaced_unit_radius_instance() {
        // centers at 0, 0.5, 1.0, ... with radius 1
        let g = line(21, 10.5);
        let cands: Vec<Ball> = (0..21).map(|c| Ball::with_radius(&g, c, 1.0).unwrap()).collect();
        let support = Mask::full(&g);
        let cov = besicovitch_select(&g, &cands, &support).unwrap();
        assert!(cov.covered);
        assert_eq!(cov.multiplicity, 2);
        assert_eq!(multiplicity(&g, &cov), 2);
        let radii: Vec<u64> = cov.balls.iter().map(Ball::half_steps).collect();
        assert!(radii.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn disjoint_balls_have_multiplicity_one() {
        let g = line(20, 2.0);
        let cands = alloc::vec![Ball::new(&g, 3, 3).unwrap(), Ball::new(&g, 12, 3).unwrap()];
        let support = Mask::new(&g, alloc::vec![3, 12]).unwrap();
        let cov = besicovitch_select(&g, &cands, &support).unwrap();
        assert_eq!(cov.balls.len(), 2);
        assert_eq!(multiplicity(&g, &cov), 1);
    }
}
