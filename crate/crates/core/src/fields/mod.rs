//! Discretization substrate: grids, fields, ball masks and ensembles.

mod ball;
mod ensemble;
mod field;
mod grid;
mod mask;

pub use ball::Ball;
pub use ensemble::{
    density, kinetic_energy, local_kinetic_energy, lt_exponent, lt_power, lt_quotient,
    orthonormalize, Ensemble, ORTHONORMALITY_TOL, RANK_TOL,
};
pub use field::{gradient_energy, inner_product, neumann_energy, Field};
pub use grid::{Grid, DEFAULT_CELL_BUDGET};
pub use mask::Mask;

pub(crate) use ensemble::{density_values, family_quotient, lt_integral, mass, weighted_energy};
pub(crate) use field::{for_each_forward_pair, gradient_energy_real, neumann_energy_real};
