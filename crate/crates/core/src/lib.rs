//! Numerical laboratory for the Lieb–Thirring kinetic-energy inequality on
//! uniform grids.
//!
//! The crate is `no_std` (with `alloc`). It provides:
//!
//! * [`fields`]: grids, sampled fields, orthonormal ensembles, densities and
//!   discrete kinetic energies;
//! * [`spectral`]: Neumann Laplacians on ball masks, their spectral gap, the
//!   Hoffmann-Ostenhof check and local uncertainty measurements;
//! * [`covering`]: mass-2 ball selection and the greedy Besicovitch covering;
//! * [`certificate`]: the numeric replay of the covering proof for one
//!   ensemble;
//! * [`optimize`]: projected gradient descent over orthonormal frames;
//! * [`generate`]: deterministic ensemble generators used by tests and the CLI.
//!
//! Enable the `parallel` feature (implies `std`) to run independent per-ball
//! work on the rayon thread pool. Results are identical either way.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod certificate;
pub mod covering;
mod error;
pub mod fields;
pub mod generate;
pub mod optimize;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
