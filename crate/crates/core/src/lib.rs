//! Two-dimensional incompressible Navier-Stokes flow outside a disk, with
//! Lamb-Oseen vortex diagnostics.

pub mod analytic;
pub mod elliptic;
pub mod error;
pub mod evolve;
pub mod fields;
pub mod geometry;
pub mod harness;

pub use error::{Error, Result};
pub use fields::{lp_norm, weak_l2_quasinorm, ScalarField, VectorField};
pub use geometry::Grid;
