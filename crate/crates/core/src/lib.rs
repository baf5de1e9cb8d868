//! Time-dependent density-to-potential inversion for one particle on a ring.
//!
//! The pieces, bottom up:
//!
//! - [`grid`]: periodic grid, time grid, fields, quadrature and stencils
//! - [`propagator`]: Crank-Nicolson propagation of the Schrödinger equation
//! - [`observables`]: density, current, stress, and the inversion source term
//! - [`sturm`]: the operator `-d_x [n d_x]`, its spectrum, and its inverse
//! - [`norms`]: spatial p-norms and the exponentially weighted time norm
//! - [`fixedpoint`]: the map `F = V ∘ P` and its iteration
//! - [`endpoint`]: endpoint classification for vanishing densities

pub mod endpoint;
pub mod error;
pub mod fixedpoint;
pub mod grid;
pub mod norms;
pub mod observables;
pub mod propagator;
pub mod sturm;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Closure, Grid1D, SpaceTimeField, TimeGrid, WaveTrajectory};
pub use observables::DensityTrajectory;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
