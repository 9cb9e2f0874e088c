//! Pseudo-spectral laboratory for nonlocal Choquard-type equations
//!
//! The crate solves two related problems on a periodic cube:
//! the autonomous limit equation
//!   -Δu + a u = (I_α * F(u)) f(u)
//! and the penalized semiclassical equation with a multi-well
//! potential, where I_α is the Riesz potential. Fields live on a
//! uniform grid, derivatives and convolutions are spectral, and the
//! nonlocal term uses zero-padded transforms so bumps do not see
//! their periodic images.

pub mod ansatz;
pub mod decay;
pub mod energy;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod hls;
pub mod io;
pub mod limit;
pub mod saddle;
pub mod sweep;
pub mod symmetry;
pub mod nonlinearity;
pub mod ops;
pub mod penalize;
pub mod potential;
pub mod riesz;
pub mod special;

pub use error::{CoreError, Result};
pub use field::ScalarField;
pub use grid::GridSpec;
pub use riesz::{RieszOperator, ZeroModeRule};
