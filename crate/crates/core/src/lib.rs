//! Extrinsic geometry of parametrized surfaces immersed in Euclidean 4-space.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides
//!
//! - [`euclid4`]: vectors of E⁴, small matrices and 2×2 symmetric operators;
//! - [`jets`]: immersion patches and their position/derivative jets, either
//!   from analytic callbacks or from finite differences;
//! - [`surface`]: adapted frames, the second fundamental form, shape
//!   operators, curvatures, connection forms and Gauss/Codazzi/Ricci residuals;
//! - [`position`]: the tangential/normal split of the position vector and the
//!   surface-class detectors (constant ratio, T-/N-constant, GCR, constant slope);
//! - [`families`]: the constant-slope and GCR example families with analytic jets;
//! - [`classification`]: Runge–Kutta integration of the reduced ODEs, closed-form
//!   models and position ODE/PDE residuals, bundled by [`classification::verify_classification`].
//!
//! The std companion crate `e4surf` wires these into a CLI.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod classification;
pub mod euclid4;
pub mod families;
pub mod jets;
pub mod position;
pub mod surface;

pub use error::GeomError;
pub use euclid4::{Mat4, SymOp2, Vec4};
pub use jets::{DiffScheme, Domain, ImmersionPatch, Jet2, Numerics, Stencil, Surface};

pub type Result<T> = core::result::Result<T, GeomError>;
