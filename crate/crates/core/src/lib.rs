//! Fractional calculus on weighted grids, a product-integration solver for
//! two-term Riemann-Liouville initial value problems, and numerical probes of
//! finite-time blow-up.
//!
//! The problem family is
//!
//! ```text
//! D^α y + D^β y = f(t, y),   I^(1-α) y (0+) = b,   0 ≤ β ≤ α ≤ 1,
//! ```
//!
//! with the power source `f = t^γ |y|^m`. Solutions live in the weighted space
//! where `t^(1-α) y` is continuous, so every grid function here carries an
//! explicit endpoint exponent (see [`fracops::SingularGridFunction`]).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and parallel scans live in the companion `fracblow` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod blowup;
pub mod fracops;
pub mod oracles;
pub mod solver;
pub mod specfun;
pub mod testfn;

pub use error::{Error, Result};
