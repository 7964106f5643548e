//! Numerical lab for Christoffel-Darboux kernels of Jacobi matrices whose
//! entries follow a periodic envelope: exactly or asymptotically periodic,
//! periodically modulated (unbounded) and periodic blends.
//!
//! The modules build on each other bottom-up:
//! [`params`] defines coefficient models, [`poly`] evaluates orthonormal
//! polynomials, [`transfer`] handles 2x2 transfer matrices, [`equilibrium`]
//! computes band sets and densities, [`kernel`] the kernels themselves and
//! [`oscsum`] the weighted phase sums behind the limit laws.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod kernel;
pub mod numeric;
pub mod oracles;
pub mod oscsum;
pub mod params;
pub mod poly;
pub mod transfer;

pub use error::{LabError, Result};
