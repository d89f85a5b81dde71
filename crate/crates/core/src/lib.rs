//! Skew-symmetric formulation of the 2D compressible Navier-Stokes
//! equations on diagonal-norm summation-by-parts grids.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// tensor contractions read better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod boundary;
pub mod cli;
pub mod coeffs;
pub mod energy;
pub mod error;
pub mod manufactured;
pub mod reduce;
pub mod sbp;
pub mod solver;
pub mod state;
pub mod viscous;

pub use error::{Error, Result};
