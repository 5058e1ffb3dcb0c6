//! Finite-difference solvers for a two-regime indifference pricing system
//! with exponential coupling between the regimes.

pub mod analysis;
pub mod cli_io;
pub mod error;
pub mod mesh;
pub mod model;
pub mod schemes;
pub mod tridiag;

pub use error::{Error, ErrorKind, Result};
