//! Numerical and algebraic tools for spherical cone metrics on surfaces.

pub mod angles;
pub mod cli;
pub mod error;
pub mod factorization;
pub mod fit;
pub mod liouville;
pub mod pairing;
pub mod verify;
pub mod quadrature;
pub mod spectrum;

pub use error::{Error, Result};
