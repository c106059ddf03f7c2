//! Leapfrog finite elements for the 1D scalar wave equation with
//! C⁰/C² time reconstructions and a damped-energy a posteriori error
//! estimator.

pub mod benchmarks;
pub mod damped_norms;
pub mod error;
pub mod estimator;
pub mod fem1d;
pub mod reconstruct;
pub mod streaming;
pub mod timestepping;

pub use error::{Error, Result};
