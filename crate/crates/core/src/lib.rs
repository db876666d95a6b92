//! Numerical laboratory for lattice orbit counting in products of `SL(n, R)`.

pub mod boundary;
pub mod cli;
pub mod error;
pub mod homspace;
pub mod experiments;
pub mod lattice;
pub mod lie;
pub mod patterson;
pub mod selftest;
pub mod volume;
pub mod wavefront;

pub use error::{CacheErrorKind, Error, Result};
