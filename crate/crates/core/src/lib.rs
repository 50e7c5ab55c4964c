//! Random-difference Szemerédi thresholds over Z/N, and exact finite checks of
//! the sign-average, matrix-embedding and polynomial-concentration steps that
//! bound them.

pub mod counting;
pub mod discrepancy;
pub mod error;
pub mod group;
pub mod intersectivity;
pub mod kimvu;
pub mod matrix;
pub mod report;
pub mod rng;

pub use counting::{DifferenceSequence, RationalCount, SubsetMask};
pub use error::{Error, Result};
pub use group::{ApParams, Group};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
