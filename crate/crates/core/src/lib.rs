//! Numerical toolkit for weighted composition operators `f ↦ u·(f∘φ)`
//! between Hardy spaces of the unit disk.

pub mod error;
pub mod estimators;
pub mod funcspace;
pub mod kernels;
pub mod measures;
pub mod report;
pub mod scenario;
pub mod selftest;
pub mod smoothing;
pub mod truncation;
pub mod verdict;

pub use error::{Error, Result};
pub use verdict::Verdict;
