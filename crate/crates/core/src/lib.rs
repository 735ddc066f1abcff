//! Time-dependent van der Waals forces between two two-level atoms, one of
//! which is suddenly excited at `T = 0`.
//!
//! All quantities are in natural units `ħ = c = ε₀ = 1`. The separation
//! vector `R` points from atom A (initially excited) to atom B and every
//! gradient is taken with respect to `R`.

pub mod error;
pub mod figure;
pub mod dissimilar;
pub mod green;
pub mod identical;
pub mod options;
pub mod orientation;
pub mod params;
pub mod quadrature;
pub mod verification;

pub use error::{Error, Result};
