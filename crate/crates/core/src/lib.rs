//! Coherent phase, energy and amplitude estimation at desk scale.
//!
//! The crate builds the amplifying and Jacobi-Anger polynomials, manipulates
//! block-encodings as dense matrices, simulates the estimators as quantum
//! channels and evaluates closed-form query costs.

pub mod error;
pub mod numerics;
pub mod polynomials;
pub mod blockenc;
pub mod estimators;
pub mod costs;
pub mod cli;

pub use error::{Error, Result};
