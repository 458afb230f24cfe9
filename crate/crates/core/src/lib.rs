//! Group-covariant quantum channels built from finite-group data.
//!
//! Two dual channel families act on matrices indexed by a finite group `G`:
//! `Θ(μ)` averages conjugations by the right regular representation against a
//! probability measure `μ`, and `Θ̂(φ)` is Schur multiplication by the
//! correlation matrix of a positive definite function `φ`.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod linalg;
pub mod group;
pub mod rep;
pub mod channel;
pub mod schur;
pub mod spectra;
pub mod fixpoints;
pub mod io;

pub use error::{Error, Result};
