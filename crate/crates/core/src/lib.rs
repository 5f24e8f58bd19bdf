//! Multiple operator integrals on finite-dimensional Hilbert spaces.
//!
//! Spectral measures are finite families of orthogonal projections, integrands
//! are given by explicit tensor representations (projective, Haagerup chain,
//! Haagerup-like of the first and second kind), and every weak-operator limit
//! becomes a finite sum. On top of the evaluators sit Schatten-norm bound
//! checks and generators for the extremal constructions on the cyclic group.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod integrand;
pub mod linalg;
pub mod moi;
pub mod random;
pub mod sharpness;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SchattenExponent};
pub use nalgebra;
pub use num_complex::Complex64;
