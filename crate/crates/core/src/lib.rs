//! Conditional eigenvector overlaps of the complex Ginibre ensemble.
//!
//! Exact finite-N kernels and their bulk and edge limits, three independent oracles
//! (moment-matrix inversion, small-N quadrature, Monte Carlo) and a simulator for the
//! eigenvalue SDE of Brownian motion on normal matrices.

pub mod cli;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod mcharness;
pub mod momentmatrix;
pub mod normalsde;
pub mod overlaps;
pub mod quadrature;
pub mod scaledarith;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scaledarith::ScaledComplex;
