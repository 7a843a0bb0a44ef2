//! Random linear combinations of orthonormal polynomials on the unit circle.
//!
//! The pieces: complex polynomial arithmetic, orthonormal bases from
//! Verblunsky coefficients, reproducing kernels, zero intensities, zero counting,
//! Monte Carlo ensembles and the limiting variance of annulus counts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cpoly;
pub mod error;
pub mod intensity;
pub mod kernel;
pub mod mc;
pub mod opuc;
pub mod quad;
pub mod varlim;
pub mod zerocount;

pub use cpoly::ComplexPoly;
pub use error::{Error, Result};
pub use mc::{CoeffModel, EnsembleStats};
pub use num_complex::Complex64;
pub use opuc::{OpucBasis, VerblunskySeq, VerblunskySource, WeightSpec};
pub use zerocount::Region;
