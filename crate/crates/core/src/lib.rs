//! Finite-type constant-mean-curvature and minimal surfaces from polynomial Killing fields.
//!
//! The numerics are generic over the real scalar type ([`scalar::Real`], implemented for
//! `f32` and `f64`); the aliases below fix the working precision to `f64`.

pub mod error;
pub mod blowup;
pub mod factorize;
pub mod invariants;
pub mod io;
pub mod loopalg;
pub mod potential;
pub mod sample;
pub mod scalar;
pub mod shell;
pub mod spectral;
pub mod surface;
pub mod zeroflow;

pub use error::{Error, Result};

/// Working-precision real type.
pub type Float = f64;
/// Complex number in working precision.
pub type Complex = scalar::Cx<f64>;
/// 2×2 complex matrix in working precision.
pub type Mat2 = loopalg::Mat2<f64>;
/// Matrix Laurent polynomial in working precision.
pub type MatLaurent = loopalg::MatLaurent<f64>;
/// Scalar Laurent polynomial in working precision.
pub type ScalarLaurent = loopalg::ScalarLaurent<f64>;
/// CMC potential in working precision.
pub type CmcPotential = potential::CmcPotential<f64>;
/// KdV potential in working precision.
pub type KdvPotential = potential::KdvPotential<f64>;
/// Spectral data in working precision.
pub type SpectralData = spectral::SpectralData<f64>;
