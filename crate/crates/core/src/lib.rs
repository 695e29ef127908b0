//! Numerical toolkit for the antisymmetric fractional Laplacian on the
//! half-space.
//!
//! The numeric layers ([`special`], [`point`], [`quad`], [`kernel`]) are
//! generic over the scalar type; the model layers work in `f64`, and the
//! crate root re-exports `f64` aliases of the generic types.

pub mod cli;
pub mod error;
pub mod fields;
pub mod fraclap;
pub mod harnack;
pub mod kernel;
pub mod point;
pub mod poisson;
pub mod quad;
pub mod scalar;
pub mod special;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::Real;

/// Dimension and fractional order in `f64`.
pub type Params = special::Params<f64>;
/// Point of ℝⁿ in `f64`.
pub type Point = point::Point<f64>;
/// Quadrature configuration in `f64`.
pub type QuadSpec = quad::QuadSpec<f64>;
/// Quadrature estimate in `f64`.
pub type Estimate = quad::Estimate<f64>;
