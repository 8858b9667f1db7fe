//! Numerical toolkit for Chébli–Trimèche hypergroups built from Sturm–Liouville
//! coefficients with low-regularity derivatives.
//!
//! The pipeline runs bottom-up:
//!
//! * [`coefficients`]: the coefficient `A`, its Liouville potential and tail variation;
//! * [`eigenfunctions`]: Jost solutions by Neumann iteration and normalized characters;
//! * [`spectral`]: the character transform and its calibrated Plancherel density;
//! * [`convolution`]: product-formula measures and the discretized measure algebra;
//! * [`asymptotics`]: recentred families `ν_{x,y}`, their limits `ν_x` and `ν_∞`;
//! * [`decision`]: zero-set criteria, Beurling weights and centre comparisons.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod coefficients;
pub mod convolution;
pub mod decision;
pub mod eigenfunctions;
mod error;
pub mod measure;
pub mod quadrature;
pub mod spectral;
pub mod special;

pub use error::{Error, Result};
