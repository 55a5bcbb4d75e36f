//! Last passage times of one-dimensional transient diffusions.
//!
//! The pipeline runs from a [`DiffusionSpec`] through its fundamental
//! solutions ([`eigen`]) to Green functions of the original and reflected
//! processes ([`green`]), and from there to the Laplace transform, density
//! and distribution of the last passage time at a level ([`lastpassage`]).
//! [`mc`] supplies an independent Monte Carlo estimate of the same law.

// `!(a < b)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod diffusion;
pub mod document;
pub mod eigen;
pub mod error;
pub mod green;
pub mod inversion;
pub mod lastpassage;
pub mod mc;
pub mod ode;
pub mod quad;
pub mod special;
pub mod switching;
pub mod validation;

pub use diffusion::{Case, CaseClass, DiffusionSpec, Family, GenericCoefficients, Interval, Regime};
pub use error::{Error, Result};
