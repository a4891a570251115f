//! Interval (doubly truncated) weighted cumulative residual and past
//! entropies for lifetime distributions, together with the bound checkers
//! and independent oracles used to cross-validate them.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the bottom of this file fix the scalar to `f64`, which is what
//! the command-line front end and the report types use.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod distributions;
pub mod entropy;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod weights;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Floating point scalar every numerical routine is generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub type QuadratureConfig64 = numerics::QuadratureConfig<f64>;
pub type IntegrationResult64 = numerics::IntegrationResult<f64>;

pub type Exponential64 = distributions::Exponential<f64>;
pub type Uniform64 = distributions::Uniform<f64>;
pub type Gev64 = distributions::Gev<f64>;
pub type Empirical64 = distributions::Empirical<f64>;
pub type Dist64 = distributions::Dist<f64>;

pub type PolynomialWeight64 = weights::PolynomialWeight<f64>;
pub type ExponentialWeight64 = weights::ExponentialWeight<f64>;
pub type GevPolynomialWeight64 = weights::GevPolynomialWeight<f64>;
pub type Weight64 = weights::Weight<f64>;

pub type TruncationInterval64 = entropy::TruncationInterval<f64>;
pub type EntropyValue64 = entropy::EntropyValue<f64>;
pub type McEstimate64 = oracle::McEstimate<f64>;

pub type Exponential32 = distributions::Exponential<f32>;
pub type Uniform32 = distributions::Uniform<f32>;
pub type Gev32 = distributions::Gev<f32>;
pub type Weight32 = weights::Weight<f32>;
