use super::{check_probability, Distribution};
use crate::{Error, Result, Scalar};

/// Exponential law with hazard `rate`: `F(x) = 1 - e^{-rate x}`, mean `1/rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential<T> {
    rate: T,
}

impl<T: Scalar> Exponential<T> {
    pub fn new(rate: T) -> Result<Self> {
        if rate > T::zero() && rate.is_finite() {
            Ok(Self { rate })
        } else {
            Err(Error::domain(format!("exponential rate must be positive and finite, got {rate}")))
        }
    }

    /// Scale (mean) parameterization, `F(x) = 1 - e^{-x/scale}`.
    pub fn with_scale(scale: T) -> Result<Self> {
        if scale > T::zero() && scale.is_finite() {
            Self::new(T::one() / scale)
        } else {
            Err(Error::domain(format!("exponential scale must be positive and finite, got {scale}")))
        }
    }

    pub fn rate(&self) -> T {
        self.rate
    }

    pub fn scale(&self) -> T {
        T::one() / self.rate
    }
}

impl<T: Scalar> Distribution<T> for Exponential<T> {
    fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            T::zero()
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn sf(&self, x: T) -> T {
        if x <= T::zero() {
            T::one()
        } else {
            (-self.rate * x).exp()
        }
    }

    fn pdf(&self, x: T) -> T {
        if x < T::zero() {
            T::zero()
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn support_lower(&self) -> T {
        T::zero()
    }

    fn support_upper(&self) -> T {
        T::infinity()
    }

    fn quantile(&self, p: T) -> Result<T> {
        check_probability(p)?;
        Ok(-(-p).ln_1p() / self.rate)
    }

    fn isf(&self, q: T) -> Result<T> {
        check_probability(q)?;
        Ok(-q.ln() / self.rate)
    }
}
