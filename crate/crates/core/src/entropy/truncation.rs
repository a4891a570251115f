use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::{lit, to_f64, Error, Result, Scalar};

/// How the window-restricted CDF and SF are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationConvention {
    /// `F(x) / (F(t2) - F(t1))` and `F̄(x) / (F̄(t1) - F̄(t2))`; may exceed 1.
    Ratio,
    /// `(F(x) - F(t1)) / (F(t2) - F(t1))` and `(F̄(x) - F̄(t2)) / (F̄(t1) - F̄(t2))`,
    /// the conditional law of `X | t1 <= X <= t2`.
    Proper,
}

impl TruncationConvention {
    pub const BOTH: [TruncationConvention; 2] = [TruncationConvention::Ratio, TruncationConvention::Proper];

    pub fn as_str(&self) -> &'static str {
        match self {
            TruncationConvention::Ratio => "ratio",
            TruncationConvention::Proper => "proper",
        }
    }
}

impl fmt::Display for TruncationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TruncationConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(TruncationConvention::Ratio),
            "proper" => Ok(TruncationConvention::Proper),
            other => Err(Error::domain(format!("unknown truncation convention {other:?}"))),
        }
    }
}

/// A window `(t1, t2)` with the distribution's endpoint values cached.
///
/// `t2 = +inf` stands for the upper end of the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationInterval<T> {
    t1: T,
    t2: T,
    cdf_t1: T,
    cdf_t2: T,
    sf_t1: T,
    sf_t2: T,
    mass: T,
    convention: TruncationConvention,
}

/// Windows carrying less probability than this are rejected.
pub const MIN_MASS: f64 = 1e-12;

impl<T: Scalar> TruncationInterval<T> {
    pub fn new<D: Distribution<T> + ?Sized>(dist: &D, t1: T, t2: T, convention: TruncationConvention) -> Result<Self> {
        if !(t1 >= T::zero()) || !t1.is_finite() {
            return Err(Error::domain(format!("t1 must be finite and nonnegative, got {t1}")));
        }
        if !(t2 > t1) {
            return Err(Error::DegenerateInterval {
                t1: to_f64(t1),
                t2: to_f64(t2),
                mass: 0.0,
            });
        }
        let mass = dist.mass(t1, t2);
        if !(mass > lit(MIN_MASS)) {
            return Err(Error::DegenerateInterval {
                t1: to_f64(t1),
                t2: to_f64(t2),
                mass: to_f64(mass),
            });
        }
        Ok(Self {
            t1,
            t2,
            cdf_t1: dist.cdf(t1),
            cdf_t2: dist.cdf(t2),
            sf_t1: dist.sf(t1),
            sf_t2: dist.sf(t2),
            mass,
            convention,
        })
    }

    pub fn t1(&self) -> T {
        self.t1
    }
    pub fn t2(&self) -> T {
        self.t2
    }
    pub fn cdf_t1(&self) -> T {
        self.cdf_t1
    }
    pub fn cdf_t2(&self) -> T {
        self.cdf_t2
    }
    pub fn sf_t1(&self) -> T {
        self.sf_t1
    }
    pub fn sf_t2(&self) -> T {
        self.sf_t2
    }
    pub fn convention(&self) -> TruncationConvention {
        self.convention
    }

    /// `Δ = F(t2) - F(t1) = F̄(t1) - F̄(t2)`, taken from the better-conditioned tail.
    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn with_convention(&self, convention: TruncationConvention) -> Self {
        Self { convention, ..*self }
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.t1 && x <= self.t2
    }

    /// `F(x) - F(t1)` from the point's CDF/SF pair.
    #[inline]
    pub(crate) fn lower_gap(&self, cdf: T, sf: T) -> T {
        if self.cdf_t1 <= lit(0.5) {
            cdf - self.cdf_t1
        } else {
            self.sf_t1 - sf
        }
        .max(T::zero())
    }

    /// `F(t2) - F(x)` from the point's CDF/SF pair.
    #[inline]
    pub(crate) fn upper_gap(&self, cdf: T, sf: T) -> T {
        if self.sf_t2 <= lit(0.5) {
            sf - self.sf_t2
        } else {
            self.cdf_t2 - cdf
        }
        .max(T::zero())
    }

    /// Truncated CDF under the interval's convention.
    #[inline]
    pub(crate) fn trunc_cdf_from(&self, cdf: T, sf: T) -> T {
        match self.convention {
            TruncationConvention::Ratio => cdf / self.mass,
            TruncationConvention::Proper => self.lower_gap(cdf, sf) / self.mass,
        }
    }

    /// Truncated SF under the interval's convention.
    #[inline]
    pub(crate) fn trunc_sf_from(&self, cdf: T, sf: T) -> T {
        match self.convention {
            TruncationConvention::Ratio => sf / self.mass,
            TruncationConvention::Proper => self.upper_gap(cdf, sf) / self.mass,
        }
    }

    pub(crate) fn require_ratio(&self, what: &str) -> Result<()> {
        if self.convention == TruncationConvention::Ratio {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{what} is stated for the ratio convention")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedForm,
    EquivalentForm,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
            Method::EquivalentForm => "equivalent_form",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue<T> {
    pub value: T,
    pub method: Method,
    pub error_estimate: T,
}

impl<T: Scalar> EntropyValue<T> {
    pub(crate) fn new(value: T, method: Method, error_estimate: T) -> Self {
        Self {
            value,
            method,
            error_estimate: error_estimate.abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Exponential, Uniform};

    #[test]
    fn caches_endpoint_values() {
        let u = Uniform::new(0.0_f64, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, TruncationConvention::Ratio).unwrap();
        assert_eq!(iv.cdf_t1(), 0.2);
        assert_eq!(iv.sf_t2(), 0.30000000000000004);
        assert!((iv.mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_windows() {
        let u = Uniform::new(0.0_f64, 1.0).unwrap();
        assert!(TruncationInterval::new(&u, 0.5, 0.5, TruncationConvention::Ratio).is_err());
        assert!(TruncationInterval::new(&u, 0.6, 0.5, TruncationConvention::Ratio).is_err());
        assert!(TruncationInterval::new(&u, 2.0, 3.0, TruncationConvention::Ratio).is_err());
        assert!(TruncationInterval::new(&u, -0.1, 0.5, TruncationConvention::Ratio).is_err());
    }

    #[test]
    fn infinite_upper_end() {
        let e = Exponential::new(1.0_f64).unwrap();
        let iv = TruncationInterval::new(&e, 0.0, f64::INFINITY, TruncationConvention::Ratio).unwrap();
        assert_eq!(iv.mass(), 1.0);
        assert_eq!(iv.sf_t2(), 0.0);
    }

    #[test]
    fn convention_parses() {
        assert_eq!("ratio".parse::<TruncationConvention>().unwrap(), TruncationConvention::Ratio);
        assert!("both".parse::<TruncationConvention>().is_err());
    }
}
