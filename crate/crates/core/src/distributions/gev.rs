use super::{check_probability, Distribution};
use crate::{Error, Result, Scalar};

/// Generalized extreme value law with positive shape,
/// `F(x) = exp(-y(x))`, `y(x) = (1 + ξ (x - μ) / σ)^{-1/ξ}`.
///
/// The support `[μ - σ/ξ, inf)` is required to lie in the nonnegative half
/// line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gev<T> {
    mu: T,
    sigma: T,
    xi: T,
}

impl<T: Scalar> Gev<T> {
    pub fn new(mu: T, sigma: T, xi: T) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && xi.is_finite()) {
            return Err(Error::domain("GEV parameters must be finite"));
        }
        if !(sigma > T::zero()) {
            return Err(Error::domain(format!("GEV scale must be positive, got {sigma}")));
        }
        if !(xi > T::zero()) {
            return Err(Error::domain(format!("GEV shape must be positive, got {xi}")));
        }
        if mu - sigma / xi < T::zero() {
            return Err(Error::domain(format!(
                "GEV support must be nonnegative: mu - sigma/xi = {}",
                mu - sigma / xi
            )));
        }
        Ok(Self { mu, sigma, xi })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn xi(&self) -> T {
        self.xi
    }

    /// `1 + ξ (x - μ) / σ`; nonpositive outside the support.
    pub(crate) fn base(&self, x: T) -> T {
        T::one() + self.xi * (x - self.mu) / self.sigma
    }

    /// The auxiliary `y(x)`, strictly decreasing from `+inf` at the lower
    /// support bound to `0` at infinity.
    pub fn y(&self, x: T) -> Result<T> {
        if x < self.support_lower() || x.is_nan() {
            return Err(Error::domain(format!(
                "x = {x} below GEV support lower bound {}",
                self.support_lower()
            )));
        }
        Ok(self.y_unchecked(x))
    }

    /// `y(x)` with `+inf` at and below the lower support bound.
    pub(crate) fn y_unchecked(&self, x: T) -> T {
        let base = self.base(x);
        if base <= T::zero() {
            T::infinity()
        } else {
            base.powf(-T::one() / self.xi)
        }
    }
}

impl<T: Scalar> Distribution<T> for Gev<T> {
    fn cdf(&self, x: T) -> T {
        (-self.y_unchecked(x)).exp()
    }

    fn sf(&self, x: T) -> T {
        -(-self.y_unchecked(x)).exp_m1()
    }

    fn pdf(&self, x: T) -> T {
        let y = self.y_unchecked(x);
        if y.is_infinite() {
            T::zero()
        } else {
            y.powf(self.xi + T::one()) * (-y).exp() / self.sigma
        }
    }

    fn support_lower(&self) -> T {
        self.mu - self.sigma / self.xi
    }

    fn support_upper(&self) -> T {
        T::infinity()
    }

    fn quantile(&self, p: T) -> Result<T> {
        check_probability(p)?;
        let y = -p.ln();
        Ok(self.mu + self.sigma * (y.powf(-self.xi) - T::one()) / self.xi)
    }

    fn isf(&self, q: T) -> Result<T> {
        check_probability(q)?;
        let y = -(-q).ln_1p();
        Ok(self.mu + self.sigma * (y.powf(-self.xi) - T::one()) / self.xi)
    }
}
