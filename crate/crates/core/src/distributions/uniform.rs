use super::{check_probability, Distribution};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform<T> {
    lower: T,
    upper: T,
}

impl<T: Scalar> Uniform<T> {
    pub fn new(lower: T, upper: T) -> Result<Self> {
        if lower.is_finite() && upper.is_finite() && lower < upper {
            Ok(Self { lower, upper })
        } else {
            Err(Error::domain(format!("uniform needs finite lower < upper, got ({lower}, {upper})")))
        }
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    fn width(&self) -> T {
        self.upper - self.lower
    }
}

impl<T: Scalar> Distribution<T> for Uniform<T> {
    fn cdf(&self, x: T) -> T {
        ((x - self.lower) / self.width()).max(T::zero()).min(T::one())
    }

    fn sf(&self, x: T) -> T {
        ((self.upper - x) / self.width()).max(T::zero()).min(T::one())
    }

    fn pdf(&self, x: T) -> T {
        if x >= self.lower && x <= self.upper {
            T::one() / self.width()
        } else {
            T::zero()
        }
    }

    fn support_lower(&self) -> T {
        self.lower
    }

    fn support_upper(&self) -> T {
        self.upper
    }

    fn quantile(&self, p: T) -> Result<T> {
        check_probability(p)?;
        Ok(self.lower + p * self.width())
    }

    fn isf(&self, q: T) -> Result<T> {
        check_probability(q)?;
        Ok(self.upper - q * self.width())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_inside_clamped_outside() {
        let u = Uniform::new(0.5_f64, 2.5).unwrap();
        assert_eq!(u.cdf(1.5), 0.5);
        assert_eq!(u.cdf(0.0), 0.0);
        assert_eq!(u.cdf(9.0), 1.0);
        assert_eq!(u.pdf(1.0), 0.5);
        assert_eq!(u.pdf(3.0), 0.0);
        assert!(Uniform::new(1.0_f64, 1.0).is_err());
    }
}
