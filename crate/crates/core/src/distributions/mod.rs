//! Lifetime distributions: exponential, uniform, GEV (ξ > 0) and the
//! empirical step distribution built from data.

mod empirical;
mod exponential;
mod gev;
mod uniform;

use std::fmt;

use rand::distributions::Open01;
use rand::{Rng, RngCore};

pub use empirical::Empirical;
pub use exponential::Exponential;
pub use gev::Gev;
pub use uniform::Uniform;

use crate::{lit, to_f64, Error, Result, Scalar};

/// A univariate distribution on (a subset of) the nonnegative half line.
pub trait Distribution<T: Scalar>: fmt::Debug + Send + Sync {
    fn cdf(&self, x: T) -> T;

    fn sf(&self, x: T) -> T;

    /// Density. NaN when [`Distribution::has_density`] is false.
    fn pdf(&self, x: T) -> T;

    fn has_density(&self) -> bool {
        true
    }

    fn support_lower(&self) -> T;

    /// `+inf` for unbounded support.
    fn support_upper(&self) -> T;

    /// Generalized inverse of the CDF for `p` in `(0, 1)`. The default
    /// brackets the root and bisects.
    fn quantile(&self, p: T) -> Result<T> {
        bracketing_bisection(self, p)
    }

    /// Inverse survival function, `x` with `sf(x) = q`. Overridden where
    /// `quantile(1 - q)` would lose the upper tail to rounding.
    fn isf(&self, q: T) -> Result<T> {
        self.quantile(T::one() - q)
    }

    /// `P(a < X <= b)`, computed from whichever tail keeps precision.
    fn mass(&self, a: T, b: T) -> T {
        let fa = self.cdf(a);
        if fa <= lit(0.5) {
            self.cdf(b) - fa
        } else {
            self.sf(a) - self.sf(b)
        }
    }

    /// Step distributions expose their atoms so integrals of CDF functionals
    /// can be summed exactly instead of integrated numerically.
    fn as_empirical(&self) -> Option<&Empirical<T>> {
        None
    }

    /// `n` independent draws by inverse transform.
    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Result<Vec<T>> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(lit(u))
            })
            .collect()
    }
}

fn check_probability<T: Scalar>(p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("probability {p} outside (0, 1)")))
    }
}

/// Quantile through the distribution's own inverse when it has one,
/// otherwise by [`bracketing_bisection`].
pub fn quantile_bisection<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, p: T) -> Result<T> {
    check_probability(p)?;
    dist.quantile(p)
}

/// Bisection on the CDF, bracket grown geometrically when the support is
/// unbounded. Stops when `|cdf(x) - p| <= 1e-12` or the bracket collapses.
pub fn bracketing_bisection<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, p: T) -> Result<T> {
    check_probability(p)?;
    let mut lo = dist.support_lower();
    let mut hi = dist.support_upper();
    if !lo.is_finite() {
        return Err(Error::Unsupported("bisection needs a finite lower support bound".into()));
    }
    if !hi.is_finite() {
        let mut step = T::one().max(lo.abs());
        hi = lo + step;
        while dist.cdf(hi) < p {
            lo = hi;
            step = step + step;
            hi = hi + step;
            if !hi.is_finite() {
                return Err(Error::domain(format!("no quantile found for p = {p}")));
            }
        }
    }
    let tol: T = lit(1e-12_f64.max(to_f64(T::epsilon())));
    for _ in 0..400 {
        let mid = lo + (hi - lo) * lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        let c = dist.cdf(mid);
        if (c - p).abs() <= tol && c >= p {
            return Ok(mid);
        }
        if c < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Draws from `X | t1 <= X <= t2` by inverting the CDF on a uniform slice
/// of probability, taken from the upper tail when that is more precise.
pub fn truncated_sampler<T: Scalar, D: Distribution<T> + ?Sized>(
    dist: &D,
    t1: T,
    t2: T,
    rng: &mut dyn RngCore,
    n: usize,
) -> Result<Vec<T>> {
    let mass = dist.mass(t1, t2);
    if !(t2 > t1) || !(mass > T::zero()) {
        return Err(Error::DegenerateInterval {
            t1: to_f64(t1),
            t2: to_f64(t2),
            mass: to_f64(mass),
        });
    }
    let f1 = dist.cdf(t1);
    let use_upper = f1 > lit(0.5);
    let (base, s2) = if use_upper {
        (dist.sf(t2), dist.sf(t1))
    } else {
        (f1, dist.cdf(t2))
    };
    let width = s2 - base;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.sample(Open01);
        let p = base + width * lit(u);
        let x = if use_upper { dist.isf(p)? } else { dist.quantile(p)? };
        out.push(x.max(t1).min(t2));
    }
    Ok(out)
}

/// The four supported families behind one value type.
#[derive(Debug, Clone, PartialEq)]
pub enum Dist<T> {
    Exponential(Exponential<T>),
    Uniform(Uniform<T>),
    Gev(Gev<T>),
    Empirical(Empirical<T>),
}

macro_rules! delegate {
    ($self:ident, $d:ident => $e:expr) => {
        match $self {
            Dist::Exponential($d) => $e,
            Dist::Uniform($d) => $e,
            Dist::Gev($d) => $e,
            Dist::Empirical($d) => $e,
        }
    };
}

impl<T: Scalar> Distribution<T> for Dist<T> {
    fn cdf(&self, x: T) -> T {
        delegate!(self, d => d.cdf(x))
    }
    fn sf(&self, x: T) -> T {
        delegate!(self, d => d.sf(x))
    }
    fn pdf(&self, x: T) -> T {
        delegate!(self, d => d.pdf(x))
    }
    fn has_density(&self) -> bool {
        delegate!(self, d => d.has_density())
    }
    fn support_lower(&self) -> T {
        delegate!(self, d => d.support_lower())
    }
    fn support_upper(&self) -> T {
        delegate!(self, d => d.support_upper())
    }
    fn quantile(&self, p: T) -> Result<T> {
        delegate!(self, d => d.quantile(p))
    }
    fn isf(&self, q: T) -> Result<T> {
        delegate!(self, d => d.isf(q))
    }
    fn mass(&self, a: T, b: T) -> T {
        delegate!(self, d => d.mass(a, b))
    }
    fn as_empirical(&self) -> Option<&Empirical<T>> {
        delegate!(self, d => d.as_empirical())
    }
}

impl<T: Scalar> fmt::Display for Dist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Exponential(d) => write!(f, "exp:rate={}", d.rate()),
            Dist::Uniform(d) => write!(f, "uniform:lower={},upper={}", d.lower(), d.upper()),
            Dist::Gev(d) => write!(f, "gev:mu={},sigma={},xi={}", d.mu(), d.sigma(), d.xi()),
            Dist::Empirical(d) => write!(f, "emp:n={}", d.len()),
        }
    }
}

impl<T> From<Exponential<T>> for Dist<T> {
    fn from(d: Exponential<T>) -> Self {
        Dist::Exponential(d)
    }
}
impl<T> From<Uniform<T>> for Dist<T> {
    fn from(d: Uniform<T>) -> Self {
        Dist::Uniform(d)
    }
}
impl<T> From<Gev<T>> for Dist<T> {
    fn from(d: Gev<T>) -> Self {
        Dist::Gev(d)
    }
}
impl<T> From<Empirical<T>> for Dist<T> {
    fn from(d: Empirical<T>) -> Self {
        Dist::Empirical(d)
    }
}

/// Requires a density, as the Shannon-type and hazard-rate quantities do.
pub(crate) fn require_density<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, what: &str) -> Result<()> {
    if dist.has_density() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{what} needs a density; {dist:?} has none")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn parametric() -> Vec<Dist<f64>> {
        vec![
            Exponential::new(1.0).unwrap().into(),
            Exponential::new(2.5).unwrap().into(),
            Uniform::new(0.0, 1.0).unwrap().into(),
            Uniform::new(0.5, 3.0).unwrap().into(),
            Gev::new(2.0, 1.0, 0.5).unwrap().into(),
            Gev::new(1.0, 0.5, 1.5).unwrap().into(),
        ]
    }

    fn interior_points(d: &Dist<f64>, rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| d.quantile(rng.gen_range(0.01..0.99)).unwrap())
            .collect()
    }

    #[test]
    fn cdf_sf_complement_and_monotone() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for d in parametric() {
            let mut xs = interior_points(&d, &mut rng, 200);
            xs.sort_by(f64::total_cmp);
            for w in xs.windows(2) {
                assert!(d.cdf(w[0]) <= d.cdf(w[1]));
            }
            for &x in &xs {
                assert!((d.cdf(x) + d.sf(x) - 1.0).abs() < 1e-12, "{d}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for d in parametric() {
            for x in interior_points(&d, &mut rng, 100) {
                let back = d.quantile(d.cdf(x)).unwrap();
                assert!((back - x).abs() < 1e-8 * x.abs().max(1.0), "{d}: {x} -> {back}");
            }
        }
    }

    #[test]
    fn pdf_is_cdf_derivative() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for d in parametric() {
            for x in interior_points(&d, &mut rng, 100) {
                let h = 1e-5 * x.abs().max(1.0);
                let fd = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
                assert!((fd - d.pdf(x)).abs() < 1e-6, "{d} at {x}: {fd} vs {}", d.pdf(x));
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let cfg = QuadratureConfig::default();
        for d in parametric() {
            let lo = d.support_lower();
            let hi = d.support_upper();
            // heavy GEV tails converge slowly; split at the median
            let med = d.quantile(0.5).unwrap();
            let r = integrate(|x| d.pdf(x), lo, med, &cfg).unwrap().value
                + integrate(|x| d.pdf(x), med, hi, &cfg).unwrap().value;
            assert!((r - 1.0).abs() < 1e-6, "{d}: {r}");
        }
    }

    #[test]
    fn quantile_examples() {
        let e = Exponential::new(1.0_f64).unwrap();
        let q = quantile_bisection(&e, 1.0 - (-1.0_f64).exp()).unwrap();
        assert!((q - 1.0).abs() < 1e-9);
        let u = Uniform::new(0.0_f64, 1.0).unwrap();
        assert!((quantile_bisection(&u, 0.3).unwrap() - 0.3).abs() < 1e-15);
        let emp = Empirical::from_samples(vec![1.0_f64, 2.0, 3.0, 4.0]).unwrap();
        let m = quantile_bisection(&emp, 0.5).unwrap();
        assert!((2.0..=3.0).contains(&m));
        assert_eq!(m, 2.5);
        assert!(quantile_bisection(&e, 0.0).is_err());
        assert!(quantile_bisection(&e, 1.0).is_err());
    }

    #[test]
    fn bisection_matches_closed_forms() {
        for d in parametric() {
            for &p in &[0.001, 0.2, 0.5, 0.93, 0.999] {
                let x = bracketing_bisection(&d, p).unwrap();
                assert!((d.cdf(x) - p).abs() <= 1e-12, "{d} p={p}");
                let closed = d.quantile(p).unwrap();
                assert!((x - closed).abs() < 1e-8 * closed.abs().max(1.0));
            }
        }
    }

    #[test]
    fn truncated_samples_stay_in_window() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for d in parametric() {
            let t1 = d.quantile(0.3).unwrap();
            let t2 = d.quantile(0.8).unwrap();
            for x in truncated_sampler(&d, t1, t2, &mut rng, 2000).unwrap() {
                assert!(x >= t1 && x <= t2);
            }
        }
    }

    #[test]
    fn truncated_uniform_mean() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let u = Uniform::new(0.0_f64, 1.0).unwrap();
        let n = 100_000;
        let xs = truncated_sampler(&u, 0.2, 0.7, &mut rng, n).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // sd of U(0.2, 0.7) is 0.5 / sqrt(12)
        let se = 0.5 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 0.45).abs() < 4.0 * se, "{mean}");
    }

    #[test]
    fn untruncated_exponential_mean() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let e = Exponential::new(1.0_f64).unwrap();
        let n = 100_000;
        let xs = truncated_sampler(&e, 0.0, f64::INFINITY, &mut rng, n).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn degenerate_truncation_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let u = Uniform::new(0.0_f64, 1.0).unwrap();
        assert!(truncated_sampler(&u, 2.0, 3.0, &mut rng, 10).is_err());
        assert!(truncated_sampler(&u, 0.5, 0.5, &mut rng, 10).is_err());
    }

    #[test]
    fn mass_uses_precise_tail() {
        let e = Exponential::new(1.0_f64).unwrap();
        let m = e.mass(40.0, 41.0);
        let exact = (-40.0_f64).exp() - (-41.0_f64).exp();
        assert!((m - exact).abs() < 1e-12 * exact);
    }
}
