use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::truncation::{EntropyValue, Method, TruncationInterval};
use crate::distributions::{require_density, Distribution};
use crate::numerics::{integrate, try_integrate, xlogx_clamped, IntegrationResult, QuadratureConfig};
use crate::weights::{effective_upper, validate_nonnegative, ConstantOne, WeightFunction};
use crate::{Error, Result, Scalar};

/// Which of the two interval measures an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Residual form, built on the survival function.
    Iwcre,
    /// Past form, built on the distribution function.
    Iwce,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Iwcre => "iwcre",
            Measure::Iwce => "iwce",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iwcre" => Ok(Measure::Iwcre),
            "iwce" => Ok(Measure::Iwce),
            other => Err(Error::domain(format!("unknown measure {other:?}"))),
        }
    }
}

pub fn truncated_cdf<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, iv: &TruncationInterval<T>, x: T) -> Result<T> {
    check_inside(iv, x)?;
    Ok(iv.trunc_cdf_from(dist.cdf(x), dist.sf(x)))
}

pub fn truncated_sf<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, iv: &TruncationInterval<T>, x: T) -> Result<T> {
    check_inside(iv, x)?;
    Ok(iv.trunc_sf_from(dist.cdf(x), dist.sf(x)))
}

fn check_inside<T: Scalar>(iv: &TruncationInterval<T>, x: T) -> Result<()> {
    if iv.contains(x) {
        Ok(())
    } else {
        Err(Error::domain(format!("x = {x} outside the window [{}, {}]", iv.t1(), iv.t2())))
    }
}

pub(crate) fn require_nonnegative_weight<T, D, W>(dist: &D, wf: &W, lo: T, hi: T) -> Result<()>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let lo = lo.max(dist.support_lower());
    let hi = effective_upper(dist, lo, hi.min(dist.support_upper()));
    if hi > lo {
        validate_nonnegative(wf, lo, hi).into_result()
    } else {
        Ok(())
    }
}

/// `∫_a^b φ(x) g(F(x), F̄(x)) dx`.
///
/// Step distributions are summed exactly piece by piece as
/// `g(F, F̄) (ψ(hi) - ψ(lo))`; everything else goes through adaptive
/// quadrature with the support bounds added as split points.
pub(crate) fn integrate_cdf_functional<T, D, W, G>(
    dist: &D,
    wf: &W,
    a: T,
    b: T,
    cfg: &QuadratureConfig<T>,
    g: G,
) -> Result<IntegrationResult<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
    G: Fn(T, T) -> T,
{
    if let Some(emp) = dist.as_empirical() {
        let mut total = T::zero();
        let mut failure = None;
        emp.for_each_piece(a, b, |lo, hi, cdf, sf| {
            let v = g(cdf, sf);
            if v == T::zero() || failure.is_some() {
                return;
            }
            let dpsi = wf.psi(hi) - wf.psi(lo);
            let term = v * dpsi;
            if term.is_finite() {
                total = total + term;
            } else {
                failure = Some(Error::NonFinite {
                    x: crate::to_f64(lo),
                    value: crate::to_f64(term),
                });
            }
        });
        return match failure {
            Some(e) => Err(e),
            None => Ok(IntegrationResult::exact(total)),
        };
    }
    let cfg = cfg.clone().with_split_points([dist.support_lower(), dist.support_upper()]);
    integrate(
        |x| {
            let v = g(dist.cdf(x), dist.sf(x));
            if v == T::zero() {
                return T::zero();
            }
            let w = wf.phi(x);
            if w == T::zero() {
                T::zero()
            } else {
                w * v
            }
        },
        a,
        b,
        &cfg,
    )
}

fn finish<T: Scalar>(r: IntegrationResult<T>, method: Method) -> Result<EntropyValue<T>> {
    let value = r.converged_value()?;
    Ok(EntropyValue::new(value, method, r.error_estimate))
}

fn method_for<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D) -> Method {
    if dist.as_empirical().is_some() {
        Method::ClosedForm
    } else {
        Method::Quadrature
    }
}

/// Weighted cumulative residual entropy `-∫ φ F̄ log F̄` over the support.
pub fn wcre<T, D, W>(dist: &D, wf: &W, cfg: &QuadratureConfig<T>) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let (lo, hi) = (dist.support_lower(), dist.support_upper());
    require_nonnegative_weight(dist, wf, lo, hi)?;
    let r = integrate_cdf_functional(dist, wf, lo, hi, cfg, |_, sf| -xlogx_clamped(sf))?;
    finish(r, method_for(dist))
}

/// Weighted cumulative (past) entropy `-∫ φ F log F` over the support.
pub fn wce<T, D, W>(dist: &D, wf: &W, cfg: &QuadratureConfig<T>) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let (lo, hi) = (dist.support_lower(), dist.support_upper());
    require_nonnegative_weight(dist, wf, lo, hi)?;
    let r = integrate_cdf_functional(dist, wf, lo, hi, cfg, |cdf, _| -xlogx_clamped(cdf))?;
    finish(r, method_for(dist))
}

/// On an unbounded window the integrand tends to `φ(x) g(1, 0)`. When that
/// limit is nonzero and `ψ(∞)` is infinite the integral diverges, which
/// happens for the ratio-convention IWCE whenever `F(t1) > 0`.
fn check_tail<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, measure: Measure) -> Result<()>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    if iv.t2().is_finite() || dist.support_upper().is_finite() || dist.as_empirical().is_some() {
        return Ok(());
    }
    let tail = match measure {
        Measure::Iwcre => -xlogx_clamped(iv.trunc_sf_from(T::one(), T::zero())),
        Measure::Iwce => -xlogx_clamped(iv.trunc_cdf_from(T::one(), T::zero())),
    };
    if tail.abs() > crate::lit(1e-9) && !wf.psi(T::infinity()).is_finite() {
        return Err(Error::NonFinite {
            x: f64::INFINITY,
            value: if tail > T::zero() { f64::INFINITY } else { f64::NEG_INFINITY },
        });
    }
    Ok(())
}

pub(crate) fn interval_measure<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    measure: Measure,
    cfg: &QuadratureConfig<T>,
) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_nonnegative_weight(dist, wf, iv.t1(), iv.t2())?;
    check_tail(dist, wf, iv, measure)?;
    let r = match measure {
        Measure::Iwcre => integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, |cdf, sf| {
            -xlogx_clamped(iv.trunc_sf_from(cdf, sf))
        })?,
        Measure::Iwce => integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, |cdf, sf| {
            -xlogx_clamped(iv.trunc_cdf_from(cdf, sf))
        })?,
    };
    finish(r, method_for(dist))
}

/// Interval weighted cumulative residual entropy under the window's convention.
pub fn iwcre<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    interval_measure(dist, wf, iv, Measure::Iwcre, cfg)
}

/// Interval weighted cumulative (past) entropy under the window's convention.
pub fn iwce<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    interval_measure(dist, wf, iv, Measure::Iwce, cfg)
}

pub fn icre<T, D>(dist: &D, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
{
    iwcre(dist, &ConstantOne, iv, cfg)
}

pub fn icpe<T, D>(dist: &D, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
{
    iwce(dist, &ConstantOne, iv, cfg)
}

/// `E[g(X) | t1 < X <= t2]`, by quadrature against the density or as an
/// atom sum for step distributions.
pub fn conditional_expectation<T, D, G>(dist: &D, t1: T, t2: T, mut g: G, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    G: FnMut(T) -> T,
{
    try_conditional_expectation(dist, t1, t2, |x| Ok(g(x)), cfg)
}

/// [`conditional_expectation`] for a fallible `g`.
pub(crate) fn try_conditional_expectation<T, D, G>(dist: &D, t1: T, t2: T, mut g: G, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    G: FnMut(T) -> Result<T>,
{
    let mass = dist.mass(t1, t2);
    if !(t2 > t1) || !(mass > T::zero()) {
        return Err(Error::DegenerateInterval {
            t1: crate::to_f64(t1),
            t2: crate::to_f64(t2),
            mass: crate::to_f64(mass),
        });
    }
    if let Some(emp) = dist.as_empirical() {
        let mut total = T::zero();
        let mut failure = None;
        emp.for_each_atom(t1, t2, |x, w| {
            if failure.is_none() {
                match g(x) {
                    Ok(v) => total = total + w * v,
                    Err(e) => failure = Some(e),
                }
            }
        });
        return match failure {
            Some(e) => Err(e),
            None => Ok(total / mass),
        };
    }
    let cfg = cfg.clone().with_split_points([dist.support_lower(), dist.support_upper()]);
    let r = try_integrate(
        |x| {
            let f = dist.pdf(x);
            if f == T::zero() {
                return Ok(T::zero());
            }
            let v = g(x)?;
            if v.is_finite() {
                Ok(v * f)
            } else {
                Err(Error::NonFinite {
                    x: crate::to_f64(x),
                    value: crate::to_f64(v),
                })
            }
        },
        t1,
        t2,
        &cfg,
    )?;
    Ok(r.converged_value()? / mass)
}

/// Shannon entropy of the window density `f / Δ`.
pub fn interval_shannon_entropy<T, D>(dist: &D, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
{
    require_density(dist, "interval Shannon entropy")?;
    let mass = iv.mass();
    let cfg = cfg.clone().with_split_points([dist.support_lower(), dist.support_upper()]);
    let r = integrate(|x| -xlogx_clamped(dist.pdf(x) / mass), iv.t1(), iv.t2(), &cfg)?;
    r.converged_value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Empirical, Exponential, Uniform};
    use crate::entropy::TruncationConvention::{Proper, Ratio};
    use crate::weights::{ExponentialWeight, PolynomialWeight, Scaled};

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn ratio_iwce_diverges_on_an_unbounded_window() {
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, 0.5, f64::INFINITY, Ratio).unwrap();
        assert!(matches!(iwce(&e, &ConstantOne, &iv, &cfg()), Err(Error::NonFinite { .. })));
        let fast_decay = ExponentialWeight::new(-2.0).unwrap();
        assert!(iwce(&e, &fast_decay, &iv, &cfg()).is_ok());
        let proper = iv.with_convention(Proper);
        let v = iwce(&e, &ConstantOne, &proper, &cfg()).unwrap().value;
        assert!((v - 0.6449340668485745).abs() < 1e-8, "{v}");
        assert!(iwcre(&e, &ConstantOne, &iv, &cfg()).is_ok());
    }

    #[test]
    fn truncated_cdf_examples() {
        let u = Uniform::new(0.0_f64, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, Ratio).unwrap();
        assert!((truncated_cdf(&u, &iv, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let p = iv.with_convention(Proper);
        assert_eq!(truncated_cdf(&u, &p, 0.2).unwrap(), 0.0);
        assert!((truncated_cdf(&u, &p, 0.7).unwrap() - 1.0).abs() < 1e-15);
        assert!((truncated_sf(&u, &p, 0.2).unwrap() - 1.0).abs() < 1e-15);
        assert!(truncated_cdf(&u, &iv, 0.8).is_err());
        let e = Exponential::new(1.0).unwrap();
        let full = TruncationInterval::new(&e, 0.0, f64::INFINITY, Ratio).unwrap();
        assert_eq!(truncated_cdf(&e, &full, 2.0).unwrap(), e.cdf(2.0));
    }

    #[test]
    fn whole_line_measures() {
        let e = Exponential::new(1.0).unwrap();
        assert!((wcre(&e, &ConstantOne, &cfg()).unwrap().value - 1.0).abs() < 1e-8);
        let u = Uniform::new(0.0, 1.0).unwrap();
        assert!((wcre(&u, &ConstantOne, &cfg()).unwrap().value - 0.25).abs() < 1e-10);
        assert!((wce(&u, &ConstantOne, &cfg()).unwrap().value - 0.25).abs() < 1e-10);
        let scaled = Scaled::new(ExponentialWeight::new(0.3).unwrap(), 2.5).unwrap();
        let base = wcre(&e, &ExponentialWeight::new(0.3).unwrap(), &cfg()).unwrap().value;
        assert!((wcre(&e, &scaled, &cfg()).unwrap().value - 2.5 * base).abs() < 1e-8);
    }

    #[test]
    fn uniform_icpe_anchor() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, Ratio).unwrap();
        let anti = |v: f64| v * v / 2.0 * v.ln() - v * v / 4.0;
        let exact = -0.5 * (anti(1.4) - anti(0.4));
        assert!((icpe(&u, &iv, &cfg()).unwrap().value - exact).abs() < 1e-10);
        assert!((exact - 0.02348).abs() < 1e-5);
    }

    #[test]
    fn full_window_recovers_whole_line() {
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, 0.0, f64::INFINITY, Ratio).unwrap();
        let w = ExponentialWeight::new(0.3).unwrap();
        let a = iwcre(&e, &w, &iv, &cfg()).unwrap().value;
        let b = wcre(&e, &w, &cfg()).unwrap().value;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn proper_convention_is_nonnegative() {
        let e = Exponential::new(0.7).unwrap();
        let w = PolynomialWeight::new(vec![1.0, 0.5]).unwrap();
        for (t1, t2) in [(0.0, 0.3), (0.4, 2.0), (3.0, 9.0)] {
            let iv = TruncationInterval::new(&e, t1, t2, Proper).unwrap();
            assert!(iwcre(&e, &w, &iv, &cfg()).unwrap().value >= 0.0);
            assert!(iwce(&e, &w, &iv, &cfg()).unwrap().value >= 0.0);
        }
    }

    #[test]
    fn negative_weight_rejected() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, Ratio).unwrap();
        let w = PolynomialWeight::new(vec![0.0, -1.0]).unwrap();
        assert!(matches!(iwce(&u, &w, &iv, &cfg()), Err(Error::NegativeWeight { .. })));
    }

    #[test]
    fn empirical_sum_matches_hand_computation() {
        let emp = Empirical::from_samples(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let iv = TruncationInterval::new(&emp, 0.0, 4.0, Ratio).unwrap();
        let expected: f64 = [0.25_f64, 0.5, 0.75].iter().map(|p| -p * p.ln()).sum();
        let v = icpe(&emp, &iv, &cfg()).unwrap();
        assert!((v.value - expected).abs() < 1e-14);
    }

    #[test]
    fn shannon_examples() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, Ratio).unwrap();
        assert!((interval_shannon_entropy(&u, &iv, &cfg()).unwrap() - 0.5_f64.ln()).abs() < 1e-9);
        let full = TruncationInterval::new(&u, 0.0, 1.0, Ratio).unwrap();
        assert!(interval_shannon_entropy(&u, &full, &cfg()).unwrap().abs() < 1e-12);
        let emp = Empirical::from_samples(vec![1.0, 2.0]).unwrap();
        let iv = TruncationInterval::new(&emp, 0.0, 3.0, Ratio).unwrap();
        assert!(matches!(interval_shannon_entropy(&emp, &iv, &cfg()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn conditional_mean_uniform() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let m = conditional_expectation(&u, 0.2, 0.7, |x| x, &cfg()).unwrap();
        assert!((m - 0.45).abs() < 1e-12);
    }
}
