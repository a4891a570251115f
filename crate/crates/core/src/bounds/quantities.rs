use std::cell::Cell;

use serde::Serialize;

use crate::distributions::{require_density, Distribution};
use crate::entropy::{
    conditional_expectation, integrate_cdf_functional, try_conditional_expectation, Measure, TruncationConvention,
    TruncationInterval,
};
use crate::numerics::{integrate, try_integrate, xlogx_clamped, QuadratureConfig};
use crate::oracle::mc_abs_psi_difference;
use crate::weights::WeightFunction;
use crate::{lit, Error, Result, Scalar};

/// `γ(t1, t2) = -∫_{t1}^{t2} φ F log F`, not normalized by the window mass.
pub fn gamma_partial<T, D, W>(dist: &D, wf: &W, t1: T, t2: T, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    check_order(t1, t2)?;
    integrate_cdf_functional(dist, wf, t1, t2, cfg, |cdf, _| -xlogx_clamped(cdf))?.converged_value()
}

/// `γ̄(t1, t2) = -∫_{t1}^{t2} φ F̄ log F̄`.
pub fn gamma_bar_partial<T, D, W>(dist: &D, wf: &W, t1: T, t2: T, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    check_order(t1, t2)?;
    integrate_cdf_functional(dist, wf, t1, t2, cfg, |_, sf| -xlogx_clamped(sf))?.converged_value()
}

fn check_order<T: Scalar>(t1: T, t2: T) -> Result<()> {
    if t1 <= t2 {
        Ok(())
    } else {
        Err(Error::domain(format!("need t1 <= t2, got ({t1}, {t2})")))
    }
}

/// `η(x) = F(x)⁻¹ ∫_0^x φ F`.
pub fn eta<T, D, W>(dist: &D, wf: &W, x: T, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let f = dist.cdf(x);
    if !(f > T::zero()) {
        return Err(Error::domain(format!("η needs F(x) > 0, got F({x}) = {f}")));
    }
    let lo = dist.support_lower().max(T::zero()).min(x);
    let r = integrate_cdf_functional(dist, wf, lo, x, cfg, |cdf, _| cdf)?;
    Ok(r.converged_value()? / f)
}

/// `η̄(x) = F̄(x)⁻¹ ∫_x^∞ φ F̄`.
pub fn eta_bar<T, D, W>(dist: &D, wf: &W, x: T, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let s = dist.sf(x);
    if !(s > T::zero()) {
        return Err(Error::domain(format!("η̄ needs F̄(x) > 0, got F̄({x}) = {s}")));
    }
    let r = integrate_cdf_functional(dist, wf, x, dist.support_upper().max(x), cfg, |_, sf| sf)?;
    Ok(r.converged_value()? / s)
}

/// Conditional means of the weight increments over the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiMoments<T> {
    /// `M = E[ψ(t2) - ψ(X) | t1 <= X <= t2]`.
    #[serde(rename = "M")]
    pub m: T,
    /// `M̄ = E[ψ(X) - ψ(t1) | t1 <= X <= t2]`.
    #[serde(rename = "Mbar")]
    pub m_bar: T,
}

pub fn psi_moments<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<PsiMoments<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let (p1, p2) = (wf.psi(iv.t1()), wf.psi(iv.t2()));
    let mean = conditional_expectation(dist, iv.t1(), iv.t2(), |x| wf.psi(x), cfg)?;
    Ok(PsiMoments {
        m: p2 - mean,
        m_bar: mean - p1,
    })
}

/// `λ̄(x) = f(x) / F(x)`.
pub fn reversed_failure_rate<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, x: T) -> Result<T> {
    require_density(dist, "the reversed failure rate")?;
    let f = dist.cdf(x);
    if !(f > T::zero()) {
        return Err(Error::domain(format!("λ̄ needs F(x) > 0, got F({x}) = {f}")));
    }
    Ok(dist.pdf(x) / f)
}

/// `h2(t1, t2) = f(t2) / (F(t2) - F(t1))`.
pub fn gfr_h2<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, iv: &TruncationInterval<T>) -> Result<T> {
    require_density(dist, "the generalized failure rate")?;
    Ok(dist.pdf(iv.t2()) / iv.mass())
}

/// Point of the window at relative position `v` in probability, measured
/// from `t1` (`from_lower`) or from `t2`, inverted on the precise tail.
fn window_point<T, D>(dist: &D, iv: &TruncationInterval<T>, v: T, from_lower: bool) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
{
    let v = if from_lower { v } else { T::one() - v };
    let p = iv.cdf_t1() + v * iv.mass();
    let x = if p <= lit(0.5) {
        dist.quantile(p)?
    } else {
        let q = (iv.sf_t1() - v * iv.mass()).max(T::min_positive_value());
        dist.isf(q)?
    };
    Ok(x.max(iv.t1()).min(iv.t2()))
}

/// `log α` (or `log ᾱ`) in the `u` variable: with `v` the relative
/// position in probability and `u = offset + v`,
/// `∫_0^1 log[u φ(x(v)) |log u|] dv`. `None` when `φ` vanishes somewhere,
/// which sends `α` to zero.
fn log_alpha_u<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    measure: Measure,
    cfg: &QuadratureConfig<T>,
) -> Result<Option<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let offset = match (iv.convention(), measure) {
        (TruncationConvention::Proper, _) => T::zero(),
        (TruncationConvention::Ratio, Measure::Iwce) => iv.cdf_t1() / iv.mass(),
        (TruncationConvention::Ratio, Measure::Iwcre) => iv.sf_t2() / iv.mass(),
    };
    let from_lower = measure == Measure::Iwce;
    let zero_weight = Cell::new(false);
    let singular = T::one() - offset;
    let cfg = cfg.clone().with_split_points([singular]);
    let r = try_integrate(
        |v: T| -> Result<T> {
            let u = offset + v;
            let x = window_point(dist, iv, v, from_lower)?;
            let w = wf.phi(x);
            if !(w > T::zero()) {
                zero_weight.set(true);
                return Ok(T::zero());
            }
            let lu = u.ln();
            Ok(lu + w.ln() + lu.abs().ln())
        },
        T::zero(),
        T::one(),
        &cfg,
    )?;
    if zero_weight.get() {
        return Ok(None);
    }
    Ok(Some(r.converged_value()?))
}

/// `log α` in the `x` variable: `∫_{t1}^{t2} log[u(x) φ(x) |log u(x)|] f(x) / Δ dx`
/// with `u` the window CDF (or SF). No quantile is evaluated inside the
/// integrand.
fn log_alpha_x<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    measure: Measure,
    cfg: &QuadratureConfig<T>,
) -> Result<Option<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_density(dist, "α")?;
    let mass = iv.mass();
    let u_of = |x: T| {
        let (c, s) = (dist.cdf(x), dist.sf(x));
        match measure {
            Measure::Iwce => iv.trunc_cdf_from(c, s),
            Measure::Iwcre => iv.trunc_sf_from(c, s),
        }
    };
    // u = 1 inside the window only under the ratio convention.
    let mut splits = vec![dist.support_lower(), dist.support_upper()];
    if iv.convention() == TruncationConvention::Ratio {
        let p = match measure {
            Measure::Iwce => mass,
            Measure::Iwcre => T::one() - mass,
        };
        if p > T::zero() && p < T::one() {
            splits.push(dist.quantile(p)?);
        }
    }
    let zero_weight = Cell::new(false);
    let r = try_integrate(
        |x: T| -> Result<T> {
            let f = dist.pdf(x);
            if f == T::zero() {
                return Ok(T::zero());
            }
            let w = wf.phi(x);
            if !(w > T::zero()) {
                zero_weight.set(true);
                return Ok(T::zero());
            }
            let lu = u_of(x).ln();
            let v = (lu + w.ln() + lu.abs().ln()) * f / mass;
            if v.is_finite() {
                Ok(v)
            } else {
                Ok(T::zero())
            }
        },
        iv.t1(),
        iv.t2(),
        &cfg.clone().with_split_points(splits),
    )?;
    if zero_weight.get() {
        return Ok(None);
    }
    Ok(Some(r.converged_value()?))
}

fn exp_or_zero<T: Scalar>(log: Option<T>) -> T {
    log.map_or_else(T::zero, T::exp)
}

/// `α(t1, t2)` under the window's convention (ratio: `u ∈ (β1, β2)`,
/// proper: `u ∈ (0, 1)`).
pub fn thm23_alpha<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_density(dist, "α")?;
    Ok(exp_or_zero(log_alpha_u(dist, wf, iv, Measure::Iwce, cfg)?))
}

/// `ᾱ(t1, t2)`, integrated over `u ∈ (κ2, κ1)` (ratio) or `(0, 1)` (proper).
pub fn thm23_alpha_bar<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_density(dist, "ᾱ")?;
    Ok(exp_or_zero(log_alpha_u(dist, wf, iv, Measure::Iwcre, cfg)?))
}

/// `α` (`measure = Iwce`) or `ᾱ` through the `x`-space integral.
pub fn thm23_alpha_x_route<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    measure: Measure,
    cfg: &QuadratureConfig<T>,
) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    Ok(exp_or_zero(log_alpha_x(dist, wf, iv, measure, cfg)?))
}

/// Routes to the left-hand side of the dispersion bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm25Route {
    /// `(2/Δ̄²) ∫ φ F̄ (Δ̄ - F̄)`, the integral in the published proof.
    ProofIntegral,
    /// `E|ψ(X) - ψ(Y)|` for independent draws from the window, as a
    /// double integral (an exact double sum for step distributions).
    DoubleQuadrature,
    /// The same expectation by paired sampling.
    MonteCarlo { n_pairs: usize, seed: u64 },
}

pub fn thm25_lhs<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    route: Thm25Route,
) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let mass = iv.mass();
    match route {
        Thm25Route::ProofIntegral => {
            let r = integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, |_, sf| sf * (mass - sf))?;
            Ok(lit::<T>(2.0) * r.converged_value()? / (mass * mass))
        }
        Thm25Route::MonteCarlo { n_pairs, seed } => Ok(mc_abs_psi_difference(dist, wf, iv, n_pairs, seed)?.mean),
        Thm25Route::DoubleQuadrature => {
            if let Some(emp) = dist.as_empirical() {
                // Sorted atoms and nondecreasing ψ: Σ_{i<j} w_i w_j (ψ_j - ψ_i)
                // through running sums.
                let (mut sw, mut swp, mut total) = (T::zero(), T::zero(), T::zero());
                emp.for_each_atom(iv.t1(), iv.t2(), |x, w| {
                    let p = wf.psi(x);
                    total = total + w * (p * sw - swp);
                    sw = sw + w;
                    swp = swp + w * p;
                });
                return Ok(lit::<T>(2.0) * total / (mass * mass));
            }
            let inner_cfg = cfg.scaled(lit(0.01)).without_splits();
            let outer_cfg = cfg.clone().with_split_points([dist.support_lower(), dist.support_upper()]);
            let t1 = iv.t1();
            let r = try_integrate(
                |x: T| -> Result<T> {
                    let fx = dist.pdf(x);
                    if fx == T::zero() || x == t1 {
                        return Ok(T::zero());
                    }
                    let px = wf.psi(x);
                    let inner = integrate(
                        |y: T| {
                            let fy = dist.pdf(y);
                            if fy == T::zero() {
                                T::zero()
                            } else {
                                (px - wf.psi(y)) * fy
                            }
                        },
                        t1,
                        x,
                        &inner_cfg,
                    )?
                    .converged_value()?;
                    Ok(fx * inner)
                },
                t1,
                iv.t2(),
                &outer_cfg,
            )?;
            Ok(lit::<T>(2.0) * r.converged_value()? / (mass * mass))
        }
    }
}

/// `E|ψ(X) - E ψ(X)|` over the window, the weaker left-hand side noted
/// after the dispersion bound.
pub fn mean_abs_psi_deviation<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let mean = conditional_expectation(dist, iv.t1(), iv.t2(), |x| wf.psi(x), cfg)?;
    try_conditional_expectation(dist, iv.t1(), iv.t2(), |x| Ok((wf.psi(x) - mean).abs()), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Exponential, Uniform};
    use crate::weights::{ConstantOne, ExponentialWeight, Scaled};
    use TruncationConvention::*;

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn gamma_partials() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let g = gamma_partial(&u, &ConstantOne, 0.0, 1.0, &cfg()).unwrap();
        assert!((g - 0.25).abs() < 1e-12);
        let a = gamma_bar_partial(&u, &ConstantOne, 0.1, 0.4, &cfg()).unwrap();
        let b = gamma_bar_partial(&u, &ConstantOne, 0.4, 0.9, &cfg()).unwrap();
        let c = gamma_bar_partial(&u, &ConstantOne, 0.1, 0.9, &cfg()).unwrap();
        assert!((a + b - c).abs() < 1e-12);
        assert!(a >= 0.0);
    }

    #[test]
    fn eta_examples() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        for x in [0.1, 0.5, 0.9] {
            assert!((eta(&u, &ConstantOne, x, &cfg()).unwrap() - x / 2.0).abs() < 1e-12);
        }
        let e = Exponential::new(1.0).unwrap();
        for x in [0.0, 0.7, 3.0] {
            assert!((eta_bar(&e, &ConstantOne, x, &cfg()).unwrap() - 1.0).abs() < 1e-9);
        }
        let w = Scaled::new(ConstantOne, 3.0).unwrap();
        assert!((eta(&u, &w, 0.5, &cfg()).unwrap() - 0.75).abs() < 1e-12);
        assert!(eta(&u, &ConstantOne, 0.0, &cfg()).is_err());
    }

    #[test]
    fn moments_sum_to_increment() {
        let e = Exponential::new(1.0).unwrap();
        let w = ExponentialWeight::new(0.3).unwrap();
        let iv = TruncationInterval::new(&e, 0.5, 1.5, Ratio).unwrap();
        let m = psi_moments(&e, &w, &iv, &cfg()).unwrap();
        assert!(m.m >= 0.0 && m.m_bar >= 0.0);
        assert!((m.m + m.m_bar - (w.psi(1.5) - w.psi(0.5))).abs() < 1e-12);
    }

    #[test]
    fn failure_rates() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        assert!((reversed_failure_rate(&u, 0.25_f64).unwrap() - 4.0).abs() < 1e-12);
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, 0.5, 1.5, Ratio).unwrap();
        let expected = (-1.5_f64).exp() / ((-0.5_f64).exp() - (-1.5_f64).exp());
        assert!((gfr_h2(&e, &iv).unwrap() - expected).abs() < 1e-12);
        let iv = TruncationInterval::new(&e, 0.0, 1.5, Ratio).unwrap();
        assert!((gfr_h2(&e, &iv).unwrap() - reversed_failure_rate(&e, 1.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn alpha_uniform_routes_agree() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, Ratio).unwrap();
        let a = thm23_alpha(&u, &ConstantOne, &iv, &cfg()).unwrap();
        let direct = integrate(|s: f64| (s * s.ln().abs()).ln(), 0.4, 1.4, &cfg().with_split_points([1.0]))
            .unwrap()
            .value
            .exp();
        assert!((a - direct).abs() < 1e-9, "{a} vs {direct}");
        let x = thm23_alpha_x_route(&u, &ConstantOne, &iv, Measure::Iwce, &cfg()).unwrap();
        assert!((a - x).abs() < 1e-8, "{a} vs {x}");
        let scaled = Scaled::new(ConstantOne, 2.0).unwrap();
        assert!((thm23_alpha(&u, &scaled, &iv, &cfg()).unwrap() - 2.0 * a).abs() < 1e-9);
        let iv0 = TruncationInterval::new(&u, 0.0, 0.6, Ratio).unwrap();
        assert!(thm23_alpha(&u, &ConstantOne, &iv0, &cfg()).unwrap().is_finite());
    }

    #[test]
    fn alpha_bar_routes_agree() {
        let e = Exponential::new(1.0).unwrap();
        let w = ExponentialWeight::new(0.3).unwrap();
        for conv in TruncationConvention::BOTH {
            let iv = TruncationInterval::new(&e, 0.5, 1.5, conv).unwrap();
            let a = thm23_alpha_bar(&e, &w, &iv, &cfg()).unwrap();
            let x = thm23_alpha_x_route(&e, &w, &iv, Measure::Iwcre, &cfg()).unwrap();
            assert!((a - x).abs() < 1e-7 * a.max(1.0), "{conv}: {a} vs {x}");
            let a = thm23_alpha(&e, &w, &iv, &cfg()).unwrap();
            let x = thm23_alpha_x_route(&e, &w, &iv, Measure::Iwce, &cfg()).unwrap();
            assert!((a - x).abs() < 1e-7 * a.max(1.0), "{conv}: {a} vs {x}");
        }
    }

    #[test]
    fn thm25_routes_on_uniform() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.5, 1.0, Proper).unwrap();
        let proof_step = thm25_lhs(&u, &ConstantOne, &iv, &cfg(), Thm25Route::ProofIntegral).unwrap();
        let dq = thm25_lhs(&u, &ConstantOne, &iv, &cfg(), Thm25Route::DoubleQuadrature).unwrap();
        assert!((proof_step - 1.0 / 6.0).abs() < 1e-10);
        assert!((dq - 1.0 / 6.0).abs() < 1e-10);
        let low = TruncationInterval::new(&u, 0.0, 0.5, Proper).unwrap();
        assert!(thm25_lhs(&u, &ConstantOne, &low, &cfg(), Thm25Route::ProofIntegral).unwrap() < 0.0);
        assert!(thm25_lhs(&u, &ConstantOne, &low, &cfg(), Thm25Route::DoubleQuadrature).unwrap() > 0.0);
        let dev = mean_abs_psi_deviation(&u, &ConstantOne, &iv, &cfg()).unwrap();
        assert!((dev - 0.125).abs() < 1e-10);
    }

    #[test]
    fn thm25_empirical_double_sum() {
        let emp = crate::distributions::Empirical::from_samples(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let iv = TruncationInterval::new(&emp, 0.0, 4.0, Proper).unwrap();
        let v = thm25_lhs(&emp, &ConstantOne, &iv, &cfg(), Thm25Route::DoubleQuadrature).unwrap();
        // Mean |i - j| over 16 ordered pairs of {1, 2, 3, 4}: 20 / 16.
        assert!((v - 1.25).abs() < 1e-14);
    }
}
