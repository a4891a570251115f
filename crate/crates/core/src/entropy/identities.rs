use super::measures::{conditional_expectation, integrate_cdf_functional, interval_measure, require_nonnegative_weight, Measure};
use super::truncation::{EntropyValue, Method, TruncationConvention, TruncationInterval};
use crate::distributions::Distribution;
use crate::numerics::{try_integrate, xlogx_clamped, QuadratureConfig};
use crate::weights::{ConstantOne, WeightFunction};
use crate::{lit, to_f64, Error, Result, Scalar};

/// `∫_{t1}^{t2} φ F̄ / Δ`, always normalized by the window mass.
pub fn delta_bar<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let r = integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, |_, sf| sf)?;
    Ok(r.converged_value()? / iv.mass())
}

/// `∫_{t1}^{t2} φ F / Δ`.
pub fn delta<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let r = integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, |cdf, _| cdf)?;
    Ok(r.converged_value()? / iv.mass())
}

// ψ(t) · p with the convention that a vanishing probability kills an
// unbounded ψ at t = +inf.
fn psi_times<T: Scalar, W: WeightFunction<T> + ?Sized>(wf: &W, t: T, p: T) -> T {
    if p == T::zero() {
        T::zero()
    } else {
        wf.psi(t) * p
    }
}

/// `δ̄` through integration by parts:
/// `[ψ(t2) F̄(t2) - ψ(t1) F̄(t1)] / Δ + E[ψ(X) | window]`.
pub fn delta_bar_psi_form<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let boundary = psi_times(wf, iv.t2(), iv.sf_t2()) - psi_times(wf, iv.t1(), iv.sf_t1());
    let mean = conditional_expectation(dist, iv.t1(), iv.t2(), |x| wf.psi(x), cfg)?;
    Ok(boundary / iv.mass() + mean)
}

/// `δ` through integration by parts:
/// `[ψ(t2) F(t2) - ψ(t1) F(t1)] / Δ - E[ψ(X) | window]`.
pub fn delta_psi_form<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    if !iv.t2().is_finite() {
        return Err(Error::domain("δ diverges on an unbounded window"));
    }
    let boundary = psi_times(wf, iv.t2(), iv.cdf_t2()) - psi_times(wf, iv.t1(), iv.cdf_t1());
    let mean = conditional_expectation(dist, iv.t1(), iv.t2(), |x| wf.psi(x), cfg)?;
    Ok(boundary / iv.mass() - mean)
}

/// IWCRE as `-Δ⁻¹ ∫ φ F̄ log F̄ + δ̄ log Δ` (ratio convention only).
pub fn iwcre_equivalent_form<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    iv.require_ratio("the equivalent form")?;
    equivalent_form_any(dist, wf, iv, Measure::Iwcre, cfg)
}

/// IWCE as `-Δ⁻¹ ∫ φ F log F + δ log Δ` (ratio convention only).
pub fn iwce_equivalent_form<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    iv.require_ratio("the equivalent form")?;
    equivalent_form_any(dist, wf, iv, Measure::Iwce, cfg)
}

/// Equivalent form under either convention. With `u` the unnormalized
/// window function (`F̄`, `F`, `F̄ - F̄(t2)` or `F - F(t1)`), the measure is
/// `-Δ⁻¹ ∫ φ u log u + log Δ · Δ⁻¹ ∫ φ u`, two independent integrals.
pub(crate) fn equivalent_form_any<T, D, W>(
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
    let u = |cdf: T, sf: T| match (measure, iv.convention()) {
        (Measure::Iwcre, TruncationConvention::Ratio) => sf,
        (Measure::Iwce, TruncationConvention::Ratio) => cdf,
        (Measure::Iwcre, TruncationConvention::Proper) => iv.upper_gap(cdf, sf),
        (Measure::Iwce, TruncationConvention::Proper) => iv.lower_gap(cdf, sf),
    };
    let ent = integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, |c, s| -xlogx_clamped(u(c, s)))?;
    let lin = integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, u)?;
    let mass = iv.mass();
    let value = ent.converged_value()? / mass + lin.converged_value()? / mass * mass.ln();
    let err = ent.error_estimate / mass + lin.error_estimate / mass * mass.ln().abs();
    Ok(EntropyValue::new(value, Method::EquivalentForm, err))
}

/// `B̄(x_lo, x_hi) = -∫_{x_lo}^{x_hi} q log q` with `q` the window CDF under
/// the interval's convention. Over the full window this is the ICPE.
pub fn interval_partial_entropy<T, D>(
    dist: &D,
    iv: &TruncationInterval<T>,
    x_lo: T,
    x_hi: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
{
    if !(iv.t1() <= x_lo && x_lo <= x_hi && x_hi <= iv.t2()) {
        return Err(Error::domain(format!(
            "need t1 <= x_lo <= x_hi <= t2, got {} <= {x_lo} <= {x_hi} <= {}",
            iv.t1(),
            iv.t2()
        )));
    }
    if x_lo == x_hi {
        return Ok(T::zero());
    }
    let r = integrate_cdf_functional(dist, &ConstantOne, x_lo, x_hi, cfg, |cdf, sf| {
        -xlogx_clamped(iv.trunc_cdf_from(cdf, sf))
    })?;
    r.converged_value()
}

/// Which line of the weight-derivative representation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeVariant {
    /// `φ(t1) Ē + ∫ φ'(x) B̄(x, t2) dx`.
    Lower,
    /// `φ(t2) Ē - ∫ φ'(y) B̄(t1, y) dy`, obtained by integrating by parts
    /// from the upper end.
    Upper,
    /// The upper line with the signs as printed in the source,
    /// `-φ(t2) Ē + ∫ φ'(y) B̄(t1, y) dy`. Equals the negated IWCE.
    UpperAsPrinted,
}

/// IWCE rebuilt from `φ'` and the partial entropies `B̄`. The inner `B̄` is
/// a quadrature of its own, run at a hundredth of the outer tolerance so
/// the outer integrand stays smooth.
pub fn iwce_weight_derivative_form<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    variant: DerivativeVariant,
) -> Result<EntropyValue<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_nonnegative_weight(dist, wf, iv.t1(), iv.t2())?;
    let (t1, t2) = (iv.t1(), iv.t2());
    let inner_cfg = cfg.scaled(lit(0.01)).without_splits();
    let e_bar = interval_partial_entropy(dist, iv, t1, t2, &inner_cfg)?;
    let outer_cfg = cfg.clone().with_split_points([dist.support_lower(), dist.support_upper()]);
    let nested = |upper_end: bool| {
        try_integrate(
            |x: T| -> Result<T> {
                let d = wf.dphi(x);
                if d == T::zero() {
                    return Ok(T::zero());
                }
                if !d.is_finite() {
                    return Err(Error::NonFinite { x: to_f64(x), value: to_f64(d) });
                }
                let b = if upper_end {
                    interval_partial_entropy(dist, iv, x, t2, &inner_cfg)?
                } else {
                    interval_partial_entropy(dist, iv, t1, x, &inner_cfg)?
                };
                Ok(d * b)
            },
            t1,
            t2,
            &outer_cfg,
        )
    };
    let (value, err) = match variant {
        DerivativeVariant::Lower => {
            let r = nested(true)?;
            (wf.phi(t1) * e_bar + r.converged_value()?, r.error_estimate)
        }
        DerivativeVariant::Upper | DerivativeVariant::UpperAsPrinted => {
            if !t2.is_finite() {
                return Err(Error::domain("the upper-end representation needs a finite t2"));
            }
            let r = nested(false)?;
            let corrected = wf.phi(t2) * e_bar - r.converged_value()?;
            let v = if variant == DerivativeVariant::Upper { corrected } else { -corrected };
            (v, r.error_estimate)
        }
    };
    Ok(EntropyValue::new(value, Method::EquivalentForm, err))
}

/// The two ways of splitting `log(F / Δ)` inside the IWCE integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarthetaSplit<T> {
    /// `(-∫ φ q log ϑ1(x, t2), -∫ φ q log[(F(t2) - F(x)) / Δ])`,
    /// `ϑ1(x, t2) = F(x) / (F(t2) - F(x))`.
    pub first: (T, T),
    /// `(-∫ φ q log ϑ2(t1, x), -∫ φ q log[(F(x) - F(t1)) / Δ])`,
    /// `ϑ2(t1, x) = F(x) / (F(x) - F(t1))`.
    pub second: (T, T),
}

impl<T: Scalar> VarthetaSplit<T> {
    pub fn first_sum(&self) -> T {
        self.first.0 + self.first.1
    }
    pub fn second_sum(&self) -> T {
        self.second.0 + self.second.1
    }
}

/// Splits of the ratio-convention IWCE. Every term carries an integrable
/// logarithmic singularity at one window end, which the quadrature handles
/// through its endpoint-local refinement.
pub fn vartheta_decomposition<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<VarthetaSplit<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    iv.require_ratio("the ϑ decomposition")?;
    if dist.as_empirical().is_some() {
        return Err(Error::Unsupported(
            "ϑ decomposition of a step CDF has non-integrable pieces".into(),
        ));
    }
    require_nonnegative_weight(dist, wf, iv.t1(), iv.t2())?;
    let mass = iv.mass();
    let term = |log_arg: &dyn Fn(T, T) -> T| -> Result<T> {
        let r = integrate_cdf_functional(dist, wf, iv.t1(), iv.t2(), cfg, |cdf, sf| {
            if cdf == T::zero() {
                return T::zero();
            }
            -(cdf / mass) * log_arg(cdf, sf).ln()
        })?;
        r.converged_value()
    };
    let first = (
        term(&|cdf, sf| cdf / iv.upper_gap(cdf, sf))?,
        term(&|cdf, sf| iv.upper_gap(cdf, sf) / mass)?,
    );
    let second = (
        term(&|cdf, sf| cdf / iv.lower_gap(cdf, sf))?,
        term(&|cdf, sf| iv.lower_gap(cdf, sf) / mass)?,
    );
    Ok(VarthetaSplit { first, second })
}

/// Proper-convention and ratio-convention measures through the
/// equivalent form, used as an independent route by the checkers.
pub(crate) fn measure_by_both_routes<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    measure: Measure,
    cfg: &QuadratureConfig<T>,
) -> Result<(EntropyValue<T>, EntropyValue<T>)>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    Ok((
        interval_measure(dist, wf, iv, measure, cfg)?,
        equivalent_form_any(dist, wf, iv, measure, cfg)?,
    ))
}
