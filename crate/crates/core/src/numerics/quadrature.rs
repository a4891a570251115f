//! Adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The integration range is first cut at the configured split points, then
//! the panel with the largest local error estimate is bisected until the
//! summed estimate meets `max(abs_tol, rel_tol * |value|)`. Errors are
//! estimated per panel, so a split point placed on a singularity keeps the
//! refinement local to the panels that touch it. Semi-infinite ranges are
//! mapped onto `[0, 1)` with `x = a + s / (1 - s)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{lit, to_f64, Error, Result, Scalar};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes, centre last.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
    /// Known kinks or integrable singularities. Points on or outside the
    /// integration range are ignored.
    pub split_points: Vec<T>,
}

impl<T: Scalar> Default for QuadratureConfig<T> {
    fn default() -> Self {
        // f32 cannot reach the f64 targets; keep the defaults attainable.
        let floor = to_f64(T::epsilon()) * 64.0;
        Self {
            abs_tol: lit(1e-10_f64.max(floor)),
            rel_tol: lit(1e-9_f64.max(floor)),
            max_subdivisions: 2000,
            split_points: Vec::new(),
        }
    }
}

impl<T: Scalar> QuadratureConfig<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            split_points: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || !(self.rel_tol > T::zero()) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    pub fn with_split_points(mut self, points: impl IntoIterator<Item = T>) -> Self {
        self.split_points.extend(points);
        self
    }

    /// Same budget with both tolerances scaled by `factor`.
    /// Both tolerances multiplied by `factor`; the relative one never drops
    /// below `64 eps`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: (self.rel_tol * factor).max(T::epsilon() * lit(64.0)),
            max_subdivisions: self.max_subdivisions,
            split_points: self.split_points.clone(),
        }
    }

    pub fn halved(&self) -> Self {
        self.scaled(lit(0.5))
    }

    /// Tolerances only; used for nested integrals that pick their own splits.
    pub(crate) fn without_splits(&self) -> Self {
        Self {
            split_points: Vec::new(),
            ..self.clone()
        }
    }

    fn target(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult<T> {
    pub value: T,
    pub error_estimate: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Scalar> IntegrationResult<T> {
    pub(crate) fn exact(value: T) -> Self {
        Self {
            value,
            error_estimate: T::zero(),
            evaluations: 0,
            converged: true,
        }
    }

    /// The value, or [`Error::NonConvergence`] carrying the partial estimate.
    pub fn converged_value(&self) -> Result<T> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                value: to_f64(self.value),
                error_estimate: to_f64(self.error_estimate),
            })
        }
    }
}

/// Integrates `f` over `(a, b)`; either bound may be infinite.
///
/// `a == b` yields zero. A NaN or infinite integrand value is an error.
/// Running out of subdivisions is not: the result comes back with
/// `converged == false`.
pub fn integrate<T, F>(mut f: F, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<IntegrationResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    try_integrate(|x| Ok::<T, Error>(f(x)), a, b, cfg)
}

/// [`integrate`] for integrands that can fail (nested integrals, sampled
/// functionals). The first error aborts the integration.
pub fn try_integrate<T, F, E>(mut f: F, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<IntegrationResult<T>, E>
where
    T: Scalar,
    E: From<Error>,
    F: FnMut(T) -> Result<T, E>,
{
    integrate_dyn(&mut f, a, b, cfg)
}

fn integrate_dyn<T, E>(
    f: &mut dyn FnMut(T) -> Result<T, E>,
    a: T,
    b: T,
    cfg: &QuadratureConfig<T>,
) -> Result<IntegrationResult<T>, E>
where
    T: Scalar,
    E: From<Error>,
{
    cfg.validate()?;
    if a.is_nan() || b.is_nan() {
        return Err(Error::domain("NaN integration bound").into());
    }
    if a == b {
        return Ok(IntegrationResult::exact(T::zero()));
    }
    if a > b {
        return Err(Error::domain(format!(
            "integration bounds out of order: a = {a} > b = {b}"
        ))
        .into());
    }
    let inside = |p: &T| *p > a && *p < b && p.is_finite();
    let mut splits: Vec<T> = cfg.split_points.iter().copied().filter(inside).collect();

    match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            splits.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
            adapt(f, a, b, &splits, cfg)
        }
        (true, false) => {
            // x = a + s / (1 - s)
            let mut s_splits: Vec<T> = splits
                .iter()
                .map(|&x| (x - a) / (T::one() + x - a))
                .collect();
            s_splits.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
            let mut g = |s: T| -> Result<T, E> {
                let one_minus = T::one() - s;
                if one_minus <= T::zero() {
                    return Ok(T::zero());
                }
                let x = a + s / one_minus;
                if !x.is_finite() {
                    return Ok(T::zero());
                }
                Ok(f(x)? / (one_minus * one_minus))
            };
            adapt(&mut g, T::zero(), T::one(), &s_splits, cfg)
        }
        (false, true) => {
            // x = b - s / (1 - s)
            let mut s_splits: Vec<T> = splits
                .iter()
                .map(|&x| (b - x) / (T::one() + b - x))
                .collect();
            s_splits.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
            let mut g = |s: T| -> Result<T, E> {
                let one_minus = T::one() - s;
                if one_minus <= T::zero() {
                    return Ok(T::zero());
                }
                let x = b - s / one_minus;
                if !x.is_finite() {
                    return Ok(T::zero());
                }
                Ok(f(x)? / (one_minus * one_minus))
            };
            adapt(&mut g, T::zero(), T::one(), &s_splits, cfg)
        }
        (false, false) => {
            let mid = splits.first().copied().unwrap_or_else(T::zero);
            let lower = integrate_dyn(&mut *f, a, mid, cfg)?;
            let upper = integrate_dyn(&mut *f, mid, b, cfg)?;
            let value = lower.value + upper.value;
            let error_estimate = lower.error_estimate + upper.error_estimate;
            Ok(IntegrationResult {
                value,
                error_estimate,
                evaluations: lower.evaluations + upper.evaluations,
                converged: lower.converged && upper.converged && error_estimate <= cfg.target(value),
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

// Max-heap on the panel error estimate.
struct ByError<T>(Panel<T>);

impl<T: Scalar> PartialEq for ByError<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for ByError<T> {}
impl<T: Scalar> PartialOrd for ByError<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for ByError<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        to_f64(self.0.error).total_cmp(&to_f64(other.0.error))
    }
}

fn adapt<T, F, E>(f: &mut F, a: T, b: T, splits: &[T], cfg: &QuadratureConfig<T>) -> Result<IntegrationResult<T>, E>
where
    T: Scalar,
    E: From<Error>,
    F: FnMut(T) -> Result<T, E> + ?Sized,
{
    let rule = Rule::<T>::new();
    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    // Panels too narrow to bisect further keep their error but leave the heap.
    let mut frozen: Vec<Panel<T>> = Vec::new();

    let mut lo = a;
    for &hi in splits.iter().chain(std::iter::once(&b)) {
        if hi > lo {
            heap.push(ByError(rule.panel(f, lo, hi, &mut evaluations)?));
            lo = hi;
        }
    }

    loop {
        let (value, error) = heap
            .iter()
            .map(|p| &p.0)
            .chain(frozen.iter())
            .fold((T::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error));
        let panels = heap.len() + frozen.len();
        if error <= cfg.target(value) || panels >= cfg.max_subdivisions || heap.is_empty() {
            return Ok(IntegrationResult {
                value,
                error_estimate: error,
                evaluations,
                converged: error <= cfg.target(value),
            });
        }
        let worst = heap.pop().expect("non-empty heap").0;
        let mid = worst.a + (worst.b - worst.a) * lit(0.5);
        if !(mid > worst.a && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        heap.push(ByError(rule.panel(f, worst.a, mid, &mut evaluations)?));
        heap.push(ByError(rule.panel(f, mid, worst.b, &mut evaluations)?));
    }
}

struct Rule<T> {
    xgk: [T; 8],
    wgk: [T; 8],
    wg: [T; 4],
}

impl<T: Scalar> Rule<T> {
    fn new() -> Self {
        Self {
            xgk: XGK.map(lit),
            wgk: WGK.map(lit),
            wg: WG.map(lit),
        }
    }

    fn panel<F, E>(&self, f: &mut F, a: T, b: T, evaluations: &mut usize) -> Result<Panel<T>, E>
    where
        E: From<Error>,
        F: FnMut(T) -> Result<T, E> + ?Sized,
    {
        let half = (b - a) * lit(0.5);
        let centre = a + half;
        let mut eval = |x: T| -> Result<T, E> {
            *evaluations += 1;
            let y = f(x)?;
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::NonFinite {
                    x: to_f64(x),
                    value: to_f64(y),
                }
                .into())
            }
        };

        let f_centre = eval(centre)?;
        let mut kronrod = f_centre * self.wgk[7];
        let mut gauss = f_centre * self.wg[3];
        let mut abs_sum = f_centre.abs() * self.wgk[7];
        let mut values = [(T::zero(), T::zero()); 7];
        for (j, slot) in values.iter_mut().enumerate() {
            let dx = half * self.xgk[j];
            let lo = eval(centre - dx)?;
            let hi = eval(centre + dx)?;
            kronrod = kronrod + self.wgk[j] * (lo + hi);
            abs_sum = abs_sum + self.wgk[j] * (lo.abs() + hi.abs());
            if j % 2 == 1 {
                gauss = gauss + self.wg[j / 2] * (lo + hi);
            }
            *slot = (lo, hi);
        }
        let mean = kronrod * lit(0.5);
        let mut asc = self.wgk[7] * (f_centre - mean).abs();
        for (j, (lo, hi)) in values.iter().enumerate() {
            asc = asc + self.wgk[j] * ((*lo - mean).abs() + (*hi - mean).abs());
        }

        let width = half.abs();
        let value = kronrod * half;
        let res_abs = abs_sum * width;
        let res_asc = asc * width;
        let mut error = ((kronrod - gauss) * half).abs();
        if res_asc != T::zero() && error != T::zero() {
            let scale = (lit::<T>(200.0) * error / res_asc).powf(lit(1.5));
            error = if scale < T::one() { res_asc * scale } else { res_asc };
        }
        let floor = lit::<T>(50.0) * T::epsilon() * res_abs;
        if res_abs > T::min_positive_value() / (lit::<T>(50.0) * T::epsilon()) && floor > error {
            error = floor;
        }
        Ok(Panel { a, b, value, error })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn constant_integrand() {
        let r = integrate(|_| 1.0, 0.0, 1.0, &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interior_log_singularity_with_split() {
        // ∫_{0.5}^{1.5} ln|x - 1| dx = 2 (0.5 ln 0.5 - 0.5)
        let exact = 2.0 * (0.5 * 0.5_f64.ln() - 0.5);
        let c = cfg().with_split_points([1.0]);
        let r = integrate(|x: f64| (x - 1.0).abs().ln(), 0.5, 1.5, &c).unwrap();
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
    }

    #[test]
    fn semi_infinite_gamma_two() {
        let r = integrate(|x: f64| x * (-x).exp(), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn negative_half_line() {
        let r = integrate(|x: f64| x.exp(), f64::NEG_INFINITY, 0.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate(|x: f64| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &cfg()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn nan_integrand_is_an_error() {
        let err = integrate(|x: f64| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn budget_exhaustion_is_reported_not_raised() {
        let c = QuadratureConfig::new(1e-15, 1e-15, 2).unwrap();
        let r = integrate(|x: f64| (x - 0.3).abs().sqrt(), 0.0, 1.0, &c).unwrap();
        assert!(!r.converged);
        assert!(r.converged_value().is_err());
    }

    #[test]
    fn bounds_out_of_order_rejected() {
        assert!(integrate(|x: f64| x, 1.0, 0.0, &cfg()).is_err());
        assert_eq!(integrate(|x: f64| x, 1.0, 1.0, &cfg()).unwrap().value, 0.0);
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(QuadratureConfig::new(0.0, 1e-9, 10).is_err());
        assert!(QuadratureConfig::new(1e-10, 1e-9, 0).is_err());
    }

    #[test]
    fn algebraic_endpoint_singularity() {
        // ∫_0^1 x^{-0.9} dx = 10
        let r = integrate(|x: f64| x.powf(-0.9), 0.0, 1.0, &cfg()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.value - 10.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn split_points_outside_range_are_ignored() {
        let c = cfg().with_split_points([-1.0, 0.0, 2.0]);
        let r = integrate(|x: f64| x, 0.0, 1.0, &c).unwrap();
        assert!((r.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn single_precision() {
        let r = integrate(|x: f32| x * x, 0.0, 3.0, &QuadratureConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 9.0).abs() < 1e-4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn negated_integrand_negates_value(a in 0.0f64..2.0, w in 0.1f64..3.0, k in 0.1f64..4.0) {
                let c = cfg();
                let f = |x: f64| (k * x).sin() + x.sqrt();
                let r = integrate(f, a, a + w, &c).unwrap();
                let n = integrate(|x| -f(x), a, a + w, &c).unwrap();
                prop_assert!((r.value + n.value).abs() <= r.error_estimate.max(1e-14));
            }
        }
    }
}
