use super::quantities::{
    eta, eta_bar, gamma_bar_partial, gamma_partial, gfr_h2, mean_abs_psi_deviation, psi_moments,
    reversed_failure_rate, thm23_alpha, thm23_alpha_bar, thm23_alpha_x_route, thm25_lhs, Thm25Route,
};
use super::report::{BoundReport, TheoremId};
use crate::distributions::{require_density, Distribution, Gev};
use crate::entropy::{
    delta, delta_bar, delta_bar_psi_form, delta_psi_form, interval_shannon_entropy, iwce, measure_by_both_routes,
    require_nonnegative_weight, Measure, TruncationInterval,
};
use crate::numerics::{
    gamma_function, incomplete_gamma_difference, integrate, integrate_in_y, pi_c, pi_c_in_y, QuadratureConfig,
};
use crate::oracle::{fd_derivative, mc_abs_psi_difference, mc_conditional_expectation};
use crate::weights::{validate_on_grid, GevPolynomialWeight, PolynomialWeight, WeightFunction};
use crate::{lit, to_f64, Error, Result, Scalar};

/// Two routes to the same number agree when they differ by at most this
/// much (relative to the magnitude once it exceeds one).
pub const ROUTE_TOLERANCE: f64 = 1e-6;

/// Sampling settings for the Monte Carlo cross-checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub seed: u64,
    /// Pairs drawn for `E|ψ(X) - ψ(Y)|`.
    pub mc_pairs: usize,
    /// Draws for the conditional mean of `η` (each draw costs a quadrature).
    pub mc_eta: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            mc_pairs: 100_000,
            mc_eta: 4_000,
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn psi_times<T: Scalar, W: WeightFunction<T> + ?Sized>(wf: &W, t: T, p: T) -> T {
    if p == T::zero() {
        T::zero()
    } else {
        wf.psi(t) * p
    }
}

fn psi_increment<T: Scalar, W: WeightFunction<T> + ?Sized>(wf: &W, iv: &TruncationInterval<T>) -> T {
    wf.psi(iv.t2()) - wf.psi(iv.t1())
}

/// Window measure by direct quadrature together with the equivalent-form
/// route; the report's `oracle_lhs` is the latter.
fn measure_pair<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, measure: Measure, cfg: &QuadratureConfig<T>) -> Result<(f64, f64)>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let (direct, other) = measure_by_both_routes(dist, wf, iv, measure, cfg)?;
    Ok((to_f64(direct.value), to_f64(other.value)))
}

fn window_diagnostics<T: Scalar>(report: &mut BoundReport, iv: &TruncationInterval<T>) {
    report.diag("t1", to_f64(iv.t1()));
    report.diag("t2", to_f64(iv.t2()));
}

/// Lower bound for IWCE:
/// `Δ⁻¹ [γ + F(t2)(ψ(t2) - ψ(t1))] + δ (1 + log F(t1))`.
///
/// The right-hand side is evaluated twice, with `δ` by quadrature and by
/// its `ψ` identity. With `F(t1) = 0` the bound is `-inf` and flagged
/// vacuous.
pub fn thm21_check<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm21_impl(dist, wf, iv, cfg, Measure::Iwce)
}

/// The IWCRE companion of [`thm21_check`]: `γ̄`, `F̄`, `δ̄` in place of
/// `γ`, `F`, `δ`.
pub fn thm21_iwcre_check<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm21_impl(dist, wf, iv, cfg, Measure::Iwcre)
}

fn thm21_impl<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>, measure: Measure) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let (lhs, lhs2) = measure_pair(dist, wf, iv, measure, cfg)?;
    let (t1, t2) = (iv.t1(), iv.t2());
    let (gamma, at_t2, at_t1, d, d2) = match measure {
        Measure::Iwce => (
            gamma_partial(dist, wf, t1, t2, cfg)?,
            iv.cdf_t2(),
            iv.cdf_t1(),
            delta(dist, wf, iv, cfg)?,
            delta_psi_form(dist, wf, iv, cfg)?,
        ),
        Measure::Iwcre => (
            gamma_bar_partial(dist, wf, t1, t2, cfg)?,
            iv.sf_t2(),
            iv.sf_t1(),
            delta_bar(dist, wf, iv, cfg)?,
            delta_bar_psi_form(dist, wf, iv, cfg)?,
        ),
    };
    let base = (gamma + psi_times(wf, t2, at_t2) - at_t2 * wf.psi(t1)) / iv.mass();
    let factor = T::one() + at_t1.ln();
    let rhs = to_f64(base + d * factor);
    let rhs2 = to_f64(base + d2 * factor);
    let id = match measure {
        Measure::Iwce => TheoremId::T21,
        Measure::Iwcre => TheoremId::T21Iwcre,
    };
    let mut r = BoundReport::new(id, Some(iv.convention()), lhs, rhs);
    r.oracle(lhs2, close(lhs, lhs2, ROUTE_TOLERANCE) && close(rhs, rhs2, ROUTE_TOLERANCE));
    window_diagnostics(&mut r, iv);
    r.diag("gamma", to_f64(gamma));
    r.diag("delta", to_f64(d));
    r.diag("delta_psi_identity", to_f64(d2));
    r.diag("rhs_psi_identity", rhs2);
    Ok(r)
}

/// `IWCE <= E[η(X) | window]` (and `IWCRE <= E[η̄(X) | window]` through
/// [`thm22_iwcre_check`]). The right-hand side is a quadrature of `η f / Δ`
/// and is cross-checked by a Monte Carlo conditional mean.
pub fn thm22_check<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    opts: &CheckOptions,
) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm22_impl(dist, wf, iv, cfg, opts, Measure::Iwce)
}

pub fn thm22_iwcre_check<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    opts: &CheckOptions,
) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm22_impl(dist, wf, iv, cfg, opts, Measure::Iwcre)
}

fn thm22_impl<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    opts: &CheckOptions,
    measure: Measure,
) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_density(dist, "the η bound")?;
    let (lhs, lhs2) = measure_pair(dist, wf, iv, measure, cfg)?;
    let inner = cfg.scaled(lit(0.01));
    let functional = |x: T| match measure {
        Measure::Iwce => eta(dist, wf, x, &inner),
        Measure::Iwcre => eta_bar(dist, wf, x, &inner),
    };
    let rhs = to_f64(crate::entropy::try_conditional_expectation(dist, iv.t1(), iv.t2(), functional, cfg)?);
    let mc = mc_conditional_expectation(dist, iv, |x| functional(x).unwrap_or_else(|_| T::nan()), opts.mc_eta, opts.seed)?;
    let (mc_mean, mc_se) = (to_f64(mc.mean), to_f64(mc.std_error));
    let id = match measure {
        Measure::Iwce => TheoremId::T22,
        Measure::Iwcre => TheoremId::T22Iwcre,
    };
    let mut r = BoundReport::new(id, Some(iv.convention()), lhs, rhs);
    let mc_ok = (rhs - mc_mean).abs() <= 3.0 * mc_se || close(rhs, mc_mean, ROUTE_TOLERANCE);
    r.oracle(lhs2, close(lhs, lhs2, ROUTE_TOLERANCE) && mc_ok);
    window_diagnostics(&mut r, iv);
    r.diag("rhs_monte_carlo", mc_mean);
    r.diag("rhs_monte_carlo_se", mc_se);
    Ok(r)
}

/// `IWCE >= α exp(IH)` (and `IWCRE >= ᾱ exp(IH)` through
/// [`thm23_iwcre_check`]), `α` taken under the window's convention.
pub fn thm23_check<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm23_impl(dist, wf, iv, cfg, Measure::Iwce)
}

pub fn thm23_iwcre_check<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm23_impl(dist, wf, iv, cfg, Measure::Iwcre)
}

fn thm23_impl<T, D, W>(dist: &D, wf: &W, iv: &TruncationInterval<T>, cfg: &QuadratureConfig<T>, measure: Measure) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_density(dist, "the log-sum bound")?;
    let (lhs, lhs2) = measure_pair(dist, wf, iv, measure, cfg)?;
    let alpha = match measure {
        Measure::Iwce => thm23_alpha(dist, wf, iv, cfg)?,
        Measure::Iwcre => thm23_alpha_bar(dist, wf, iv, cfg)?,
    };
    let alpha_x = to_f64(thm23_alpha_x_route(dist, wf, iv, measure, cfg)?);
    let ih = interval_shannon_entropy(dist, iv, cfg)?;
    let rhs = to_f64(alpha * ih.exp());
    let id = match measure {
        Measure::Iwce => TheoremId::T23,
        Measure::Iwcre => TheoremId::T23Iwcre,
    };
    let mut r = BoundReport::new(id, Some(iv.convention()), lhs, rhs);
    r.oracle(
        lhs2,
        close(lhs, lhs2, ROUTE_TOLERANCE) && close(to_f64(alpha), alpha_x, ROUTE_TOLERANCE),
    );
    window_diagnostics(&mut r, iv);
    r.diag("alpha", to_f64(alpha));
    r.diag("alpha_x_route", alpha_x);
    r.diag("ih", to_f64(ih));
    Ok(r)
}

/// Monotonicity criterion for IWCE in `t2`:
/// `IWCE <= M + (ψ(t2) - ψ(t1)) F(t1)/Δ - φ(t2) λ̄(t2)⁻¹ log(F(t2)/Δ)`.
///
/// Also returns `|∂IWCE/∂t2 - h2 (rhs - lhs)|` with the derivative taken by
/// a Richardson-refined central difference, step `1e-4 max(1, t2)`.
pub fn thm24_check<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<(BoundReport, f64)>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_density(dist, "the monotonicity criterion")?;
    if !iv.t2().is_finite() {
        return Err(Error::domain("the monotonicity criterion needs a finite t2"));
    }
    let (lhs, lhs2) = measure_pair(dist, wf, iv, Measure::Iwce, cfg)?;
    let moments = psi_moments(dist, wf, iv, cfg)?;
    let (t1, t2) = (iv.t1(), iv.t2());
    let mass = iv.mass();
    let rfr = reversed_failure_rate(dist, t2)?;
    if !(rfr > T::zero()) {
        return Err(Error::domain(format!("density vanishes at t2 = {t2}")));
    }
    let rhs_t = moments.m + psi_increment(wf, iv) * iv.cdf_t1() / mass - wf.phi(t2) / rfr * (iv.cdf_t2() / mass).ln();
    let rhs = to_f64(rhs_t);
    let h2 = to_f64(gfr_h2(dist, iv)?);
    let step = lit::<T>(1e-4) * t2.max(T::one());
    let fd_cfg = cfg.scaled(lit(1e-3));
    let derivative = to_f64(fd_derivative(
        |s| {
            let window = TruncationInterval::new(dist, t1, s, iv.convention())?;
            Ok(iwce(dist, wf, &window, &fd_cfg)?.value)
        },
        t2,
        step,
        true,
    )?);
    let residual = (derivative - h2 * (rhs - lhs)).abs();
    let mut r = BoundReport::new(TheoremId::T24, Some(iv.convention()), lhs, rhs);
    r.oracle(lhs2, close(lhs, lhs2, ROUTE_TOLERANCE));
    window_diagnostics(&mut r, iv);
    r.diag("M", to_f64(moments.m));
    r.diag("h2", h2);
    r.diag("derivative_fd", derivative);
    r.diag("derivative_residual", residual);
    Ok((r, residual))
}

/// Dispersion bound
/// `E|ψ(X) - ψ(Y)| <= 2 IWCRE/Δ - (log Δ / Δ)(M̄ + (ψ(t2) - ψ(t1)) F̄(t2)/Δ)`.
///
/// `lhs` is the double-quadrature expectation under the conditional law;
/// the published proof's integral, the Monte Carlo estimate (`oracle_lhs`)
/// and the mean absolute deviation of `ψ(X)` are recorded alongside.
pub fn thm25_check<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    opts: &CheckOptions,
) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm25_impl(dist, wf, iv, cfg, opts, Measure::Iwcre)
}

/// The IWCE form of [`thm25_check`]:
/// `E|ψ(X) - ψ(Y)| <= 2 IWCE/Δ - (log Δ / Δ)(M + (ψ(t2) - ψ(t1)) F(t1)/Δ)`.
pub fn thm25_iwce_check<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    opts: &CheckOptions,
) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    thm25_impl(dist, wf, iv, cfg, opts, Measure::Iwce)
}

fn thm25_impl<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    cfg: &QuadratureConfig<T>,
    opts: &CheckOptions,
    measure: Measure,
) -> Result<BoundReport>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    let (value, value2) = measure_pair(dist, wf, iv, measure, cfg)?;
    let lhs = to_f64(thm25_lhs(dist, wf, iv, cfg, Thm25Route::DoubleQuadrature)?);
    let proof_step = to_f64(thm25_lhs(dist, wf, iv, cfg, Thm25Route::ProofIntegral)?);
    let deviation = to_f64(mean_abs_psi_deviation(dist, wf, iv, cfg)?);
    let mc = mc_abs_psi_difference(dist, wf, iv, opts.mc_pairs, opts.seed)?;
    let (mc_mean, mc_se) = (to_f64(mc.mean), to_f64(mc.std_error));
    let moments = psi_moments(dist, wf, iv, cfg)?;
    let mass = iv.mass();
    let (moment, tail) = match measure {
        Measure::Iwcre => (moments.m_bar, psi_times(wf, iv.t2(), iv.sf_t2()) - wf.psi(iv.t1()) * iv.sf_t2()),
        Measure::Iwce => (moments.m, psi_increment(wf, iv) * iv.cdf_t1()),
    };
    let mass64 = to_f64(mass);
    let rhs = 2.0 * value / mass64 - mass64.ln() / mass64 * to_f64(moment + tail / mass);
    let id = match measure {
        Measure::Iwcre => TheoremId::T25,
        Measure::Iwce => TheoremId::T25Iwce,
    };
    let mut r = BoundReport::new(id, Some(iv.convention()), lhs, rhs);
    let agree = (lhs - mc_mean).abs() <= 3.0 * mc_se || close(lhs, mc_mean, ROUTE_TOLERANCE);
    r.oracle(mc_mean, agree);
    window_diagnostics(&mut r, iv);
    r.diag("lhs_proof_integral", proof_step);
    r.diag("lhs_monte_carlo_se", mc_se);
    r.diag("lhs_mean_deviation", deviation);
    r.diag("measure", value);
    r.diag("measure_equivalent_form", value2);
    Ok(r)
}

/// The GEV inequality
/// `(g(x) - 1 + log(e^{-g(y)} - e^{-g(x)})) Σ θ_i Π_{i+1}(x, y) >= e^{-g(y)} Σ θ_i ∫_x^y g^i`
/// with `g` the GEV auxiliary. Both sides are recomputed in the `y`
/// variable; `oracle_lhs` is that second route.
pub fn prop21_check<T: Scalar>(gev: &Gev<T>, theta: &[T], x: T, y: T, cfg: &QuadratureConfig<T>) -> Result<BoundReport> {
    if !(x <= y) || x < gev.support_lower() {
        return Err(Error::domain(format!(
            "need support lower bound {} <= x <= y, got ({x}, {y})",
            gev.support_lower()
        )));
    }
    let weight = GevPolynomialWeight::new(theta.to_vec(), *gev)?;
    if x == y {
        let mut r = BoundReport::new(TheoremId::P21, None, 0.0, 0.0);
        r.oracle(0.0, true);
        return Ok(r);
    }
    require_nonnegative_weight(gev, &weight, x, y)?;
    let (gx, gy) = (gev.y(x)?, gev.y(y)?);
    let mass = gev.mass(x, y);
    let lead = gx - T::one() + mass.ln();
    let (mut s1, mut s1_y, mut s2, mut s2_y) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (i, &th) in theta.iter().enumerate() {
        if th == T::zero() {
            continue;
        }
        let c = T::from_usize(i).unwrap_or_else(T::nan);
        s1 = s1 + th * pi_c(gev, c + T::one(), x, y, cfg)?;
        s1_y = s1_y + th * pi_c_in_y(gev, c + T::one(), x, y, cfg)?;
        let direct = integrate(
            |s| {
                let g = gev.y_unchecked(s);
                if i == 0 {
                    T::one()
                } else {
                    g.powi(i as i32)
                }
            },
            x,
            y,
            cfg,
        )?
        .converged_value()?;
        s2 = s2 + th * direct;
        s2_y = s2_y + th * integrate_in_y(gev, |g| g.powi(i as i32), x, y, cfg)?;
    }
    let scale = (-gy).exp();
    let (lhs, rhs) = (to_f64(lead * s1), to_f64(scale * s2));
    let (lhs2, rhs2) = (to_f64(lead * s1_y), to_f64(scale * s2_y));
    let mut r = BoundReport::new(TheoremId::P21, None, lhs, rhs);
    r.oracle(lhs2, close(lhs, lhs2, ROUTE_TOLERANCE) && close(rhs, rhs2, ROUTE_TOLERANCE));
    r.diag("x", to_f64(x));
    r.diag("y", to_f64(y));
    r.diag("rhs_y_route", rhs2);
    Ok(r)
}

/// Uniform specialization of the log-sum bound:
/// `∫_a^b s f(s) log((b-a)/s) ds >= (b-a) exp{(b-a)⁻¹ ∫_a^b log[s f(s) |log((b-a)/s)|] ds}`
/// for a strictly positive `f`.
pub fn cor21_uniform_check<T, F>(f: F, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<BoundReport>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if !(a >= T::zero() && a <= b && b <= T::one()) {
        return Err(Error::domain(format!("need 0 <= a <= b <= 1, got ({a}, {b})")));
    }
    if a == b {
        return Ok(BoundReport::new(TheoremId::C21i, None, 0.0, 0.0));
    }
    const GRID: usize = 1001;
    for k in 0..GRID {
        let s = a + (b - a) * T::from_usize(k).unwrap_or_else(T::nan) / T::from_usize(GRID - 1).unwrap_or_else(T::nan);
        let v = f(s);
        if !(v > T::zero()) {
            return Err(Error::domain(format!("f must be strictly positive, f({s}) = {v}")));
        }
    }
    let w = b - a;
    let cfg = cfg.clone().with_split_points([w]);
    let lhs = integrate(
        |s| if s == T::zero() { T::zero() } else { s * f(s) * (w / s).ln() },
        a,
        b,
        &cfg,
    )?
    .converged_value()?;
    let log_mean = integrate(
        |s| {
            let l = (w / s).ln();
            (s * f(s) * l.abs()).ln()
        },
        a,
        b,
        &cfg,
    )?
    .converged_value()?
        / w;
    let rhs = w * log_mean.exp();
    let mut r = BoundReport::new(TheoremId::C21i, None, to_f64(lhs), to_f64(rhs));
    r.diag("a", to_f64(a));
    r.diag("b", to_f64(b));
    Ok(r)
}

/// Exponential specialization with `φ(x) = Σ ε_i x^i`, scale `c` and window
/// `(a, b)`, written in `Δ_c(a, b) = e^{-a/c} - e^{-b/c}` and incomplete
/// gamma differences. `oracle_lhs` recomputes the gamma differences by
/// quadrature.
pub fn cor21_exponential_check<T: Scalar>(c: T, a: T, b: T, eps: &[T], cfg: &QuadratureConfig<T>) -> Result<BoundReport> {
    if !(c > T::zero()) || !c.is_finite() {
        return Err(Error::domain(format!("scale c must be positive, got {c}")));
    }
    if !(a >= T::zero() && b > a) || !a.is_finite() {
        return Err(Error::domain(format!("need 0 <= a < b, got ({a}, {b})")));
    }
    let poly = PolynomialWeight::new(eps.to_vec())?;
    let reach = if b.is_finite() { b.max(lit(50.0)) } else { lit(50.0) };
    validate_on_grid(&poly, T::zero(), reach, 10_000).into_result()?;
    let (side_l, side_r) = cor21_general_sides(c, a, b, eps, |p, lo, hi| incomplete_gamma_difference(p, lo, hi))?;
    let (oracle_l, _) = cor21_general_sides(c, a, b, eps, |p, lo, hi| {
        integrate(|t: T| if t == T::zero() { T::zero() } else { t.powf(p - T::one()) * (-t).exp() }, lo, hi, cfg)?
            .converged_value()
    })?;
    let (lhs, rhs) = (to_f64(side_l), to_f64(side_r));
    let mut r = BoundReport::new(TheoremId::C21ii, None, lhs, rhs);
    r.oracle(to_f64(oracle_l), close(lhs, to_f64(oracle_l), 1e-8));
    r.diag("c", to_f64(c));
    r.diag("a", to_f64(a));
    r.diag("b", to_f64(b));
    Ok(r)
}

fn cor21_general_sides<T, G>(c: T, a: T, b: T, eps: &[T], mut gbar: G) -> Result<(T, T)>
where
    T: Scalar,
    G: FnMut(T, T, T) -> Result<T>,
{
    let (za, zb) = (a / c, b / c);
    let spread = if b.is_finite() { -(-(zb - za)).exp_m1() } else { T::one() };
    let delta = (-za).exp() * spread;
    let log_delta = -za + spread.ln();
    let two: T = lit(2.0);
    let (mut lhs, mut rhs) = (T::zero(), T::zero());
    let mut boundary = T::zero();
    let mut c_pow = T::one();
    for (i, &e) in eps.iter().enumerate() {
        let k = T::from_usize(i).unwrap_or_else(T::nan);
        let k1 = k + T::one();
        lhs = lhs + two * (c * delta - log_delta) * c_pow * e * gbar(k1, za, zb)?
            - e * c_pow * c * two.powi(-(i as i32)) * gbar(k1, two * za, two * zb)?;
        rhs = rhs + (two - log_delta / k1) * e * c_pow * c * gbar(k1 + T::one(), za, zb)?;
        let at = |t: T| {
            if t == T::zero() || !t.is_finite() {
                T::zero()
            } else {
                t.powi(i as i32 + 1) * (-t / c).exp()
            }
        };
        boundary = boundary + e / k1 * (at(a) - at(b));
        c_pow = c_pow * c;
    }
    Ok((lhs, rhs + log_delta * boundary))
}

/// The `c = 1`, `(0, inf)` form
/// `Σ ε_i Γ(i+1)(1 - 2^{-i-1}) <= Σ ε_i Γ(i+2)`. The general expression at
/// those parameters, recorded in the diagnostics, equals twice each side.
pub fn cor21_limit_form<T: Scalar>(eps: &[T]) -> Result<BoundReport> {
    let (mut lhs, mut rhs) = (T::zero(), T::zero());
    for (i, &e) in eps.iter().enumerate() {
        let k = T::from_usize(i).unwrap_or_else(T::nan);
        lhs = lhs + e * gamma_function(k + T::one())? * (T::one() - lit::<T>(2.0).powi(-(i as i32) - 1));
        rhs = rhs + e * gamma_function(k + lit(2.0))?;
    }
    let mut r = BoundReport::new(TheoremId::C21ii, None, to_f64(lhs), to_f64(rhs));
    let (gl, gr) = cor21_general_sides(T::one(), T::zero(), T::infinity(), eps, |p, lo, hi| {
        incomplete_gamma_difference(p, lo, hi)
    })?;
    r.diag("general_form_lhs", to_f64(gl));
    r.diag("general_form_rhs", to_f64(gr));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Exponential, Uniform};
    use crate::entropy::TruncationConvention;
    use crate::weights::{ConstantOne, ExponentialWeight};

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    fn quick() -> CheckOptions {
        CheckOptions {
            seed: 3,
            mc_pairs: 20_000,
            mc_eta: 400,
        }
    }

    #[test]
    fn thm22_uniform_anchor() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, TruncationConvention::Ratio).unwrap();
        let r = thm22_check(&u, &ConstantOne, &iv, &cfg(), &quick()).unwrap();
        assert!((r.lhs - 0.02348).abs() < 1e-4, "{}", r.lhs);
        assert!((r.rhs - 0.225).abs() < 1e-4, "{}", r.rhs);
        assert!(r.margin > 0.0);
        assert_eq!(r.oracle_agreement, Some(true));
    }

    #[test]
    fn thm21_routes_agree_and_vacuous_at_zero() {
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, 0.5, 1.5, TruncationConvention::Ratio).unwrap();
        for r in [
            thm21_check(&e, &ConstantOne, &iv, &cfg()).unwrap(),
            thm21_iwcre_check(&e, &ConstantOne, &iv, &cfg()).unwrap(),
        ] {
            assert_eq!(r.oracle_agreement, Some(true), "{r:?}");
            assert!(!r.vacuous);
        }
        let iv0 = TruncationInterval::new(&e, 0.0, 1.5, TruncationConvention::Ratio).unwrap();
        let r = thm21_check(&e, &ConstantOne, &iv0, &cfg()).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.rhs, f64::NEG_INFINITY);
        assert_eq!(r.margin, f64::INFINITY);
    }

    #[test]
    fn thm24_residual_small() {
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, 0.5, 1.5, TruncationConvention::Ratio).unwrap();
        let (_, res) = thm24_check(&e, &ConstantOne, &iv, &cfg()).unwrap();
        assert!(res < 1e-5, "{res}");
        let w = ExponentialWeight::new(0.3).unwrap();
        let (_, res) = thm24_check(&e, &w, &iv, &cfg()).unwrap();
        assert!(res < 1e-5, "{res}");
    }

    #[test]
    fn thm24_uniform_sign_consistency() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.2, 0.7, TruncationConvention::Ratio).unwrap();
        let (r, _) = thm24_check(&u, &ConstantOne, &iv, &cfg()).unwrap();
        let d = r.diagnostics["derivative_fd"];
        assert_eq!(d > 0.0, r.rhs - r.lhs > 0.0);
    }

    #[test]
    fn thm23_support_lower_holds() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.0, 0.6, TruncationConvention::Ratio).unwrap();
        let r = thm23_check(&u, &ConstantOne, &iv, &cfg()).unwrap();
        assert!(r.margin >= 0.0, "{r:?}");
        assert_eq!(r.oracle_agreement, Some(true), "{r:?}");
    }

    #[test]
    fn thm25_uniform_anchor() {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, 0.5, 1.0, TruncationConvention::Proper).unwrap();
        let r = thm25_check(&u, &ConstantOne, &iv, &cfg(), &quick()).unwrap();
        assert!((r.lhs - 1.0 / 6.0).abs() < 1e-9);
        assert_eq!(r.oracle_agreement, Some(true));
        assert!(r.lhs + 1e-9 >= r.diagnostics["lhs_mean_deviation"]);
    }

    #[test]
    fn prop21_two_schemes() {
        let g = Gev::new(2.0, 1.0, 0.5).unwrap();
        let r = prop21_check(&g, &[1.0], 1.5, 4.0, &cfg()).unwrap();
        assert_eq!(r.oracle_agreement, Some(true), "{r:?}");
        let r = prop21_check(&g, &[1.0, 0.5], 1.5, 4.0, &cfg()).unwrap();
        assert_eq!(r.oracle_agreement, Some(true), "{r:?}");
        let r = prop21_check(&g, &[1.0], 2.5, 2.5, &cfg()).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(prop21_check(&g, &[1.0], -0.5, 4.0, &cfg()).is_err());
        assert!(prop21_check(&g, &[1.0], 4.0, 1.5, &cfg()).is_err());
    }

    #[test]
    fn cor21_cases() {
        let r = cor21_limit_form(&[1.0_f64]).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12);
        assert!((r.diagnostics["general_form_lhs"] - 1.0).abs() < 1e-10);
        assert!((r.diagnostics["general_form_rhs"] - 2.0).abs() < 1e-10);
        let r = cor21_limit_form(&[1.0_f64, 1.0]).unwrap();
        assert!((r.lhs - 1.25).abs() < 1e-12 && (r.rhs - 3.0).abs() < 1e-12);
        let r = cor21_exponential_check(1.5, 0.2, 3.0, &[1.0, 0.5, 0.25], &cfg()).unwrap();
        assert_eq!(r.oracle_agreement, Some(true), "{r:?}");
        assert!(cor21_exponential_check(1.0, 0.0, 2.0, &[1.0, -1.0], &cfg()).is_err());

        let one = cor21_uniform_check(|_| 1.0, 0.1, 0.9, &cfg()).unwrap();
        assert!(one.lhs.is_finite() && one.rhs.is_finite());
        let three = cor21_uniform_check(|_| 3.0, 0.1, 0.9, &cfg()).unwrap();
        assert!((three.lhs - 3.0 * one.lhs).abs() < 1e-9);
        assert!((three.rhs - 3.0 * one.rhs).abs() < 1e-9);
        let z = cor21_uniform_check(|_| 1.0, 0.4, 0.4, &cfg()).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        assert!(cor21_uniform_check(|s| s - 0.5, 0.1, 0.9, &cfg()).is_err());
    }
}
