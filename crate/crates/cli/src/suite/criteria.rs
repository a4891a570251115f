//! One function per acceptance criterion. Each returns worst-case
//! measurements and, where a statement is involved, the bound reports it
//! produced.

use iwce::bounds::{
    cor21_exponential_check, cor21_limit_form, cor21_uniform_check, prop21_check, thm22_check, thm25_check, thm25_lhs,
    BoundReport, CheckOptions, TheoremId, Thm25Route,
};
use iwce::distributions::{Dist, Distribution, Exponential, Gev, Uniform};
use iwce::entropy::{
    closed_form_icre_exp, closed_form_iwce_gev, closed_form_iwcre_exp_expweight, closed_form_iwcre_exp_poly, delta,
    delta_bar, delta_bar_psi_form, delta_psi_form, icre, iwce, iwce_equivalent_form, iwce_weight_derivative_form, iwcre,
    iwcre_equivalent_form, vartheta_decomposition, wcre, DerivativeVariant, Form, Measure, TruncationConvention,
    TruncationInterval,
};
use iwce::numerics::{integrate, lower_incomplete_gamma};
use iwce::oracle::ecdf_plugin_entropy;
use iwce::weights::{ConstantOne, ExponentialWeight, Weight};
use iwce::{Dist64, QuadratureConfig64, Weight64};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::grid::NodeResult;
use super::measurement::{scaled_error, z_score, Measurement, Relation, Worst};
use super::rng;
use crate::scan::{scan_monotonicity, MonotonicityScan};
use crate::CliError;

/// Inputs shared by every criterion.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub as_printed: bool,
    pub cfg: QuadratureConfig64,
    pub opts: CheckOptions,
}

impl Context {
    /// Stream for the randomized cases of one criterion, offset well past
    /// the grid checker streams.
    fn rng(&self, criterion: u8) -> ChaCha20Rng {
        rng(self.seed.wrapping_add(100_000 + 1_000 * criterion as u64))
    }

    fn form(&self) -> Form {
        if self.as_printed {
            Form::AsPrinted
        } else {
            Form::Corrected
        }
    }
}

/// Measurements and reports of one criterion.
#[derive(Debug, Default)]
pub struct Outcome {
    pub measurements: Vec<Measurement>,
    pub reports: Vec<BoundReport>,
}

type Res = Result<Outcome, CliError>;

fn ratio(dist: &Dist64, t1: f64, t2: f64) -> Result<TruncationInterval<f64>, CliError> {
    Ok(TruncationInterval::new(dist, t1, t2, TruncationConvention::Ratio)?)
}

fn tight() -> QuadratureConfig64 {
    QuadratureConfig64::new(1e-14, 1e-13, 4000).expect("valid tolerances")
}

/// Special functions against quadrature.
pub fn c1_special_functions(ctx: &Context) -> Res {
    let mut r = ctx.rng(1);
    let cfg = tight();
    let (mut quad_err, mut unit_err) = (Worst::max(), Worst::max());
    for _ in 0..50 {
        let b = r.gen_range(0.1..6.0);
        let z = r.gen_range(0.0..10.0);
        let q = integrate(|t: f64| t.powf(b - 1.0) * (-t).exp(), 0.0, z, &cfg)?.converged_value()?;
        let g = lower_incomplete_gamma(b, z)?;
        quad_err.push_max(scaled_error(g, q));
        unit_err.push_max((lower_incomplete_gamma(1.0, z)? + (-z).exp_m1()).abs());
    }
    Ok(Outcome {
        measurements: vec![
            Measurement::new(1, "incomplete gamma vs quadrature, max scaled error", 50, quad_err.value, Relation::AtMost, 1e-10),
            Measurement::new(1, "gamma(1, z) vs 1 - exp(-z), max abs error", 50, unit_err.value, Relation::AtMost, 1e-12),
        ],
        reports: Vec::new(),
    })
}

fn random_window(r: &mut ChaCha20Rng, scale: f64) -> (f64, f64) {
    let t1 = r.gen_range(0.0..1.5) * scale;
    let t2 = if r.gen_bool(0.1) { f64::INFINITY } else { t1 + r.gen_range(0.05..4.0) * scale };
    (t1, t2)
}

/// Closed forms against quadrature of the defining integral.
pub fn c2_closed_forms(ctx: &Context) -> Res {
    let mut r = ctx.rng(2);
    let form = ctx.form();
    let cfg = &ctx.cfg;

    let mut icre_err = Worst::max();
    for _ in 0..100 {
        let rate = r.gen_range(0.2..5.0);
        let (t1, t2) = random_window(&mut r, 1.0 / rate);
        let d = Dist::from(Exponential::new(rate)?);
        let q = icre(&d, &ratio(&d, t1, t2)?, cfg)?.value;
        icre_err.push_max(scaled_error(closed_form_icre_exp(rate, t1, t2)?, q));
    }

    let mut expw_err = Worst::max();
    for _ in 0..100 {
        let rate = r.gen_range(0.2..5.0);
        let alpha = rate * r.gen_range(-1.0..0.9);
        let (t1, t2) = random_window(&mut r, 1.0 / rate);
        let d = Dist::from(Exponential::new(rate)?);
        let q = iwcre(&d, &ExponentialWeight::new(alpha)?, &ratio(&d, t1, t2)?, cfg)?.value;
        expw_err.push_max(scaled_error(closed_form_iwcre_exp_expweight(rate, alpha, t1, t2, form)?, q));
    }

    let mut poly_err = Worst::max();
    for _ in 0..50 {
        let scale = r.gen_range(0.2..5.0);
        let degree = r.gen_range(0..=3usize);
        let coeffs: Vec<f64> = (0..=degree).map(|_| r.gen_range(0.0..2.0)).collect();
        let (t1, t2) = random_window(&mut r, scale);
        let d = Dist::from(Exponential::with_scale(scale)?);
        let w = Weight::poly(coeffs.clone())?;
        let q = iwcre(&d, &w, &ratio(&d, t1, t2)?, cfg)?.value;
        poly_err.push_max(scaled_error(closed_form_iwcre_exp_poly(scale, &coeffs, t1, t2, form)?, q));
    }

    let mut gev_err = Worst::max();
    for _ in 0..25 {
        let (sigma, xi): (f64, f64) = (r.gen_range(0.5..2.0), r.gen_range(0.2..1.0));
        let g = Gev::new(sigma / xi + r.gen_range(0.0..1.0), sigma, xi)?;
        let degree = r.gen_range(0..=2usize);
        let coeffs: Vec<f64> = (0..=degree).map(|_| r.gen_range(0.0..1.5)).collect();
        let (t1, t2) = quantile_window(&mut r, &g)?;
        let w = Weight::gev_poly(coeffs.clone(), g)?;
        let d = Dist::from(g);
        let q = iwce(&d, &w, &ratio(&d, t1, t2)?, cfg)?.value;
        gev_err.push_max(scaled_error(closed_form_iwce_gev(&g, &coeffs, t1, t2, cfg)?, q));
    }

    let printed = ctx.as_printed;
    let tag = if printed { "as printed" } else { "corrected" };
    Ok(Outcome {
        measurements: vec![
            Measurement::new(2, "exponential ICRE closed form vs quadrature", 100, icre_err.value, Relation::AtMost, 1e-8),
            Measurement::new(2, &format!("exp-weight IWCRE closed form ({tag}) vs quadrature"), 100, expw_err.value, Relation::AtMost, 1e-8)
                .reported_if(printed),
            Measurement::new(2, &format!("polynomial-weight IWCRE closed form ({tag}) vs quadrature"), 50, poly_err.value, Relation::AtMost, 1e-8)
                .reported_if(printed),
            Measurement::new(2, "GEV IWCE through Pi vs quadrature", 25, gev_err.value, Relation::AtMost, 1e-6),
        ],
        reports: Vec::new(),
    })
}

/// The printed constants reproduce the documented discrepancies.
pub fn c3_errata(ctx: &Context) -> Res {
    let cfg = &ctx.cfg;
    let coeffs = [1.0, 1.0, 1.0];
    let (t1, t2) = (0.5, 3.0);
    let d2 = Dist::from(Exponential::with_scale(2.0)?);
    let q_poly = iwcre(&d2, &Weight::poly(coeffs.to_vec())?, &ratio(&d2, t1, t2)?, cfg)?.value;
    let printed_poly = closed_form_iwcre_exp_poly(2.0, &coeffs, t1, t2, Form::AsPrinted)?;

    let d1 = Dist::from(Exponential::new(1.0)?);
    let q_exp = iwcre(&d1, &ExponentialWeight::new(0.5)?, &ratio(&d1, t1, t2)?, cfg)?.value;
    let printed_exp = closed_form_iwcre_exp_expweight(1.0, 0.5, t1, t2, Form::AsPrinted)?;

    let unit_gap = (closed_form_iwcre_exp_poly(1.0, &coeffs, t1, t2, Form::AsPrinted)?
        - closed_form_iwcre_exp_poly(1.0, &coeffs, t1, t2, Form::Corrected)?)
    .abs();
    Ok(Outcome {
        measurements: vec![
            Measurement::new(3, "printed polynomial form at scale 2, |printed - quadrature|", 1, (printed_poly - q_poly).abs(), Relation::Above, 1e-3),
            Measurement::new(3, "printed exp-weight form at (1, 0.5), |printed - quadrature|", 1, (printed_exp - q_exp).abs(), Relation::Above, 1e-3),
            Measurement::new(3, "polynomial form at scale 1, |printed - corrected|", 1, unit_gap, Relation::AtMost, 1e-10),
        ],
        reports: Vec::new(),
    })
}

/// Window between two random quantiles of the bulk of `g`.
fn quantile_window(r: &mut ChaCha20Rng, g: &Gev<f64>) -> Result<(f64, f64), CliError> {
    let p1: f64 = r.gen_range(0.05..0.6);
    let p2 = (p1 + r.gen_range(0.1..0.35)).min(0.97);
    Ok((g.quantile(p1)?, g.quantile(p2)?))
}

/// Random (distribution, weight, finite window) across the three
/// parametric families.
pub fn random_case(r: &mut ChaCha20Rng, k: usize) -> Result<(Dist64, Weight64, f64, f64), CliError> {
    let (dist, t1, t2) = match k % 3 {
        0 => {
            let rate = r.gen_range(0.3..3.0);
            let t1 = r.gen_range(0.0..1.5) / rate;
            (Dist::from(Exponential::new(rate)?), t1, t1 + r.gen_range(0.1..3.0) / rate)
        }
        1 => {
            let lower: f64 = r.gen_range(0.0..1.0);
            let width = r.gen_range(0.5..3.0);
            let t1 = lower + width * r.gen_range(0.0..0.6);
            let t2 = (t1 + width * r.gen_range(0.05..0.6)).min(lower + 0.98 * width);
            (Dist::from(Uniform::new(lower, lower + width)?), t1, t2)
        }
        _ => {
            let (sigma, xi): (f64, f64) = (r.gen_range(0.5..1.5), r.gen_range(0.2..0.8));
            let g = Gev::new(sigma / xi + r.gen_range(0.0..1.0), sigma, xi)?;
            let (t1, t2) = quantile_window(r, &g)?;
            (Dist::from(g), t1, t2)
        }
    };
    let weight = match (k / 3) % 3 {
        0 => Weight::Const,
        1 => Weight::exp(r.gen_range(-0.5..0.5))?,
        _ => Weight::poly(vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0), r.gen_range(0.0..0.5)])?,
    };
    Ok((dist, weight, t1, t2))
}

/// Equivalent forms and the `δ`, `δ̄` identities.
pub fn c4_identities(ctx: &Context) -> Res {
    let mut r = ctx.rng(4);
    let cases = (0..100).map(|k| random_case(&mut r, k)).collect::<Result<Vec<_>, _>>()?;
    let errs = cases
        .par_iter()
        .map(|(d, w, t1, t2)| -> Result<[f64; 4], CliError> {
            let iv = ratio(d, *t1, *t2)?;
            let cfg = &ctx.cfg;
            Ok([
                scaled_error(iwcre_equivalent_form(d, w, &iv, cfg)?.value, iwcre(d, w, &iv, cfg)?.value),
                scaled_error(iwce_equivalent_form(d, w, &iv, cfg)?.value, iwce(d, w, &iv, cfg)?.value),
                scaled_error(delta_psi_form(d, w, &iv, cfg)?, delta(d, w, &iv, cfg)?),
                scaled_error(delta_bar_psi_form(d, w, &iv, cfg)?, delta_bar(d, w, &iv, cfg)?),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let names = [
        "IWCRE equivalent form vs direct quadrature",
        "IWCE equivalent form vs direct quadrature",
        "delta psi-identity",
        "delta-bar psi-identity",
    ];
    let measurements = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut w = Worst::max();
            errs.iter().for_each(|e| w.push_max(e[i]));
            Measurement::new(4, name, errs.len(), w.value, Relation::AtMost, 1e-8)
        })
        .collect();
    Ok(Outcome { measurements, reports: Vec::new() })
}

/// The representation through `φ'` and partial entropies.
pub fn c5_derivative_representation(ctx: &Context) -> Res {
    let mut r = ctx.rng(5);
    let cases = (0..12).map(|k| random_case(&mut r, k)).collect::<Result<Vec<_>, _>>()?;
    let rows = cases
        .par_iter()
        .map(|(d, w, t1, t2)| -> Result<[f64; 4], CliError> {
            let iv = ratio(d, *t1, *t2)?;
            let cfg = &ctx.cfg;
            let target = iwce(d, w, &iv, cfg)?.value;
            let lower = iwce_weight_derivative_form(d, w, &iv, cfg, DerivativeVariant::Lower)?.value;
            let upper = iwce_weight_derivative_form(d, w, &iv, cfg, DerivativeVariant::Upper)?.value;
            let printed = iwce_weight_derivative_form(d, w, &iv, cfg, DerivativeVariant::UpperAsPrinted)?.value;
            Ok([
                scaled_error(lower, target),
                scaled_error(upper, target),
                (printed + upper).abs() / target.abs().max(1.0),
                scaled_error(upper - printed, 2.0 * target),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let col = |i: usize| {
        let mut w = Worst::max();
        rows.iter().for_each(|e| w.push_max(e[i]));
        w.value
    };
    let n = rows.len();
    Ok(Outcome {
        measurements: vec![
            Measurement::new(5, "lower-end representation vs IWCE", n, col(0), Relation::AtMost, 1e-8),
            Measurement::new(5, "corrected upper-end representation vs IWCE", n, col(1), Relation::AtMost, 1e-8),
            Measurement::new(5, "printed upper-end sign pattern |printed + corrected|", n, col(2), Relation::AtMost, 1e-8)
                .note("the printed line is the exact negation of the corrected one"),
            Measurement::new(5, "|(corrected - printed) - 2 IWCE|", n, col(3), Relation::AtMost, 1e-8),
        ],
        reports: Vec::new(),
    })
}

/// Both `ϑ` splits reassemble IWCE.
pub fn c6_vartheta(ctx: &Context) -> Res {
    let mut r = ctx.rng(6);
    let cases = (0..50).map(|k| random_case(&mut r, k)).collect::<Result<Vec<_>, _>>()?;
    let rows = cases
        .par_iter()
        .map(|(d, w, t1, t2)| -> Result<(f64, f64), CliError> {
            let iv = ratio(d, *t1, *t2)?;
            let target = iwce(d, w, &iv, &ctx.cfg)?.value;
            let split = vartheta_decomposition(d, w, &iv, &ctx.cfg)?;
            Ok(((split.first_sum() - target).abs(), (split.second_sum() - target).abs()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (mut a, mut b) = (Worst::max(), Worst::max());
    rows.iter().for_each(|(x, y)| {
        a.push_max(*x);
        b.push_max(*y);
    });
    Ok(Outcome {
        measurements: vec![
            Measurement::new(6, "first split sum vs IWCE, max abs error", rows.len(), a.value, Relation::AtMost, 1e-7),
            Measurement::new(6, "second split sum vs IWCE, max abs error", rows.len(), b.value, Relation::AtMost, 1e-7),
        ],
        reports: Vec::new(),
    })
}

/// Tail levels of the limit-recovery scan.
pub const LIMIT_EPSILONS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// `|IWCRE(ε, Q(1-ε)) - WCRE|` at each of [`LIMIT_EPSILONS`].
pub fn limit_recovery_errors(weight: &Weight64, cfg: &QuadratureConfig64) -> Result<Vec<f64>, CliError> {
    let d = Dist::from(Exponential::new(1.0)?);
    let full = wcre(&d, weight, cfg)?.value;
    LIMIT_EPSILONS
        .iter()
        .map(|&eps| {
            let iv = ratio(&d, eps, d.quantile(1.0 - eps)?)?;
            Ok((iwcre(&d, weight, &iv, cfg)?.value - full).abs())
        })
        .collect()
}

/// Shrinking windows recover the untruncated measure. The `1e-4` target
/// at `ε = 1e-4` is recorded but not asserted by the suite: the tail beyond
/// `Q(1 - ε)` alone contributes more than that.
pub fn c7_limit_recovery(ctx: &Context) -> Res {
    let mut measurements = Vec::new();
    for (label, w) in [("constant weight", Weight::Const), ("exp weight 0.3", Weight::exp(0.3)?)] {
        let errs = limit_recovery_errors(&w, &ctx.cfg)?;
        let at = LIMIT_EPSILONS.iter().position(|e| *e == 1e-4).expect("1e-4 in the scan");
        measurements.push(
            Measurement::new(7, &format!("|IWCRE(1e-4, Q(1-1e-4)) - WCRE|, {label}"), 1, errs[at], Relation::AtMost, 1e-4)
                .reported()
                .note(format!(
                    "errors at eps = {}: {}",
                    LIMIT_EPSILONS.map(|e| format!("{e:e}")).join(", "),
                    errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
                )),
        );
        let worst_ratio = errs.windows(2).map(|p| p[1] / p[0]).fold(f64::NEG_INFINITY, f64::max);
        measurements.push(Measurement::new(
            7,
            &format!("limit error decays monotonically in eps, max successive ratio, {label}"),
            errs.len(),
            worst_ratio,
            Relation::Below,
            1.0,
        ));
    }
    Ok(Outcome { measurements, reports: Vec::new() })
}

fn grid_reports(results: &[NodeResult], id: TheoremId) -> impl Iterator<Item = (&NodeResult, &BoundReport)> {
    results
        .iter()
        .flat_map(|n| n.reports.iter().map(move |r| (n, r)))
        .filter(move |(_, r)| r.theorem_id == id)
}

/// `IWCE <= E[η]` and `IWCRE <= E[η̄]` across the grid, and the uniform
/// anchor.
pub fn c8_thm22(ctx: &Context, results: &[NodeResult]) -> Res {
    let mut measurements = Vec::new();
    for id in [TheoremId::T22, TheoremId::T22Iwcre] {
        let mut w = Worst::min();
        let mut mc = Worst::max();
        for (_, r) in grid_reports(results, id) {
            w.push_min(r.margin);
            let se = r.diagnostics["rhs_monte_carlo_se"];
            mc.push_max(z_score(r.diagnostics["rhs_monte_carlo"], r.rhs, se));
        }
        measurements.push(Measurement::new(8, &format!("{id} minimum margin over the grid"), w.count, w.value, Relation::AtLeast, -1e-10));
        measurements.push(
            Measurement::new(8, &format!("{id} rhs vs Monte Carlo conditional mean, max |z|"), mc.count, mc.value, Relation::AtMost, 3.0)
                .reported(),
        );
    }
    let u = Dist::from(Uniform::new(0.0, 1.0)?);
    let iv = ratio(&u, 0.2, 0.7)?;
    let anchor = thm22_check(&u, &ConstantOne, &iv, &ctx.cfg, &ctx.opts)?.with_case("uniform:lower=0,upper=1 | const | (0.2, 0.7) | ratio");
    measurements.push(Measurement::new(8, "anchor lhs, |lhs - 0.02348|", 1, (anchor.lhs - 0.02348).abs(), Relation::AtMost, 1e-5));
    measurements.push(Measurement::new(8, "anchor rhs, |rhs - 0.225|", 1, (anchor.rhs - 0.225).abs(), Relation::AtMost, 1e-4));
    Ok(Outcome { measurements, reports: vec![anchor] })
}

/// The derivative identity behind the monotonicity criterion.
pub fn c9_thm24(results: &[NodeResult]) -> Res {
    let mut w = Worst::max();
    let mut other = Worst::max();
    for n in results {
        if n.convention == TruncationConvention::Ratio {
            w.push_max(n.derivative_residual);
        } else {
            other.push_max(n.derivative_residual);
        }
    }
    Ok(Outcome {
        measurements: vec![
            Measurement::new(9, "derivative residual, ratio convention, max", w.count, w.value, Relation::Below, 1e-4),
            Measurement::new(9, "derivative residual, proper convention, max", other.count, other.value, Relation::Below, 1e-4)
                .reported()
                .note("the identity is derived for the ratio convention"),
        ],
        reports: Vec::new(),
    })
}

/// Routes to `E|ψ(X) - ψ(Y)|`.
pub fn c10_thm25(ctx: &Context, results: &[NodeResult]) -> Res {
    let mut z = Worst::max();
    let mut dev = Worst::min();
    for (n, r) in grid_reports(results, TheoremId::T25) {
        if n.convention != TruncationConvention::Ratio {
            continue;
        }
        let se = r.diagnostics["lhs_monte_carlo_se"];
        z.push_max(z_score(r.oracle_lhs.unwrap_or(f64::NAN), r.lhs, se));
        dev.push_min(r.lhs - r.diagnostics["lhs_mean_deviation"]);
    }
    let u = Dist::from(Uniform::new(0.0, 1.0)?);
    let upper = TruncationInterval::new(&u, 0.5, 1.0, TruncationConvention::Proper)?;
    let anchor = thm25_check(&u, &ConstantOne, &upper, &ctx.cfg, &ctx.opts)?
        .with_case("uniform:lower=0,upper=1 | const | (0.5, 1) | proper");
    let mc = anchor.oracle_lhs.unwrap_or(f64::NAN);
    let se = anchor.diagnostics["lhs_monte_carlo_se"];
    let lower = TruncationInterval::new(&u, 0.0, 0.5, TruncationConvention::Proper)?;
    let proof_step = thm25_lhs(&u, &ConstantOne, &lower, &ctx.cfg, Thm25Route::ProofIntegral)?;
    let dq = thm25_lhs(&u, &ConstantOne, &lower, &ctx.cfg, Thm25Route::DoubleQuadrature)?;
    Ok(Outcome {
        measurements: vec![
            Measurement::new(10, "double quadrature vs Monte Carlo (1e5 pairs), max |z| over the grid", z.count, z.value, Relation::AtMost, 3.0),
            Measurement::new(10, "anchor (0.5, 1): |Monte Carlo - 1/6| / se", 1, z_score(mc, 1.0 / 6.0, se), Relation::AtMost, 3.0),
            Measurement::new(10, "anchor (0.5, 1): |double quadrature - 1/6|", 1, (anchor.lhs - 1.0 / 6.0).abs(), Relation::AtMost, 1e-9),
            Measurement::new(10, "proof-step integral route on (0, 0.5) is negative", 1, proof_step, Relation::Below, 0.0)
                .note(format!("double quadrature gives {dq}")),
            Measurement::new(10, "E|psi(X)-psi(Y)| - E|psi(X) - E psi(X)|, min over the grid", dev.count, dev.value, Relation::AtLeast, -1e-9),
        ],
        reports: vec![anchor],
    })
}

/// GEV cases for the proposition: (θ, x, y).
pub fn prop21_cases() -> Vec<(Vec<f64>, f64, f64)> {
    let mut out = Vec::new();
    for theta in [vec![1.0], vec![1.0, 0.5], vec![0.5, 0.0, 0.25]] {
        for (x, y) in [(1.5, 4.0), (0.5, 2.0), (3.0, 10.0), (0.25, 1.0)] {
            out.push((theta.clone(), x, y));
        }
    }
    out
}

/// Tolerance refinement, route agreement and the log-sum bound where its
/// proof applies.
pub fn c11_stability(ctx: &Context, results: &[NodeResult]) -> Res {
    let mut shift = Worst::max();
    for n in results {
        for r in &n.reports {
            for key in ["halved_lhs_shift", "halved_rhs_shift"] {
                if let Some(v) = r.diagnostics.get(key) {
                    shift.push_max(*v);
                }
            }
        }
    }
    let mut disagree = 0usize;
    let mut routed = 0usize;
    for n in results {
        for r in &n.reports {
            if matches!(r.theorem_id, TheoremId::T21 | TheoremId::T21Iwcre | TheoremId::T23 | TheoremId::T23Iwcre | TheoremId::T24) {
                routed += 1;
                if r.oracle_agreement != Some(true) {
                    disagree += 1;
                }
            }
        }
    }

    let gev = Gev::new(2.0, 1.0, 0.5)?;
    let mut reports = Vec::new();
    let mut p_shift = Worst::max();
    let mut p_disagree = 0usize;
    for (theta, x, y) in prop21_cases() {
        let r = prop21_check(&gev, &theta, x, y, &ctx.cfg)?;
        let fine = prop21_check(&gev, &theta, x, y, &ctx.cfg.halved())?;
        p_shift.push_max(scaled_error(fine.lhs, r.lhs).max(scaled_error(fine.rhs, r.rhs)));
        if r.oracle_agreement != Some(true) {
            p_disagree += 1;
        }
        let case = format!("gev:mu=2,sigma=1,xi=0.5 | theta={theta:?} | ({x}, {y})");
        reports.push(r.with_case(case));
    }

    let mut anchored = Worst::min();
    for (n, r) in grid_reports(results, TheoremId::T23) {
        if n.anchored {
            anchored.push_min(r.margin);
        }
    }
    let n_prop = reports.len();
    Ok(Outcome {
        measurements: vec![
            Measurement::new(11, "grid reports: lhs/rhs shift at halved tolerances, max", shift.count, shift.value, Relation::AtMost, 1e-6),
            Measurement::new(11, "grid reports: two-route disagreements", routed, disagree as f64, Relation::AtMost, 0.0),
            Measurement::new(11, "P2_1: lhs/rhs shift at halved tolerances, max", n_prop, p_shift.value, Relation::AtMost, 1e-6),
            Measurement::new(11, "P2_1: two-scheme disagreements", n_prop, p_disagree as f64, Relation::AtMost, 0.0),
            Measurement::new(11, "T2_3 margin with t1 at the support lower bound, min", anchored.count, anchored.value, Relation::AtLeast, 0.0),
        ],
        reports,
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// The limit form of the exponential corollary.
pub fn c12_cor21_limit(ctx: &Context) -> Res {
    let mut r = ctx.rng(12);
    let mut margin = Worst::min();
    let mut exact = Worst::max();
    let mut general = Worst::max();
    let mut reports = Vec::new();
    for _ in 0..50 {
        let degree = r.gen_range(0..=4usize);
        let eps: Vec<f64> = (0..=degree).map(|_| r.gen_range(0.0..2.0)).collect();
        let rep = cor21_limit_form(&eps)?;
        let lhs: f64 = eps.iter().enumerate().map(|(i, e)| e * factorial(i) * (1.0 - 0.5f64.powi(i as i32 + 1))).sum();
        let rhs: f64 = eps.iter().enumerate().map(|(i, e)| e * factorial(i + 1)).sum();
        margin.push_min(rep.margin);
        exact.push_max(scaled_error(rep.lhs, lhs).max(scaled_error(rep.rhs, rhs)));
        general.push_max(
            scaled_error(rep.diagnostics["general_form_lhs"], 2.0 * lhs).max(scaled_error(rep.diagnostics["general_form_rhs"], 2.0 * rhs)),
        );
        reports.push(rep.with_case(format!("limit form | eps={eps:?}")));
    }
    let base = cor21_limit_form(&[1.0])?;
    let base_err = (base.lhs - 0.5).abs().max((base.rhs - 1.0).abs());
    reports.push(base.with_case("limit form | eps=[1.0]"));

    for (c, a, b, eps) in [(1.0, 0.0, f64::INFINITY, vec![1.0, 1.0]), (1.5, 0.2, 3.0, vec![1.0, 0.5, 0.25]), (0.5, 1.0, 2.0, vec![0.0, 1.0])] {
        let rep = cor21_exponential_check(c, a, b, &eps, &ctx.cfg)?;
        reports.push(rep.with_case(format!("general form | c={c} a={a} b={b} eps={eps:?}")));
    }
    for (label, a, b, f) in [
        ("f=1", 0.1, 0.9, (|_| 1.0) as fn(f64) -> f64),
        ("f=1+s", 0.0, 1.0, |s| 1.0 + s),
        ("f=exp(-s)", 0.2, 0.7, |s: f64| (-s).exp()),
    ] {
        let rep = cor21_uniform_check(f, a, b, &ctx.cfg)?;
        reports.push(rep.with_case(format!("uniform corollary | {label} | ({a}, {b})")));
    }
    Ok(Outcome {
        measurements: vec![
            Measurement::new(12, "limit form minimum margin", 50, margin.value, Relation::AtLeast, 0.0),
            Measurement::new(12, "limit form vs exact factorial arithmetic", 50, exact.value, Relation::AtMost, 1e-10),
            Measurement::new(12, "n = 0 case: max(|lhs - 0.5|, |rhs - 1|)", 1, base_err, Relation::AtMost, 1e-10),
            Measurement::new(12, "general form at c=1, (0, inf) vs twice the limit form", 50, general.value, Relation::AtMost, 1e-10)
                .reported(),
        ],
        reports,
    })
}

/// Monotonicity scan of the exponential closed forms.
pub fn c13_monotonicity(ctx: &Context) -> Result<(Outcome, MonotonicityScan), CliError> {
    let scan = scan_monotonicity(ctx.form())?;
    let worst = scan.icre.iter().map(|s| s.max_first_difference).fold(f64::NEG_INFINITY, f64::max);
    let witness = scan.witness.as_ref().map_or(f64::NEG_INFINITY, |w| w.first_difference);
    let outcome = Outcome {
        measurements: vec![
            Measurement::new(13, "ICRE t1-sweep at t2 in {1, 2, 5}: max first difference", scan.icre.len(), worst, Relation::AtMost, 0.0),
            Measurement::new(13, "exp-weight form (1, 0.9): witness first difference", scan.expweight.len(), witness, Relation::Above, 0.0)
                .note(match &scan.witness {
                    Some(w) => format!("t2 = {}, t1* = {}", w.t2, w.t1_star),
                    None => "no witness".into(),
                }),
        ],
        reports: Vec::new(),
    };
    Ok((outcome, scan))
}

/// Plug-in entropy of `n` draws.
pub const PLUGIN_SAMPLES: usize = 100_000;

/// ECDF plug-in against the parametric value.
pub fn c14_plugin(ctx: &Context) -> Res {
    let d = Dist::from(Exponential::new(1.0)?);
    let cases: Vec<(Measure, TruncationConvention)> = [Measure::Iwce, Measure::Iwcre]
        .into_iter()
        .flat_map(|m| TruncationConvention::BOTH.into_iter().map(move |c| (m, c)))
        .collect();
    let zs = cases
        .par_iter()
        .enumerate()
        .map(|(k, &(m, c))| -> Result<f64, CliError> {
            let iv = TruncationInterval::new(&d, 0.5, 1.5, c)?;
            let param = match m {
                Measure::Iwce => iwce(&d, &ConstantOne, &iv, &ctx.cfg)?.value,
                Measure::Iwcre => iwcre(&d, &ConstantOne, &iv, &ctx.cfg)?.value,
            };
            let est = ecdf_plugin_entropy(&d, &ConstantOne, &iv, m, PLUGIN_SAMPLES, ctx.seed.wrapping_add(200_000 + k as u64), &ctx.cfg)?;
            Ok(z_score(est.mean, param, est.std_error))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        measurements: vec![Measurement::new(14, "plug-in vs parametric, max |z| (bootstrap sd)", zs.len(), worst, Relation::AtMost, 3.0)
            .note(format!("z per case: {}", zs.iter().map(|z| format!("{z:.2}")).collect::<Vec<_>>().join(", ")))],
        reports: Vec::new(),
    })
}

/// Margin summaries of every grid statement, reported only.
pub fn grid_margin_summary(results: &[NodeResult]) -> Vec<Measurement> {
    let mut out = Vec::new();
    for id in super::grid::GRID_THEOREMS {
        for conv in TruncationConvention::BOTH {
            let mut w = Worst::min();
            let mut holds = 0usize;
            let mut vacuous = 0usize;
            for (n, r) in grid_reports(results, id) {
                if n.convention != conv {
                    continue;
                }
                if r.vacuous {
                    vacuous += 1;
                }
                if r.holds(1e-10) {
                    holds += 1;
                }
                w.push_min(r.margin);
            }
            out.push(
                Measurement::new(0, &format!("{id} {conv}: minimum margin"), w.count, w.value, Relation::AtLeast, 0.0)
                    .reported()
                    .note(format!("holds at {holds}/{} nodes, {vacuous} vacuous", w.count)),
            );
        }
    }
    out
}
