//! Oracle-first checks: every computed quantity is compared against a value
//! obtained some other way (an antiderivative worked by hand, a symmetry,
//! a second numerical route or a Monte Carlo mean).

use approx::assert_abs_diff_eq;
use iwce::distributions::{Distribution, Empirical, Exponential, Gev, Uniform};
use iwce::entropy::{
    closed_form_icre_exp, conditional_expectation, icre, iwce, iwce_equivalent_form, iwcre, iwcre_equivalent_form,
    vartheta_decomposition, wce, wcre, TruncationConvention::{Proper, Ratio}, TruncationInterval,
};
use iwce::numerics::QuadratureConfig;
use iwce::oracle::mc_conditional_expectation;
use iwce::weights::{ConstantOne, ExponentialWeight, PolynomialWeight, Scaled, WeightFunction};
use proptest::prelude::*;

fn cfg() -> QuadratureConfig<f64> {
    QuadratureConfig::default()
}

#[test]
fn unit_exponential_whole_support_values() {
    let e = Exponential::new(1.0).unwrap();
    // -∫ e^{-x} log e^{-x} dx = ∫ x e^{-x} dx = 1.
    assert_abs_diff_eq!(wcre(&e, &ConstantOne, &cfg()).unwrap().value, 1.0, epsilon = 1e-9);
    // -∫ F log F with F = 1 - e^{-x} equals π²/6 - 1.
    let expected = std::f64::consts::PI.powi(2) / 6.0 - 1.0;
    assert_abs_diff_eq!(wce(&e, &ConstantOne, &cfg()).unwrap().value, expected, epsilon = 1e-9);
}

#[test]
fn uniform_proper_window_is_a_quarter_of_its_length() {
    // On (a, b) the proper truncated law is uniform, and -∫_0^1 u log u du = 1/4.
    let u = Uniform::new(0.0, 1.0).unwrap();
    for (a, b) in [(0.0, 1.0), (0.2, 0.7), (0.5, 0.55)] {
        let iv = TruncationInterval::new(&u, a, b, Proper).unwrap();
        assert_abs_diff_eq!(iwce(&u, &ConstantOne, &iv, &cfg()).unwrap().value, (b - a) / 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(iwcre(&u, &ConstantOne, &iv, &cfg()).unwrap().value, (b - a) / 4.0, epsilon = 1e-10);
    }
}

#[test]
fn f32_instantiation_tracks_f64() {
    let e64 = Exponential::new(1.5_f64).unwrap();
    let e32 = Exponential::new(1.5_f32).unwrap();
    let iv64 = TruncationInterval::new(&e64, 0.25, 2.0, Ratio).unwrap();
    let iv32 = TruncationInterval::new(&e32, 0.25, 2.0, Ratio).unwrap();
    let cfg32 = QuadratureConfig::new(1e-5_f32, 1e-5, 500).unwrap();
    let a = iwcre(&e64, &ConstantOne, &iv64, &cfg()).unwrap().value;
    let b = iwcre(&e32, &ConstantOne, &iv32, &cfg32).unwrap().value;
    assert_abs_diff_eq!(a, f64::from(b), epsilon = 1e-4);
}

#[test]
fn empirical_sums_match_a_hand_computation() {
    // Atoms 1, 2, 3 with mass 1/3: on (0, 4) the CDF is 0, 1/3, 2/3, 1 on
    // unit pieces, so the ratio IWCE is -(1/3 log 1/3 + 2/3 log 2/3).
    let emp = Empirical::from_samples(vec![1.0, 2.0, 3.0]).unwrap();
    let iv = TruncationInterval::new(&emp, 0.0, 4.0, Ratio).unwrap();
    let third = 1.0_f64 / 3.0;
    let expected = -(third * third.ln() + 2.0 * third * (2.0 * third).ln());
    assert_abs_diff_eq!(iwce(&emp, &ConstantOne, &iv, &cfg()).unwrap().value, expected, epsilon = 1e-14);
}

#[test]
fn gev_quantile_inverts_cdf() {
    let g = Gev::new(2.0, 1.0, 0.5).unwrap();
    for p in [1e-6, 0.1, 0.5, 0.9, 0.999] {
        let x = g.quantile(p).unwrap();
        assert_abs_diff_eq!(g.cdf(x), p, epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn icre_closed_form_matches_quadrature(rate in 0.2..5.0_f64, t1 in 0.0..3.0_f64, len in 0.05..4.0_f64) {
        let e = Exponential::new(rate).unwrap();
        let t2 = t1 + len;
        prop_assume!(e.mass(t1, t2) > 1e-9);
        let iv = TruncationInterval::new(&e, t1, t2, Ratio).unwrap();
        let quad = icre(&e, &iv, &cfg()).unwrap().value;
        let closed = closed_form_icre_exp(rate, t1, t2).unwrap();
        prop_assert!((quad - closed).abs() <= 1e-8 * closed.abs().max(1.0), "{quad} vs {closed}");
    }

    #[test]
    fn equivalent_forms_match_direct(rate in 0.3..3.0_f64, alpha in -0.5..0.5_f64, t1 in 0.0..2.0_f64, len in 0.1..3.0_f64) {
        let e = Exponential::new(rate).unwrap();
        let w = ExponentialWeight::new(alpha).unwrap();
        let iv = TruncationInterval::new(&e, t1, t1 + len, Ratio).unwrap();
        let d = iwcre(&e, &w, &iv, &cfg()).unwrap().value;
        let q = iwcre_equivalent_form(&e, &w, &iv, &cfg()).unwrap().value;
        prop_assert!((d - q).abs() <= 1e-8 * d.abs().max(1.0));
        let d = iwce(&e, &w, &iv, &cfg()).unwrap().value;
        let q = iwce_equivalent_form(&e, &w, &iv, &cfg()).unwrap().value;
        prop_assert!((d - q).abs() <= 1e-8 * d.abs().max(1.0));
    }

    #[test]
    fn conventions_coincide_at_the_support_ends(rate in 0.3..3.0_f64, t2 in 0.2..5.0_f64) {
        // F(t1) = 0 makes the two truncated CDFs equal; F̄(t2) = 0 does the same for the SFs.
        let e = Exponential::new(rate).unwrap();
        let w = PolynomialWeight::new(vec![1.0, 0.5]).unwrap();
        let lower = TruncationInterval::new(&e, 0.0, t2, Ratio).unwrap();
        let a = iwce(&e, &w, &lower, &cfg()).unwrap().value;
        let b = iwce(&e, &w, &lower.with_convention(Proper), &cfg()).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        let upper = TruncationInterval::new(&e, t2, f64::INFINITY, Ratio).unwrap();
        let a = iwcre(&e, &w, &upper, &cfg()).unwrap().value;
        let b = iwcre(&e, &w, &upper.with_convention(Proper), &cfg()).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn exponential_proper_iwcre_is_memoryless(rate in 0.3..3.0_f64, shift in 0.0..3.0_f64, len in 0.1..3.0_f64) {
        let e = Exponential::new(rate).unwrap();
        let at = |t1: f64| {
            let iv = TruncationInterval::new(&e, t1, t1 + len, Proper).unwrap();
            iwcre(&e, &ConstantOne, &iv, &cfg()).unwrap().value
        };
        let (a, b) = (at(0.0), at(shift));
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn scaling_the_weight_scales_the_measure(c in 0.0..10.0_f64, t1 in 0.0..0.6_f64, len in 0.05..0.4_f64) {
        let u = Uniform::new(0.0, 1.0).unwrap();
        let iv = TruncationInterval::new(&u, t1, t1 + len, Ratio).unwrap();
        let w = PolynomialWeight::new(vec![0.5, 2.0]).unwrap();
        let base = iwce(&u, &w, &iv, &cfg()).unwrap().value;
        let scaled = iwce(&u, &Scaled::new(w, c).unwrap(), &iv, &cfg()).unwrap().value;
        prop_assert!((scaled - c * base).abs() <= 1e-9 * (c * base).abs().max(1.0));
    }

    #[test]
    fn vartheta_splits_sum_to_iwce(t1 in 0.05..1.0_f64, len in 0.2..2.0_f64) {
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, t1, t1 + len, Ratio).unwrap();
        let total = iwce(&e, &ConstantOne, &iv, &cfg()).unwrap().value;
        let s = vartheta_decomposition(&e, &ConstantOne, &iv, &cfg()).unwrap();
        prop_assert!((s.first.0 + s.first.1 - total).abs() <= 1e-7);
        prop_assert!((s.second.0 + s.second.1 - total).abs() <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn monte_carlo_conditional_mean_brackets_quadrature(seed in any::<u64>(), t1 in 0.0..1.5_f64, len in 0.2..2.0_f64) {
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, t1, t1 + len, Proper).unwrap();
        let w = PolynomialWeight::new(vec![1.0, 1.0]).unwrap();
        let exact = conditional_expectation(&e, t1, t1 + len, |x| w.psi(x), &cfg()).unwrap();
        let est = mc_conditional_expectation(&e, &iv, |x| w.psi(x), 20_000, seed).unwrap();
        // 5σ keeps the false-alarm rate negligible over the cases run here.
        prop_assert!(est.agrees_with(exact, 5.0), "{est:?} vs {exact}");
    }
}
