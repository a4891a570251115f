use super::measures::require_nonnegative_weight;
use crate::distributions::{Distribution, Exponential, Gev};
use crate::numerics::{incomplete_gamma_difference, pi_c, QuadratureConfig};
use crate::weights::{GevPolynomialWeight, PolynomialWeight};
use crate::{lit, to_f64, Error, Result, Scalar};

/// Which constants a closed form is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    /// Constants re-derived by integration by parts; these agree with
    /// quadrature.
    #[default]
    Corrected,
    /// The literal constants of the published expressions, kept so the
    /// discrepancy can be reproduced.
    AsPrinted,
}

fn check_window<T: Scalar>(t1: T, t2: T) -> Result<()> {
    if !(t1 >= T::zero()) || !t1.is_finite() || !(t2 > t1) {
        return Err(Error::DegenerateInterval {
            t1: to_f64(t1),
            t2: to_f64(t2),
            mass: 0.0,
        });
    }
    Ok(())
}

/// `-expm1(-x)`, i.e. `1 - e^{-x}`, with `x = inf` giving 1.
fn one_minus_exp<T: Scalar>(x: T) -> T {
    -(-x).exp_m1()
}

/// Ratio-convention ICRE of an exponential with rate `λ`:
/// `1/λ + (1/λ) log(1 - e^{-λd}) - d e^{-λd} / (1 - e^{-λd})`, `d = t2 - t1`.
pub fn closed_form_icre_exp<T: Scalar>(rate: T, t1: T, t2: T) -> Result<T> {
    Exponential::new(rate)?;
    check_window(t1, t2)?;
    let inv = rate.recip();
    if !t2.is_finite() {
        return Ok(inv);
    }
    let d = t2 - t1;
    let s = one_minus_exp(rate * d);
    Ok(inv + inv * s.ln() - d * (-rate * d).exp() / s)
}

/// Ratio-convention IWCRE of an exponential with scale `λ` (rate `1/λ`)
/// under `φ(x) = Σ a_i x^i`, through lower incomplete gamma differences.
///
/// With `D = e^{-t1/λ} - e^{-t2/λ}` and `Γ_b = γ(b, t2/λ) - γ(b, t1/λ)`:
/// `D⁻¹ Σ a_i λ^{i+1} Γ_{i+2} + D⁻¹ log D Σ a_i λ^{i+1} Γ_{i+1}`.
/// [`Form::AsPrinted`] uses `λ^i` in the second sum.
pub fn closed_form_iwcre_exp_poly<T: Scalar>(scale: T, coeffs: &[T], t1: T, t2: T, form: Form) -> Result<T> {
    let dist = Exponential::with_scale(scale)?;
    check_window(t1, t2)?;
    let weight = PolynomialWeight::new(coeffs.to_vec())?;
    require_nonnegative_weight(&dist, &weight, t1, t2)?;
    let (z1, z2) = (t1 / scale, t2 / scale);
    let d = (-z1).exp() * one_minus_exp(z2 - z1);
    let log_d = -z1 + one_minus_exp(z2 - z1).ln();
    let mut first = T::zero();
    let mut second = T::zero();
    let mut power = scale;
    for (i, &a) in coeffs.iter().enumerate() {
        let b = T::from_usize(i).unwrap_or_else(T::nan);
        first = first + a * power * incomplete_gamma_difference(b + lit(2.0), z1, z2)?;
        let second_power = match form {
            Form::Corrected => power,
            Form::AsPrinted => power / scale,
        };
        second = second + a * second_power * incomplete_gamma_difference(b + T::one(), z1, z2)?;
        power = power * scale;
    }
    Ok((first + log_d * second) / d)
}

/// Ratio-convention IWCRE of an exponential with rate `λ` under
/// `φ(x) = e^{αx}`, `α < λ`.
///
/// With `k = α - λ`, `E = e^{k t2} - e^{k t1}` and `D = e^{-λ t1} - e^{-λ t2}`:
/// `(k D)⁻¹ [λ (t2 e^{k t2} - t1 e^{k t1}) + c E + E log D]` where
/// `c = -λ / k = λ / (λ - α)`. [`Form::AsPrinted`] uses `c = λ / (α - λ)`.
pub fn closed_form_iwcre_exp_expweight<T: Scalar>(rate: T, alpha: T, t1: T, t2: T, form: Form) -> Result<T> {
    Exponential::new(rate)?;
    check_window(t1, t2)?;
    if !(alpha < rate) || !alpha.is_finite() {
        return Err(Error::domain(format!("need alpha < rate, got alpha = {alpha}, rate = {rate}")));
    }
    let k = alpha - rate;
    let c = match form {
        Form::Corrected => -rate / k,
        Form::AsPrinted => rate / k,
    };
    // Every term carries e^{k t1}; dividing it out against D = e^{-λ t1} (1 - e^{-λ d})
    // leaves the common factor e^{α t1}.
    let (tail, em1, s) = if t2.is_finite() {
        let d = t2 - t1;
        (t2 * (k * d).exp(), (k * d).exp_m1(), one_minus_exp(rate * d))
    } else {
        (T::zero(), -T::one(), T::one())
    };
    let log_d = -rate * t1 + s.ln();
    let bracket = rate * (tail - t1) + (c + log_d) * em1;
    Ok((alpha * t1).exp() * bracket / (k * s))
}

/// Ratio-convention IWCE of a GEV under `φ(x) = Σ b_i y(x)^i`:
/// `Δ⁻¹ Σ b_i Π_{i+2}(t1, t2) + Δ⁻¹ log Δ Σ b_i Π_{i+1}(t1, t2)`,
/// `Δ = e^{-y(t2)} - e^{-y(t1)}`.
pub fn closed_form_iwce_gev<T: Scalar>(gev: &Gev<T>, coeffs: &[T], t1: T, t2: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    check_window(t1, t2)?;
    if t1 < gev.support_lower() {
        return Err(Error::domain(format!(
            "t1 = {t1} below the GEV support [{}, inf)",
            gev.support_lower()
        )));
    }
    let weight = GevPolynomialWeight::new(coeffs.to_vec(), *gev)?;
    require_nonnegative_weight(gev, &weight, t1, t2)?;
    let mass = gev.mass(t1, t2);
    if !(mass > T::zero()) {
        return Err(Error::DegenerateInterval {
            t1: to_f64(t1),
            t2: to_f64(t2),
            mass: to_f64(mass),
        });
    }
    let mut first = T::zero();
    let mut second = T::zero();
    for (i, &b) in coeffs.iter().enumerate() {
        if b == T::zero() {
            continue;
        }
        let c = T::from_usize(i).unwrap_or_else(T::nan);
        first = first + b * pi_c(gev, c + lit(2.0), t1, t2, cfg)?;
        second = second + b * pi_c(gev, c + T::one(), t1, t2, cfg)?;
    }
    Ok((first + mass.ln() * second) / mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{iwce, iwcre, TruncationConvention::Ratio, TruncationInterval};
    use crate::weights::{ConstantOne, ExponentialWeight};

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    fn quad_exp_poly(scale: f64, coeffs: &[f64], t1: f64, t2: f64) -> f64 {
        let e = Exponential::with_scale(scale).unwrap();
        let iv = TruncationInterval::new(&e, t1, t2, Ratio).unwrap();
        iwcre(&e, &PolynomialWeight::new(coeffs.to_vec()).unwrap(), &iv, &cfg()).unwrap().value
    }

    #[test]
    fn icre_examples() {
        assert_eq!(closed_form_icre_exp(2.0, 0.3, f64::INFINITY).unwrap(), 0.5);
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, 0.5, 1.5, Ratio).unwrap();
        let q = iwcre(&e, &ConstantOne, &iv, &cfg()).unwrap().value;
        assert!((closed_form_icre_exp(1.0, 0.5, 1.5).unwrap() - q).abs() < 1e-10);
        assert!(closed_form_icre_exp(1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn exp_poly_reduces_to_cre() {
        let v = closed_form_iwcre_exp_poly(1.0, &[1.0], 0.0, f64::INFINITY, Form::Corrected).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_poly_corrected_matches_quadrature() {
        for (scale, coeffs, t1, t2) in [
            (1.0, vec![1.0, 2.0], 0.2, 1.7),
            (2.0, vec![0.5, 1.0], 0.4, 3.0),
            (0.7, vec![1.0, 0.0, 0.3, 0.1], 0.1, 2.0),
        ] {
            let cf = closed_form_iwcre_exp_poly(scale, &coeffs, t1, t2, Form::Corrected).unwrap();
            let q = quad_exp_poly(scale, &coeffs, t1, t2);
            assert!((cf - q).abs() < 1e-9, "{cf} vs {q}");
        }
        let printed = closed_form_iwcre_exp_poly(2.0, &[0.5, 1.0], 0.4, 3.0, Form::AsPrinted).unwrap();
        assert!((printed - quad_exp_poly(2.0, &[0.5, 1.0], 0.4, 3.0)).abs() > 1e-3);
        let a: f64 = closed_form_iwcre_exp_poly(1.0, &[1.0, 2.0], 0.2, 1.7, Form::AsPrinted).unwrap();
        let b = closed_form_iwcre_exp_poly(1.0, &[1.0, 2.0], 0.2, 1.7, Form::Corrected).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(closed_form_iwcre_exp_poly(-1.0, &[1.0], 0.2, 1.7, Form::Corrected).is_err());
    }

    #[test]
    fn exp_weight_corrected_matches_quadrature() {
        let e = Exponential::new(1.0).unwrap();
        let iv = TruncationInterval::new(&e, 0.5, 1.5, Ratio).unwrap();
        let q = iwcre(&e, &ExponentialWeight::new(0.5).unwrap(), &iv, &cfg()).unwrap().value;
        let cf = closed_form_iwcre_exp_expweight(1.0, 0.5, 0.5, 1.5, Form::Corrected).unwrap();
        assert!((cf - q).abs() < 1e-10, "{cf} vs {q}");
        let printed = closed_form_iwcre_exp_expweight(1.0, 0.5, 0.5, 1.5, Form::AsPrinted).unwrap();
        assert!((printed - q).abs() > 1e-3);
        let iv = TruncationInterval::new(&e, 0.5, f64::INFINITY, Ratio).unwrap();
        let q = iwcre(&e, &ExponentialWeight::new(-0.4).unwrap(), &iv, &cfg()).unwrap().value;
        let cf = closed_form_iwcre_exp_expweight(1.0, -0.4, 0.5, f64::INFINITY, Form::Corrected).unwrap();
        assert!((cf - q).abs() < 1e-9);
        assert!(closed_form_iwcre_exp_expweight(1.0, 1.0, 0.5, 1.5, Form::Corrected).is_err());
    }

    #[test]
    fn exp_weight_small_alpha_limit() {
        let icre: f64 = closed_form_icre_exp(1.5, 0.2, 1.1).unwrap();
        let near = closed_form_iwcre_exp_expweight(1.5, 1e-9, 0.2, 1.1, Form::Corrected).unwrap();
        assert!((near - icre).abs() < 1e-7);
    }

    #[test]
    fn gev_matches_quadrature() {
        let g = Gev::new(2.0, 1.0, 0.5).unwrap();
        for coeffs in [vec![1.0], vec![1.0, 0.5]] {
            let w = GevPolynomialWeight::new(coeffs.clone(), g).unwrap();
            let iv = TruncationInterval::new(&g, 1.5, 4.0, Ratio).unwrap();
            let q = iwce(&g, &w, &iv, &cfg()).unwrap().value;
            let cf = closed_form_iwce_gev(&g, &coeffs, 1.5, 4.0, &cfg()).unwrap();
            assert!((cf - q).abs() < 1e-8, "{cf} vs {q}");
        }
        assert!(closed_form_iwce_gev(&g, &[1.0], 2.0, 2.0, &cfg()).is_err());
    }
}
