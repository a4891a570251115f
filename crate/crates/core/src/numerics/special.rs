use crate::{lit, Error, Result, Scalar};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `u log u`, extended by continuity with `0 log 0 = 0`.
pub fn xlogx<T: Scalar>(u: T) -> Result<T> {
    if u < T::zero() || u.is_nan() {
        return Err(Error::domain(format!("xlogx of negative argument {u}")));
    }
    Ok(xlogx_clamped(u))
}

/// [`xlogx`] for integrands: round-off negatives count as zero and an
/// infinite argument contributes nothing (`0 log inf = 0` in the limit sense
/// is never hit here, but a NaN must not leak out of a zero weight).
#[inline]
pub(crate) fn xlogx_clamped<T: Scalar>(u: T) -> T {
    if u <= T::zero() {
        T::zero()
    } else {
        u * u.ln()
    }
}

/// Euler's gamma function for `p > 0`; exact (up to rounding of the
/// product) at integers.
pub fn gamma_function<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::domain(format!("gamma function needs p > 0, got {p}")));
    }
    if p.fract() == T::zero() && p <= lit(171.0) {
        let n = p.to_u32().unwrap_or(0);
        let mut acc = T::one();
        for k in 2..n {
            acc = acc * T::from_u32(k).unwrap_or_else(T::nan);
        }
        return Ok(acc);
    }
    Ok(lanczos(p))
}

fn lanczos<T: Scalar>(p: T) -> T {
    if p < lit(0.5) {
        // Γ(p) Γ(1 - p) = π / sin(π p)
        return T::PI() / ((T::PI() * p).sin() * lanczos(T::one() - p));
    }
    let x = p - T::one();
    let mut acc: T = lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (x + T::from_usize(i).unwrap_or_else(T::nan));
    }
    let t = x + lit(LANCZOS_G + 0.5);
    // split the power to delay overflow
    let half_pow = t.powf((x + lit(0.5)) * lit(0.5));
    (T::TAU()).sqrt() * half_pow * (-t).exp() * half_pow * acc
}

/// `ln Γ(p)` for `p > 0`.
pub fn ln_gamma<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::domain(format!("ln_gamma needs p > 0, got {p}")));
    }
    if p < lit(0.5) {
        return Ok((T::PI() / (T::PI() * p).sin()).ln() - ln_gamma(T::one() - p)?);
    }
    let x = p - T::one();
    let mut acc: T = lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (x + T::from_usize(i).unwrap_or_else(T::nan));
    }
    let t = x + lit(LANCZOS_G + 0.5);
    Ok(lit::<T>(0.5) * T::TAU().ln() + (x + lit(0.5)) * t.ln() - t + acc.ln())
}

/// Lower incomplete gamma `γ(b, z) = ∫_0^z t^{b-1} e^{-t} dt` (not
/// regularized). `z = +inf` gives `Γ(b)`.
///
/// Power series below `z = b + 1`, Lentz continued fraction for the upper
/// function above it.
pub fn lower_incomplete_gamma<T: Scalar>(b: T, z: T) -> Result<T> {
    if !(b > T::zero()) {
        return Err(Error::domain(format!("incomplete gamma needs b > 0, got {b}")));
    }
    if !(z >= T::zero()) {
        return Err(Error::domain(format!("incomplete gamma needs z >= 0, got {z}")));
    }
    if z == T::zero() {
        return Ok(T::zero());
    }
    let full = gamma_function(b)?;
    if z.is_infinite() {
        return Ok(full);
    }
    if z < b + T::one() {
        Ok(series(b, z))
    } else {
        Ok(full - upper_fraction(b, z))
    }
}

/// Upper incomplete gamma `Γ(b, z) = Γ(b) - γ(b, z)`.
pub fn upper_incomplete_gamma<T: Scalar>(b: T, z: T) -> Result<T> {
    if !(b > T::zero()) {
        return Err(Error::domain(format!("incomplete gamma needs b > 0, got {b}")));
    }
    if !(z >= T::zero()) {
        return Err(Error::domain(format!("incomplete gamma needs z >= 0, got {z}")));
    }
    if z.is_infinite() {
        return Ok(T::zero());
    }
    if z < b + T::one() {
        Ok(gamma_function(b)? - series(b, z))
    } else {
        Ok(upper_fraction(b, z))
    }
}

/// `γ(b, hi) - γ(b, lo)`, evaluated on the side that avoids cancellation.
pub fn incomplete_gamma_difference<T: Scalar>(b: T, lo: T, hi: T) -> Result<T> {
    if lo >= b + T::one() {
        Ok(upper_incomplete_gamma(b, lo)? - upper_incomplete_gamma(b, hi)?)
    } else {
        Ok(lower_incomplete_gamma(b, hi)? - lower_incomplete_gamma(b, lo)?)
    }
}

fn series<T: Scalar>(b: T, z: T) -> T {
    let mut denom = b;
    let mut term = T::one() / b;
    let mut sum = term;
    for _ in 0..10_000 {
        denom = denom + T::one();
        term = term * z / denom;
        sum = sum + term;
        if term.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * (b * z.ln() - z).exp()
}

fn upper_fraction<T: Scalar>(b: T, z: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut bn = z + T::one() - b;
    let mut c = T::one() / tiny;
    let mut d = T::one() / bn;
    let mut h = d;
    for i in 1..10_000 {
        let i = T::from_usize(i).unwrap_or_else(T::nan);
        let an = -i * (i - b);
        bn = bn + lit(2.0);
        d = an * d + bn;
        if d.abs() < tiny {
            d = tiny;
        }
        c = bn + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (b * z.ln() - z).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureConfig};

    #[test]
    fn xlogx_values() {
        assert_eq!(xlogx(0.0_f64).unwrap(), 0.0);
        assert_eq!(xlogx(1.0_f64).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((xlogx(e).unwrap() - e).abs() < 1e-15);
        assert!(xlogx(-0.1_f64).is_err());
    }

    #[test]
    fn gamma_integers_and_half() {
        assert_eq!(gamma_function(1.0_f64).unwrap(), 1.0);
        assert_eq!(gamma_function(5.0_f64).unwrap(), 24.0);
        let half = gamma_function(0.5_f64).unwrap();
        assert!((half - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!(gamma_function(0.0_f64).is_err());
        assert!(gamma_function(-1.5_f64).is_err());
    }

    #[test]
    fn gamma_matches_incomplete_limit() {
        let g = gamma_function(2.5_f64).unwrap();
        let lim = lower_incomplete_gamma(2.5_f64, 60.0).unwrap();
        assert!((g - lim).abs() < 1e-9);
        assert_eq!(lower_incomplete_gamma(2.5_f64, f64::INFINITY).unwrap(), g);
    }

    #[test]
    fn ln_gamma_consistent() {
        for &p in &[0.1_f64, 0.7, 1.0, 3.3, 12.0, 50.5] {
            let direct = gamma_function(p).unwrap().ln();
            assert!((ln_gamma(p).unwrap() - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn incomplete_gamma_unit_shape() {
        for &z in &[0.5_f64, 1.0, 2.0] {
            let v = lower_incomplete_gamma(1.0, z).unwrap();
            assert!((v - (1.0 - (-z).exp())).abs() < 1e-12);
        }
        assert_eq!(lower_incomplete_gamma(2.0_f64, 0.0).unwrap(), 0.0);
        assert!(lower_incomplete_gamma(0.0_f64, 1.0).is_err());
        assert!(lower_incomplete_gamma(1.0_f64, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_against_quadrature() {
        let cfg = QuadratureConfig::default();
        let q = integrate(|t: f64| t.sqrt() * (-t).exp(), 0.0, 0.7, &cfg).unwrap();
        let v = lower_incomplete_gamma(1.5, 0.7).unwrap();
        assert!((q.value - v).abs() < 1e-10);
    }

    #[test]
    fn difference_is_consistent() {
        let d = incomplete_gamma_difference(3.0_f64, 7.0, 9.0).unwrap();
        let direct = lower_incomplete_gamma(3.0, 9.0).unwrap() - lower_incomplete_gamma(3.0, 7.0).unwrap();
        assert!((d - direct).abs() < 1e-13);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn nondecreasing_in_z(b in 0.1f64..8.0, z in 0.0f64..20.0) {
                let g1 = lower_incomplete_gamma(b, z).unwrap();
                let g2 = lower_incomplete_gamma(b, 2.0 * z).unwrap();
                prop_assert!(g1 <= g2 + 1e-14 * g2.abs());
            }

            #[test]
            fn exponential_polynomial_moments(k in 0u32..6) {
                // ∫_0^∞ x^k e^{-x} dx = k!
                let cfg = QuadratureConfig::default();
                let q = integrate(|x: f64| x.powi(k as i32) * (-x).exp(), 0.0, f64::INFINITY, &cfg).unwrap();
                let g = gamma_function(k as f64 + 1.0).unwrap();
                prop_assert!((q.value - g).abs() < 1e-9 * g.max(1.0));
            }
        }
    }
}
