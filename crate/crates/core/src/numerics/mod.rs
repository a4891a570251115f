//! Quadrature and the special functions the closed forms are written in.

mod quadrature;
mod special;

pub use quadrature::{integrate, try_integrate, IntegrationResult, QuadratureConfig};
pub use special::{
    gamma_function, incomplete_gamma_difference, ln_gamma, lower_incomplete_gamma,
    upper_incomplete_gamma, xlogx,
};
pub(crate) use special::xlogx_clamped;

use crate::distributions::{Distribution, Gev};
use crate::{Error, Result, Scalar};

/// `Π_c(a, b) = ∫_a^b y(t)^{c-1} e^{-y(t)} dt` for the GEV auxiliary `y`.
pub fn pi_c<T: Scalar>(gev: &Gev<T>, c: T, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    let lower = gev.support_lower();
    if a < lower || b < lower || a > b || a.is_nan() || b.is_nan() {
        return Err(Error::domain(format!(
            "Π_c interval ({a}, {b}) outside GEV support [{lower}, inf)"
        )));
    }
    if a == b {
        return Ok(T::zero());
    }
    let power = c - T::one();
    let r = integrate(
        |t| {
            let y = gev.y_unchecked(t);
            if y.is_infinite() {
                T::zero()
            } else {
                y.powf(power) * (-y).exp()
            }
        },
        a,
        b,
        cfg,
    )?;
    r.converged_value()
}

/// `∫_a^b h(y(t)) dt` for the GEV auxiliary `y`, evaluated in `y` with
/// `dt = -σ y^{-ξ-1} dy`. An independent route to [`pi_c`] and to any
/// other integral of a function of `y`.
pub fn integrate_in_y<T, H>(gev: &Gev<T>, mut h: H, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    H: FnMut(T) -> T,
{
    let lower = gev.support_lower();
    if a < lower || b < lower || a > b || a.is_nan() || b.is_nan() {
        return Err(Error::domain(format!(
            "interval ({a}, {b}) outside GEV support [{lower}, inf)"
        )));
    }
    if a == b {
        return Ok(T::zero());
    }
    let (ya, yb) = (gev.y_unchecked(a), gev.y_unchecked(b));
    let jac = -gev.xi() - T::one();
    let r = integrate(
        |y| {
            if y == T::zero() {
                T::zero()
            } else {
                h(y) * gev.sigma() * y.powf(jac)
            }
        },
        yb,
        ya,
        cfg,
    )?;
    r.converged_value()
}

/// [`pi_c`] through [`integrate_in_y`].
pub fn pi_c_in_y<T: Scalar>(gev: &Gev<T>, c: T, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    let power = c - T::one();
    integrate_in_y(gev, |y| y.powf(power) * (-y).exp(), a, b, cfg)
}
