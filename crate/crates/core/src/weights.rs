//! Nonnegative weight functions `φ` with cumulative `ψ(x) = ∫_0^x φ` and
//! derivative `φ'`.

use std::fmt;

use crate::distributions::{Distribution, Gev};
use crate::{lit, to_f64, Error, Result, Scalar};

pub trait WeightFunction<T: Scalar>: fmt::Debug + Send + Sync {
    fn phi(&self, x: T) -> T;

    /// Cumulative weight. Only differences of `ψ` enter the entropy
    /// identities, so families that cannot be integrated from zero choose
    /// their own anchor (see [`GevPolynomialWeight`]).
    fn psi(&self, x: T) -> T;

    fn dphi(&self, x: T) -> T;
}

/// Outcome of [`validate_nonnegative`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validation<T> {
    Pass,
    Fail { witness: T, value: T },
}

impl<T: Scalar> Validation<T> {
    pub fn passed(&self) -> bool {
        matches!(self, Validation::Pass)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            Validation::Pass => Ok(()),
            Validation::Fail { witness, value } => Err(Error::NegativeWeight {
                witness: to_f64(witness),
                value: to_f64(value),
            }),
        }
    }
}

pub const DEFAULT_VALIDATION_GRID: usize = 10_000;

/// Grid check of `φ >= -1e-12` on `[lo, hi]` (both endpoints included).
pub fn validate_nonnegative<T: Scalar, W: WeightFunction<T> + ?Sized>(wf: &W, lo: T, hi: T) -> Validation<T> {
    validate_on_grid(wf, lo, hi, DEFAULT_VALIDATION_GRID)
}

pub fn validate_on_grid<T: Scalar, W: WeightFunction<T> + ?Sized>(wf: &W, lo: T, hi: T, points: usize) -> Validation<T> {
    let floor: T = lit(-1e-12);
    let steps = points.max(2) - 1;
    let width = hi - lo;
    for k in 0..=steps {
        let x = if k == steps {
            hi
        } else {
            lo + width * T::from_usize(k).unwrap_or_else(T::nan) / T::from_usize(steps).unwrap_or_else(T::nan)
        };
        let v = wf.phi(x);
        if !(v >= floor) {
            return Validation::Fail { witness: x, value: v };
        }
    }
    Validation::Pass
}

/// `φ ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstantOne;

impl<T: Scalar> WeightFunction<T> for ConstantOne {
    fn phi(&self, _x: T) -> T {
        T::one()
    }
    fn psi(&self, x: T) -> T {
        x
    }
    fn dphi(&self, _x: T) -> T {
        T::zero()
    }
}

/// `φ(x) = Σ a_i x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialWeight<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> PolynomialWeight<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("polynomial weight needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("polynomial coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }
}

impl<T: Scalar> WeightFunction<T> for PolynomialWeight<T> {
    fn phi(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    fn psi(&self, x: T) -> T {
        let mut acc = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * x + c / T::from_usize(i + 1).unwrap_or_else(T::nan);
        }
        acc * x
    }

    fn dphi(&self, x: T) -> T {
        let mut acc = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + c * T::from_usize(i).unwrap_or_else(T::nan);
        }
        acc
    }
}

/// `φ(x) = e^{αx}`; `α = 0` is the constant weight with `ψ(x) = x` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialWeight<T> {
    alpha: T,
}

impl<T: Scalar> ExponentialWeight<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if alpha.is_finite() {
            Ok(Self { alpha })
        } else {
            Err(Error::domain(format!("exponential weight rate must be finite, got {alpha}")))
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
}

impl<T: Scalar> WeightFunction<T> for ExponentialWeight<T> {
    fn phi(&self, x: T) -> T {
        (self.alpha * x).exp()
    }

    fn psi(&self, x: T) -> T {
        if self.alpha == T::zero() {
            x
        } else {
            (self.alpha * x).exp_m1() / self.alpha
        }
    }

    fn dphi(&self, x: T) -> T {
        self.alpha * (self.alpha * x).exp()
    }
}

/// `φ(x) = Σ b_i y(x)^i` with `y` the auxiliary of the host GEV.
///
/// `∫ y^i` diverges at the lower support bound for `i >= ξ`, so `ψ` is
/// anchored at the location `μ` (where `y = 1`) instead of zero:
/// `ψ(x) = ∫_μ^x φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GevPolynomialWeight<T> {
    coeffs: Vec<T>,
    host: Gev<T>,
}

impl<T: Scalar> GevPolynomialWeight<T> {
    pub fn new(coeffs: Vec<T>, host: Gev<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("GEV polynomial weight needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("GEV polynomial coefficients must be finite"));
        }
        Ok(Self { coeffs, host })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn host(&self) -> &Gev<T> {
        &self.host
    }
}

impl<T: Scalar> WeightFunction<T> for GevPolynomialWeight<T> {
    fn phi(&self, x: T) -> T {
        let y = self.host.y_unchecked(x);
        if y.is_infinite() {
            // limit at the lower support bound
            return match self.coeffs.iter().skip(1).rev().find(|c| **c != T::zero()) {
                Some(c) => c.signum() * T::infinity(),
                None => self.coeffs[0],
            };
        }
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * y + c)
    }

    fn psi(&self, x: T) -> T {
        let base = self.host.base(x);
        if base <= T::zero() {
            return T::nan();
        }
        let (sigma, xi) = (self.host.sigma(), self.host.xi());
        let mut acc = T::zero();
        for (i, &b) in self.coeffs.iter().enumerate() {
            if b == T::zero() {
                continue;
            }
            let i = T::from_usize(i).unwrap_or_else(T::nan);
            let term = if i == xi {
                sigma / xi * base.ln()
            } else {
                sigma * ((xi - i) / xi * base.ln()).exp_m1() / (xi - i)
            };
            acc = acc + b * term;
        }
        acc
    }

    fn dphi(&self, x: T) -> T {
        let y = self.host.y_unchecked(x);
        let (sigma, xi) = (self.host.sigma(), self.host.xi());
        let mut acc = T::zero();
        for (i, &b) in self.coeffs.iter().enumerate().skip(1) {
            let i = T::from_usize(i).unwrap_or_else(T::nan);
            acc = acc - i * b * y.powf(i + xi) / sigma;
        }
        acc
    }
}

/// `c · φ` for a nonnegative constant `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled<W, T> {
    pub inner: W,
    pub factor: T,
}

impl<T: Scalar, W: WeightFunction<T>> Scaled<W, T> {
    pub fn new(inner: W, factor: T) -> Result<Self> {
        if factor >= T::zero() && factor.is_finite() {
            Ok(Self { inner, factor })
        } else {
            Err(Error::domain(format!("weight scale must be finite and nonnegative, got {factor}")))
        }
    }
}

impl<T: Scalar, W: WeightFunction<T>> WeightFunction<T> for Scaled<W, T> {
    fn phi(&self, x: T) -> T {
        self.factor * self.inner.phi(x)
    }
    fn psi(&self, x: T) -> T {
        self.factor * self.inner.psi(x)
    }
    fn dphi(&self, x: T) -> T {
        self.factor * self.inner.dphi(x)
    }
}

/// The concrete weight families behind one value type.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight<T> {
    Const,
    Poly(PolynomialWeight<T>),
    Exp(ExponentialWeight<T>),
    GevPoly(GevPolynomialWeight<T>),
}

impl<T: Scalar> Weight<T> {
    pub fn poly(coeffs: Vec<T>) -> Result<Self> {
        PolynomialWeight::new(coeffs).map(Weight::Poly)
    }

    pub fn exp(alpha: T) -> Result<Self> {
        ExponentialWeight::new(alpha).map(Weight::Exp)
    }

    pub fn gev_poly(coeffs: Vec<T>, host: Gev<T>) -> Result<Self> {
        GevPolynomialWeight::new(coeffs, host).map(Weight::GevPoly)
    }
}

impl<T: Scalar> WeightFunction<T> for Weight<T> {
    fn phi(&self, x: T) -> T {
        match self {
            Weight::Const => WeightFunction::<T>::phi(&ConstantOne, x),
            Weight::Poly(w) => w.phi(x),
            Weight::Exp(w) => w.phi(x),
            Weight::GevPoly(w) => w.phi(x),
        }
    }
    fn psi(&self, x: T) -> T {
        match self {
            Weight::Const => WeightFunction::<T>::psi(&ConstantOne, x),
            Weight::Poly(w) => w.psi(x),
            Weight::Exp(w) => w.psi(x),
            Weight::GevPoly(w) => w.psi(x),
        }
    }
    fn dphi(&self, x: T) -> T {
        match self {
            Weight::Const => WeightFunction::<T>::dphi(&ConstantOne, x),
            Weight::Poly(w) => w.dphi(x),
            Weight::Exp(w) => w.dphi(x),
            Weight::GevPoly(w) => w.dphi(x),
        }
    }
}

impl<T: Scalar> fmt::Display for Weight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |c: &[T]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Weight::Const => write!(f, "const"),
            Weight::Poly(w) => write!(f, "poly:{}", join(w.coeffs())),
            Weight::Exp(w) => write!(f, "exp:{}", w.alpha()),
            Weight::GevPoly(w) => write!(f, "gevpoly:{}", join(w.coeffs())),
        }
    }
}

/// `ψ` evaluated by the family's closed form.
pub fn psi_closed<T: Scalar, W: WeightFunction<T> + ?Sized>(wf: &W, x: T) -> T {
    wf.psi(x)
}

/// Upper end of a grid check over `[lo, hi]` when `hi` may be infinite:
/// the `1 - 1e-12` quantile of `dist`.
pub(crate) fn effective_upper<T: Scalar, D: Distribution<T> + ?Sized>(dist: &D, lo: T, hi: T) -> T {
    if hi.is_finite() {
        return hi;
    }
    dist.isf(lit(1e-12)).unwrap_or(lo + lit(1e3)).max(lo + T::one())
}
