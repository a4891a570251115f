//! Independent verification backends: Monte Carlo conditional means, the
//! ECDF plug-in entropy with a bootstrap error, and finite differences.
//!
//! Every sampler is driven by a `ChaCha20Rng` seeded from the caller's
//! `u64` seed, so a fixed seed reproduces an estimate bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::distributions::{truncated_sampler, Distribution, Empirical};
use crate::entropy::{interval_measure, Measure, TruncationInterval};
use crate::numerics::QuadratureConfig;
use crate::weights::WeightFunction;
use crate::{lit, to_f64, Error, Result, Scalar};

/// Name of the generator recorded alongside every estimate.
pub const RNG_ALGORITHM: &str = "ChaCha20";

/// Bootstrap resamples used by [`ecdf_plugin_entropy`].
pub const BOOTSTRAP_RESAMPLES: usize = 200;

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(n)`; for the plug-in entropy,
    /// the bootstrap standard deviation.
    pub std_error: T,
    pub n: usize,
    pub seed: u64,
}

impl<T: Scalar> McEstimate<T> {
    /// `|value - mean| <= k * std_error`.
    pub fn agrees_with(&self, value: T, k: T) -> bool {
        (value - self.mean).abs() <= k * self.std_error
    }

    /// Welford mean and standard error of `values`.
    pub(crate) fn from_values(values: impl IntoIterator<Item = T>, seed: u64) -> Self {
        let mut n = 0usize;
        let mut mean = T::zero();
        let mut m2 = T::zero();
        for v in values {
            n += 1;
            let count = T::from_usize(n).unwrap_or_else(T::nan);
            let d = v - mean;
            mean = mean + d / count;
            m2 = m2 + d * (v - mean);
        }
        let std_error = if n > 1 {
            let nn = T::from_usize(n).unwrap_or_else(T::nan);
            (m2 / (nn - T::one())).sqrt() / nn.sqrt()
        } else {
            T::zero()
        };
        Self {
            mean,
            std_error,
            n,
            seed,
        }
    }
}

fn require_samples(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        Err(Error::domain(format!("{what} needs at least {min} samples, got {n}")))
    } else {
        Ok(())
    }
}

/// Monte Carlo estimate of `E[g(X) | t1 <= X <= t2]`.
pub fn mc_conditional_expectation<T, D, G>(
    dist: &D,
    iv: &TruncationInterval<T>,
    mut g: G,
    n: usize,
    seed: u64,
) -> Result<McEstimate<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    G: FnMut(T) -> T,
{
    require_samples(n, 100, "mc_conditional_expectation")?;
    let mut rng = rng_from_seed(seed);
    let draws = truncated_sampler(dist, iv.t1(), iv.t2(), &mut rng, n)?;
    let mut values = Vec::with_capacity(n);
    for x in draws {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                x: to_f64(x),
                value: to_f64(v),
            });
        }
        values.push(v);
    }
    Ok(McEstimate::from_values(values, seed))
}

/// Plug-in estimate of IWCRE/IWCE: the measure evaluated on the ECDF of
/// `n` draws, with the spread of [`BOOTSTRAP_RESAMPLES`] bootstrap
/// replicates as standard error.
///
/// The draws come from the untruncated distribution. The ratio convention
/// normalizes by `F(t2) - F(t1)` but also evaluates `F` itself inside the
/// window, which a sample confined to the window cannot estimate.
pub fn ecdf_plugin_entropy<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    measure: Measure,
    n: usize,
    seed: u64,
    cfg: &QuadratureConfig<T>,
) -> Result<McEstimate<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_samples(n, 1000, "ecdf_plugin_entropy")?;
    let mut rng = rng_from_seed(seed);
    let sample = dist.sample(&mut rng, n)?;
    let emp = Empirical::from_samples(sample)?;
    let evaluate = |e: &Empirical<T>| -> Result<T> {
        let window = TruncationInterval::new(e, iv.t1(), iv.t2(), iv.convention())?;
        Ok(interval_measure(e, wf, &window, measure, cfg)?.value)
    };
    let point = evaluate(&emp)?;
    let mut replicates = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        replicates.push(evaluate(&emp.resample(&mut rng)?)?);
    }
    let spread = McEstimate::from_values(replicates, seed);
    let b = T::from_usize(BOOTSTRAP_RESAMPLES).unwrap_or_else(T::nan);
    Ok(McEstimate {
        mean: point,
        std_error: spread.std_error * b.sqrt(),
        n,
        seed,
    })
}

/// Mean of `|ψ(X) - ψ(Y)|` over `n_pairs` independent pairs drawn from
/// the window.
pub fn mc_abs_psi_difference<T, D, W>(
    dist: &D,
    wf: &W,
    iv: &TruncationInterval<T>,
    n_pairs: usize,
    seed: u64,
) -> Result<McEstimate<T>>
where
    T: Scalar,
    D: Distribution<T> + ?Sized,
    W: WeightFunction<T> + ?Sized,
{
    require_samples(n_pairs, 100, "mc_abs_psi_difference")?;
    let mut rng = rng_from_seed(seed);
    let xs = truncated_sampler(dist, iv.t1(), iv.t2(), &mut rng, n_pairs)?;
    let ys = truncated_sampler(dist, iv.t1(), iv.t2(), &mut rng, n_pairs)?;
    let mut values = Vec::with_capacity(n_pairs);
    for (x, y) in xs.into_iter().zip(ys) {
        let v = (wf.psi(x) - wf.psi(y)).abs();
        if !v.is_finite() {
            return Err(Error::NonFinite {
                x: to_f64(x),
                value: to_f64(v),
            });
        }
        values.push(v);
    }
    Ok(McEstimate::from_values(values, seed))
}

/// Central difference `(f(x + h) - f(x - h)) / 2h`, optionally improved by
/// one Richardson step against the half step.
pub fn fd_derivative<T, F>(mut f: F, x: T, h: T, refine: bool) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if !(h > T::zero()) {
        return Err(Error::domain(format!("step must be positive, got {h}")));
    }
    let mut eval = |p: T| -> Result<T> {
        let v = f(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                x: to_f64(p),
                value: to_f64(v),
            })
        }
    };
    let two: T = lit(2.0);
    let coarse = (eval(x + h)? - eval(x - h)?) / (two * h);
    if !refine {
        return Ok(coarse);
    }
    let half = h / two;
    let fine = (eval(x + half)? - eval(x - half)?) / h;
    Ok((lit::<T>(4.0) * fine - coarse) / lit(3.0))
}
