//! Monotonicity in `t1` of the exponential closed forms.

use iwce::entropy::{closed_form_icre_exp, closed_form_iwcre_exp_expweight, Form};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `t2` values of the ICRE sweep.
pub const ICRE_T2: [f64; 3] = [1.0, 2.0, 5.0];
/// `t2` values searched, in order, for a witness of non-monotonicity.
pub const WITNESS_T2: [f64; 4] = [1.0, 2.0, 5.0, 10.0];
pub const WITNESS_RATE: f64 = 1.0;
pub const WITNESS_ALPHA: f64 = 0.9;
pub const SWEEP_POINTS: usize = 50;

/// One closed form evaluated along `t1` at fixed `t2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub form: String,
    pub rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub t2: f64,
    pub t1: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `values[k+1] - values[k]`.
    pub max_first_difference: f64,
    /// `t1[k]` at which that difference starts.
    pub argmax_t1: f64,
}

/// A point where the exp-weight form increases in `t1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub rate: f64,
    pub alpha: f64,
    pub t2: f64,
    pub t1_star: f64,
    pub t1_next: f64,
    pub first_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityScan {
    pub schema: u32,
    pub icre: Vec<Series>,
    pub expweight: Vec<Series>,
    pub witness: Option<Witness>,
}

/// `points` evenly spaced `t1` values on `[0, t2)`.
pub fn t1_grid(t2: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| t2 * k as f64 / points as f64).collect()
}

fn series(form: &str, rate: f64, alpha: Option<f64>, t2: f64, points: usize, f: impl Fn(f64) -> iwce::Result<f64>) -> Result<Series, CliError> {
    let t1 = t1_grid(t2, points);
    let values = t1.iter().map(|&t| f(t)).collect::<iwce::Result<Vec<_>>>()?;
    let (mut best, mut at) = (f64::NEG_INFINITY, f64::NAN);
    for k in 0..values.len().saturating_sub(1) {
        let d = values[k + 1] - values[k];
        if d > best {
            best = d;
            at = t1[k];
        }
    }
    Ok(Series {
        form: form.into(),
        rate,
        alpha,
        t2,
        t1,
        values,
        max_first_difference: best,
        argmax_t1: at,
    })
}

pub fn icre_series(rate: f64, t2: f64, points: usize) -> Result<Series, CliError> {
    series("icre", rate, None, t2, points, |t1| closed_form_icre_exp(rate, t1, t2))
}

pub fn expweight_series(rate: f64, alpha: f64, t2: f64, points: usize, form: Form) -> Result<Series, CliError> {
    series("iwcre-expweight", rate, Some(alpha), t2, points, |t1| {
        closed_form_iwcre_exp_expweight(rate, alpha, t1, t2, form)
    })
}

/// The first positive first difference, scanning `t2` in the given order
/// and `t1` upward.
pub fn find_witness(all: &[Series]) -> Option<Witness> {
    all.iter().find_map(|s| {
        (0..s.values.len().saturating_sub(1)).find_map(|k| {
            let d = s.values[k + 1] - s.values[k];
            (d > 0.0).then(|| Witness {
                rate: s.rate,
                alpha: s.alpha.unwrap_or(0.0),
                t2: s.t2,
                t1_star: s.t1[k],
                t1_next: s.t1[k + 1],
                first_difference: d,
            })
        })
    })
}

/// The default scan: ICRE at rate 1 for each of [`ICRE_T2`], the exp-weight
/// form at ([`WITNESS_RATE`], [`WITNESS_ALPHA`]) for each of
/// [`WITNESS_T2`], and the first witness found.
pub fn scan_monotonicity(form: Form) -> Result<MonotonicityScan, CliError> {
    let icre = ICRE_T2
        .iter()
        .map(|&t2| icre_series(1.0, t2, SWEEP_POINTS))
        .collect::<Result<Vec<_>, _>>()?;
    let expweight = WITNESS_T2
        .iter()
        .map(|&t2| expweight_series(WITNESS_RATE, WITNESS_ALPHA, t2, SWEEP_POINTS, form))
        .collect::<Result<Vec<_>, _>>()?;
    let witness = find_witness(&expweight);
    Ok(MonotonicityScan { schema: 1, icre, expweight, witness })
}
