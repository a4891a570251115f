//! The work behind each subcommand, separated from argument parsing so it
//! can be driven from tests.

use iwce::bounds::real;
use iwce::distributions::{Dist, Distribution};
use iwce::entropy::{
    closed_form_icre_exp, closed_form_iwce_gev, closed_form_iwcre_exp_expweight, closed_form_iwcre_exp_poly, icpe,
    icre, interval_shannon_entropy, iwce, iwcre, wce, wcre, EntropyValue, Form, Method, TruncationConvention,
    TruncationInterval,
};
use iwce::{Dist64, Empirical64, QuadratureConfig64, Weight64};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::real as fmt_real;
use crate::spec::{Axis, ConventionChoice, DistSpec, Format, MeasureChoice, WeightSpec};
use crate::suite::SCHEMA_VERSION;
use crate::CliError;

/// Everything `compute` and `sweep` need to evaluate one measure.
#[derive(Debug, Clone)]
pub struct Problem {
    pub dist_spec: DistSpec,
    pub weight_spec: WeightSpec,
    pub dist: Dist64,
    pub weight: Weight64,
    pub measure: MeasureChoice,
    pub cfg: QuadratureConfig64,
    pub as_printed: bool,
}

impl Problem {
    pub fn new(
        dist_spec: DistSpec,
        weight_spec: WeightSpec,
        measure: MeasureChoice,
        cfg: QuadratureConfig64,
        as_printed: bool,
    ) -> Result<Self, CliError> {
        let dist = dist_spec.build()?;
        let weight = weight_spec.build(&dist)?;
        let p = Self {
            dist_spec,
            weight_spec,
            dist,
            weight,
            measure,
            cfg,
            as_printed,
        };
        p.check_closed_form_inputs()?;
        Ok(p)
    }

    fn form(&self) -> Form {
        if self.as_printed {
            Form::AsPrinted
        } else {
            Form::Corrected
        }
    }

    fn check_closed_form_inputs(&self) -> Result<(), CliError> {
        let ok = match self.measure {
            MeasureChoice::IcreClosed => matches!(self.dist_spec, DistSpec::Exponential { .. }),
            MeasureChoice::IwcreClosedPoly => {
                matches!((&self.dist_spec, &self.weight_spec), (DistSpec::Exponential { .. }, WeightSpec::Poly(_)))
            }
            MeasureChoice::IwcreClosedExpweight => {
                matches!((&self.dist_spec, &self.weight_spec), (DistSpec::Exponential { .. }, WeightSpec::Exp(_)))
            }
            MeasureChoice::IwceClosedGev => {
                matches!((&self.dist_spec, &self.weight_spec), (DistSpec::Gev { .. }, WeightSpec::GevPoly(_)))
            }
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            let need = match self.measure {
                MeasureChoice::IcreClosed => "an exp distribution",
                MeasureChoice::IwcreClosedPoly => "an exp distribution and a poly weight",
                MeasureChoice::IwcreClosedExpweight => "an exp distribution and an exp weight",
                _ => "a gev distribution and a gevpoly weight",
            };
            Err(CliError::usage(format!("measure {} needs {need}", self.measure)))
        }
    }

    /// Evaluates the measure on `(t1, t2)` under `conv`. Whole-support
    /// measures ignore the window and the convention.
    pub fn evaluate(&self, t1: f64, t2: f64, conv: TruncationConvention) -> Result<EntropyValue<f64>, CliError> {
        let cfg = &self.cfg;
        if !self.measure.uses_window() {
            let v = match self.measure {
                MeasureChoice::Wcre => wcre(&self.dist, &self.weight, cfg)?,
                _ => wce(&self.dist, &self.weight, cfg)?,
            };
            return Ok(v);
        }
        let iv = TruncationInterval::new(&self.dist, t1, t2, conv)?;
        if self.measure.is_closed_form() && conv != TruncationConvention::Ratio {
            return Err(CliError::usage(format!(
                "measure {} is a closed form of the ratio convention only",
                self.measure
            )));
        }
        let closed = |value: f64| EntropyValue {
            value,
            method: Method::ClosedForm,
            error_estimate: 0.0,
        };
        let v = match (self.measure, &self.dist, &self.weight_spec) {
            (MeasureChoice::Iwcre, ..) => iwcre(&self.dist, &self.weight, &iv, cfg)?,
            (MeasureChoice::Iwce, ..) => iwce(&self.dist, &self.weight, &iv, cfg)?,
            (MeasureChoice::Icre, ..) => icre(&self.dist, &iv, cfg)?,
            (MeasureChoice::Icpe, ..) => icpe(&self.dist, &iv, cfg)?,
            (MeasureChoice::Ih, ..) => EntropyValue {
                value: interval_shannon_entropy(&self.dist, &iv, cfg)?,
                method: Method::Quadrature,
                error_estimate: f64::NAN,
            },
            (MeasureChoice::IcreClosed, Dist::Exponential(e), _) => closed(closed_form_icre_exp(e.rate(), t1, t2)?),
            (MeasureChoice::IwcreClosedPoly, Dist::Exponential(e), WeightSpec::Poly(c)) => {
                closed(closed_form_iwcre_exp_poly(1.0 / e.rate(), c, t1, t2, self.form())?)
            }
            (MeasureChoice::IwcreClosedExpweight, Dist::Exponential(e), WeightSpec::Exp(a)) => {
                closed(closed_form_iwcre_exp_expweight(e.rate(), *a, t1, t2, self.form())?)
            }
            (MeasureChoice::IwceClosedGev, Dist::Gev(g), WeightSpec::GevPoly(c)) => {
                closed(closed_form_iwce_gev(g, c, t1, t2, cfg)?)
            }
            _ => unreachable!("closed-form inputs are validated in Problem::new"),
        };
        Ok(v)
    }
}

/// One evaluated measure as written by `compute`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeRecord {
    pub measure: String,
    pub dist: String,
    pub weight: String,
    pub convention: Option<String>,
    #[serde(with = "real")]
    pub t1: f64,
    #[serde(with = "real")]
    pub t2: f64,
    #[serde(with = "real")]
    pub value: f64,
    pub method: String,
    #[serde(with = "real")]
    pub error_estimate: f64,
    pub converged: bool,
}

impl ComputeRecord {
    pub fn human(&self) -> String {
        let conv = self.convention.as_deref().map(|c| format!("[{c}]")).unwrap_or_default();
        let window = if self.convention.is_some() {
            format!(" on ({}, {})", fmt_real(self.t1), fmt_real(self.t2))
        } else {
            String::new()
        };
        format!(
            "{}{conv}{window} = {}  (method {}, error estimate {})",
            self.measure,
            fmt_real(self.value),
            self.method,
            fmt_real(self.error_estimate)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeOutput {
    pub schema: u32,
    pub command: &'static str,
    pub records: Vec<ComputeRecord>,
}

/// One record per convention (a single record for whole-support
/// measures). Non-convergence is an error, mapped to exit code 2.
pub fn compute(problem: &Problem, t1: f64, t2: f64, convention: ConventionChoice) -> Result<ComputeOutput, CliError> {
    let conventions = if problem.measure.uses_window() {
        convention.expand().into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let mut records = Vec::new();
    for conv in conventions {
        let v = problem.evaluate(t1, t2, conv.unwrap_or(TruncationConvention::Ratio))?;
        let (t1, t2) = match conv {
            Some(_) => (t1, t2),
            None => (problem.dist.support_lower(), problem.dist.support_upper()),
        };
        records.push(ComputeRecord {
            measure: problem.measure.to_string(),
            dist: problem.dist_spec.to_string(),
            weight: problem.weight_spec.to_string(),
            convention: conv.map(|c| c.to_string()),
            t1,
            t2,
            value: v.value,
            method: v.method.to_string(),
            error_estimate: v.error_estimate,
            converged: true,
        });
    }
    Ok(ComputeOutput {
        schema: SCHEMA_VERSION,
        command: "compute",
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// `t1 >= t2`, or a window the distribution rejects.
    Skipped,
    Nonconverged,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Skipped => "skipped",
            CellStatus::Nonconverged => "nonconverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    #[serde(with = "real")]
    pub t1: f64,
    #[serde(with = "real")]
    pub t2: f64,
    pub convention: String,
    #[serde(with = "real")]
    pub value: f64,
    #[serde(with = "real")]
    pub error_estimate: f64,
    pub converged: bool,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub schema: u32,
    pub command: &'static str,
    pub measure: String,
    pub dist: String,
    pub weight: String,
    pub t1_grid: String,
    pub t2_grid: String,
    pub skipped: usize,
    pub nonconverged: usize,
    pub cells: Vec<SweepCell>,
}

impl SweepOutput {
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t1", "t2", "convention", "value", "error_estimate", "converged", "status", "note"])?;
        for c in &self.cells {
            w.write_record([
                fmt_real(c.t1),
                fmt_real(c.t2),
                c.convention.clone(),
                fmt_real(c.value),
                fmt_real(c.error_estimate),
                c.converged.to_string(),
                c.status.as_str().to_owned(),
                c.note.clone(),
            ])?;
        }
        finish_csv(w)
    }

    /// First differences of `value` along `t1` among consecutive `ok`
    /// cells sharing `t2` and convention.
    pub fn t1_first_differences(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let ok: Vec<&SweepCell> = self.cells.iter().filter(|c| c.status == CellStatus::Ok).collect();
        for (k, a) in ok.iter().enumerate() {
            if let Some(b) = ok[k + 1..].iter().find(|b| b.t2 == a.t2 && b.convention == a.convention) {
                if b.t1 > a.t1 {
                    out.push(b.value - a.value);
                }
            }
        }
        out
    }
}

/// Evaluates every `(t1, t2, convention)` cell, row-major in `t1` then
/// `t2` with conventions innermost. Cells run in parallel; the output
/// order does not depend on scheduling.
pub fn sweep(problem: &Problem, t1_axis: &Axis, t2_axis: &Axis, convention: ConventionChoice) -> Result<SweepOutput, CliError> {
    if !problem.measure.uses_window() {
        return Err(CliError::usage(format!("measure {} has no window to sweep", problem.measure)));
    }
    let (t1s, t2s) = (t1_axis.points(), t2_axis.points());
    if t1s.is_empty() || t2s.is_empty() {
        return Err(CliError::usage("empty grid: both axes need at least one point"));
    }
    let convs = convention.expand();
    let mut keys = Vec::with_capacity(t1s.len() * t2s.len() * convs.len());
    for &t1 in &t1s {
        for &t2 in &t2s {
            for &c in &convs {
                keys.push((t1, t2, c));
            }
        }
    }
    let cells: Vec<SweepCell> = keys
        .par_iter()
        .map(|&(t1, t2, conv)| {
            let mut cell = SweepCell {
                t1,
                t2,
                convention: conv.to_string(),
                value: f64::NAN,
                error_estimate: f64::NAN,
                converged: false,
                status: CellStatus::Skipped,
                note: String::new(),
            };
            if t1 >= t2 || t1.is_nan() || t2.is_nan() {
                cell.note = "t1 >= t2".into();
                return Ok(cell);
            }
            match problem.evaluate(t1, t2, conv) {
                Ok(v) => {
                    cell.value = v.value;
                    cell.error_estimate = v.error_estimate;
                    cell.converged = true;
                    cell.status = CellStatus::Ok;
                }
                Err(CliError::Numerical(m)) => {
                    cell.status = CellStatus::Nonconverged;
                    cell.note = m;
                }
                Err(CliError::Usage(m)) if is_window_rejection(&m) => cell.note = m,
                Err(e) => return Err(e),
            }
            Ok(cell)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(SweepOutput {
        schema: SCHEMA_VERSION,
        command: "sweep",
        measure: problem.measure.to_string(),
        dist: problem.dist_spec.to_string(),
        weight: problem.weight_spec.to_string(),
        t1_grid: t1_axis.to_string(),
        t2_grid: t2_axis.to_string(),
        skipped: cells.iter().filter(|c| c.status == CellStatus::Skipped).count(),
        nonconverged: cells.iter().filter(|c| c.status == CellStatus::Nonconverged).count(),
        cells,
    })
}

fn is_window_rejection(message: &str) -> bool {
    message.contains("interval") || message.contains("t1 must be")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub p: f64,
    #[serde(with = "real")]
    pub x: f64,
}

/// Summary printed by `ingest`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub schema: u32,
    pub command: &'static str,
    pub path: String,
    pub n: usize,
    pub distinct: usize,
    #[serde(with = "real")]
    pub min: f64,
    #[serde(with = "real")]
    pub max: f64,
    pub quantiles: Vec<QuantileRow>,
}

pub const INGEST_PROBABILITIES: [f64; 11] = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0];

pub fn ingest(path: &str) -> Result<IngestSummary, CliError> {
    let emp = Empirical64::load(path).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
    let quantiles = INGEST_PROBABILITIES
        .iter()
        .map(|&p| {
            let x = match p {
                0.0 => emp.min(),
                1.0 => emp.max(),
                _ => emp.quantile(p)?,
            };
            Ok(QuantileRow { p, x })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(IngestSummary {
        schema: SCHEMA_VERSION,
        command: "ingest",
        path: path.to_owned(),
        n: emp.len(),
        distinct: emp.atoms().len(),
        min: emp.min(),
        max: emp.max(),
        quantiles,
    })
}

impl IngestSummary {
    pub fn table(&self) -> String {
        let mut out = format!(
            "n = {}  (distinct {})\nmin = {}\nmax = {}\n{:>6}  quantile\n",
            self.n,
            self.distinct,
            fmt_real(self.min),
            fmt_real(self.max),
            "p"
        );
        for q in &self.quantiles {
            out.push_str(&format!("{:>6}  {}\n", q.p, fmt_real(q.x)));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["p", "quantile"])?;
        for q in &self.quantiles {
            w.write_record([q.p.to_string(), fmt_real(q.x)])?;
        }
        finish_csv(w)
    }
}

impl ComputeOutput {
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "measure",
            "dist",
            "weight",
            "convention",
            "t1",
            "t2",
            "value",
            "method",
            "error_estimate",
            "converged",
        ])?;
        for r in &self.records {
            w.write_record([
                r.measure.clone(),
                r.dist.clone(),
                r.weight.clone(),
                r.convention.clone().unwrap_or_default(),
                fmt_real(r.t1),
                fmt_real(r.t2),
                fmt_real(r.value),
                r.method.clone(),
                fmt_real(r.error_estimate),
                r.converged.to_string(),
            ])?;
        }
        finish_csv(w)
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Renders `json` or `csv` through the matching closure.
pub fn render(format: Format, json: impl FnOnce() -> String, csv: impl FnOnce() -> Result<String, CliError>) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(json()),
        Format::Csv => csv(),
    }
}
