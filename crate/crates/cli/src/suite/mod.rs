//! The verification suite behind `verify`: every checker over the standard
//! grid plus one measurement group per acceptance criterion.

pub mod criteria;
pub mod grid;
pub mod measurement;

use std::fmt::Write as _;

use iwce::bounds::{BoundReport, CheckOptions};
use iwce::entropy::TruncationConvention;
use iwce::oracle::{BOOTSTRAP_RESAMPLES, RNG_ALGORITHM};
use iwce::QuadratureConfig64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use measurement::{Measurement, Relation};

use crate::scan::MonotonicityScan;
use crate::CliError;

pub(crate) fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub const SCHEMA_VERSION: u32 = 1;
pub const STANDARD_WINDOWS: usize = 20;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub as_printed: bool,
    pub windows: usize,
    pub conventions: Vec<TruncationConvention>,
    pub quadrature: QuadratureConfig64,
    pub checks: CheckOptions,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            as_printed: false,
            windows: STANDARD_WINDOWS,
            conventions: TruncationConvention::BOTH.to_vec(),
            quadrature: QuadratureConfig64::default(),
            checks: CheckOptions { seed, ..CheckOptions::default() },
        }
    }
}

/// Run parameters echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSettings {
    pub seed: u64,
    pub rng: String,
    pub seed_rule: String,
    pub as_printed: bool,
    pub windows_per_pair: usize,
    pub conventions: Vec<TruncationConvention>,
    pub mc_pairs: usize,
    pub mc_eta: usize,
    pub bootstrap_resamples: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub settings: SuiteSettings,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    pub monotonicity: MonotonicityScan,
    pub reports: Vec<BoundReport>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Measurement> {
        self.measurements.iter().filter(|m| m.failed())
    }

    pub fn criterion(&self, c: u8) -> impl Iterator<Item = &Measurement> {
        self.measurements.iter().filter(move |m| m.criterion == c)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("suite report serializes");
        s.push('\n');
        s
    }

    /// `theorem_id, case, convention, lhs, rhs, margin, oracle_agreement`,
    /// one row per bound report.
    pub fn summary_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["theorem_id", "case", "convention", "lhs", "rhs", "margin", "oracle_agreement", "vacuous"])?;
        for r in &self.reports {
            w.write_record([
                r.theorem_id.as_str().to_owned(),
                r.case.clone(),
                r.convention.map(|c| c.to_string()).unwrap_or_default(),
                crate::output::real(r.lhs),
                crate::output::real(r.rhs),
                crate::output::real(r.margin),
                r.oracle_agreement.map(|b| b.to_string()).unwrap_or_default(),
                r.vacuous.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Human-readable pass/report table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for m in &self.measurements {
            let label = if m.criterion == 0 { "  -".to_owned() } else { format!("C{:<2}", m.criterion) };
            let _ = writeln!(
                out,
                "[{:<5}] {label} {} : {:.4e} {} {:e} (cases: {}){}",
                m.status(),
                m.name,
                m.observed,
                m.relation,
                m.threshold,
                m.cases,
                if m.note.is_empty() { String::new() } else { format!(" [{}]", m.note) }
            );
        }
        let failed = self.failures().count();
        let asserted = self.measurements.iter().filter(|m| m.asserted).count();
        let _ = writeln!(
            out,
            "{} asserted checks, {} failed; {} bound reports",
            asserted,
            failed,
            self.reports.len()
        );
        out
    }
}

/// Runs the grid and every criterion. A checker error aborts with
/// [`CliError::Checker`] naming the failing case.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, CliError> {
    let ctx = criteria::Context {
        seed: cfg.seed,
        as_printed: cfg.as_printed,
        cfg: cfg.quadrature.clone(),
        opts: cfg.checks,
    };
    let fail = |c: u8| {
        move |e: CliError| match e {
            CliError::Checker(m) => CliError::Checker(format!("criterion {c}: {m}")),
            other => CliError::Checker(format!("criterion {c}: {other}")),
        }
    };
    let nodes = grid::standard_grid(cfg.windows, cfg.seed);
    let results = grid::run_grid(&nodes, &cfg.conventions, &cfg.quadrature, &cfg.checks)?;

    let mut measurements = Vec::new();
    let mut reports: Vec<BoundReport> = results.iter().flat_map(|n| n.reports.iter().cloned()).collect();
    let mut take = |o: criteria::Outcome| {
        measurements.extend(o.measurements);
        reports.extend(o.reports);
    };
    take(criteria::c1_special_functions(&ctx).map_err(fail(1))?);
    take(criteria::c2_closed_forms(&ctx).map_err(fail(2))?);
    take(criteria::c3_errata(&ctx).map_err(fail(3))?);
    take(criteria::c4_identities(&ctx).map_err(fail(4))?);
    take(criteria::c5_derivative_representation(&ctx).map_err(fail(5))?);
    take(criteria::c6_vartheta(&ctx).map_err(fail(6))?);
    take(criteria::c7_limit_recovery(&ctx).map_err(fail(7))?);
    take(criteria::c8_thm22(&ctx, &results).map_err(fail(8))?);
    take(criteria::c9_thm24(&results).map_err(fail(9))?);
    take(criteria::c10_thm25(&ctx, &results).map_err(fail(10))?);
    take(criteria::c11_stability(&ctx, &results).map_err(fail(11))?);
    take(criteria::c12_cor21_limit(&ctx).map_err(fail(12))?);
    let (mono, scan) = criteria::c13_monotonicity(&ctx).map_err(fail(13))?;
    take(mono);
    take(criteria::c14_plugin(&ctx).map_err(fail(14))?);
    measurements.extend(criteria::grid_margin_summary(&results));

    let passed = measurements.iter().all(|m| !m.failed());
    Ok(SuiteReport {
        schema: SCHEMA_VERSION,
        settings: SuiteSettings {
            seed: cfg.seed,
            rng: RNG_ALGORITHM.into(),
            seed_rule: "stream seed = root seed + checker index".into(),
            as_printed: cfg.as_printed,
            windows_per_pair: cfg.windows,
            conventions: cfg.conventions.clone(),
            mc_pairs: cfg.checks.mc_pairs,
            mc_eta: cfg.checks.mc_eta,
            bootstrap_resamples: BOOTSTRAP_RESAMPLES,
            abs_tol: cfg.quadrature.abs_tol,
            rel_tol: cfg.quadrature.rel_tol,
            max_subdivisions: cfg.quadrature.max_subdivisions,
        },
        passed,
        measurements,
        monotonicity: scan,
        reports,
    })
}
