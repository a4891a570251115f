use std::fmt;

use iwce::bounds::real;
use serde::{Deserialize, Serialize};

/// How `observed` is compared with `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

impl Relation {
    pub fn holds(self, observed: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => observed <= threshold,
            Relation::Below => observed < threshold,
            Relation::AtLeast => observed >= threshold,
            Relation::Above => observed > threshold,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        })
    }
}

/// One summarized check: the worst case over its inputs against a
/// threshold. Reported items are computed and recorded but never fail the
/// suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub criterion: u8,
    pub name: String,
    pub asserted: bool,
    pub cases: usize,
    #[serde(with = "real")]
    pub observed: f64,
    pub relation: Relation,
    #[serde(with = "real")]
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
}

impl Measurement {
    pub fn new(criterion: u8, name: &str, cases: usize, observed: f64, relation: Relation, threshold: f64) -> Self {
        Self {
            criterion,
            name: name.to_owned(),
            asserted: true,
            cases,
            observed,
            relation,
            threshold,
            passed: relation.holds(observed, threshold),
            note: String::new(),
        }
    }

    pub fn reported(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn reported_if(self, cond: bool) -> Self {
        if cond {
            self.reported()
        } else {
            self
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Asserted and not passing.
    pub fn failed(&self) -> bool {
        self.asserted && !self.passed
    }

    pub fn status(&self) -> &'static str {
        match (self.asserted, self.passed) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, true) => "info",
            (false, false) => "info*",
        }
    }
}

/// Running maximum that ignores nothing: a NaN makes the result NaN, so a
/// broken case cannot hide.
#[derive(Debug, Clone, Copy)]
pub struct Worst {
    pub value: f64,
    pub count: usize,
}

impl Worst {
    pub fn max() -> Self {
        Self { value: f64::NEG_INFINITY, count: 0 }
    }

    pub fn min() -> Self {
        Self { value: f64::INFINITY, count: 0 }
    }

    pub fn push_max(&mut self, v: f64) {
        self.count += 1;
        if v.is_nan() || v > self.value {
            self.value = if self.value.is_nan() { self.value } else { v };
        }
    }

    pub fn push_min(&mut self, v: f64) {
        self.count += 1;
        if v.is_nan() || v < self.value {
            self.value = if self.value.is_nan() { self.value } else { v };
        }
    }
}

/// `|estimate - exact| / se`, where `se` is floored at `1e-12 * max(1, |exact|)`
/// so an integrand that is constant on the window (zero sample spread) does
/// not turn rounding noise into a huge score.
pub fn z_score(estimate: f64, exact: f64, se: f64) -> f64 {
    (estimate - exact).abs() / se.max(1e-12 * exact.abs().max(1.0))
}

/// `|a - b| / max(1, |b|)`, zero when both are the same number (including
/// equal infinities).
pub fn scaled_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(1.0)
    }
}
