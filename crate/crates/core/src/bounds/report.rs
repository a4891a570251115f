use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entropy::TruncationConvention;

/// The statements a [`BoundReport`] can refer to. The `*_IWCRE` / `*_IWCE`
/// ids are the companion inequalities for the other measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "T2_1")]
    T21,
    #[serde(rename = "T2_1_IWCRE")]
    T21Iwcre,
    #[serde(rename = "P2_1")]
    P21,
    #[serde(rename = "T2_2")]
    T22,
    #[serde(rename = "T2_2_IWCRE")]
    T22Iwcre,
    #[serde(rename = "T2_3")]
    T23,
    #[serde(rename = "T2_3_IWCRE")]
    T23Iwcre,
    #[serde(rename = "T2_4")]
    T24,
    #[serde(rename = "T2_5")]
    T25,
    #[serde(rename = "T2_5_IWCE")]
    T25Iwce,
    #[serde(rename = "C2_1i")]
    C21i,
    #[serde(rename = "C2_1ii")]
    C21ii,
}

/// Which side is supposed to be the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    LhsAtLeastRhs,
    LhsAtMostRhs,
}

impl TheoremId {
    pub const ALL: [TheoremId; 12] = [
        TheoremId::T21,
        TheoremId::T21Iwcre,
        TheoremId::P21,
        TheoremId::T22,
        TheoremId::T22Iwcre,
        TheoremId::T23,
        TheoremId::T23Iwcre,
        TheoremId::T24,
        TheoremId::T25,
        TheoremId::T25Iwce,
        TheoremId::C21i,
        TheoremId::C21ii,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::T21 => "T2_1",
            TheoremId::T21Iwcre => "T2_1_IWCRE",
            TheoremId::P21 => "P2_1",
            TheoremId::T22 => "T2_2",
            TheoremId::T22Iwcre => "T2_2_IWCRE",
            TheoremId::T23 => "T2_3",
            TheoremId::T23Iwcre => "T2_3_IWCRE",
            TheoremId::T24 => "T2_4",
            TheoremId::T25 => "T2_5",
            TheoremId::T25Iwce => "T2_5_IWCE",
            TheoremId::C21i => "C2_1i",
            TheoremId::C21ii => "C2_1ii",
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            TheoremId::T21 | TheoremId::T21Iwcre | TheoremId::P21 | TheoremId::T23 | TheoremId::T23Iwcre | TheoremId::C21i => {
                Orientation::LhsAtLeastRhs
            }
            TheoremId::T22
            | TheoremId::T22Iwcre
            | TheoremId::T24
            | TheoremId::T25
            | TheoremId::T25Iwce
            | TheoremId::C21ii => Orientation::LhsAtMostRhs,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Both sides of one inequality at one input, with the oriented margin.
///
/// `margin >= 0` means the inequality holds in the printed direction.
/// Non-finite numbers serialize as the strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: TheoremId,
    /// Canonical description of the input, enough to replay the check.
    pub case: String,
    /// `None` for statements that involve no truncated distribution.
    pub convention: Option<TruncationConvention>,
    #[serde(with = "real")]
    pub lhs: f64,
    #[serde(with = "real")]
    pub rhs: f64,
    #[serde(with = "real")]
    pub margin: f64,
    #[serde(with = "real_opt")]
    pub oracle_lhs: Option<f64>,
    pub oracle_agreement: Option<bool>,
    /// The bound degenerates (a side is infinite), so it carries no information.
    pub vacuous: bool,
    /// Intermediate quantities and secondary routes, keyed by name.
    #[serde(with = "real_map")]
    pub diagnostics: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(theorem_id: TheoremId, convention: Option<TruncationConvention>, lhs: f64, rhs: f64) -> Self {
        let mut r = Self {
            theorem_id,
            case: String::new(),
            convention,
            lhs,
            rhs,
            margin: f64::NAN,
            oracle_lhs: None,
            oracle_agreement: None,
            vacuous: false,
            diagnostics: BTreeMap::new(),
        };
        r.margin = r.recomputed_margin();
        r.vacuous = !lhs.is_finite() || !rhs.is_finite();
        r
    }

    /// The oriented difference of the stored sides.
    pub fn recomputed_margin(&self) -> f64 {
        let (big, small) = match self.theorem_id.orientation() {
            Orientation::LhsAtLeastRhs => (self.lhs, self.rhs),
            Orientation::LhsAtMostRhs => (self.rhs, self.lhs),
        };
        if big == small {
            0.0
        } else {
            big - small
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol
    }

    pub fn with_case(mut self, case: impl Into<String>) -> Self {
        self.case = case.into();
        self
    }

    /// Records an intermediate quantity under `key`.
    pub fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_owned(), value);
    }

    pub(crate) fn oracle(&mut self, oracle_lhs: f64, agreement: bool) {
        self.oracle_lhs = Some(oracle_lhs);
        self.oracle_agreement = Some(agreement);
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Real {
    Number(f64),
    Text(String),
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Real::Number(v)
        } else if v.is_nan() {
            Real::Text("nan".into())
        } else if v > 0.0 {
            Real::Text("inf".into())
        } else {
            Real::Text("-inf".into())
        }
    }
}

impl Real {
    fn into_f64<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Real::Number(v) => Ok(v),
            Real::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

/// Serde adapter writing non-finite `f64` as `"inf"`, `"-inf"` or `"nan"`.
pub mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Real;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        Real::from(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Real::deserialize(d)?.into_f64()
    }
}

/// [`real`] for `Option<f64>`.
pub mod real_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Real;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Real::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Real>::deserialize(d)?.map(Real::into_f64).transpose()
    }
}

mod real_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Real;

    pub fn serialize<S: Serializer>(v: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<&String, Real> = v.iter().map(|(k, x)| (k, Real::from(*x))).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, Real>::deserialize(d)?
            .into_iter()
            .map(|(k, r)| r.into_f64().map(|x| (k, x)))
            .collect()
    }
}
