//! The distribution and weight mini-language, axis specs and the JSON run
//! spec accepted by `--spec`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use iwce::distributions::{Dist, Empirical, Exponential, Gev, Uniform};
use iwce::entropy::TruncationConvention;
use iwce::weights::Weight;
use iwce::{Dist64, QuadratureConfig64, Weight64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Parsed `--dist` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Exponential { rate: f64 },
    Uniform { lower: f64, upper: f64 },
    Gev { mu: f64, sigma: f64, xi: f64 },
    Empirical { path: PathBuf },
}

/// Parsed `--weight` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Const,
    Poly(Vec<f64>),
    Exp(f64),
    GevPoly(Vec<f64>),
}

fn number(token: &str, context: &str) -> Result<f64, CliError> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{context}: cannot parse {token:?} as a number")))?;
    if v.is_nan() {
        return Err(CliError::usage(format!("{context}: {token:?} is not a number")));
    }
    Ok(v)
}

fn number_list(body: &str, context: &str) -> Result<Vec<f64>, CliError> {
    if body.trim().is_empty() {
        return Err(CliError::usage(format!("{context}: empty coefficient list")));
    }
    body.split(',').map(|t| number(t, context)).collect()
}

/// `key=value` pairs, each key required exactly once, in any order.
fn keyed(body: &str, keys: &[&str], family: &str) -> Result<Vec<f64>, CliError> {
    let mut out = vec![None; keys.len()];
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("{family}: expected key=value, got {part:?}")))?;
        let k = k.trim();
        let slot = keys
            .iter()
            .position(|want| *want == k)
            .ok_or_else(|| CliError::usage(format!("{family}: unknown parameter {k:?} (expected {})", keys.join(", "))))?;
        if out[slot].is_some() {
            return Err(CliError::usage(format!("{family}: parameter {k:?} given twice")));
        }
        out[slot] = Some(number(v, &format!("{family}:{k}"))?);
    }
    keys.iter()
        .zip(out)
        .map(|(k, v)| v.ok_or_else(|| CliError::usage(format!("{family}: missing parameter {k:?}"))))
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl FromStr for DistSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (family, body) = s
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("distribution {s:?}: expected family:parameters")))?;
        match family.trim() {
            "exp" => {
                let v = keyed(body, &["rate"], "exp")?;
                Ok(DistSpec::Exponential { rate: v[0] })
            }
            "uniform" => {
                let v = keyed(body, &["lower", "upper"], "uniform")?;
                Ok(DistSpec::Uniform { lower: v[0], upper: v[1] })
            }
            "gev" => {
                let v = keyed(body, &["mu", "sigma", "xi"], "gev")?;
                Ok(DistSpec::Gev { mu: v[0], sigma: v[1], xi: v[2] })
            }
            "emp" => {
                if body.is_empty() {
                    return Err(CliError::usage("emp: missing file path"));
                }
                Ok(DistSpec::Empirical { path: PathBuf::from(body) })
            }
            other => Err(CliError::usage(format!(
                "unknown distribution family {other:?} (expected exp, uniform, gev or emp)"
            ))),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Exponential { rate } => write!(f, "exp:rate={rate}"),
            DistSpec::Uniform { lower, upper } => write!(f, "uniform:lower={lower},upper={upper}"),
            DistSpec::Gev { mu, sigma, xi } => write!(f, "gev:mu={mu},sigma={sigma},xi={xi}"),
            DistSpec::Empirical { path } => write!(f, "emp:{}", path.display()),
        }
    }
}

impl DistSpec {
    /// Builds the distribution, loading the sample file for `emp:`.
    pub fn build(&self) -> Result<Dist64, CliError> {
        let d = match self {
            DistSpec::Exponential { rate } => Dist::from(Exponential::new(*rate)?),
            DistSpec::Uniform { lower, upper } => Dist::from(Uniform::new(*lower, *upper)?),
            DistSpec::Gev { mu, sigma, xi } => Dist::from(Gev::new(*mu, *sigma, *xi)?),
            DistSpec::Empirical { path } => Dist::from(Empirical::load(path)?),
        };
        Ok(d)
    }
}

impl FromStr for WeightSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (family, body) = match s.split_once(':') {
            Some((f, b)) => (f.trim(), Some(b)),
            None => (s.trim(), None),
        };
        match (family, body) {
            ("const", None) => Ok(WeightSpec::Const),
            ("poly", Some(b)) => Ok(WeightSpec::Poly(number_list(b, "poly")?)),
            ("exp", Some(b)) => Ok(WeightSpec::Exp(number(b, "exp")?)),
            ("gevpoly", Some(b)) => Ok(WeightSpec::GevPoly(number_list(b, "gevpoly")?)),
            ("const", Some(_)) => Err(CliError::usage("const takes no parameters")),
            (f @ ("poly" | "exp" | "gevpoly"), None) => Err(CliError::usage(format!("{f}: missing parameters"))),
            (other, _) => Err(CliError::usage(format!(
                "unknown weight family {other:?} (expected const, poly, exp or gevpoly)"
            ))),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Const => f.write_str("const"),
            WeightSpec::Poly(c) => write!(f, "poly:{}", join(c)),
            WeightSpec::Exp(a) => write!(f, "exp:{a}"),
            WeightSpec::GevPoly(c) => write!(f, "gevpoly:{}", join(c)),
        }
    }
}

impl WeightSpec {
    /// `gevpoly` takes its host GEV from the distribution argument.
    pub fn build(&self, dist: &Dist64) -> Result<Weight64, CliError> {
        let w = match self {
            WeightSpec::Const => Weight::Const,
            WeightSpec::Poly(c) => Weight::poly(c.clone())?,
            WeightSpec::Exp(a) => Weight::exp(*a)?,
            WeightSpec::GevPoly(c) => match dist {
                Dist::Gev(g) => Weight::gev_poly(c.clone(), *g)?,
                _ => return Err(CliError::usage("gevpoly needs a gev distribution")),
            },
        };
        Ok(w)
    }
}

/// Window end: a real or `inf`.
pub fn parse_bound(s: &str, name: &str) -> Result<f64, CliError> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => {
            let v = number(t, name)?;
            if v.is_infinite() {
                return Err(CliError::usage(format!("{name}: write infinity as \"inf\"")));
            }
            Ok(v)
        }
    }
}

fn bound_to_string(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

/// `ratio`, `proper` or `both`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionChoice {
    Ratio,
    Proper,
    Both,
}

impl ConventionChoice {
    pub fn expand(self) -> Vec<TruncationConvention> {
        match self {
            ConventionChoice::Ratio => vec![TruncationConvention::Ratio],
            ConventionChoice::Proper => vec![TruncationConvention::Proper],
            ConventionChoice::Both => vec![TruncationConvention::Ratio, TruncationConvention::Proper],
        }
    }
}

impl FromStr for ConventionChoice {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "ratio" => Ok(Self::Ratio),
            "proper" => Ok(Self::Proper),
            "both" => Ok(Self::Both),
            other => Err(CliError::usage(format!("unknown convention {other:?} (expected ratio, proper or both)"))),
        }
    }
}

impl fmt::Display for ConventionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ratio => "ratio",
            Self::Proper => "proper",
            Self::Both => "both",
        })
    }
}

/// Quantities `compute` and `sweep` can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureChoice {
    Wcre,
    Wce,
    Iwcre,
    Iwce,
    Icre,
    Icpe,
    Ih,
    /// Exponential ICRE in closed form.
    IcreClosed,
    /// Exponential IWCRE with a polynomial weight in closed form.
    IwcreClosedPoly,
    /// Exponential IWCRE with an exponential weight in closed form.
    IwcreClosedExpweight,
    /// GEV IWCE with a GEV-polynomial weight through `Π`.
    IwceClosedGev,
}

impl MeasureChoice {
    pub const ALL: [MeasureChoice; 11] = [
        Self::Wcre,
        Self::Wce,
        Self::Iwcre,
        Self::Iwce,
        Self::Icre,
        Self::Icpe,
        Self::Ih,
        Self::IcreClosed,
        Self::IwcreClosedPoly,
        Self::IwcreClosedExpweight,
        Self::IwceClosedGev,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Wcre => "wcre",
            Self::Wce => "wce",
            Self::Iwcre => "iwcre",
            Self::Iwce => "iwce",
            Self::Icre => "icre",
            Self::Icpe => "icpe",
            Self::Ih => "ih",
            Self::IcreClosed => "icre-closed",
            Self::IwcreClosedPoly => "iwcre-closed-poly",
            Self::IwcreClosedExpweight => "iwcre-closed-expweight",
            Self::IwceClosedGev => "iwce-closed-gev",
        }
    }

    pub fn is_closed_form(self) -> bool {
        matches!(
            self,
            Self::IcreClosed | Self::IwcreClosedPoly | Self::IwcreClosedExpweight | Self::IwceClosedGev
        )
    }

    /// Whole-support measures ignore the window.
    pub fn uses_window(self) -> bool {
        !matches!(self, Self::Wcre | Self::Wce)
    }
}

impl FromStr for MeasureChoice {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|m| m.as_str() == s.trim()).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|m| m.as_str()).collect();
            CliError::usage(format!("unknown measure {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

impl fmt::Display for MeasureChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid axis: `lo:hi:n` (n evenly spaced points, ends included) or an
/// explicit comma list.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Linear { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Linear { lo, hi, n } => match n {
                0 => Vec::new(),
                1 => vec![*lo],
                _ => (0..*n)
                    .map(|k| if k + 1 == *n { *hi } else { lo + (hi - lo) * k as f64 / (*n - 1) as f64 })
                    .collect(),
            },
        }
    }
}

impl FromStr for Axis {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Axis::List(Vec::new()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, n] => {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("axis {s:?}: point count {n:?} is not an integer")))?;
                Ok(Axis::Linear { lo: parse_bound(lo, "axis")?, hi: parse_bound(hi, "axis")?, n })
            }
            [list] => Ok(Axis::List(list.split(',').map(|t| parse_bound(t, "axis")).collect::<Result<_, _>>()?)),
            _ => Err(CliError::usage(format!("axis {s:?}: expected lo:hi:n or a comma list"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Linear { lo, hi, n } => write!(f, "{}:{}:{n}", bound_to_string(*lo), bound_to_string(*hi)),
            Axis::List(v) => f.write_str(&v.iter().map(|x| bound_to_string(*x)).collect::<Vec<_>>().join(",")),
        }
    }
}

/// Quadrature overrides.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_subdivisions: Option<usize>,
}

impl Tolerances {
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }

    pub fn config(&self) -> Result<QuadratureConfig64, CliError> {
        let base = QuadratureConfig64::default();
        let cfg = QuadratureConfig64::new(
            self.abs_tol.unwrap_or(base.abs_tol),
            self.rel_tol.unwrap_or(base.rel_tol),
            self.max_subdivisions.unwrap_or(base.max_subdivisions),
        )?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Compute,
    Sweep,
    Verify,
    ScanMonotonicity,
    Ingest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(CliError::usage(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

/// A complete run description, as read from `--spec` files. Strings use
/// the same mini-language as the flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<ConventionChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Tolerances::is_default")]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub as_printed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            dist: None,
            weight: None,
            t1: None,
            t2: None,
            convention: None,
            measure: None,
            t1_grid: None,
            t2_grid: None,
            seed: None,
            tolerances: Tolerances::default(),
            as_printed: false,
            output: None,
            format: None,
        }
    }

    /// Parses JSON and normalizes every embedded mini-language string.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: RunSpec = serde_json::from_str(text).map_err(|e| CliError::usage(format!("run spec: {e}")))?;
        spec.normalized()
    }

    /// Rewrites distribution, weight, bounds and axes in canonical form,
    /// validating each on the way.
    pub fn normalized(mut self) -> Result<Self, CliError> {
        if let Some(d) = &self.dist {
            self.dist = Some(d.parse::<DistSpec>()?.to_string());
        }
        if let Some(w) = &self.weight {
            self.weight = Some(w.parse::<WeightSpec>()?.to_string());
        }
        if let Some(t) = &self.t1 {
            self.t1 = Some(bound_to_string(parse_bound(t, "t1")?));
        }
        if let Some(t) = &self.t2 {
            self.t2 = Some(bound_to_string(parse_bound(t, "t2")?));
        }
        if let Some(a) = &self.t1_grid {
            self.t1_grid = Some(a.parse::<Axis>()?.to_string());
        }
        if let Some(a) = &self.t2_grid {
            self.t2_grid = Some(a.parse::<Axis>()?.to_string());
        }
        Ok(self)
    }

    /// Compact JSON of the normalized spec.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("run spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_round_trip_and_order_insensitivity() {
        for s in ["exp:rate=1", "uniform:lower=0,upper=1", "gev:mu=2,sigma=1,xi=0.5", "emp:data/x.txt"] {
            let d: DistSpec = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        let d: DistSpec = "gev:xi=0.5, mu=2,sigma=1".parse().unwrap();
        assert_eq!(d.to_string(), "gev:mu=2,sigma=1,xi=0.5");
        let d: DistSpec = "exp:rate=1.50".parse().unwrap();
        assert_eq!(d.to_string(), "exp:rate=1.5");
    }

    #[test]
    fn errors_name_the_token() {
        let e = "exp:rat=1".parse::<DistSpec>().unwrap_err().to_string();
        assert!(e.contains("\"rat\""), "{e}");
        let e = "weibull:k=1".parse::<DistSpec>().unwrap_err().to_string();
        assert!(e.contains("weibull"), "{e}");
        let e = "poly:1,x".parse::<WeightSpec>().unwrap_err().to_string();
        assert!(e.contains("\"x\""), "{e}");
        let e = "uniform:lower=0".parse::<DistSpec>().unwrap_err().to_string();
        assert!(e.contains("upper"), "{e}");
    }

    #[test]
    fn weight_round_trip() {
        for s in ["const", "poly:1,0.5", "exp:0.3", "gevpoly:1,0.5"] {
            assert_eq!(s.parse::<WeightSpec>().unwrap().to_string(), s);
        }
        assert!("const:1".parse::<WeightSpec>().is_err());
        assert!("exp".parse::<WeightSpec>().is_err());
    }

    #[test]
    fn gevpoly_needs_gev_host() {
        let exp = "exp:rate=1".parse::<DistSpec>().unwrap().build().unwrap();
        assert!(WeightSpec::GevPoly(vec![1.0]).build(&exp).is_err());
        let gev = "gev:mu=2,sigma=1,xi=0.5".parse::<DistSpec>().unwrap().build().unwrap();
        assert!(WeightSpec::GevPoly(vec![1.0]).build(&gev).is_ok());
    }

    #[test]
    fn axes() {
        let a: Axis = "0:1:5".parse().unwrap();
        assert_eq!(a.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(a.to_string(), "0:1:5");
        let b: Axis = "1,2,inf".parse().unwrap();
        assert_eq!(b.points(), vec![1.0, 2.0, f64::INFINITY]);
        assert_eq!(b.to_string(), "1,2,inf");
        assert!("0:1".parse::<Axis>().is_err());
    }

    #[test]
    fn run_spec_canonical_is_a_fixed_point() {
        let text = r#"{"command":"compute","dist":"exp: rate=1.0","weight":"poly:1,1.0","t1":"0.50","t2":"Infinity",
                      "measure":"iwcre","convention":"both","tolerances":{"rel_tol":1e-9}}"#;
        assert!(RunSpec::from_json(text).is_err(), "Infinity must be spelled inf");
        let text = text.replace("Infinity", "inf");
        let spec = RunSpec::from_json(&text).unwrap();
        let canon = spec.canonical();
        assert_eq!(RunSpec::from_json(&canon).unwrap().canonical(), canon);
        assert!(canon.contains("\"dist\":\"exp:rate=1\""), "{canon}");
        assert!(canon.contains("\"t2\":\"inf\""), "{canon}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dist_canonical_round_trip(rate in 1e-3f64..1e3, lo in 0.0f64..5.0, w in 1e-3f64..5.0) {
                for d in [DistSpec::Exponential { rate }, DistSpec::Uniform { lower: lo, upper: lo + w },
                          DistSpec::Gev { mu: lo, sigma: w, xi: rate.min(5.0) }] {
                    let s = d.to_string();
                    let back: DistSpec = s.parse().unwrap();
                    prop_assert_eq!(&back, &d);
                    prop_assert_eq!(back.to_string(), s);
                }
            }

            #[test]
            fn weight_canonical_round_trip(c in proptest::collection::vec(0.0f64..10.0, 1..5)) {
                for w in [WeightSpec::Poly(c.clone()), WeightSpec::GevPoly(c.clone()), WeightSpec::Exp(c[0])] {
                    let s = w.to_string();
                    prop_assert_eq!(s.parse::<WeightSpec>().unwrap(), w);
                }
            }
        }
    }
}
