use std::path::Path;

use rand::{Rng, RngCore};

use super::{check_probability, Distribution};
use crate::{lit, Error, Result, Scalar};

/// Right-continuous empirical distribution of a nonnegative sample.
///
/// Stored as sorted distinct atoms with cumulative counts, so a bootstrap
/// resample (a reweighting of the same atoms) costs no re-sort.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical<T> {
    values: Vec<T>,
    /// `cum[i]` = number of observations `<= values[i]`.
    cum: Vec<usize>,
}

impl<T: Scalar> Empirical<T> {
    pub fn from_samples(mut samples: Vec<T>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain(format!(
                "empirical distribution needs at least 2 observations, got {}",
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|x| !(x.is_finite() && **x >= T::zero())) {
            return Err(Error::domain(format!("observation {bad} is not a finite nonnegative number")));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let mut values = Vec::new();
        let mut cum = Vec::new();
        for (i, x) in samples.iter().enumerate() {
            if values.last() == Some(x) {
                *cum.last_mut().expect("non-empty") = i + 1;
            } else {
                values.push(*x);
                cum.push(i + 1);
            }
        }
        Ok(Self { values, cum })
    }

    /// Builds from atoms (strictly increasing) and their multiplicities;
    /// atoms with zero count are dropped.
    pub fn from_counts(values: &[T], counts: &[usize]) -> Result<Self> {
        if values.len() != counts.len() {
            return Err(Error::domain("atoms and counts differ in length"));
        }
        let mut out_values = Vec::with_capacity(values.len());
        let mut cum = Vec::with_capacity(values.len());
        let mut total = 0usize;
        for (&v, &c) in values.iter().zip(counts) {
            if c == 0 {
                continue;
            }
            if let Some(&last) = out_values.last() {
                if !(v > last) {
                    return Err(Error::domain("atoms must be strictly increasing"));
                }
            }
            total += c;
            out_values.push(v);
            cum.push(total);
        }
        if total < 2 {
            return Err(Error::domain("empirical distribution needs at least 2 observations"));
        }
        Ok(Self { values: out_values, cum })
    }

    /// Parses one nonnegative real per line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let token = raw.trim();
            if token.is_empty() {
                continue;
            }
            let x: f64 = token.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse {token:?} as a number"),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse { line, message: format!("value {token} is not finite") });
            }
            if x < 0.0 {
                return Err(Error::Parse { line, message: format!("negative value {token}") });
            }
            samples.push(lit(x));
        }
        Self::from_samples(samples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        *self.cum.last().expect("at least two observations")
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn atoms(&self) -> &[T] {
        &self.values
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        *self.values.last().expect("non-empty")
    }

    fn count_le(&self, x: T) -> usize {
        let idx = self.values.partition_point(|v| *v <= x);
        if idx == 0 {
            0
        } else {
            self.cum[idx - 1]
        }
    }

    /// `k`-th order statistic, 0-based.
    pub fn order_statistic(&self, k: usize) -> T {
        let idx = self.cum.partition_point(|&c| c <= k);
        self.values[idx.min(self.values.len() - 1)]
    }

    fn fraction(&self, count: usize) -> T {
        T::from_usize(count).unwrap_or_else(T::nan) / T::from_usize(self.len()).unwrap_or_else(T::nan)
    }

    /// Calls `f(lo, hi, F, sf)` for every maximal piece of `(a, b)` on which
    /// the step CDF is constant, in increasing order.
    pub fn for_each_piece(&self, a: T, b: T, mut f: impl FnMut(T, T, T, T)) {
        if !(b > a) {
            return;
        }
        let n = self.len();
        let mut idx = self.values.partition_point(|v| *v <= a);
        let mut count = if idx == 0 { 0 } else { self.cum[idx - 1] };
        let mut lo = a;
        loop {
            let hi = if idx < self.values.len() && self.values[idx] < b {
                self.values[idx]
            } else {
                b
            };
            if hi > lo {
                f(lo, hi, self.fraction(count), self.fraction(n - count));
            }
            if hi >= b {
                break;
            }
            count = self.cum[idx];
            idx += 1;
            lo = hi;
        }
    }

    /// Calls `f(x, weight)` for each atom in `(a, b]`, weight = count / n.
    pub fn for_each_atom(&self, a: T, b: T, mut f: impl FnMut(T, T)) {
        let start = self.values.partition_point(|v| *v <= a);
        let mut prev = if start == 0 { 0 } else { self.cum[start - 1] };
        for i in start..self.values.len() {
            if self.values[i] > b {
                break;
            }
            f(self.values[i], self.fraction(self.cum[i] - prev));
            prev = self.cum[i];
        }
    }

    /// Nonparametric bootstrap resample of the same size.
    pub fn resample(&self, rng: &mut dyn RngCore) -> Result<Self> {
        let n = self.len();
        let mut counts = vec![0usize; self.values.len()];
        for _ in 0..n {
            let k = rng.gen_range(0..n);
            counts[self.cum.partition_point(|&c| c <= k)] += 1;
        }
        Self::from_counts(&self.values, &counts)
    }
}

impl<T: Scalar> Distribution<T> for Empirical<T> {
    fn cdf(&self, x: T) -> T {
        self.fraction(self.count_le(x))
    }

    fn sf(&self, x: T) -> T {
        self.fraction(self.len() - self.count_le(x))
    }

    fn pdf(&self, _x: T) -> T {
        T::nan()
    }

    fn has_density(&self) -> bool {
        false
    }

    fn support_lower(&self) -> T {
        self.min()
    }

    fn support_upper(&self) -> T {
        self.max()
    }

    /// Linear interpolation between order statistics at position `(n - 1) p`.
    fn quantile(&self, p: T) -> Result<T> {
        check_probability(p)?;
        let h = p * T::from_usize(self.len() - 1).unwrap_or_else(T::nan);
        let k = h.floor();
        let frac = h - k;
        let k = k.to_usize().unwrap_or(0);
        let lo = self.order_statistic(k);
        let hi = self.order_statistic((k + 1).min(self.len() - 1));
        Ok(lo + frac * (hi - lo))
    }

    fn mass(&self, a: T, b: T) -> T {
        if b <= a {
            return T::zero();
        }
        self.fraction(self.count_le(b) - self.count_le(a))
    }

    fn as_empirical(&self) -> Option<&Empirical<T>> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn step_cdf_is_right_continuous() {
        let e = Empirical::from_samples(vec![1.0_f64, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(e.cdf(0.5), 0.0);
        assert_eq!(e.cdf(1.0), 0.25);
        assert_eq!(e.cdf(2.0), 0.75);
        assert_eq!(e.cdf(3.9), 0.75);
        assert_eq!(e.cdf(4.0), 1.0);
        assert_eq!(e.sf(2.0), 0.25);
        assert_eq!(e.len(), 4);
        assert!(!e.has_density());
    }

    #[test]
    fn pieces_cover_window() {
        let e = Empirical::from_samples(vec![1.0_f64, 2.0, 3.0]).unwrap();
        let mut pieces = Vec::new();
        e.for_each_piece(0.5, 2.5, |lo, hi, f, s| pieces.push((lo, hi, f, s)));
        assert_eq!(pieces.len(), 3);
        assert_eq!(pieces[0], (0.5, 1.0, 0.0, 1.0));
        assert_eq!(pieces[1].2, 1.0 / 3.0);
        assert_eq!(pieces[2], (2.0, 2.5, 2.0 / 3.0, 1.0 / 3.0));
    }

    #[test]
    fn atoms_in_half_open_window() {
        let e = Empirical::from_samples(vec![1.0_f64, 2.0, 2.0, 3.0]).unwrap();
        let mut seen = Vec::new();
        e.for_each_atom(1.0, 2.0, |x, w| seen.push((x, w)));
        assert_eq!(seen, vec![(2.0, 0.5)]);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let mut text = String::new();
        for i in 0..16 {
            text.push_str(&format!("{}\n", i as f64 * 0.5));
        }
        text.push_str("-1.0\n");
        match Empirical::<f64>::parse(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 17),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = Empirical::<f64>::parse("1.0\n\nabc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn parse_skips_blank_lines_and_accepts_two_values() {
        let e = Empirical::<f64>::parse("\n0.5\n\n  1.5  \n").unwrap();
        assert_eq!(e.len(), 2);
        assert!(Empirical::<f64>::parse("0.5\n").is_err());
    }

    #[test]
    fn resample_preserves_size_and_atoms() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let e = Empirical::from_samples((0..100).map(|i| i as f64).collect()).unwrap();
        let r = e.resample(&mut rng).unwrap();
        assert_eq!(r.len(), 100);
        assert!(r.atoms().iter().all(|a| e.atoms().contains(a)));
    }
}
