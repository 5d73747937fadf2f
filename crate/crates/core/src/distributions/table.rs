//! Finite lattice tables of probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::accurate_sum;

/// Slack allowed above total mass 1 for accumulated rounding.
const MASS_SLACK: f64 = 1e-12;

/// Probabilities on the consecutive integers `offset, offset + 1, …`.
///
/// `captured_mass` is the sum of the entries. Tables produced by truncating
/// an infinite-support law carry less than unit mass; distance computations
/// use the shortfall as slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    offset: i64,
    probs: Vec<f64>,
    captured_mass: f64,
}

impl PmfTable {
    pub fn new(offset: i64, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("probability table must not be empty"));
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(format!("invalid probability {bad}")));
        }
        let captured_mass = accurate_sum(probs.iter().copied());
        if captured_mass > 1.0 + MASS_SLACK {
            return Err(Error::invalid(format!(
                "table mass {captured_mass} exceeds 1"
            )));
        }
        Ok(PmfTable {
            offset,
            probs,
            captured_mass,
        })
    }

    /// The point mass at `x`.
    pub fn point_mass(x: i64) -> Self {
        PmfTable {
            offset: x,
            probs: vec![1.0],
            captured_mass: 1.0,
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn captured_mass(&self) -> f64 {
        self.captured_mass
    }

    /// Mass outside the table, clamped at zero.
    pub fn uncaptured_mass(&self) -> f64 {
        (1.0 - self.captured_mass).max(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Smallest lattice point in the table.
    pub fn low(&self) -> i64 {
        self.offset
    }

    /// Largest lattice point in the table.
    pub fn high(&self) -> i64 {
        self.offset + self.probs.len() as i64 - 1
    }

    pub fn prob(&self, x: i64) -> f64 {
        if x < self.low() || x > self.high() {
            0.0
        } else {
            self.probs[(x - self.offset) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    /// `P(X <= x)` restricted to the captured mass.
    pub fn cdf(&self, x: i64) -> f64 {
        if x < self.low() {
            return 0.0;
        }
        let end = ((x - self.offset + 1) as usize).min(self.probs.len());
        accurate_sum(self.probs[..end].iter().copied())
    }

    pub fn mean(&self) -> f64 {
        accurate_sum(self.iter().map(|(x, p)| x as f64 * p))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        accurate_sum(self.iter().map(|(x, p)| (x as f64 - m).powi(2) * p))
    }

    /// Relabels the lattice so that point `x` becomes `x - by`.
    pub fn shifted(&self, by: i64) -> Self {
        PmfTable {
            offset: self.offset - by,
            ..self.clone()
        }
    }

    /// Table of `n - X`.
    pub fn reflect(&self, n: i64) -> Result<Self> {
        if self.low() < 0 || self.high() > n {
            return Err(Error::Support {
                low: self.low(),
                high: self.high(),
                n,
            });
        }
        let mut probs = self.probs.clone();
        probs.reverse();
        Ok(PmfTable {
            offset: n - self.high(),
            probs,
            captured_mass: self.captured_mass,
        })
    }

    /// CSV with header `x,p`, LF line endings and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p\n");
        for (x, p) in self.iter() {
            out.push_str(&format!("{x},{}\n", format_sig17(p)));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        if headers.iter().collect::<Vec<_>>() != ["x", "p"] {
            return Err(Error::invalid("csv header must be `x,p`"));
        }
        let mut offset = None;
        let mut probs = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::invalid(format!("csv: {e}")))?;
            let parse_err = |field: &str| Error::invalid(format!("csv row {row}: bad {field}"));
            let x: i64 = record
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("x"))?;
            let p: f64 = record
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("p"))?;
            let start = *offset.get_or_insert(x);
            if x != start + probs.len() as i64 {
                return Err(Error::invalid(
                    "csv rows must be consecutive lattice points",
                ));
            }
            probs.push(p);
        }
        PmfTable::new(offset.unwrap_or(0), probs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("PmfTable serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PmfTable =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("json: {e}")))?;
        PmfTable::new(raw.offset, raw.probs)
    }
}

/// Decimal rendering with 17 significant digits, enough to round-trip any
/// `f64` exactly.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_table() -> PmfTable {
        PmfTable::new(0, vec![1.0 / 3.0, 0.5, 1.0 / 6.0]).unwrap()
    }

    #[test]
    fn rejects_negative_and_excess_mass() {
        assert!(PmfTable::new(0, vec![0.5, -0.1]).is_err());
        assert!(PmfTable::new(0, vec![0.7, 0.7]).is_err());
        assert!(PmfTable::new(0, vec![]).is_err());
        assert!(PmfTable::new(0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn reflect_known_table() {
        let r = sample_table().reflect(2).unwrap();
        assert_eq!(r.offset(), 0);
        assert_eq!(r.probs(), &[1.0 / 6.0, 0.5, 1.0 / 3.0]);
        assert_eq!(r.reflect(2).unwrap(), sample_table());
    }

    #[test]
    fn reflect_checks_support() {
        let t = PmfTable::new(-1, vec![0.5, 0.5]).unwrap();
        assert!(matches!(t.reflect(3), Err(Error::Support { .. })));
        assert!(matches!(
            sample_table().reflect(1),
            Err(Error::Support { .. })
        ));
    }

    #[test]
    fn moments_and_cdf() {
        let t = sample_table();
        assert!((t.mean() - 5.0 / 6.0).abs() < 1e-15);
        assert!((t.variance() - 17.0 / 36.0).abs() < 1e-15);
        assert_eq!(t.cdf(-1), 0.0);
        assert!((t.cdf(1) - 5.0 / 6.0).abs() < 1e-15);
        assert!((t.cdf(10) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let csv = PmfTable::point_mass(0).to_csv();
        assert_eq!(csv, "x,p\n0,1.0000000000000000e0\n");
        let json = PmfTable::point_mass(0).to_json();
        assert_eq!(json, r#"{"offset":0,"probs":[1.0],"captured_mass":1.0}"#);
    }

    proptest! {
        #[test]
        fn text_round_trips_are_bit_exact(
            offset in -1000i64..1000,
            raw in proptest::collection::vec(0.0f64..1.0, 1..40),
        ) {
            let total: f64 = raw.iter().sum::<f64>() * 1.001;
            let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let t = PmfTable::new(offset, probs).unwrap();
            prop_assert_eq!(&PmfTable::from_csv(&t.to_csv()).unwrap(), &t);
            prop_assert_eq!(&PmfTable::from_json(&t.to_json()).unwrap(), &t);
        }
    }
}
