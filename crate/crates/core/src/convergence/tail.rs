use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailVerdict {
    Decaying,
    Flat,
    Growing,
    Inconclusive,
}

impl std::fmt::Display for TailVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TailVerdict::Decaying => "decaying",
            TailVerdict::Flat => "flat",
            TailVerdict::Growing => "growing",
            TailVerdict::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for TailVerdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decaying" => Ok(TailVerdict::Decaying),
            "flat" => Ok(TailVerdict::Flat),
            "growing" => Ok(TailVerdict::Growing),
            "inconclusive" => Ok(TailVerdict::Inconclusive),
            _ => Err(Error::Param(format!("unknown verdict `{s}` (decaying, flat, growing, inconclusive)"))),
        }
    }
}

/// Thresholds turning a measured schedule into a verdict.
///
/// * all values zero: decaying
/// * last three strictly decreasing and `last < first / decay_factor`: decaying
/// * last three strictly increasing and `last > first (1 + band)`: growing
/// * `first / decay_factor <= last <= first (1 + band)`: flat
/// * anything else: inconclusive
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailRules {
    pub decay_factor: f64,
    pub band: f64,
}

impl Default for TailRules {
    fn default() -> Self {
        Self { decay_factor: 100.0, band: 0.05 }
    }
}

impl TailRules {
    pub fn with_decay_factor(decay_factor: f64) -> Self {
        Self { decay_factor, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.decay_factor.is_nan() || self.decay_factor <= 1.0 || self.band.is_nan() || self.band < 0.0 {
            return Err(Error::Param(format!(
                "verdict rules need decay_factor > 1 and band >= 0, got {} and {}",
                self.decay_factor, self.band
            )));
        }
        Ok(())
    }

    pub fn classify(&self, values: &[f64]) -> TailVerdict {
        if values.is_empty() {
            return TailVerdict::Inconclusive;
        }
        if values.iter().all(|v| *v == 0.0) {
            return TailVerdict::Decaying;
        }
        let first = values[0];
        let last = *values.last().unwrap();
        let tail = &values[values.len().saturating_sub(3)..];
        let decreasing = tail.len() == 3 && tail.windows(2).all(|w| w[1] < w[0]);
        let increasing = tail.len() == 3 && tail.windows(2).all(|w| w[1] > w[0]);
        if decreasing && last < first / self.decay_factor {
            TailVerdict::Decaying
        } else if increasing && last > first * (1.0 + self.band) {
            TailVerdict::Growing
        } else if last >= first / self.decay_factor && last <= first * (1.0 + self.band) {
            TailVerdict::Flat
        } else {
            TailVerdict::Inconclusive
        }
    }
}

/// `v_j <= v_i (1 + band)` for every `i < j`.
pub fn band_nonincreasing(values: &[f64], band: f64) -> bool {
    let mut running_min = f64::INFINITY;
    for &v in values {
        if v > running_min * (1.0 + band) {
            return false;
        }
        running_min = running_min.min(v);
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub schedule: Vec<u64>,
    #[serde(with = "float::vec")]
    pub values: Vec<f64>,
    /// Whether each value carries a rigorous bound on its truncated part.
    pub bounded: Vec<bool>,
    pub rules: TailRules,
    pub verdict: TailVerdict,
    /// Log-log slope of value against scale over the positive values.
    pub fit: Option<f64>,
}

impl TailReport {
    pub fn new(schedule: Vec<u64>, values: Vec<f64>, bounded: Vec<bool>, rules: TailRules) -> Self {
        debug_assert!(schedule.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(schedule.len(), values.len());
        let verdict = rules.classify(&values);
        let fit = loglog_slope(&schedule, &values);
        Self { schedule, values, bounded, rules, verdict, fit }
    }

    /// Columns `scale,value,bounded_flag`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["scale", "value", "bounded_flag"])?;
        for ((s, v), b) in self.schedule.iter().zip(&self.values).zip(&self.bounded) {
            out.write_record([s.to_string(), float::fmt(*v), b.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn loglog_slope(xs: &[u64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| ((*x as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `start, 2 start, 4 start, ...` up to and including `end` when it is hit.
pub fn dyadic_schedule(start: u64, end: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = start.max(1);
    while s <= end {
        out.push(s);
        match s.checked_mul(2) {
            Some(v) => s = v,
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let r = TailRules::default();
        assert_eq!(r.classify(&[0.0, 0.0, 0.0]), TailVerdict::Decaying);
        assert_eq!(r.classify(&[1.0, 0.1, 0.01, 0.001]), TailVerdict::Decaying);
        assert_eq!(r.classify(&[1.0, 1.0, 1.0]), TailVerdict::Flat);
        assert_eq!(r.classify(&[1.0, 2.0, 3.0]), TailVerdict::Growing);
        // decreasing but not by the factor
        assert_eq!(r.classify(&[1.0, 0.5, 0.2]), TailVerdict::Flat);
        // a big final jump without a monotone run
        assert_eq!(r.classify(&[1.0, 0.1, 5.0, 2.0]), TailVerdict::Inconclusive);
        assert_eq!(r.classify(&[]), TailVerdict::Inconclusive);
    }

    #[test]
    fn band_check() {
        assert!(band_nonincreasing(&[1.0, 1.04, 0.5, 0.52], 0.05));
        assert!(!band_nonincreasing(&[1.0, 0.5, 0.6], 0.05));
    }

    #[test]
    fn schedules() {
        assert_eq!(dyadic_schedule(4, 64), vec![4, 8, 16, 32, 64]);
        assert_eq!(dyadic_schedule(4, 100), vec![4, 8, 16, 32, 64]);
    }

    #[test]
    fn fit_of_power_law() {
        let s = vec![2, 4, 8, 16];
        let v: Vec<f64> = s.iter().map(|&x| (x as f64).powf(-1.5)).collect();
        let rep = TailReport::new(s, v, vec![true; 4], TailRules::default());
        assert!((rep.fit.unwrap() + 1.5).abs() < 1e-12);
    }
}
