//! Sampled suprema of rectangular partial sums.
//!
//! Rectangle corners come from the lattice `{1, 2, 3, 4, 6, 8, 12, ...}` plus,
//! for every probe point, the indices next to `μ = ⌈1/x⌉` (or `⌈1/(π - x)⌉`
//! on the right half), where the kernel estimates switch regime.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tail::{TailReport, TailRules};
use crate::error::{Error, Result};
use crate::report::float;
use crate::sequences::CoefficientSequence;
use crate::summation::ComplexPrefixSums;

/// Non-separable sequences are probed with a full table of partial sums,
/// so their lattice is capped here.
pub const DENSE_LATTICE_CAP: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub xy_grid: Vec<(f64, f64)>,
    /// Largest rectangle coordinate.
    pub lattice_max: u64,
    /// Thresholds `m0`: rectangles with `m + n > m0` count.
    pub thresholds: Vec<u64>,
    pub structured_corners: bool,
    pub rules: TailRules,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            xy_grid: interior_grid(23),
            lattice_max: 4096,
            thresholds: vec![8, 16, 32, 64, 128],
            structured_corners: true,
            rules: TailRules::with_decay_factor(10.0),
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.xy_grid.is_empty() {
            return Err(Error::Param("probe grid is empty".into()));
        }
        if let Some(&(x, y)) = self.xy_grid.iter().find(|(x, y)| !(*x >= 0.0 && *x <= PI && *y >= 0.0 && *y <= PI)) {
            return Err(Error::Param(format!("probe point ({x}, {y}) outside [0, pi]^2")));
        }
        if self.lattice_max == 0 {
            return Err(Error::Param("lattice_max must be positive".into()));
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) || self.thresholds.is_empty() {
            return Err(Error::Param("thresholds must be nonempty and strictly increasing".into()));
        }
        self.rules.validate()
    }
}

/// `n x n` points `(iπ/(n+1), jπ/(n+1))`.
pub fn interior_grid(n: usize) -> Vec<(f64, f64)> {
    let h = PI / (n + 1) as f64;
    (1..=n).flat_map(|i| (1..=n).map(move |j| (i as f64 * h, j as f64 * h))).collect()
}

/// Powers of two and three times powers of two, up to `max`.
pub fn lattice(max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..63).flat_map(|e| [1u64 << e, 3u64 << e]).filter(|&v| v <= max).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `⌈1/x⌉` on `(0, π/2]`, `⌈1/(π - x)⌉` on `(π/2, π)`.
pub fn mu(x: f64) -> Option<u64> {
    if !(x > 0.0 && x < PI) {
        return None;
    }
    let d = if x <= PI / 2.0 { x } else { PI - x };
    Some((1.0 / d).ceil() as u64)
}

fn corner_set(x: f64, max: u64, structured: bool, extra: &[u64]) -> Vec<u64> {
    let mut v = lattice(max);
    if structured {
        if let Some(m) = mu(x) {
            v.extend([m.saturating_sub(1), m, m + 1]);
        }
    }
    v.extend_from_slice(extra);
    v.retain(|&i| i >= 1 && i <= max);
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeTraceRow {
    pub m0: u64,
    pub x: f64,
    pub y: f64,
    pub m: u64,
    #[serde(rename = "M")]
    pub m_end: u64,
    pub n: u64,
    #[serde(rename = "N")]
    pub n_end: u64,
    pub abs_sum: f64,
}

pub fn write_trace_csv<W: Write>(w: W, rows: &[ProbeTraceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["m0", "x", "y", "m", "M", "n", "N", "abs_sum"])?;
    for r in rows {
        out.write_record([
            r.m0.to_string(),
            float::fmt(r.x),
            float::fmt(r.y),
            r.m.to_string(),
            r.m_end.to_string(),
            r.n.to_string(),
            r.n_end.to_string(),
            float::fmt(r.abs_sum),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Best rectangle for each lower-left corner at one probe point.
struct PointTable {
    x: f64,
    y: f64,
    /// (m, best M, best |.|) per row start in the corner set
    rows: Vec<(u64, u64, f64)>,
    cols: Vec<(u64, u64, f64)>,
    /// dense case: best |rect| for each (m index, n index) with the argmax
    dense: Option<Vec<Vec<(u64, u64, f64)>>>,
}

impl PointTable {
    /// Largest sampled `|rect sum|` with `keep(m, n)`.
    fn best(&self, keep: impl Fn(u64, u64) -> bool) -> Option<(u64, u64, u64, u64, f64)> {
        let mut best: Option<(u64, u64, u64, u64, f64)> = None;
        for (mi, &(m, big_m, a)) in self.rows.iter().enumerate() {
            for (ni, &(n, big_n, b)) in self.cols.iter().enumerate() {
                if !keep(m, n) {
                    continue;
                }
                let cand = match &self.dense {
                    None => (m, big_m, n, big_n, a * b),
                    Some(t) => {
                        let (bm, bn, v) = t[mi][ni];
                        (m, bm, n, bn, v)
                    }
                };
                if best.map_or(true, |b| cand.4 > b.4) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}

/// For each start `m` in `set`, the end `M >= m` in `set` maximising
/// `|Σ_{j=m}^{M} z_j|`.
fn best_ends(prefix: &ComplexPrefixSums, set: &[u64]) -> Vec<(u64, u64, f64)> {
    set.iter()
        .map(|&m| {
            let mut best = (m, m, 0.0f64);
            for &e in set.iter().filter(|&&e| e >= m) {
                let v = prefix.range(m as usize - 1, e as usize).norm();
                if v > best.2 {
                    best = (m, e, v);
                }
            }
            best
        })
        .collect()
}

fn point_table(c: &CoefficientSequence, x: f64, y: f64, max: u64, structured: bool, extra: &[u64]) -> PointTable {
    let px = corner_set(x, max, structured, extra);
    let py = corner_set(y, max, structured, extra);
    if let Some((a, b)) = c.separable_parts() {
        let za: Vec<Complex64> = (1..=max).map(|j| a.eval(j) * (j as f64 * x).sin()).collect();
        let zb: Vec<Complex64> = (1..=max).map(|k| b.eval(k) * (k as f64 * y).sin()).collect();
        let (pa, pb) = (ComplexPrefixSums::new(&za), ComplexPrefixSums::new(&zb));
        return PointTable { x, y, rows: best_ends(&pa, &px), cols: best_ends(&pb, &py), dense: None };
    }
    // row prefix sums of z_jk = c_jk sin jx sin ky, then for each (n, N)
    // a prefix over j of the row ranges
    let sy: Vec<f64> = (1..=max).map(|k| (k as f64 * y).sin()).collect();
    let row_prefix: Vec<ComplexPrefixSums> = (1..=max)
        .map(|j| {
            let sj = (j as f64 * x).sin();
            let z: Vec<Complex64> = (1..=max).map(|k| c.eval(j, k) * sj * sy[k as usize - 1]).collect();
            ComplexPrefixSums::new(&z)
        })
        .collect();
    let mut table = vec![vec![(0u64, 0u64, 0.0f64); py.len()]; px.len()];
    for (ni, &n) in py.iter().enumerate() {
        for &big_n in py.iter().filter(|&&e| e >= n) {
            let w: Vec<Complex64> = row_prefix.iter().map(|r| r.range(n as usize - 1, big_n as usize)).collect();
            let col = ComplexPrefixSums::new(&w);
            for (mi, &m) in px.iter().enumerate() {
                for &big_m in px.iter().filter(|&&e| e >= m) {
                    let v = col.range(m as usize - 1, big_m as usize).norm();
                    if v > table[mi][ni].2 {
                        table[mi][ni] = (big_m, big_n, v);
                    }
                }
            }
        }
    }
    let rows = px.iter().map(|&m| (m, m, 0.0)).collect();
    let cols = py.iter().map(|&n| (n, n, 0.0)).collect();
    PointTable { x, y, rows, cols, dense: Some(table) }
}

fn effective_max(c: &CoefficientSequence, max: u64) -> u64 {
    if c.separable_parts().is_some() {
        max
    } else {
        max.min(DENSE_LATTICE_CAP)
    }
}

/// For each threshold `m0`, the largest sampled `|rect sum|` with
/// `m + n > m0` over all probe points. The trace keeps the maximising
/// rectangle for every (threshold, point) pair.
pub fn uniform_tail_probe(c: &CoefficientSequence, probe: &ProbeConfig) -> Result<(TailReport, Vec<ProbeTraceRow>)> {
    probe.validate()?;
    let max = effective_max(c, probe.lattice_max);
    let tables: Vec<PointTable> =
        probe.xy_grid.par_iter().map(|&(x, y)| point_table(c, x, y, max, probe.structured_corners, &[])).collect();
    let mut values = Vec::with_capacity(probe.thresholds.len());
    let mut trace = Vec::new();
    for &m0 in &probe.thresholds {
        let mut sup = 0.0f64;
        for t in &tables {
            if let Some((m, big_m, n, big_n, v)) = t.best(|m, n| m + n > m0) {
                trace.push(ProbeTraceRow { m0, x: t.x, y: t.y, m, m_end: big_m, n, n_end: big_n, abs_sum: v });
                sup = sup.max(v);
            }
        }
        values.push(sup);
    }
    let bounded = vec![false; values.len()];
    Ok((TailReport::new(probe.thresholds.clone(), values, bounded, probe.rules), trace))
}

/// `(1 + 2πC + 2π + 1.5π²C + π²) ε`
pub fn theorem7_bound(constant: f64, epsilon: f64) -> f64 {
    (1.0 + 2.0 * PI * constant + 2.0 * PI + 1.5 * PI * PI * constant + PI * PI) * epsilon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem7Report {
    pub epsilon: f64,
    pub eta: u64,
    pub constant: f64,
    pub bound: f64,
    /// Largest sampled `|rect sum|` with `m, n > η`.
    pub worst_abs: f64,
    /// `worst_abs - bound`; negative when the estimate holds on the probe.
    pub slack: f64,
    pub witness: Option<ProbeTraceRow>,
    /// False when no lattice rectangle lies beyond `η`.
    pub nonempty: bool,
}

/// Checks the uniform tail estimate on every sampled rectangle with
/// `m, n > η`.
pub fn theorem7_bound_check(
    c: &CoefficientSequence,
    epsilon: f64,
    eta: u64,
    constant: f64,
    probe: &ProbeConfig,
) -> Result<Theorem7Report> {
    probe.validate()?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Param(format!("epsilon must be positive, got {epsilon}")));
    }
    let max = effective_max(c, probe.lattice_max);
    let extra = [eta + 1];
    let best: Vec<Option<ProbeTraceRow>> = probe
        .xy_grid
        .par_iter()
        .map(|&(x, y)| {
            let t = point_table(c, x, y, max, probe.structured_corners, &extra);
            t.best(|m, n| m > eta && n > eta).map(|(m, big_m, n, big_n, v)| ProbeTraceRow {
                m0: 2 * eta,
                x,
                y,
                m,
                m_end: big_m,
                n,
                n_end: big_n,
                abs_sum: v,
            })
        })
        .collect();
    let nonempty = best.iter().any(|b| b.is_some());
    let witness = best.into_iter().flatten().fold(None::<ProbeTraceRow>, |w, r| match w {
        Some(w) if w.abs_sum >= r.abs_sum => Some(w),
        _ => Some(r),
    });
    let bound = theorem7_bound(constant, epsilon);
    let worst_abs = witness.map_or(0.0, |w| w.abs_sum);
    Ok(Theorem7Report { epsilon, eta, constant, bound, worst_abs, slack: worst_abs - bound, witness, nonempty })
}
