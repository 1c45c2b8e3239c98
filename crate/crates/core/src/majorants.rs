//! Right-hand sides of the class inequalities: averaged or block-supremum
//! majorants of `|c_jk|` in the row, column and double directions.
//!
//! Sups over unbounded index ranges are scanned up to `sup_horizon`. When the
//! sequence carries a decay hint the unscanned tail gets a rigorous upper
//! bound, and the value is reported as certified when that bound does not
//! exceed the scanned maximum.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sequences::expr::{Env, Expr, Var};
use crate::sequences::{CoefficientSequence, DecayHint, SingleSequence};
use crate::summation::{suffix_max, Neumaier, PrefixSums};

/// Dense (non-separable) double sups scan at most this many block starts
/// per direction.
pub const DENSE_HORIZON_CAP: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    One,
    Two,
    Three,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "1" => Ok(Family::One),
            "two" | "2" => Ok(Family::Two),
            "three" | "3" => Ok(Family::Three),
            _ => Err(Error::Param(format!("unknown majorant family `{s}` (one, two, three)"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::One => "one",
            Family::Two => "two",
            Family::Three => "three",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "row")]
    Row,
    #[serde(rename = "col")]
    Column,
    #[serde(rename = "double")]
    Double,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Row, Axis::Column, Axis::Double];
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(Axis::Row),
            "col" | "column" => Ok(Axis::Column),
            "double" => Ok(Axis::Double),
            _ => Err(Error::Param(format!("unknown axis `{s}` (row, col, double)"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Column => "col",
            Axis::Double => "double",
        })
    }
}

/// An index map `l -> b(l)` given as an expression in `l`. Values are
/// floored and clamped to at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    src: String,
    expr: Option<Arc<Expr>>,
}

impl IndexMap {
    pub fn identity() -> Self {
        Self { src: "l".into(), expr: None }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let e = Expr::parse_with(src, &[Var::L])?;
        if e == Expr::Var(Var::L) {
            return Ok(Self::identity());
        }
        Ok(Self { src: src.trim().to_string(), expr: Some(Arc::new(e)) })
    }

    #[inline]
    pub fn eval(&self, l: u64) -> u64 {
        match &self.expr {
            None => l.max(1),
            Some(e) => {
                let v = e.eval(&Env::l(l)).floor();
                if v.is_nan() || v < 1.0 {
                    1
                } else if v >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    v as u64
                }
            }
        }
    }

    pub fn source(&self) -> &str {
        &self.src
    }
}

impl Default for IndexMap {
    fn default() -> Self {
        Self::identity()
    }
}

impl Serialize for IndexMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.src)
    }
}

impl<'de> Deserialize<'de> for IndexMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        IndexMap::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantFamily {
    pub family: Family,
    pub lambda: u64,
    pub b1: IndexMap,
    pub b2: IndexMap,
    pub b3: IndexMap,
    pub sup_horizon: u64,
}

impl MajorantFamily {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            lambda: 2,
            b1: IndexMap::identity(),
            b2: IndexMap::identity(),
            b3: IndexMap::identity(),
            sup_horizon: 1 << 16,
        }
    }

    pub fn with_lambda(mut self, lambda: u64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_horizon(mut self, h: u64) -> Self {
        self.sup_horizon = h;
        self
    }

    /// λ >= 2 for families One and Two, λ >= 1 for Three.
    pub fn validate(&self) -> Result<()> {
        let min = if self.family == Family::Three { 1 } else { 2 };
        if self.lambda < min {
            return Err(Error::Lambda(self.lambda));
        }
        if self.sup_horizon == 0 {
            return Err(Error::Param("sup_horizon must be positive".into()));
        }
        Ok(())
    }
}

/// How far a scanned supremum can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Truncation {
    /// Finite index range, nothing was cut off.
    Exact,
    /// Scanned to the horizon; the bound on the rest is below the scanned sup.
    Certified { tail: f64 },
    /// Scanned to the horizon; the rest is bounded but may exceed the scan.
    Bounded { tail: f64 },
    /// Scanned to the horizon with no information about the rest.
    Unbounded,
}

impl Truncation {
    /// True when the scanned value may be below the true sup.
    pub fn is_truncated(&self) -> bool {
        matches!(self, Truncation::Bounded { .. } | Truncation::Unbounded)
    }

    fn classify(scanned: f64, tail: Option<f64>) -> Self {
        match tail {
            Some(t) if t <= scanned => Truncation::Certified { tail: t },
            Some(t) => Truncation::Bounded { tail: t },
            None => Truncation::Unbounded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorantValue {
    /// Scanned value, already divided by `m`, `n` or `mn`.
    pub value: f64,
    /// Certified upper bound for the true value, when one is known.
    pub upper: Option<f64>,
    pub truncation: Truncation,
}

impl MajorantValue {
    fn exact(value: f64) -> Self {
        Self { value, upper: Some(value), truncation: Truncation::Exact }
    }

    fn from_sup(scanned: f64, tail: Option<f64>, divisor: f64) -> Self {
        let truncation = Truncation::classify(scanned, tail);
        let upper = tail.map(|t| scanned.max(t) / divisor);
        Self { value: scanned / divisor, upper, truncation }
    }
}

/// `Σ_{j=M}^{2M} |c_jn|`
pub fn block_sum_row(c: &CoefficientSequence, big_m: u64, n: u64) -> f64 {
    (big_m..=2 * big_m).map(|j| c.eval(j, n).norm()).collect::<Neumaier>().value()
}

/// `Σ_{j=M}^{2M} Σ_{k=N}^{2N} |c_jk|`
pub fn block_sum_double(c: &CoefficientSequence, big_m: u64, big_n: u64) -> f64 {
    let mut acc = Neumaier::new();
    for j in big_m..=2 * big_m {
        for k in big_n..=2 * big_n {
            acc.add(c.eval(j, k).norm());
        }
    }
    acc.value()
}

/// `Σ_{j=M}^{2M} j^(-p) <= (M + 1) M^(-p)`, nonincreasing in `M` for `p >= 1`.
#[inline]
pub(crate) fn block_power_bound(p: f64, big_m: u64) -> f64 {
    let m = big_m as f64;
    (m + 1.0) * m.powf(-p)
}

/// Block sums `Σ_{j=M}^{2M} v_j` over a stored profile `v_1, v_2, ...`.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    prefix: PrefixSums,
}

impl Profile {
    pub(crate) fn build(len: u64, f: impl Fn(u64) -> f64) -> Self {
        Self { prefix: PrefixSums::new((1..=len).map(f)) }
    }

    /// `Σ_{j=lo}^{hi} v_j`
    #[inline]
    pub(crate) fn range(&self, lo: u64, hi: u64) -> f64 {
        self.prefix.range(lo as usize - 1, hi as usize)
    }

    #[inline]
    pub(crate) fn block(&self, big_m: u64) -> f64 {
        self.range(big_m, 2 * big_m)
    }

    /// `max_{M in [lo, hi]} block(M)`
    pub(crate) fn block_max(&self, lo: u64, hi: u64) -> f64 {
        (lo..=hi).map(|mm| self.block(mm)).fold(0.0, f64::max)
    }

    /// Suffix maxima of block sums for `M = 1..=h`; index `M - 1`.
    pub(crate) fn block_suffix_max(&self, h: u64) -> Vec<f64> {
        let blocks: Vec<f64> = (1..=h).map(|mm| self.block(mm)).collect();
        suffix_max(&blocks)
    }
}

/// One-dimensional profile with its block-sum suffix maxima.
#[derive(Debug)]
struct SupProfile {
    profile: Profile,
    /// `sufmax[M-1] = max_{M <= M' <= H} block(M')`
    sufmax: Vec<f64>,
}

impl SupProfile {
    fn build(h: u64, f: impl Fn(u64) -> f64) -> Self {
        let profile = Profile::build(2 * h, f);
        let sufmax = profile.block_suffix_max(h);
        Self { profile, sufmax }
    }

    fn sup_from(&self, start: u64) -> f64 {
        self.sufmax[(start - 1) as usize]
    }
}

/// Block sup of a single sequence: `sup_{M >= start} Σ_{j=M}^{2M} |a_j|`,
/// scanned for `M <= horizon`.
pub fn single_block_sup(a: &SingleSequence, start: u64, horizon: u64) -> Result<(f64, Truncation)> {
    let start = start.max(1);
    if horizon < start {
        return Err(Error::HorizonBelowScanStart { horizon, start });
    }
    let prof = Profile::build(2 * horizon, |j| a.eval(j).norm());
    let scanned = prof.block_max(start, horizon);
    let tail = a.decay().filter(|d| d.p >= 1.0).map(|d| d.constant * block_power_bound(d.p, horizon + 1));
    Ok((scanned, Truncation::classify(scanned, tail)))
}

/// Block-sum table for a non-separable sequence: `E(t)` is the largest
/// double block sum with `M + N = t`, suffix-maxed.
#[derive(Debug)]
struct DenseDouble {
    h: u64,
    /// `sufmax[t]` for `t = 0..=2h`
    sufmax: Vec<f64>,
    nonnegative: bool,
}

impl DenseDouble {
    fn build(c: &CoefficientSequence, h: u64) -> Self {
        let len = 2 * h;
        let rows: Vec<(PrefixSums, bool)> = (1..=len)
            .into_par_iter()
            .map(|j| {
                let mut ok = true;
                let p = PrefixSums::new((1..=len).map(|k| {
                    let v = c.eval(j, k);
                    ok &= v.im == 0.0 && v.re >= 0.0;
                    v.norm()
                }));
                (p, ok)
            })
            .collect();
        let nonnegative = rows.iter().all(|(_, ok)| *ok);
        let per_n: Vec<Vec<f64>> = (1..=h)
            .into_par_iter()
            .map(|nn| {
                let w = PrefixSums::new(rows.iter().map(|(r, _)| r.range(nn as usize - 1, 2 * nn as usize)));
                (1..=h).map(|mm| w.range(mm as usize - 1, 2 * mm as usize)).collect()
            })
            .collect();
        let mut best = vec![0.0f64; (2 * h + 1) as usize];
        for (ni, row) in per_n.iter().enumerate() {
            for (mi, &v) in row.iter().enumerate() {
                let t = mi + ni + 2;
                if v > best[t] {
                    best[t] = v;
                }
            }
        }
        Self { h, sufmax: suffix_max(&best), nonnegative }
    }
}

type ProfileCache = RwLock<HashMap<u64, Arc<SupProfile>>>;

/// Evaluates majorants for one sequence and family, caching per-index
/// profiles so a whole grid can be evaluated cheaply.
pub struct MajorantEvaluator {
    c: CoefficientSequence,
    fam: MajorantFamily,
    /// separable factor profiles `|a_j|`, `|b_k|` up to `2H`
    factors: Option<(Arc<SupProfile>, Arc<SupProfile>)>,
    rows: ProfileCache,
    cols: ProfileCache,
    doubles: RwLock<HashMap<u64, f64>>,
    dense: RwLock<Option<Arc<DenseDouble>>>,
}

impl MajorantEvaluator {
    pub fn new(c: &CoefficientSequence, fam: &MajorantFamily) -> Result<Self> {
        fam.validate()?;
        let factors = c.separable_parts().map(|(a, b)| {
            let h = fam.sup_horizon;
            let (pa, pb) = rayon::join(
                || SupProfile::build(h, |j| a.eval(j).norm()),
                || SupProfile::build(h, |k| b.eval(k).norm()),
            );
            (Arc::new(pa), Arc::new(pb))
        });
        Ok(Self {
            c: c.clone(),
            fam: fam.clone(),
            factors,
            rows: RwLock::default(),
            cols: RwLock::default(),
            doubles: RwLock::default(),
            dense: RwLock::default(),
        })
    }

    pub fn family(&self) -> &MajorantFamily {
        &self.fam
    }

    fn lower(&self, m: u64) -> u64 {
        (m / self.fam.lambda).max(1)
    }

    fn upper(&self, m: u64) -> u64 {
        self.fam.lambda.saturating_mul(m).max(1)
    }

    fn hint(&self) -> Option<DecayHint> {
        self.c.decay_hint()
    }

    /// The majorant without the class constant.
    pub fn rhs(&self, axis: Axis, m: u64, n: u64) -> Result<MajorantValue> {
        if m == 0 || n == 0 {
            return Err(Error::Param(format!("indices start at 1, got ({m}, {n})")));
        }
        match axis {
            Axis::Row => self.line(m, n, false),
            Axis::Column => self.line(n, m, true),
            Axis::Double => self.double(m, n),
        }
    }

    /// Row (`transposed = false`): sums over `j` at fixed `k = fixed`,
    /// normalised by `m`. Column: the same with the roles swapped.
    fn line(&self, m: u64, fixed: u64, transposed: bool) -> Result<MajorantValue> {
        let b = if transposed { &self.fam.b2 } else { &self.fam.b1 };
        let at = |i: u64| if transposed { self.c.eval(fixed, i) } else { self.c.eval(i, fixed) };
        let mf = m as f64;
        match self.fam.family {
            Family::One => {
                let s: Neumaier = (self.lower(m)..=self.upper(m)).map(|i| at(i).norm()).collect();
                Ok(MajorantValue::exact(s.value() / mf))
            }
            Family::Two => {
                let lo = b.eval(m);
                let hi = self.fam.lambda.saturating_mul(lo);
                let prof = Profile::build(2 * hi, |i| at(i).norm());
                Ok(MajorantValue::exact(prof.block_max(lo, hi) / mf))
            }
            Family::Three => {
                let start = b.eval(m);
                let h = self.fam.sup_horizon;
                if h < start {
                    return Err(Error::HorizonBelowScanStart { horizon: h, start });
                }
                let scanned = match (&self.factors, transposed) {
                    (Some((pa, _)), false) => {
                        pa.sup_from(start) * self.c.separable_parts().unwrap().1.eval(fixed).norm()
                    }
                    (Some((_, pb)), true) => {
                        pb.sup_from(start) * self.c.separable_parts().unwrap().0.eval(fixed).norm()
                    }
                    (None, _) => self.line_profile(fixed, transposed).sup_from(start),
                };
                let tail = self.hint().and_then(|hn| {
                    let (p, q) = if transposed { (hn.q, hn.p) } else { (hn.p, hn.q) };
                    (p >= 1.0).then(|| hn.constant * (fixed as f64).powf(-q) * block_power_bound(p, h + 1))
                });
                Ok(MajorantValue::from_sup(scanned, tail, mf))
            }
        }
    }

    fn line_profile(&self, fixed: u64, transposed: bool) -> Arc<SupProfile> {
        let cache = if transposed { &self.cols } else { &self.rows };
        if let Some(p) = cache.read().unwrap().get(&fixed) {
            return Arc::clone(p);
        }
        let h = self.fam.sup_horizon;
        let prof = Arc::new(if transposed {
            SupProfile::build(h, |k| self.c.eval(fixed, k).norm())
        } else {
            SupProfile::build(h, |j| self.c.eval(j, fixed).norm())
        });
        cache.write().unwrap().entry(fixed).or_insert(prof).clone()
    }

    fn double(&self, m: u64, n: u64) -> Result<MajorantValue> {
        let mn = m as f64 * n as f64;
        match self.fam.family {
            Family::One => {
                let (jl, jh, kl, kh) = (self.lower(m), self.upper(m), self.lower(n), self.upper(n));
                let total = if let Some((a, b)) = self.c.separable_parts() {
                    let sa: Neumaier = (jl..=jh).map(|j| a.eval(j).norm()).collect();
                    let sb: Neumaier = (kl..=kh).map(|k| b.eval(k).norm()).collect();
                    sa.value() * sb.value()
                } else {
                    let mut acc = Neumaier::new();
                    for j in jl..=jh {
                        for k in kl..=kh {
                            acc.add(self.c.eval(j, k).norm());
                        }
                    }
                    acc.value()
                };
                Ok(MajorantValue::exact(total / mn))
            }
            Family::Two | Family::Three => {
                let s = self.fam.b3.eval(m + n);
                let (scanned, tail) = self.double_block_sup(s)?;
                Ok(MajorantValue::from_sup(scanned, tail, mn))
            }
        }
    }

    /// `sup_{M + N >= s} Σ_{j=M}^{2M} Σ_{k=N}^{2N} |c_jk|` scanned over
    /// `M, N <= H`, with the tail bound when one exists.
    pub fn double_block_sup(&self, s: u64) -> Result<(f64, Option<f64>)> {
        let s = s.max(2);
        let h = self.fam.sup_horizon;
        let eff_h = if self.factors.is_some() { h } else { h.min(DENSE_HORIZON_CAP) };
        if 2 * eff_h < s {
            return Err(Error::HorizonBelowScanStart { horizon: 2 * eff_h, start: s });
        }
        let tail = self.hint().and_then(|hn| {
            (hn.p >= 1.0 && hn.q >= 1.0).then(|| {
                let a = 2.0 * block_power_bound(hn.p, eff_h + 1);
                let b = 2.0 * block_power_bound(hn.q, eff_h + 1);
                hn.constant * a.max(b)
            })
        });
        if let Some(v) = self.doubles.read().unwrap().get(&s) {
            return Ok((*v, tail));
        }
        let v = match &self.factors {
            Some((pa, pb)) => {
                let mut best = 0.0f64;
                for mm in 1..=h {
                    let nn = s.saturating_sub(mm).max(1);
                    if nn > h {
                        continue;
                    }
                    best = best.max(pa.profile.block(mm) * pb.sup_from(nn));
                }
                best
            }
            None => self.dense_table().sufmax[s as usize],
        };
        self.doubles.write().unwrap().insert(s, v);
        Ok((v, tail))
    }

    fn dense_table(&self) -> Arc<DenseDouble> {
        if let Some(d) = self.dense.read().unwrap().as_ref() {
            return Arc::clone(d);
        }
        let d = Arc::new(DenseDouble::build(&self.c, self.fam.sup_horizon.min(DENSE_HORIZON_CAP)));
        self.dense.write().unwrap().get_or_insert(d).clone()
    }

    /// Horizon actually used for double sups (capped for dense sequences).
    pub fn effective_double_horizon(&self) -> u64 {
        if self.factors.is_some() {
            self.fam.sup_horizon
        } else {
            self.dense_table().h
        }
    }

    /// Whether every coefficient touched by the double sup scan is real and
    /// nonnegative. Separable sequences are judged by their factors.
    pub fn scan_is_nonnegative(&self) -> Option<(u64, u64)> {
        if let Some((a, b)) = self.c.separable_parts() {
            let len = 2 * self.fam.sup_horizon;
            let bad = |s: &SingleSequence| {
                (1..=len).find(|&i| {
                    let v = s.eval(i);
                    v.im != 0.0 || v.re < 0.0
                })
            };
            if let Some(j) = bad(a) {
                return Some((j, 1));
            }
            return bad(b).map(|k| (1, k));
        }
        if self.dense_table().nonnegative {
            None
        } else {
            Some((0, 0))
        }
    }

    /// Builds the caches needed for the given grid in parallel.
    pub fn prepare(&self, grid: &[(u64, u64)], axes: &[Axis]) {
        if self.fam.family != Family::Three || self.factors.is_some() {
            return;
        }
        let mut rows: Vec<u64> = Vec::new();
        let mut cols: Vec<u64> = Vec::new();
        for &(m, n) in grid {
            if axes.contains(&Axis::Row) {
                rows.push(n);
            }
            if axes.contains(&Axis::Column) {
                cols.push(m);
            }
        }
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        rows.par_iter().for_each(|&n| {
            self.line_profile(n, false);
        });
        cols.par_iter().for_each(|&m| {
            self.line_profile(m, true);
        });
        if axes.contains(&Axis::Double) {
            self.dense_table();
        }
    }
}

/// One-shot majorant evaluation.
pub fn rhs(c: &CoefficientSequence, fam: &MajorantFamily, axis: Axis, m: u64, n: u64) -> Result<MajorantValue> {
    MajorantEvaluator::new(c, fam)?.rhs(axis, m, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::builtin;

    #[test]
    fn family_one_row_matches_hand_sum() {
        let c = builtin("oscillating_quadratic", &[]).unwrap();
        let fam = MajorantFamily::new(Family::One);
        let v = rhs(&c, &fam, Axis::Row, 2, 3).unwrap();
        let expected: f64 = (1..=4).map(|j| c.eval(j, 3).norm()).sum::<f64>() / 2.0;
        assert!((v.value - expected).abs() < 1e-15);
        assert_eq!(v.truncation, Truncation::Exact);
    }

    #[test]
    fn horizon_below_start_is_an_error() {
        let c = builtin("oscillating_quadratic", &[]).unwrap();
        let fam = MajorantFamily::new(Family::Three).with_horizon(8);
        assert!(matches!(rhs(&c, &fam, Axis::Row, 16, 1), Err(Error::HorizonBelowScanStart { .. })));
        assert!(matches!(rhs(&c, &fam, Axis::Double, 16, 16), Err(Error::HorizonBelowScanStart { .. })));
    }

    #[test]
    fn index_maps() {
        assert_eq!(IndexMap::identity().eval(5), 5);
        let b = IndexMap::parse("l / 3").unwrap();
        assert_eq!(b.eval(5), 1);
        assert_eq!(b.eval(2), 1);
        assert_eq!(IndexMap::parse("2*l").unwrap().eval(7), 14);
        assert!(IndexMap::parse("j").is_err());
        assert_eq!(IndexMap::parse(" l ").unwrap(), IndexMap::identity());
    }

    #[test]
    fn separable_and_dense_paths_agree() {
        let c = builtin("oscillating_quadratic", &[]).unwrap();
        let dense = c.without_separable().without_decay_hint();
        for family in [Family::One, Family::Two, Family::Three] {
            let fam = MajorantFamily::new(family).with_horizon(64);
            let e1 = MajorantEvaluator::new(&c, &fam).unwrap();
            let e2 = MajorantEvaluator::new(&dense, &fam).unwrap();
            for &(m, n) in &[(2, 2), (3, 5), (8, 4), (16, 16), (32, 7)] {
                for axis in Axis::ALL {
                    let a = e1.rhs(axis, m, n).unwrap().value;
                    let b = e2.rhs(axis, m, n).unwrap().value;
                    assert!((a - b).abs() <= 1e-13 * a.abs(), "{family} {axis} ({m},{n}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn certified_when_tail_is_small() {
        let c = builtin("oscillating_quadratic", &[]).unwrap();
        let fam = MajorantFamily::new(Family::Three).with_horizon(1 << 16);
        let v = rhs(&c, &fam, Axis::Row, 4, 3).unwrap();
        assert!(matches!(v.truncation, Truncation::Certified { .. }));
        assert_eq!(v.upper, Some(v.value));
        let unhinted = c.without_decay_hint();
        let v = rhs(&unhinted, &fam, Axis::Row, 4, 3).unwrap();
        assert_eq!(v.truncation, Truncation::Unbounded);
        assert_eq!(v.upper, None);
    }

    #[test]
    fn single_block_sup_certifies_power() {
        let a = SingleSequence::power(2.0);
        let (v, t) = single_block_sup(&a, 3, 4096).unwrap();
        let expected: f64 = (3..=6).map(|j| 1.0 / (j * j) as f64).sum();
        assert!((v - expected).abs() < 1e-15);
        assert!(matches!(t, Truncation::Certified { .. }));
    }
}
