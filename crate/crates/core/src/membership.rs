//! Empirical class membership: evaluates the three defining inequalities on a
//! grid, fits the smallest constant that makes them hold there, and keeps the
//! worst point of each axis as a witness.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convergence::tail::{dyadic_schedule, TailReport, TailRules};
use crate::differences::{delta, delta_0r, delta_r0, delta_rr, DiffOrder};
use crate::error::{Error, Result};
use crate::majorants::{single_block_sup, Axis, IndexMap, MajorantEvaluator, MajorantFamily};
use crate::report::float;
use crate::sequences::{CoefficientSequence, SingleSequence};
use crate::summation::Neumaier;

/// Left-hand side of the class inequality on one axis:
/// row `Σ_{j=m}^{2m-1} |Δ_r0 c_jn|`, column `Σ_{k=n}^{2n-1} |Δ_0r c_mk|`,
/// double `Σ_j Σ_k |Δ_rr c_jk|` over the product of both ranges.
pub fn lhs(c: &CoefficientSequence, r: DiffOrder, axis: Axis, m: u64, n: u64) -> f64 {
    match axis {
        Axis::Row => (m..2 * m).map(|j| delta_r0(c, r, j, n).norm()).collect::<Neumaier>().value(),
        Axis::Column => (n..2 * n).map(|k| delta_0r(c, r, m, k).norm()).collect::<Neumaier>().value(),
        Axis::Double => {
            if let Some((a, b)) = c.separable_parts() {
                // |Δ_rr (a_j b_k)| = |Δ_r a_j| |Δ_r b_k|
                let sa: Neumaier = (m..2 * m).map(|j| delta(a, r, j).norm()).collect();
                let sb: Neumaier = (n..2 * n).map(|k| delta(b, r, k).norm()).collect();
                return sa.value() * sb.value();
            }
            let mut acc = Neumaier::new();
            for j in m..2 * m {
                for k in n..2 * n {
                    acc.add(delta_rr(c, r, j, k).norm());
                }
            }
            acc.value()
        }
    }
}

/// `lhs / rhs` with `0/0 = 0` and `x/0 = ∞`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub m: u64,
    pub n: u64,
    pub axis: Axis,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(with = "float::option")]
    pub rhs_upper: Option<f64>,
    #[serde(with = "float")]
    pub ratio: f64,
    pub truncated: bool,
}

impl PointResult {
    /// Verdict against a target constant. A truncated sup can only be too
    /// small, so passing against it is sound; failing needs the certified
    /// upper bound.
    pub fn verdict(&self, target: f64) -> Verdict {
        if self.ratio <= target {
            Verdict::Pass
        } else {
            match self.rhs_upper {
                Some(u) if self.lhs > target * u => Verdict::Fail,
                _ => Verdict::Inconclusive,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisResult {
    pub axis: Axis,
    /// Smallest constant satisfying the inequality on the evaluated points.
    #[serde(with = "float")]
    pub fitted_c: f64,
    pub witness: Option<PointResult>,
    pub evaluated: usize,
    /// Points outside the class domain (index below λ).
    pub skipped: usize,
    pub truncated_points: usize,
    pub verdict: Option<Verdict>,
    /// Log-log slope of the running fitted constant against the scale.
    pub growth_fit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub sequence: String,
    pub r: DiffOrder,
    pub family: MajorantFamily,
    pub grid: Vec<(u64, u64)>,
    #[serde(with = "float::option")]
    pub target_c: Option<f64>,
    pub axes: Vec<AxisResult>,
    pub points: Vec<PointResult>,
}

impl MembershipReport {
    pub fn axis(&self, axis: Axis) -> Option<&AxisResult> {
        self.axes.iter().find(|a| a.axis == axis)
    }

    pub fn fitted(&self, axis: Axis) -> Option<f64> {
        self.axis(axis).map(|a| a.fitted_c)
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.axes.iter().filter_map(|a| a.verdict).reduce(Verdict::combine)
    }

    /// Flat summary with one field per axis.
    pub fn summary(&self) -> MembershipSummary {
        let f = |axis| self.axis(axis);
        MembershipSummary {
            r: self.r.get(),
            family: self.family.clone(),
            grid: self.grid.clone(),
            target_c: self.target_c,
            fitted_c_row: f(Axis::Row).map(|a| a.fitted_c),
            fitted_c_col: f(Axis::Column).map(|a| a.fitted_c),
            fitted_c_double: f(Axis::Double).map(|a| a.fitted_c),
            worst_witness: PerAxis::collect(&self.axes, |a| a.witness),
            growth_fit: PerAxis::collect(&self.axes, |a| a.growth_fit),
            truncation_flags: PerAxis::collect(&self.axes, |a| Some(a.truncated_points > 0)),
            skipped: PerAxis::collect(&self.axes, |a| Some(a.skipped)),
            verdicts: PerAxis::collect(&self.axes, |a| a.verdict),
            verdict: self.verdict(),
        }
    }

    /// Per-point detail: `m,n,axis,lhs,rhs,ratio,truncated`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["m", "n", "axis", "lhs", "rhs", "ratio", "truncated"])?;
        for p in &self.points {
            out.write_record([
                p.m.to_string(),
                p.n.to_string(),
                p.axis.to_string(),
                float::fmt(p.lhs),
                float::fmt(p.rhs),
                float::fmt(p.ratio),
                p.truncated.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerAxis<T> {
    pub row: Option<T>,
    pub col: Option<T>,
    pub double: Option<T>,
}

impl<T> PerAxis<T> {
    fn collect(axes: &[AxisResult], f: impl Fn(&AxisResult) -> Option<T>) -> Self {
        let get = |axis| axes.iter().find(|a| a.axis == axis).and_then(&f);
        PerAxis { row: get(Axis::Row), col: get(Axis::Column), double: get(Axis::Double) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipSummary {
    pub r: u32,
    pub family: MajorantFamily,
    pub grid: Vec<(u64, u64)>,
    #[serde(with = "float::option")]
    pub target_c: Option<f64>,
    #[serde(rename = "fitted_C_row", with = "float::option")]
    pub fitted_c_row: Option<f64>,
    #[serde(rename = "fitted_C_col", with = "float::option")]
    pub fitted_c_col: Option<f64>,
    #[serde(rename = "fitted_C_double", with = "float::option")]
    pub fitted_c_double: Option<f64>,
    pub worst_witness: PerAxis<PointResult>,
    pub growth_fit: PerAxis<f64>,
    pub truncation_flags: PerAxis<bool>,
    pub skipped: PerAxis<usize>,
    pub verdicts: PerAxis<Verdict>,
    pub verdict: Option<Verdict>,
}

/// All pairs `(2^a, 2^b)` with both coordinates in `[min, max]`.
pub fn dyadic_grid(min: u64, max: u64) -> Vec<(u64, u64)> {
    let pts = dyadic_points(min, max);
    pts.iter().flat_map(|&m| pts.iter().map(move |&n| (m, n))).collect()
}

/// Powers of two in `[min, max]`.
pub fn dyadic_points(min: u64, max: u64) -> Vec<u64> {
    (0..64).map(|e| 1u64 << e).filter(|&v| v >= min.max(1) && v <= max).collect()
}

/// Least-squares slope of `ln C(t)` against `ln t`, where `C(t)` is the
/// largest ratio among points with scale `<= t`. Needs three usable scales.
pub fn growth_slope(scaled_ratios: &[(u64, f64)]) -> Option<f64> {
    let mut scales: Vec<u64> = scaled_ratios.iter().map(|p| p.0).collect();
    scales.sort_unstable();
    scales.dedup();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &t in &scales {
        let c = scaled_ratios.iter().filter(|p| p.0 <= t).map(|p| p.1).fold(0.0, f64::max);
        if c > 0.0 && c.is_finite() {
            xs.push((t as f64).ln());
            ys.push(c.ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn in_domain(axis: Axis, m: u64, n: u64, lambda: u64) -> bool {
    match axis {
        Axis::Row => m >= lambda,
        Axis::Column => n >= lambda,
        Axis::Double => m >= lambda && n >= lambda,
    }
}

fn scale(axis: Axis, m: u64, n: u64) -> u64 {
    match axis {
        Axis::Row => m,
        Axis::Column => n,
        Axis::Double => m.max(n),
    }
}

/// Checks membership on every axis in `axes`. With `target_c` set each axis
/// also gets a pass / fail / inconclusive verdict.
pub fn check_membership(
    c: &CoefficientSequence,
    r: DiffOrder,
    fam: &MajorantFamily,
    grid: &[(u64, u64)],
    axes: &[Axis],
    target_c: Option<f64>,
) -> Result<MembershipReport> {
    if let Some(t) = target_c {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Param(format!("target constant must be nonnegative, got {t}")));
        }
    }
    if let Some(&(m, n)) = grid.iter().find(|p| p.0 == 0 || p.1 == 0) {
        return Err(Error::Param(format!("grid indices start at 1, got ({m}, {n})")));
    }
    let eval = MajorantEvaluator::new(c, fam)?;
    eval.prepare(grid, axes);

    let tasks: Vec<(Axis, u64, u64)> = axes
        .iter()
        .flat_map(|&axis| {
            grid.iter().filter(move |&&(m, n)| in_domain(axis, m, n, fam.lambda)).map(move |&(m, n)| (axis, m, n))
        })
        .collect();
    let points: Vec<PointResult> = tasks
        .par_iter()
        .map(|&(axis, m, n)| {
            let maj = eval.rhs(axis, m, n)?;
            let l = lhs(c, r, axis, m, n);
            Ok(PointResult {
                m,
                n,
                axis,
                lhs: l,
                rhs: maj.value,
                rhs_upper: maj.upper,
                ratio: ratio(l, maj.value),
                truncated: maj.truncation.is_truncated(),
            })
        })
        .collect::<Result<_>>()?;

    let axes_out = axes
        .iter()
        .map(|&axis| {
            let pts: Vec<&PointResult> = points.iter().filter(|p| p.axis == axis).collect();
            let mut witness: Option<PointResult> = None;
            for p in &pts {
                if witness.map_or(true, |w| p.ratio > w.ratio) {
                    witness = Some(**p);
                }
            }
            let verdict = target_c.map(|t| pts.iter().map(|p| p.verdict(t)).fold(Verdict::Pass, Verdict::combine));
            let scaled: Vec<(u64, f64)> = pts.iter().map(|p| (scale(axis, p.m, p.n), p.ratio)).collect();
            AxisResult {
                axis,
                fitted_c: witness.map_or(0.0, |w| w.ratio),
                witness,
                evaluated: pts.len(),
                skipped: grid.len() - pts.len(),
                truncated_points: pts.iter().filter(|p| p.truncated).count(),
                verdict,
                growth_fit: growth_slope(&scaled),
            }
        })
        .collect();

    Ok(MembershipReport {
        sequence: c.name().to_string(),
        r,
        family: fam.clone(),
        grid: grid.to_vec(),
        target_c,
        axes: axes_out,
        points,
    })
}

/// Majorant used by a single-index general monotone class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "beta", rename_all = "snake_case")]
pub enum Beta {
    /// `β_n = (1/n) Σ_{⌊n/λ⌋}^{⌈λn⌉} |a_k|`
    Star { lambda: u64 },
    /// User-supplied expression in `n`.
    Expr { expr: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SingleClass {
    Mvbvs { lambda: u64 },
    Sbvs { lambda: u64 },
    Sbvs2 { b: IndexMap },
    Gm { beta: Beta, r: DiffOrder },
}

impl SingleClass {
    fn min_index(&self) -> u64 {
        match self {
            SingleClass::Mvbvs { lambda } | SingleClass::Sbvs { lambda } => *lambda,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinglePoint {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(with = "float")]
    pub ratio: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleMembershipReport {
    pub sequence: String,
    pub class: SingleClass,
    pub grid: Vec<u64>,
    #[serde(rename = "fitted_C", with = "float")]
    pub fitted_c: f64,
    pub worst_witness: Option<SinglePoint>,
    pub growth_fit: Option<f64>,
    pub truncation_flag: bool,
    pub skipped: usize,
    pub points: Vec<SinglePoint>,
}

impl SingleMembershipReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "lhs", "rhs", "ratio", "truncated"])?;
        for p in &self.points {
            out.write_record([
                p.n.to_string(),
                float::fmt(p.lhs),
                float::fmt(p.rhs),
                float::fmt(p.ratio),
                p.truncated.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn abs_sum(a: &SingleSequence, lo: u64, hi: u64) -> f64 {
    (lo..=hi).map(|k| a.eval(k).norm()).collect::<Neumaier>().value()
}

fn diff_sum(a: &SingleSequence, r: DiffOrder, lo: u64, hi: u64) -> f64 {
    (lo..=hi).map(|k| delta(a, r, k).norm()).collect::<Neumaier>().value()
}

/// One-dimensional analogue of [`check_membership`].
pub fn check_single_membership(
    a: &SingleSequence,
    class: &SingleClass,
    grid: &[u64],
    horizon: u64,
) -> Result<SingleMembershipReport> {
    let one = DiffOrder::new(1)?;
    match class {
        SingleClass::Mvbvs { lambda } | SingleClass::Sbvs { lambda } if *lambda < 2 => {
            return Err(Error::Lambda(*lambda))
        }
        SingleClass::Gm { beta: Beta::Star { lambda }, .. } if *lambda < 2 => return Err(Error::Lambda(*lambda)),
        _ => {}
    }
    let beta_expr = match class {
        SingleClass::Gm { beta: Beta::Expr { expr }, .. } => Some(SingleSequence::from_expr("beta", expr)?),
        _ => None,
    };
    let usable: Vec<u64> = grid.iter().copied().filter(|&n| n >= class.min_index().max(1)).collect();
    let points: Vec<SinglePoint> = usable
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let (l, rhs, trunc) = match class {
                SingleClass::Mvbvs { lambda } => {
                    (diff_sum(a, one, n, 2 * n), abs_sum(a, (n / lambda).max(1), lambda * n) / nf, false)
                }
                SingleClass::Sbvs { lambda } => {
                    let (s, t) = single_block_sup(a, (n / lambda).max(1), horizon)?;
                    (diff_sum(a, one, n, 2 * n - 1), s / nf, t.is_truncated())
                }
                SingleClass::Sbvs2 { b } => {
                    let (s, t) = single_block_sup(a, b.eval(n), horizon)?;
                    (diff_sum(a, one, n, 2 * n - 1), s / nf, t.is_truncated())
                }
                SingleClass::Gm { beta, r } => {
                    let rhs = match beta {
                        Beta::Star { lambda } => abs_sum(a, (n / lambda).max(1), lambda * n) / nf,
                        Beta::Expr { .. } => beta_expr.as_ref().unwrap().eval(n).re,
                    };
                    (diff_sum(a, *r, n, 2 * n - 1), rhs, false)
                }
            };
            Ok(SinglePoint { n, lhs: l, rhs, ratio: ratio(l, rhs), truncated: trunc })
        })
        .collect::<Result<_>>()?;
    let witness = points.iter().copied().fold(None::<SinglePoint>, |w, p| match w {
        Some(w) if w.ratio >= p.ratio => Some(w),
        _ => Some(p),
    });
    let scaled: Vec<(u64, f64)> = points.iter().map(|p| (p.n, p.ratio)).collect();
    Ok(SingleMembershipReport {
        sequence: a.name().to_string(),
        class: class.clone(),
        grid: grid.to_vec(),
        fitted_c: witness.map_or(0.0, |w| w.ratio),
        worst_witness: witness,
        growth_fit: growth_slope(&scaled),
        truncation_flag: points.iter().any(|p| p.truncated),
        skipped: grid.len() - usable.len(),
        points,
    })
}

/// `max_{j+k=s} jk |c_jk|` over the anti-diagonal.
pub fn antidiagonal_max(c: &CoefficientSequence, s: u64) -> f64 {
    (1..s).map(|j| (j * (s - j)) as f64 * c.eval(j, s - j).norm()).fold(0.0, f64::max)
}

/// Anti-diagonal decay `max_{j+k=s} jk |c_jk|` measured along `schedule` (default `4, 8, ..., S`).
pub fn check_condition_22(
    c: &CoefficientSequence,
    horizon: u64,
    schedule: Option<&[u64]>,
    rules: TailRules,
) -> Result<TailReport> {
    if horizon < 4 {
        return Err(Error::Param(format!("anti-diagonal horizon must be at least 4, got {horizon}")));
    }
    rules.validate()?;
    let schedule = match schedule {
        Some(s) => {
            if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) || s[0] < 2 || *s.last().unwrap() > horizon {
                return Err(Error::Param("anti-diagonal schedule must be strictly increasing within [2, S]".into()));
            }
            s.to_vec()
        }
        None => dyadic_schedule(4, horizon),
    };
    let values: Vec<f64> = schedule.par_iter().map(|&s| antidiagonal_max(c, s)).collect();
    let bounded = vec![true; values.len()];
    Ok(TailReport::new(schedule, values, bounded, rules))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::tail::TailVerdict;
    use crate::majorants::Family;
    use crate::sequences::Preset;

    fn oscillating() -> CoefficientSequence {
        Preset::OscillatingQuadratic.build().unwrap()
    }

    #[test]
    fn lhs_of_constant_vanishes() {
        let c = CoefficientSequence::real("one", |_, _| 1.0);
        for axis in Axis::ALL {
            for r in 1..4 {
                assert_eq!(lhs(&c, DiffOrder::new(r).unwrap(), axis, 5, 7), 0.0);
            }
        }
    }

    #[test]
    fn separable_double_lhs_matches_generic() {
        let c = oscillating();
        let g = c.clone().without_separable();
        let r = DiffOrder::new(3).unwrap();
        let a = lhs(&c, r, Axis::Double, 6, 9);
        let b = lhs(&g, r, Axis::Double, 6, 9);
        assert!((a - b).abs() <= 1e-13 * b);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(ratio(1.0, 4.0), 0.25);
    }

    #[test]
    fn oscillating_r2_family_three_constants() {
        let fam = MajorantFamily::new(Family::Three).with_horizon(1 << 12);
        let grid = dyadic_grid(2, 256);
        let rep =
            check_membership(&oscillating(), DiffOrder::new(2).unwrap(), &fam, &grid, &Axis::ALL, Some(16.0)).unwrap();
        let row = rep.axis(Axis::Row).unwrap().fitted_c;
        let dbl = rep.axis(Axis::Double).unwrap().fitted_c;
        assert!(row <= 4.0 && row > 2.9, "{row}");
        assert!(dbl <= 16.0 && dbl > 2.1, "{dbl}");
        assert_eq!(rep.verdict(), Some(Verdict::Pass));
    }

    #[test]
    fn domain_points_are_skipped() {
        let fam = MajorantFamily::new(Family::One).with_lambda(4);
        let grid = vec![(2, 8), (8, 2), (8, 8)];
        let rep = check_membership(&oscillating(), DiffOrder::new(1).unwrap(), &fam, &grid, &Axis::ALL, None).unwrap();
        assert_eq!(rep.axis(Axis::Row).unwrap().skipped, 1);
        assert_eq!(rep.axis(Axis::Column).unwrap().skipped, 1);
        assert_eq!(rep.axis(Axis::Double).unwrap().skipped, 2);
    }

    #[test]
    fn condition_22_examples() {
        let rep = check_condition_22(&oscillating(), 1024, None, TailRules::default()).unwrap();
        assert_eq!(rep.verdict, TailVerdict::Decaying);
        for (s, v) in rep.schedule.iter().zip(&rep.values) {
            assert!(*v <= 9.0 / (*s as f64 - 1.0));
        }
        assert_eq!(rep.values[0], 2.25);

        let pp = Preset::ProductPower { p: 1.0, q: 1.0 }.build().unwrap();
        let rep = check_condition_22(&pp, 1024, None, TailRules::default()).unwrap();
        assert_ne!(rep.verdict, TailVerdict::Decaying);
        assert!(rep.values.iter().all(|v| (v - 1.0).abs() <= 1e-12));

        let rep = check_condition_22(&Preset::Zero.build().unwrap(), 64, None, TailRules::default()).unwrap();
        assert_eq!(rep.verdict, TailVerdict::Decaying);
        assert!(check_condition_22(&pp, 3, None, TailRules::default()).is_err());
    }

    #[test]
    fn single_classes() {
        let grid = dyadic_points(2, 1024);
        let alt = SingleSequence::real("alt", |k| if k % 2 == 0 { 1.0 } else { -1.0 });
        let class = SingleClass::Gm { beta: Beta::Star { lambda: 2 }, r: DiffOrder::new(2).unwrap() };
        let rep = check_single_membership(&alt, &class, &grid, 1 << 12).unwrap();
        assert_eq!(rep.fitted_c, 0.0);

        let sq = SingleSequence::power(2.0);
        let rep = check_single_membership(&sq, &SingleClass::Mvbvs { lambda: 2 }, &grid, 1 << 12).unwrap();
        assert!(rep.fitted_c.is_finite() && rep.fitted_c > 0.0);
    }
}
