//! Randomised and grid checks of the algebraic identities the evaluators rely
//! on: summation by parts in one and two variables, and the splitting of
//! step-2 differences into step-1 differences.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::differences::{delta, delta_0r, delta_r0, delta_rr, DiffOrder};
use crate::error::Result;
use crate::kernels::{rect_sum_direct, rect_sum_parts, row_sum_by_parts, row_sum_direct, Rect};
use crate::report::float;
use crate::sequences::{CoefficientSequence, SingleSequence};

/// Random abscissae keep `|sin(r x / 2)|` at least this far from zero.
pub const SINGULAR_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    pub seed: u64,
    pub cases_1d: usize,
    pub max_len_1d: u64,
    pub cases_2d: usize,
    pub table_2d: u64,
    /// Side of the grid for the difference decompositions.
    pub diff_grid: u64,
    pub parts_tolerance: f64,
    /// Allowed error in units of `eps * scale`.
    pub diff_ulps: f64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            cases_1d: 1000,
            max_len_1d: 64,
            cases_2d: 200,
            table_2d: 30,
            diff_grid: 200,
            parts_tolerance: 1e-9,
            diff_ulps: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    /// Largest normalised error over all cases.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub witness: String,
}

impl IdentityCheck {
    fn from_errors(name: &str, tolerance: f64, errs: Vec<(f64, String)>) -> Self {
        let cases = errs.len();
        let (worst, witness) =
            errs.into_iter()
                .fold((-1.0f64, String::new()), |acc, (e, w)| if e > acc.0 || e.is_nan() { (e, w) } else { acc });
        let worst = if worst < 0.0 { 0.0 } else { worst };
        Self { name: name.into(), cases, worst, tolerance, passed: worst <= tolerance, witness }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub config: IdentityConfig,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Columns `name,cases,worst,tolerance,passed,witness`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "cases", "worst", "tolerance", "passed", "witness"])?;
        for c in &self.checks {
            out.write_record([
                c.name.clone(),
                c.cases.to_string(),
                float::fmt(c.worst),
                float::fmt(c.tolerance),
                c.passed.to_string(),
                c.witness.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn admissible_x(rng: &mut ChaCha8Rng, r: u32) -> f64 {
    loop {
        let x: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        if x > 0.0 && (r as f64 * x / 2.0).sin().abs() >= SINGULAR_BAND {
            return x;
        }
    }
}

fn table_sequence(values: Vec<Complex64>) -> SingleSequence {
    let values = Arc::new(values);
    SingleSequence::new("table", move |k| values.get(k as usize - 1).copied().unwrap_or_default())
}

struct Case1d {
    a: SingleSequence,
    n: u64,
    m: u64,
    r: DiffOrder,
    x: f64,
}

/// Parts against direct for random complex rows, error measured as
/// `|parts - direct| / (1 + |direct|)`.
pub fn by_parts_1d(seed: u64, cases: usize, max_len: u64, tolerance: f64) -> IdentityCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<Case1d> = (0..cases)
        .map(|_| {
            let r = DiffOrder::new(rng.gen_range(1..=3)).unwrap();
            let len = rng.gen_range(1..=max_len);
            let n = rng.gen_range(1..=max_len);
            let m = n + len - 1;
            let values = (0..m + r.as_u64()).map(|_| random_complex(&mut rng)).collect();
            let x = admissible_x(&mut rng, r.get());
            Case1d { a: table_sequence(values), n, m, r, x }
        })
        .collect();
    let errs = cases
        .par_iter()
        .map(|c| {
            let direct = row_sum_direct(&c.a, c.n, c.m, c.x);
            let parts = row_sum_by_parts(&c.a, c.n, c.m, c.r, c.x).expect("abscissa is admissible");
            let e = (parts - direct).norm() / (1.0 + direct.norm());
            (e, format!("n={} m={} r={} x={:?}", c.n, c.m, c.r, c.x))
        })
        .collect();
    IdentityCheck::from_errors("by_parts_1d", tolerance, errs)
}

struct Case2d {
    c: CoefficientSequence,
    rect: Rect,
    r: DiffOrder,
    x: f64,
    y: f64,
}

/// The nine-term expansion against the direct double sum on random
/// `size x size` complex tables.
pub fn by_parts_2d(seed: u64, cases: usize, size: u64, tolerance: f64) -> IdentityCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<Case2d> = (0..cases)
        .map(|_| {
            let rows = (0..size).map(|_| (0..size).map(|_| random_complex(&mut rng)).collect()).collect();
            let r = DiffOrder::new(rng.gen_range(1..=3)).unwrap();
            let (m, n) = (rng.gen_range(1..=size), rng.gen_range(1..=size));
            let rect = Rect::new(m, rng.gen_range(m..=size), n, rng.gen_range(n..=size)).unwrap();
            let x = admissible_x(&mut rng, r.get());
            let y = admissible_x(&mut rng, r.get());
            Case2d { c: CoefficientSequence::from_table("table", rows), rect, r, x, y }
        })
        .collect();
    let errs = cases
        .par_iter()
        .map(|c| {
            let direct = rect_sum_direct(&c.c, c.rect, c.x, c.y);
            let parts = rect_sum_parts(&c.c, c.rect, c.x, c.y, c.r).expect("abscissae are admissible");
            let e = (parts - direct).norm() / (1.0 + direct.norm());
            let rect = c.rect;
            (
                e,
                format!(
                    "rect=({}..{})x({}..{}) r={} x={:?} y={:?}",
                    rect.m, rect.m_end, rect.n, rect.n_end, c.r, c.x, c.y
                ),
            )
        })
        .collect();
    IdentityCheck::from_errors("by_parts_2d", tolerance, errs)
}

/// Sum of `|c|` over the `(r+1) x (r+1)` stencil at `(j, k)`.
fn stencil_scale(c: &CoefficientSequence, j: u64, k: u64, rj: u64, rk: u64) -> f64 {
    let mut s = 0.0;
    for a in 0..=rj {
        for b in 0..=rk {
            s += c.eval(j + a, k + b).norm();
        }
    }
    s
}

fn ulps(err: f64, scale: f64) -> f64 {
    if err == 0.0 {
        0.0
    } else {
        err / (f64::EPSILON * scale)
    }
}

/// `Δ22 = Δ11 + Δ11(j+1) + Δ11(k+1) + Δ11(j+1, k+1)`,
/// `Δ20 = Δ10 + Δ10(j+1)`, `Δ02 = Δ01 + Δ01(k+1)` and the single-index
/// `Δ2 = Δ1 + Δ1(k+1)` on `[1, size]^2`, errors in units of `eps * scale`.
pub fn difference_decompositions(c: &CoefficientSequence, size: u64, max_ulps: f64) -> Vec<IdentityCheck> {
    let (one, two) = (DiffOrder::new(1).unwrap(), DiffOrder::new(2).unwrap());
    let rows: Vec<[(f64, String); 3]> = (1..=size)
        .into_par_iter()
        .flat_map_iter(|j| {
            (1..=size).map(move |k| {
                let at = format!("{}: ({j}, {k})", c.name());
                let d22 = delta_rr(c, two, j, k);
                let split22 = delta_rr(c, one, j, k)
                    + delta_rr(c, one, j + 1, k)
                    + delta_rr(c, one, j, k + 1)
                    + delta_rr(c, one, j + 1, k + 1);
                let d20 = delta_r0(c, two, j, k);
                let split20 = delta_r0(c, one, j, k) + delta_r0(c, one, j + 1, k);
                let d02 = delta_0r(c, two, j, k);
                let split02 = delta_0r(c, one, j, k) + delta_0r(c, one, j, k + 1);
                [
                    (ulps((d22 - split22).norm(), stencil_scale(c, j, k, 2, 2)), at.clone()),
                    (ulps((d20 - split20).norm(), stencil_scale(c, j, k, 2, 0)), at.clone()),
                    (ulps((d02 - split02).norm(), stencil_scale(c, j, k, 0, 2)), at),
                ]
            })
        })
        .collect();
    let column = |i: usize| rows.iter().map(|r| r[i].clone()).collect::<Vec<_>>();
    let mut out = vec![
        IdentityCheck::from_errors(&format!("delta22_split/{}", c.name()), max_ulps, column(0)),
        IdentityCheck::from_errors(&format!("delta20_split/{}", c.name()), max_ulps, column(1)),
        IdentityCheck::from_errors(&format!("delta02_split/{}", c.name()), max_ulps, column(2)),
    ];
    if let Some((a, _)) = c.separable_parts() {
        let errs = (1..=size)
            .map(|k| {
                let e = (delta(a, two, k) - (delta(a, one, k) + delta(a, one, k + 1))).norm();
                let scale = (0..=2).map(|i| a.eval(k + i).norm()).sum::<f64>();
                (ulps(e, scale), format!("{}: {k}", a.name()))
            })
            .collect();
        out.push(IdentityCheck::from_errors(&format!("delta2_split/{}", a.name()), max_ulps, errs));
    }
    out
}

/// A dense random real table, for decompositions on a non-separable input.
pub fn random_table(seed: u64, size: u64) -> CoefficientSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..size).map(|_| (0..size).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect()).collect();
    CoefficientSequence::from_table("random_table", rows)
}

/// Runs every identity check. Decompositions use the given sequences plus a
/// random table covering the grid and its stencil.
pub fn verify_identities(cfg: &IdentityConfig, sequences: &[CoefficientSequence]) -> Result<IdentityReport> {
    let mut checks = vec![
        by_parts_1d(cfg.seed, cfg.cases_1d, cfg.max_len_1d, cfg.parts_tolerance),
        by_parts_2d(cfg.seed.wrapping_add(1), cfg.cases_2d, cfg.table_2d, cfg.parts_tolerance),
    ];
    let table = random_table(cfg.seed.wrapping_add(2), cfg.diff_grid + 2);
    for c in sequences.iter().chain(std::iter::once(&table)) {
        checks.extend(difference_decompositions(c, cfg.diff_grid, cfg.diff_ulps));
    }
    Ok(IdentityReport { config: cfg.clone(), checks })
}
