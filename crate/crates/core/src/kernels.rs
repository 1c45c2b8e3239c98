//! Conjugate Dirichlet kernels, summation by parts and rectangular partial
//! sums of double sine series.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::differences::{delta, delta_mixed, DiffOrder};
use crate::error::{Error, Result};
use crate::sequences::{CoefficientSequence, SingleSequence};
use crate::summation::{ComplexNeumaier, Neumaier};

/// Points with `|sin(r x / 2)|` below this are treated as kernel poles.
pub const SINGULARITY_FLOOR: f64 = 1e-12;

/// Below this many terms `rect_sum_direct` stays on the calling thread.
const PAR_THRESHOLD: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub k: u64,
    pub r: i64,
    pub x: f64,
}

fn check_admissible(x: f64, r: i64) -> Result<f64> {
    if r == 0 {
        return Err(Error::Param("kernel order r must be nonzero".into()));
    }
    let s = (r as f64 * x / 2.0).sin();
    if s.abs() < SINGULARITY_FLOOR || !s.is_finite() {
        let ra = r.unsigned_abs() as f64;
        let l = (x * ra / (2.0 * PI)).round() as i64;
        return Err(Error::Singular { x, r, l, nearest: 2.0 * l as f64 * PI / ra, floor: SINGULARITY_FLOOR });
    }
    Ok(s)
}

/// `D̃_{k,r}(x) = cos((k + r/2) x) / (2 sin(r x / 2))`, for any nonzero `r`.
pub fn dirichlet_conj(p: KernelPoint) -> Result<f64> {
    let s = check_admissible(p.x, p.r)?;
    Ok(kernel_unchecked(p.k, p.r, p.x, s))
}

#[inline]
fn kernel_unchecked(k: u64, r: i64, x: f64, sin_half: f64) -> f64 {
    ((k as f64 + r as f64 / 2.0) * x).cos() / (2.0 * sin_half)
}

/// Kernel values for `k` in `lo..=hi`.
fn kernel_table(lo: u64, hi: u64, r: i64, x: f64) -> Result<Vec<f64>> {
    let s = check_admissible(x, r)?;
    Ok((lo..=hi).map(|k| kernel_unchecked(k, r, x, s)).collect())
}

/// `Σ_{k=n}^{m} a_k sin(k x)`, compensated.
pub fn row_sum_direct(a: &SingleSequence, n: u64, m: u64, x: f64) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    for k in n..=m {
        acc.add(a.eval(k) * (k as f64 * x).sin());
    }
    acc.value()
}

/// The same sum through the order-`r` summation-by-parts identity:
///
/// `Σ_{n}^{m} a_k sin kx = -Σ_{n}^{m} Δ_r a_k D̃_{k,r}
///   + Σ_{m+1}^{m+r} a_k D̃_{k,-r} - Σ_{n}^{n+r-1} a_k D̃_{k,-r}`.
pub fn row_sum_by_parts(a: &SingleSequence, n: u64, m: u64, r: DiffOrder, x: f64) -> Result<Complex64> {
    if n == 0 || m < n {
        return Err(Error::Rect(format!("need 1 <= n <= m, got n = {n}, m = {m}")));
    }
    let ri = r.get() as i64;
    let ru = r.as_u64();
    let plus = kernel_table(n, m, ri, x)?;
    let minus = kernel_table(n, m + ru, -ri, x)?;
    let mut acc = ComplexNeumaier::new();
    for k in n..=m {
        acc.add(-delta(a, r, k) * plus[(k - n) as usize]);
    }
    for k in m + 1..=m + ru {
        acc.add(a.eval(k) * minus[(k - n) as usize]);
    }
    for k in n..n + ru {
        acc.add(-a.eval(k) * minus[(k - n) as usize]);
    }
    Ok(acc.value())
}

/// Index rectangle `[m, m_end] x [n, n_end]`, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub m: u64,
    pub m_end: u64,
    pub n: u64,
    pub n_end: u64,
}

impl Rect {
    pub fn new(m: u64, m_end: u64, n: u64, n_end: u64) -> Result<Self> {
        if m == 0 || n == 0 || m_end < m || n_end < n {
            return Err(Error::Rect(format!("need 1 <= m <= M and 1 <= n <= N, got [{m}, {m_end}] x [{n}, {n_end}]")));
        }
        Ok(Self { m, m_end, n, n_end })
    }

    pub fn rows(&self) -> u64 {
        self.m_end - self.m + 1
    }

    pub fn cols(&self) -> u64 {
        self.n_end - self.n + 1
    }
}

/// `Σ_{j=m}^{M} Σ_{k=n}^{N} c_jk sin(jx) sin(ky)` by direct summation.
///
/// Each row is summed with a compensated accumulator; rows may run in
/// parallel and are folded in index order.
pub fn rect_sum_direct(c: &CoefficientSequence, rect: Rect, x: f64, y: f64) -> Complex64 {
    if x == 0.0 || y == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let sx: Vec<f64> = (rect.m..=rect.m_end).map(|j| (j as f64 * x).sin()).collect();
    let sy: Vec<f64> = (rect.n..=rect.n_end).map(|k| (k as f64 * y).sin()).collect();

    let rows: Vec<ComplexNeumaier> = if let Some((a, b)) = c.separable_parts() {
        // u_j v_k with u_j = a_j sin jx, v_k = b_k sin ky
        let u: Vec<Complex64> = (rect.m..=rect.m_end).zip(&sx).map(|(j, s)| a.eval(j) * *s).collect();
        let v: Vec<Complex64> = (rect.n..=rect.n_end).zip(&sy).map(|(k, s)| b.eval(k) * *s).collect();
        if u.iter().chain(&v).all(|z| z.im == 0.0) {
            let vr: Vec<f64> = v.iter().map(|z| z.re).collect();
            let row = |uj: &Complex64| {
                let mut acc = Neumaier::new();
                for vk in &vr {
                    acc.add(uj.re * vk);
                }
                let (s, e) = acc.parts();
                let mut out = ComplexNeumaier::new();
                out.add(Complex64::new(s, 0.0));
                out.add(Complex64::new(e, 0.0));
                out
            };
            map_rows(&u, rect, row)
        } else {
            map_rows(&u, rect, |uj| v.iter().map(|vk| uj * vk).collect())
        }
    } else {
        let js: Vec<u64> = (rect.m..=rect.m_end).collect();
        map_rows(&js, rect, |&j| {
            let sj = sx[(j - rect.m) as usize];
            (rect.n..=rect.n_end).zip(&sy).map(|(k, s)| c.eval(j, k) * sj * *s).collect()
        })
    };

    let mut total = ComplexNeumaier::new();
    for r in &rows {
        total.merge(r);
    }
    total.value()
}

fn map_rows<T: Sync>(items: &[T], rect: Rect, f: impl Fn(&T) -> ComplexNeumaier + Sync) -> Vec<ComplexNeumaier> {
    if rect.rows().saturating_mul(rect.cols()) >= PAR_THRESHOLD {
        items.par_iter().map(&f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// The same rectangle sum through the two-dimensional by-parts expansion:
/// the one-dimensional identity applied in `j` and then in `k`, which gives
/// nine double sums of differenced coefficients against kernel products.
pub fn rect_sum_parts(c: &CoefficientSequence, rect: Rect, x: f64, y: f64, r: DiffOrder) -> Result<Complex64> {
    let ri = r.get() as i64;
    let ru = r.as_u64();
    let (m, mm, n, nn) = (rect.m, rect.m_end, rect.n, rect.n_end);
    let dx_plus = kernel_table(m, mm, ri, x)?;
    let dx_minus = kernel_table(m, mm + ru, -ri, x)?;
    let dy_plus = kernel_table(n, nn, ri, y)?;
    let dy_minus = kernel_table(n, nn + ru, -ri, y)?;

    // one of the three terms of the one-dimensional identity
    struct Piece<'a> {
        sign: f64,
        lo: u64,
        hi: u64,
        order: u32,
        table: &'a [f64],
        base: u64,
    }
    let xs = [
        Piece { sign: -1.0, lo: m, hi: mm, order: r.get(), table: &dx_plus, base: m },
        Piece { sign: 1.0, lo: mm + 1, hi: mm + ru, order: 0, table: &dx_minus, base: m },
        Piece { sign: -1.0, lo: m, hi: m + ru - 1, order: 0, table: &dx_minus, base: m },
    ];
    let ys = [
        Piece { sign: -1.0, lo: n, hi: nn, order: r.get(), table: &dy_plus, base: n },
        Piece { sign: 1.0, lo: nn + 1, hi: nn + ru, order: 0, table: &dy_minus, base: n },
        Piece { sign: -1.0, lo: n, hi: n + ru - 1, order: 0, table: &dy_minus, base: n },
    ];

    let mut total = ComplexNeumaier::new();
    for px in &xs {
        for py in &ys {
            let mut acc = ComplexNeumaier::new();
            for j in px.lo..=px.hi {
                let kx = px.table[(j - px.base) as usize];
                for k in py.lo..=py.hi {
                    let ky = py.table[(k - py.base) as usize];
                    acc.add(delta_mixed(c, px.order, py.order, j, k) * (kx * ky));
                }
            }
            total.add(acc.value() * (px.sign * py.sign));
        }
    }
    Ok(total.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub r: u32,
    pub k_max: u64,
    pub points_checked: u64,
    /// Smallest `bound - |D̃|` over the grid.
    pub worst_slack: f64,
    pub worst_x: f64,
    pub worst_k: u64,
    pub violations: u64,
}

/// Default grid: `per_half` points on `(0, π/2]` and `per_half` on `[π/2, π)`.
pub fn kernel_grid(per_half: usize) -> Vec<f64> {
    let h = PI / 2.0;
    let step = |i: usize| h * i as f64 / per_half as f64;
    let mut xs: Vec<f64> = (1..=per_half).map(step).collect();
    // π/2 is already in; mirror the rest
    xs.extend((1..per_half).rev().map(|i| PI - step(i)));
    xs
}

/// Checks `|D̃_{k,2}(x)| <= π / (4x)` on `(0, π/2]` and `<= π / (4(π - x))`
/// on `[π/2, π)` for `0 <= k <= k_max`.
pub fn kernel_bound_check(r: u32, x_grid: &[f64], k_max: u64) -> Result<KernelBoundReport> {
    if r != 2 {
        return Err(Error::KernelBoundOrder(r));
    }
    for &x in x_grid {
        if !(x > 0.0 && x < PI) {
            return Err(Error::Param(format!("kernel grid point {x} outside (0, pi)")));
        }
    }
    let per_x: Vec<(f64, u64, u64)> = x_grid
        .par_iter()
        .map(|&x| {
            let bound = if x <= PI / 2.0 { PI / (4.0 * x) } else { PI / (4.0 * (PI - x)) };
            let s = (x).sin();
            let mut worst = (f64::INFINITY, 0u64);
            let mut bad = 0u64;
            for k in 0..=k_max {
                let d = kernel_unchecked(k, 2, x, s).abs();
                let slack = bound - d;
                if slack < worst.0 {
                    worst = (slack, k);
                }
                if slack < -1e-12 * bound {
                    bad += 1;
                }
            }
            (worst.0, worst.1, bad)
        })
        .collect();

    let mut report = KernelBoundReport {
        r,
        k_max,
        points_checked: x_grid.len() as u64 * (k_max + 1),
        worst_slack: f64::INFINITY,
        worst_x: f64::NAN,
        worst_k: 0,
        violations: 0,
    };
    for (&x, &(slack, k, bad)) in x_grid.iter().zip(&per_x) {
        report.violations += bad;
        if slack < report.worst_slack {
            report.worst_slack = slack;
            report.worst_x = x;
            report.worst_k = k;
        }
    }
    Ok(report)
}
