//! Finite-horizon measurements of the tail quantities that have to vanish
//! for uniform convergence, and the pointwise coefficient estimate.

use serde::{Deserialize, Serialize};

use crate::differences::{delta, delta_0r, delta_r0, delta_rr, DiffOrder};
use crate::error::{Error, Result};
use crate::majorants::{Family, IndexMap, MajorantEvaluator, MajorantFamily};
use crate::report::float;
use crate::sequences::CoefficientSequence;
use crate::summation::Neumaier;

/// A truncated measurement. `upper` is a rigorous bound on the untruncated
/// quantity when the sequence's decay hint allows one; otherwise the value
/// is measured, not bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    #[serde(with = "float::option")]
    pub upper: Option<f64>,
    pub horizon: u64,
}

impl Measured {
    pub fn bounded(&self) -> bool {
        self.upper.is_some()
    }
}

fn two() -> DiffOrder {
    DiffOrder::new(2).unwrap()
}

/// `Σ_{j >= m} j^(-p) <= m^(-p) + m^(1-p) / (p - 1)` for `p > 1`.
fn power_tail_from(p: f64, m: u64) -> f64 {
    let m = m as f64;
    m.powf(-p) + m.powf(1.0 - p) / (p - 1.0)
}

/// `Σ_{j > h} j^(-p) <= h^(1-p) / (p - 1)` for `p > 1`.
fn power_tail_after(p: f64, h: u64) -> f64 {
    (h as f64).powf(1.0 - p) / (p - 1.0)
}

fn check_horizon(horizon: u64, start: u64) -> Result<()> {
    if horizon < start {
        return Err(Error::HorizonBelowScanStart { horizon, start });
    }
    Ok(())
}

/// `mn Σ_{j>=m} Σ_{k>=n} |Δ22 c_jk|`, both sums cut at `horizon`.
pub fn lemma1_quantity(c: &CoefficientSequence, m: u64, n: u64, horizon: u64) -> Result<Measured> {
    if m == 0 || n == 0 {
        return Err(Error::Param("indices start at 1".into()));
    }
    check_horizon(horizon, m.max(n))?;
    let r = two();
    let (mf, nf) = (m as f64, n as f64);
    let sum = if let Some((a, b)) = c.separable_parts() {
        let sa: Neumaier = (m..=horizon).map(|j| delta(a, r, j).norm()).collect();
        let sb: Neumaier = (n..=horizon).map(|k| delta(b, r, k).norm()).collect();
        sa.value() * sb.value()
    } else {
        let mut acc = Neumaier::new();
        for j in m..=horizon {
            for k in n..=horizon {
                acc.add(delta_rr(c, r, j, k).norm());
            }
        }
        acc.value()
    };
    let value = mf * nf * sum;
    // |Δ22 c_jk| <= 4K j^-p k^-q; the cut-off region is {j > H} ∪ {k > H}
    let upper = c.decay_hint().filter(|h| h.p > 1.0 && h.q > 1.0).map(|h| {
        let tail = power_tail_after(h.p, horizon) * power_tail_from(h.q, n)
            + power_tail_from(h.p, m) * power_tail_after(h.q, horizon);
        value + mf * nf * 4.0 * h.constant * tail
    });
    Ok(Measured { value, upper, horizon })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Values {
    /// `m sup_{k>=n} k Σ_{j>=m} |Δ20 c_jk|`
    pub row: Measured,
    /// `n sup_{j>=m} j Σ_{k>=n} |Δ02 c_jk|`
    pub col: Measured,
}

/// Both quantities with sups cut at `sup_horizon` and sums at `sum_horizon`.
pub fn lemma2_quantities(
    c: &CoefficientSequence,
    m: u64,
    n: u64,
    sup_horizon: u64,
    sum_horizon: u64,
) -> Result<Lemma2Values> {
    if m == 0 || n == 0 {
        return Err(Error::Param("indices start at 1".into()));
    }
    check_horizon(sup_horizon, m.max(n))?;
    check_horizon(sum_horizon, m.max(n))?;
    let r = two();
    let hint = c.decay_hint();

    // sup over `outer` of outer * Σ_inner |Δ c|, for one orientation
    let side = |lead: u64, from: u64, transposed: bool, p: f64, q: f64| -> Measured {
        let scanned = if let Some((a, b)) = c.separable_parts() {
            let (sum_seq, sup_seq) = if transposed { (b, a) } else { (a, b) };
            let s: Neumaier = (lead..=sum_horizon).map(|i| delta(sum_seq, r, i).norm()).collect();
            let sup = (from..=sup_horizon).map(|o| o as f64 * sup_seq.eval(o).norm()).fold(0.0, f64::max);
            s.value() * sup
        } else {
            (from..=sup_horizon)
                .map(|o| {
                    let s: Neumaier = (lead..=sum_horizon)
                        .map(|i| if transposed { delta_0r(c, r, o, i) } else { delta_r0(c, r, i, o) }.norm())
                        .collect();
                    o as f64 * s.value()
                })
                .fold(0.0, f64::max)
        };
        let lf = lead as f64;
        let upper = hint.filter(|_| p > 1.0 && q >= 1.0).map(|h| {
            let k2 = 2.0 * h.constant;
            let inside = scanned + k2 * (from as f64).powf(1.0 - q) * power_tail_after(p, sum_horizon);
            let outside = k2 * ((sup_horizon + 1) as f64).powf(1.0 - q) * power_tail_from(p, lead);
            lf * inside.max(outside)
        });
        Measured { value: lf * scanned, upper, horizon: sum_horizon.min(sup_horizon) }
    };
    let (p, q) = hint.map_or((0.0, 0.0), |h| (h.p, h.q));
    Ok(Lemma2Values { row: side(m, n, false, p, q), col: side(n, m, true, q, p) })
}

/// Constants entering the pointwise estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Params {
    pub constant: f64,
    pub lambda: u64,
    pub b1: IndexMap,
    pub b2: IndexMap,
    pub b3: IndexMap,
}

impl Lemma3Params {
    pub fn from_family(fam: &MajorantFamily, constant: f64) -> Self {
        Self { constant, lambda: fam.lambda, b1: fam.b1.clone(), b2: fam.b2.clone(), b3: fam.b3.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Result {
    pub m: u64,
    pub n: u64,
    /// `mn c_mn`
    pub lhs: f64,
    /// `C sup_{M+N >= b3(m+n)} Σ_{M}^{2M} Σ_{N}^{2N} c_jk` (scanned)
    pub sup_term: f64,
    pub row_block: f64,
    pub col_block: f64,
    pub corner_block: f64,
    pub rhs: f64,
    pub slack: f64,
    pub sup_truncated: bool,
}

fn block_sum(c: &CoefficientSequence, j0: u64, j1: u64, k0: u64, k1: u64) -> Result<f64> {
    let mut acc = Neumaier::new();
    for j in j0..=j1 {
        for k in k0..=k1 {
            let v = c.eval(j, k);
            if v.im != 0.0 || v.re < 0.0 {
                return Err(Error::Negative { j, k });
            }
            acc.add(v.re);
        }
    }
    Ok(acc.value())
}

/// Right side minus left side of
/// `mn c_mn <= C sup(...) + 2C Σ_{b1(m)}^{2λ b1(m)} Σ_{n}^{2n+1} c
///   + 2C Σ_{m}^{2m+1} Σ_{b2(n)}^{2λ b2(n)} c + 8 Σ_{m}^{2m+1} Σ_{n}^{2n+1} c`.
///
/// The sup is scanned up to `sup_horizon`; a truncated sup only lowers the
/// right side, so a nonnegative slack stays valid.
pub fn lemma3_check(
    c: &CoefficientSequence,
    params: &Lemma3Params,
    m: u64,
    n: u64,
    sup_horizon: u64,
) -> Result<Lemma3Result> {
    let lam = params.lambda;
    if lam < 2 {
        return Err(Error::Lambda(lam));
    }
    if m < lam {
        return Err(Error::Domain { index: m, min: lam });
    }
    if n < lam {
        return Err(Error::Domain { index: n, min: lam });
    }
    let cst = params.constant;
    let lhs_v = block_sum(c, m, m, n, n)? * m as f64 * n as f64;
    let b1 = params.b1.eval(m);
    let b2 = params.b2.eval(n);
    let row_block = 2.0 * cst * block_sum(c, b1, 2 * lam * b1, n, 2 * n + 1)?;
    let col_block = 2.0 * cst * block_sum(c, m, 2 * m + 1, b2, 2 * lam * b2)?;
    let corner_block = 8.0 * block_sum(c, m, 2 * m + 1, n, 2 * n + 1)?;

    let mut fam = MajorantFamily::new(Family::Two).with_lambda(lam).with_horizon(sup_horizon);
    fam.b1 = params.b1.clone();
    fam.b2 = params.b2.clone();
    fam.b3 = params.b3.clone();
    let eval = MajorantEvaluator::new(c, &fam)?;
    if let Some((j, k)) = eval.scan_is_nonnegative() {
        return Err(Error::Negative { j, k });
    }
    let (scanned, tail) = eval.double_block_sup(params.b3.eval(m + n))?;
    let sup_term = cst * scanned;
    let rhs = sup_term + row_block + col_block + corner_block;
    Ok(Lemma3Result {
        m,
        n,
        lhs: lhs_v,
        sup_term,
        row_block,
        col_block,
        corner_block,
        rhs,
        slack: rhs - lhs_v,
        sup_truncated: tail.map_or(true, |t| t > scanned),
    })
}
