//! Search for the threshold `η(ε)` beyond which the four smallness
//! conditions of the uniform estimate hold:
//!
//! * `mn |c_mn| < ε`
//! * `mn Σ_{j>=m} Σ_{k>=n} |Δ22 c_jk| < 16Cε`
//! * `m Σ_{j>=m} sup_{k>=n} k |Δ20 c_jk| < 4Cε`
//! * `n Σ_{k>=n} sup_{j>=m} j |Δ02 c_jk| < 4Cε`
//!
//! Tails are cut at a fixed horizon, and "for all m, n > η" is checked on a
//! window right above η plus a geometric sample up to `verify_max`.

use serde::{Deserialize, Serialize};

use crate::differences::{delta, delta_0r, delta_r0, delta_rr, DiffOrder};
use crate::error::{Error, Result};
use crate::sequences::CoefficientSequence;
use crate::summation::Neumaier;

/// Non-separable sequences use full tables, so their horizon is capped.
pub const DENSE_ETA_HORIZON_CAP: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaConfig {
    pub lambda: u64,
    /// Class constant `C` from the membership fit.
    pub constant: f64,
    /// Largest η tried.
    pub cap: u64,
    /// Largest index in the verification set.
    pub verify_max: u64,
    /// Number of consecutive indices checked right above η.
    pub window: u64,
    /// Truncation of the infinite sums and sups.
    pub horizon: u64,
}

impl Default for EtaConfig {
    fn default() -> Self {
        Self { lambda: 2, constant: 1.0, cap: 1 << 14, verify_max: 1 << 15, window: 32, horizon: 1 << 17 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaResult {
    pub eta: u64,
    pub epsilon: f64,
    pub constant: f64,
    /// `[ε, 16Cε, 4Cε, 4Cε]`
    pub thresholds: [f64; 4],
    /// Largest value of each condition over the verification set at η.
    pub worst: [f64; 4],
    pub worst_at: [(u64, u64); 4],
    /// Number of (m, n) pairs checked at η.
    pub pairs_checked: u64,
    pub horizon: u64,
}

/// Tables of the four condition values indexed by `m` and `n` (1-based).
enum Tables {
    Separable {
        abs_a: Vec<f64>,
        abs_b: Vec<f64>,
        /// suffix sums `Σ_{j>=m}^{H} |Δ2 a_j|`
        tail_a: Vec<f64>,
        tail_b: Vec<f64>,
        /// `max_{j in [m, H]} j |a_j|`
        sup_a: Vec<f64>,
        sup_b: Vec<f64>,
    },
    Dense {
        h: usize,
        abs_c: Vec<f64>,
        s22: Vec<f64>,
        g20: Vec<f64>,
        g02: Vec<f64>,
    },
}

fn suffix_sums(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len() + 1];
    let mut acc = Neumaier::new();
    for i in (0..v.len()).rev() {
        acc.add(v[i]);
        out[i] = acc.value();
    }
    out
}

fn weighted_suffix_max(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; v.len() + 1];
    for i in (0..v.len()).rev() {
        out[i] = out[i + 1].max((i + 1) as f64 * v[i]);
    }
    out
}

impl Tables {
    fn build(c: &CoefficientSequence, horizon: u64) -> Self {
        let r = DiffOrder::new(2).unwrap();
        if let Some((a, b)) = c.separable_parts() {
            let abs =
                |s: &crate::sequences::SingleSequence| (1..=horizon).map(|i| s.eval(i).norm()).collect::<Vec<_>>();
            let d2 =
                |s: &crate::sequences::SingleSequence| (1..=horizon).map(|i| delta(s, r, i).norm()).collect::<Vec<_>>();
            let (abs_a, abs_b) = (abs(a), abs(b));
            return Tables::Separable {
                tail_a: suffix_sums(&d2(a)),
                tail_b: suffix_sums(&d2(b)),
                sup_a: weighted_suffix_max(&abs_a),
                sup_b: weighted_suffix_max(&abs_b),
                abs_a,
                abs_b,
            };
        }
        let h = horizon as usize;
        let at = |j: usize, k: usize| j * h + k;
        let mut abs_c = vec![0.0; h * h];
        let mut d22 = vec![0.0; h * h];
        let mut d20 = vec![0.0; h * h];
        let mut d02 = vec![0.0; h * h];
        for j in 0..h {
            for k in 0..h {
                let (jj, kk) = (j as u64 + 1, k as u64 + 1);
                abs_c[at(j, k)] = c.eval(jj, kk).norm();
                d22[at(j, k)] = delta_rr(c, r, jj, kk).norm();
                d20[at(j, k)] = delta_r0(c, r, jj, kk).norm();
                d02[at(j, k)] = delta_0r(c, r, jj, kk).norm();
            }
        }
        // s22[m][n] = Σ_{j>=m, k>=n}: row suffix sums, then column suffix sums
        let mut rows = vec![0.0; h * h];
        for j in 0..h {
            let s = suffix_sums(&d22[j * h..(j + 1) * h]);
            rows[j * h..(j + 1) * h].copy_from_slice(&s[..h]);
        }
        let mut s22 = vec![0.0; h * h];
        for k in 0..h {
            let col: Vec<f64> = (0..h).map(|j| rows[at(j, k)]).collect();
            let s = suffix_sums(&col);
            for j in 0..h {
                s22[at(j, k)] = s[j];
            }
        }
        // g20[m][n] = Σ_{j>=m} sup_{k>=n} k |Δ20 c_jk|
        let mut inner = vec![0.0; h * h];
        for j in 0..h {
            let s = weighted_suffix_max(&d20[j * h..(j + 1) * h]);
            inner[j * h..(j + 1) * h].copy_from_slice(&s[..h]);
        }
        let mut g20 = vec![0.0; h * h];
        for k in 0..h {
            let col: Vec<f64> = (0..h).map(|j| inner[at(j, k)]).collect();
            let s = suffix_sums(&col);
            for j in 0..h {
                g20[at(j, k)] = s[j];
            }
        }
        // g02[m][n] = Σ_{k>=n} sup_{j>=m} j |Δ02 c_jk|
        let mut inner = vec![0.0; h * h];
        for k in 0..h {
            let col: Vec<f64> = (0..h).map(|j| d02[at(j, k)]).collect();
            let s = weighted_suffix_max(&col);
            for j in 0..h {
                inner[at(j, k)] = s[j];
            }
        }
        let mut g02 = vec![0.0; h * h];
        for j in 0..h {
            let s = suffix_sums(&inner[j * h..(j + 1) * h]);
            g02[j * h..(j + 1) * h].copy_from_slice(&s[..h]);
        }
        Tables::Dense { h, abs_c, s22, g20, g02 }
    }

    fn values(&self, m: u64, n: u64) -> [f64; 4] {
        let (mi, ni) = (m as usize - 1, n as usize - 1);
        let (mf, nf) = (m as f64, n as f64);
        match self {
            Tables::Separable { abs_a, abs_b, tail_a, tail_b, sup_a, sup_b } => [
                mf * nf * abs_a[mi] * abs_b[ni],
                mf * nf * tail_a[mi] * tail_b[ni],
                mf * tail_a[mi] * sup_b[ni],
                nf * tail_b[ni] * sup_a[mi],
            ],
            Tables::Dense { h, abs_c, s22, g20, g02 } => {
                let i = mi * h + ni;
                [mf * nf * abs_c[i], mf * nf * s22[i], mf * g20[i], nf * g02[i]]
            }
        }
    }
}

fn verification_set(eta: u64, window: u64, verify_max: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (eta + 1..=eta + window).filter(|&i| i <= verify_max).collect();
    let mut i = 0;
    loop {
        let x = ((eta + 1) as f64 * 2f64.powf(i as f64 / 4.0)).ceil() as u64;
        if x > verify_max {
            break;
        }
        v.push(x);
        i += 1;
    }
    v.push(verify_max);
    v.sort_unstable();
    v.dedup();
    v
}

/// Smallest `η > λ` (up to `cfg.cap`) for which all four conditions hold on
/// the verification set. A condition whose value is exactly zero counts as
/// satisfied.
pub fn eta_search(c: &CoefficientSequence, epsilon: f64, cfg: &EtaConfig) -> Result<EtaResult> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Param(format!("epsilon must be positive, got {epsilon}")));
    }
    if cfg.lambda < 2 {
        return Err(Error::Lambda(cfg.lambda));
    }
    let horizon = if c.separable_parts().is_some() { cfg.horizon } else { cfg.horizon.min(DENSE_ETA_HORIZON_CAP) };
    if cfg.verify_max >= horizon || cfg.cap >= cfg.verify_max || cfg.cap <= cfg.lambda {
        return Err(Error::Param(format!(
            "eta search needs lambda < cap < verify_max < horizon, got {} / {} / {} / {horizon}",
            cfg.lambda, cfg.cap, cfg.verify_max
        )));
    }
    let cst = cfg.constant;
    let thresholds = [epsilon, 16.0 * cst * epsilon, 4.0 * cst * epsilon, 4.0 * cst * epsilon];
    let tables = Tables::build(c, horizon);
    let holds = |v: f64, t: f64| v == 0.0 || v < t;

    'eta: for eta in cfg.lambda + 1..=cfg.cap {
        let set = verification_set(eta, cfg.window, cfg.verify_max);
        let mut worst = [0.0f64; 4];
        let mut worst_at = [(eta + 1, eta + 1); 4];
        for &m in &set {
            for &n in &set {
                let v = tables.values(m, n);
                for i in 0..4 {
                    if !holds(v[i], thresholds[i]) {
                        continue 'eta;
                    }
                    if v[i] > worst[i] {
                        worst[i] = v[i];
                        worst_at[i] = (m, n);
                    }
                }
            }
        }
        return Ok(EtaResult {
            eta,
            epsilon,
            constant: cst,
            thresholds,
            worst,
            worst_at,
            pairs_checked: (set.len() * set.len()) as u64,
            horizon,
        });
    }
    Err(Error::EtaNotFound { cap: cfg.cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::Preset;

    fn small() -> EtaConfig {
        EtaConfig { cap: 1 << 10, verify_max: 1 << 11, horizon: 1 << 13, ..EtaConfig::default() }
    }

    #[test]
    fn zero_sequence_stops_immediately() {
        let c = Preset::Zero.build().unwrap();
        let res = eta_search(&c, 0.1, &small()).unwrap();
        assert_eq!(res.eta, 3);
        assert_eq!(res.worst, [0.0; 4]);
    }

    #[test]
    fn larger_epsilon_never_needs_larger_eta() {
        let c = Preset::OscillatingQuadratic.build().unwrap();
        let mut cfg = small();
        cfg.constant = 3.0;
        let mut prev = u64::MAX;
        for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let res = eta_search(&c, eps, &cfg).unwrap();
            assert!(res.eta <= prev, "eps {eps}: {} > {prev}", res.eta);
            for i in 0..4 {
                assert!(res.worst[i] < res.thresholds[i] || res.worst[i] == 0.0);
            }
            prev = res.eta;
        }
    }

    #[test]
    fn dense_and_separable_tables_agree() {
        let c = Preset::OscillatingQuadratic.build().unwrap();
        let cfg = EtaConfig { cap: 200, verify_max: 400, horizon: 1000, constant: 3.0, ..EtaConfig::default() };
        let a = eta_search(&c, 0.3, &cfg).unwrap();
        let b = eta_search(&c.without_separable(), 0.3, &cfg).unwrap();
        assert_eq!(a.eta, b.eta);
        for i in 0..4 {
            assert!((a.worst[i] - b.worst[i]).abs() <= 1e-9 * a.worst[i].max(1e-300));
        }
    }

    #[test]
    fn mod3_tails_do_not_get_small() {
        let c = Preset::Mod3LogProduct.build().unwrap();
        assert_eq!(eta_search(&c, 0.01, &small()), Err(Error::EtaNotFound { cap: 1 << 10 }));
    }

    #[test]
    fn bad_configs() {
        let c = Preset::Zero.build().unwrap();
        assert!(eta_search(&c, 0.0, &small()).is_err());
        let cfg = EtaConfig { cap: 1 << 12, verify_max: 1 << 11, ..small() };
        assert!(eta_search(&c, 0.1, &cfg).is_err());
        let cfg = EtaConfig { lambda: 1, ..small() };
        assert_eq!(eta_search(&c, 0.1, &cfg), Err(Error::Lambda(1)));
    }
}
