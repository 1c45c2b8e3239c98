//! Finite differences of order `r` in one or both indices.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{CoefficientSequence, SingleSequence};

/// A difference step `r >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u32")]
pub struct DiffOrder(u32);

impl DiffOrder {
    pub fn new(r: i64) -> Result<Self> {
        if r >= 1 && r <= u32::MAX as i64 {
            Ok(DiffOrder(r as u32))
        } else {
            Err(Error::DiffOrder(r))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_u64(self) -> u64 {
        self.0 as u64
    }
}

impl TryFrom<i64> for DiffOrder {
    type Error = Error;
    fn try_from(r: i64) -> Result<Self> {
        DiffOrder::new(r)
    }
}

impl From<DiffOrder> for u32 {
    fn from(r: DiffOrder) -> u32 {
        r.0
    }
}

impl fmt::Display for DiffOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `Δ_r a_k = a_k - a_{k+r}`
#[inline]
pub fn delta(a: &SingleSequence, r: DiffOrder, k: u64) -> Complex64 {
    a.eval(k) - a.eval(k + r.as_u64())
}

/// `Δ_r0 c_jk = c_jk - c_{j+r,k}`
#[inline]
pub fn delta_r0(c: &CoefficientSequence, r: DiffOrder, j: u64, k: u64) -> Complex64 {
    c.eval(j, k) - c.eval(j + r.as_u64(), k)
}

/// `Δ_0r c_jk = c_jk - c_{j,k+r}`
#[inline]
pub fn delta_0r(c: &CoefficientSequence, r: DiffOrder, j: u64, k: u64) -> Complex64 {
    c.eval(j, k) - c.eval(j, k + r.as_u64())
}

/// `Δ_rr c_jk = Δ_r0(Δ_0r c)_jk`, evaluated as
/// `(c_jk - c_{j,k+r}) - (c_{j+r,k} - c_{j+r,k+r})`.
#[inline]
pub fn delta_rr(c: &CoefficientSequence, r: DiffOrder, j: u64, k: u64) -> Complex64 {
    let s = r.as_u64();
    (c.eval(j, k) - c.eval(j, k + s)) - (c.eval(j + s, k) - c.eval(j + s, k + s))
}

/// Mixed orders: `Δ_rs c_jk = Δ_r0(Δ_0s c)_jk`. Used by the by-parts expansion
/// where one direction needs the plain value (`s = 0` or `r = 0`).
#[inline]
pub fn delta_mixed(c: &CoefficientSequence, r: u32, s: u32, j: u64, k: u64) -> Complex64 {
    let (r, s) = (r as u64, s as u64);
    match (r, s) {
        (0, 0) => c.eval(j, k),
        (_, 0) => c.eval(j, k) - c.eval(j + r, k),
        (0, _) => c.eval(j, k) - c.eval(j, k + s),
        _ => (c.eval(j, k) - c.eval(j, k + s)) - (c.eval(j + r, k) - c.eval(j + r, k + s)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::builtin;

    fn r(v: i64) -> DiffOrder {
        DiffOrder::new(v).unwrap()
    }

    #[test]
    fn rejects_nonpositive_order() {
        assert!(DiffOrder::new(0).is_err());
        assert!(DiffOrder::new(-2).is_err());
        assert_eq!(DiffOrder::new(3).unwrap().get(), 3);
    }

    #[test]
    fn constant_sequence_has_zero_differences() {
        let c = CoefficientSequence::real("one", |_, _| 1.0);
        for jj in 1..10 {
            for kk in 1..10 {
                assert_eq!(delta_r0(&c, r(2), jj, kk), Complex64::new(0.0, 0.0));
                assert_eq!(delta_0r(&c, r(2), jj, kk), Complex64::new(0.0, 0.0));
                assert_eq!(delta_rr(&c, r(2), jj, kk), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn known_values() {
        let c = builtin("oscillating_quadratic", &[]).unwrap();
        // Δ_20 c_11 = c_11 - c_31 = 1 - 1/9
        assert!((delta_r0(&c, r(2), 1, 1).re - 8.0 / 9.0).abs() < 1e-15);
        let a = SingleSequence::power(1.0);
        assert!((delta(&a, r(1), 1).re - 0.5).abs() < 1e-16);
        assert_eq!(delta_mixed(&c, 2, 2, 3, 4), delta_rr(&c, r(2), 3, 4));
        assert_eq!(delta_mixed(&c, 2, 0, 3, 4), delta_r0(&c, r(2), 3, 4));
        assert_eq!(delta_mixed(&c, 0, 3, 3, 4), delta_0r(&c, r(3), 3, 4));
    }

    #[test]
    fn nested_orders_agree() {
        let c = builtin("mod3_log_product", &[]).unwrap();
        for jj in 1..40 {
            for kk in 1..40 {
                let s = 3;
                let other = (c.eval(jj, kk) - c.eval(jj + s, kk)) - (c.eval(jj, kk + s) - c.eval(jj + s, kk + s));
                let d = delta_rr(&c, r(3), jj, kk);
                let scale = c.eval(jj, kk).norm();
                assert!((d - other).norm() <= 4.0 * f64::EPSILON * scale);
            }
        }
    }
}
