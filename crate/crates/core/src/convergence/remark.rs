//! Divergence of the mod-3 logarithmic product at `(2π/3, 2π/3)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::tail::{TailReport, TailRules};
use crate::error::{Error, Result};
use crate::kernels::{rect_sum_direct, row_sum_direct, Rect};
use crate::report::float;
use crate::sequences::{CoefficientSequence, Preset, SingleSequence};
use crate::summation::Neumaier;

pub const X0: f64 = 2.0 * PI / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Remark2Row {
    #[serde(rename = "M")]
    pub big_m: u64,
    /// Real part of the direct double sum over `[1, 3M+2]^2`.
    pub direct: f64,
    pub direct_im: f64,
    /// `(Σ_{j=1}^{3M+2} a_j sin(j x0))^2`
    pub product: f64,
    /// `sin(x0)^2 (Σ_{j=0}^{M} 2 / ((3j+1) ln(3j+3)))^2`
    pub lower_bound: f64,
    #[serde(with = "float")]
    pub product_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Remark2Report {
    pub rows: Vec<Remark2Row>,
    pub tail: TailReport,
    pub above_lower_bound: bool,
    pub strictly_increasing: bool,
    pub max_product_rel_err: f64,
}

/// `sin(x0)^2 (Σ_{j=0}^{M} 2 / ((3j+1) ln(3j+3)))^2`
pub fn remark2_lower_bound(big_m: u64) -> f64 {
    let s: Neumaier = (0..=big_m)
        .map(|j| {
            let j = j as f64;
            2.0 / ((3.0 * j + 1.0) * (3.0 * j + 3.0).ln())
        })
        .collect();
    X0.sin().powi(2) * s.value().powi(2)
}

/// Runs the square partial sums `N = M` along the schedule.
pub fn remark2_divergence(schedule: &[u64]) -> Result<Remark2Report> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Param("remark schedule must be nonempty and strictly increasing".into()));
    }
    let c: CoefficientSequence = Preset::Mod3LogProduct.build()?;
    let a = SingleSequence::mod3_log();
    let rows: Vec<Remark2Row> = schedule
        .iter()
        .map(|&big_m| {
            let end = 3 * big_m + 2;
            let rect = Rect::new(1, end, 1, end)?;
            let direct = rect_sum_direct(&c, rect, X0, X0);
            let factor = row_sum_direct(&a, 1, end, X0);
            let product = (factor * factor).re;
            let rel =
                if product == 0.0 { (direct.re - product).abs() } else { ((direct.re - product) / product).abs() };
            Ok(Remark2Row {
                big_m,
                direct: direct.re,
                direct_im: direct.im,
                product,
                lower_bound: remark2_lower_bound(big_m),
                product_rel_err: rel,
            })
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.direct).collect();
    let tail = TailReport::new(schedule.to_vec(), values.clone(), vec![true; values.len()], TailRules::default());
    Ok(Remark2Report {
        above_lower_bound: rows.iter().all(|r| r.direct >= r.lower_bound),
        strictly_increasing: values.windows(2).all(|w| w[1] > w[0]),
        max_product_rel_err: rows.iter().map(|r| r.product_rel_err).fold(0.0, f64::max),
        rows,
        tail,
    })
}
