use anyhow::{anyhow, bail, Context, Result};
use dsine_core::identities::{verify_identities, IdentityConfig};
use dsine_core::kernels::{kernel_bound_check, kernel_grid, rect_sum_direct, rect_sum_parts};
use dsine_core::{DiffOrder, Preset, Rect};
use serde_json::json;

use crate::config::{IdentityOpts, PartialSumOpts, SequenceOpts};
use crate::output::Outcome;

/// Parses `m:M x n:N` (spaces optional).
pub fn parse_rect(s: &str) -> Result<Rect> {
    let bad = || anyhow!("rectangle `{s}` is not of the form m:M x n:N");
    let (rows, cols) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let range = |t: &str| -> Result<(u64, u64)> {
        let (a, b) = t.trim().split_once(':').ok_or_else(bad)?;
        Ok((a.trim().parse().with_context(bad)?, b.trim().parse().with_context(bad)?))
    };
    let ((m, big_m), (n, big_n)) = (range(rows)?, range(cols)?);
    Ok(Rect::new(m, big_m, n, big_n)?)
}

pub fn partial_sum(seq: &SequenceOpts, o: &mut PartialSumOpts) -> Result<Outcome> {
    let c = seq.build()?;
    let rect = parse_rect(o.rect.get_or_insert_with(|| "1:10x1:10".into()))?;
    let x = *o.x.get_or_insert(1.0);
    let y = *o.y.get_or_insert(1.0);
    let method = o.method.get_or_insert_with(|| "both".into()).clone();
    let tol = *o.tolerance.get_or_insert(1e-9);
    let direct = rect_sum_direct(&c, rect, x, y);
    let mut result = json!({ "sequence": c.name(), "rect": rect, "x": x, "y": y });
    let mut out = Outcome::default();
    match method.as_str() {
        "direct" => {}
        "parts" | "both" => {
            let r = DiffOrder::new(*o.r.get_or_insert(2))?;
            let parts = rect_sum_parts(&c, rect, x, y, r)?;
            let err = (parts - direct).norm() / (1.0 + direct.norm());
            result["parts"] = json!({ "re": parts.re, "im": parts.im });
            result["normalised_error"] = json!(err);
            if method == "both" {
                out.check(format!("parts agree with direct to {tol:?}"), err <= tol, format!("error {err:e}"));
            }
        }
        other => bail!("unknown method `{other}` (direct, parts, both)"),
    }
    if method != "parts" {
        result["direct"] = json!({ "re": direct.re, "im": direct.im });
    }
    if let Some(v) = o.expect_value {
        out.check(
            format!("direct sum equals {v}"),
            (direct.re - v).abs() <= tol * (1.0 + v.abs()),
            format!("direct {}", direct.re),
        );
    }
    out.result = result;
    Ok(out)
}

pub fn verify(seq: &SequenceOpts, seed: u64, o: &mut IdentityOpts) -> Result<Outcome> {
    let d = IdentityConfig::default();
    let cfg = IdentityConfig {
        seed,
        cases_1d: *o.cases_1d.get_or_insert(d.cases_1d),
        max_len_1d: *o.max_len_1d.get_or_insert(d.max_len_1d),
        cases_2d: *o.cases_2d.get_or_insert(d.cases_2d),
        table_2d: *o.table_2d.get_or_insert(d.table_2d),
        diff_grid: *o.diff_grid.get_or_insert(d.diff_grid),
        parts_tolerance: *o.parts_tolerance.get_or_insert(d.parts_tolerance),
        diff_ulps: *o.diff_ulps.get_or_insert(d.diff_ulps),
    };
    let mut seqs = vec![Preset::OscillatingQuadratic.build()?, Preset::Mod3LogProduct.build()?];
    if !seq.is_empty() {
        seqs.push(seq.build()?);
    }
    let rep = verify_identities(&cfg, &seqs)?;
    let grid = kernel_grid(*o.kernel_points.get_or_insert(10_000));
    let kernel = kernel_bound_check(2, &grid, *o.kernel_k_max.get_or_insert(512))?;

    let mut out = Outcome { result: json!({ "identities": &rep, "kernel_bounds": &kernel }), ..Outcome::default() };
    for chk in &rep.checks {
        out.check(
            chk.name.clone(),
            chk.passed,
            format!("{} cases, worst {:e} (tolerance {:e}) {}", chk.cases, chk.worst, chk.tolerance, chk.witness),
        );
    }
    out.check(
        "conjugate kernel bounds",
        kernel.violations == 0,
        format!(
            "{} violations in {} points, worst slack {:e} at x = {}, k = {}",
            kernel.violations, kernel.points_checked, kernel.worst_slack, kernel.worst_x, kernel.worst_k
        ),
    );
    out.add_csv("checks", |w| rep.write_csv(w))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangles() {
        assert_eq!(parse_rect("1:10x3:4").unwrap(), Rect::new(1, 10, 3, 4).unwrap());
        assert_eq!(parse_rect(" 2 : 5 X 6:6 ").unwrap(), Rect::new(2, 5, 6, 6).unwrap());
        for bad in ["1:10", "1-10x1:2", "a:bxc:d", "5:1x1:1", "0:1x1:1"] {
            assert!(parse_rect(bad).is_err(), "{bad}");
        }
    }
}
