use std::str::FromStr;

use anyhow::{bail, Result};
use dsine_core::convergence::{dyadic_schedule, TailRules};
use dsine_core::membership::{
    check_condition_22, check_membership, check_single_membership, dyadic_grid, dyadic_points, Beta, PointResult,
};
use dsine_core::{Axis, DiffOrder, Family, IndexMap, SingleClass, SingleSequence, Verdict};
use serde_json::json;

use crate::config::{verdict_matches, CheckClassOpts, Condition22Opts, MajorantOpts, SequenceOpts};
use crate::output::Outcome;

fn witness_text(w: Option<&PointResult>) -> String {
    match w {
        Some(p) => format!("worst at (m, n) = ({}, {}): lhs {:e}, rhs {:e}", p.m, p.n, p.lhs, p.rhs),
        None => "no points evaluated".into(),
    }
}

fn grid_bounds(o: &mut CheckClassOpts) -> Result<(u64, u64)> {
    let lo = *o.grid_min.get_or_insert(2);
    let hi = *o.grid_max.get_or_insert(1 << 10);
    if lo == 0 || lo > hi {
        bail!("grid needs 1 <= grid_min <= grid_max, got {lo} and {hi}");
    }
    Ok((lo, hi))
}

pub fn check_class(seq: &SequenceOpts, maj: &mut MajorantOpts, o: &mut CheckClassOpts) -> Result<Outcome> {
    if o.single.is_some() || o.class.is_some() {
        return check_single(maj, o);
    }
    let c = seq.build()?;
    let fam = maj.resolve(Family::Three, 1 << 14)?;
    let r = DiffOrder::new(*o.r.get_or_insert(2))?;
    let (lo, hi) = grid_bounds(o)?;
    let axes = o
        .axes
        .get_or_insert_with(|| Axis::ALL.iter().map(|a| a.to_string()).collect())
        .iter()
        .map(|a| Axis::from_str(a))
        .collect::<Result<Vec<_>, _>>()?;
    if axes.is_empty() {
        bail!("no axes selected");
    }
    let grid = dyadic_grid(lo, hi);
    if grid.is_empty() {
        bail!("no powers of two in [{lo}, {hi}]");
    }
    let rep = check_membership(&c, r, &fam, &grid, &axes, o.target_c)?;

    let mut out =
        Outcome { result: json!({ "sequence": c.name(), "membership": rep.summary() }), ..Outcome::default() };
    if let Some(t) = o.target_c {
        for a in &rep.axes {
            let v = a.verdict.unwrap_or(Verdict::Pass);
            out.check(
                format!("{} inequality holds with C = {t}", a.axis),
                v == Verdict::Pass,
                format!("verdict {v:?}; {}", witness_text(a.witness.as_ref())),
            );
        }
    }
    for (axis, max) in [(Axis::Row, o.max_row_c), (Axis::Column, o.max_col_c), (Axis::Double, o.max_double_c)] {
        if let Some(max) = max {
            match rep.axis(axis) {
                Some(a) => out.check(
                    format!("fitted {axis} constant <= {max}"),
                    a.fitted_c <= max,
                    format!("fitted {} ({})", a.fitted_c, witness_text(a.witness.as_ref())),
                ),
                None => bail!("max_{axis}_c given but the {axis} axis is not checked"),
            }
        }
    }
    if let Some(min) = o.min_growth_slope {
        let slope = rep.axis(Axis::Row).and_then(|a| a.growth_fit);
        out.check(format!("row growth slope >= {min}"), slope.is_some_and(|s| s >= min), format!("slope {slope:?}"));
    }
    out.add_csv("points", |w| rep.write_csv(w))?;
    Ok(out)
}

fn check_single(maj: &mut MajorantOpts, o: &mut CheckClassOpts) -> Result<Outcome> {
    let src = match &o.single {
        Some(s) => s.clone(),
        None => bail!("single-index classes need --single (an expression in n)"),
    };
    let a = SingleSequence::from_expr("single", &src)?;
    let lambda = *maj.lambda.get_or_insert(2);
    let horizon = *maj.sup_horizon.get_or_insert(1 << 14);
    let class = match o.class.get_or_insert_with(|| "mvbvs".into()).as_str() {
        "mvbvs" => SingleClass::Mvbvs { lambda },
        "sbvs" => SingleClass::Sbvs { lambda },
        "sbvs2" => SingleClass::Sbvs2 { b: IndexMap::parse(maj.b1.get_or_insert_with(|| "l".into()))? },
        "gm" => {
            let beta = match o.beta.get_or_insert_with(|| "star".into()).as_str() {
                "star" => Beta::Star { lambda },
                e => Beta::Expr { expr: e.to_string() },
            };
            SingleClass::Gm { beta, r: DiffOrder::new(*o.r.get_or_insert(1))? }
        }
        other => bail!("unknown single-index class `{other}` (mvbvs, sbvs, sbvs2, gm)"),
    };
    let (lo, hi) = grid_bounds(o)?;
    let grid = dyadic_points(lo, hi);
    let rep = check_single_membership(&a, &class, &grid, horizon)?;
    let mut out = Outcome { result: json!({ "sequence": src, "membership": &rep }), ..Outcome::default() };
    if let Some(max) = o.max_c {
        out.check(
            format!("fitted constant <= {max}"),
            rep.fitted_c <= max,
            format!("fitted {} at {:?}", rep.fitted_c, rep.worst_witness.map(|w| w.n)),
        );
    }
    out.add_csv("points", |w| rep.write_csv(w))?;
    Ok(out)
}

pub fn condition_22(seq: &SequenceOpts, o: &mut Condition22Opts) -> Result<Outcome> {
    let c = seq.build()?;
    let horizon = *o.horizon.get_or_insert(1024);
    let rules = TailRules { decay_factor: *o.decay_factor.get_or_insert(100.0), band: *o.band.get_or_insert(0.05) };
    let schedule = o.schedule.get_or_insert_with(|| dyadic_schedule(4, horizon)).clone();
    let rep = check_condition_22(&c, horizon, Some(&schedule), rules)?;
    let mut out = Outcome { result: json!({ "sequence": c.name(), "tail": &rep }), ..Outcome::default() };
    if let Some(e) = &o.expect {
        out.check(format!("verdict is {e}"), verdict_matches(e, rep.verdict)?, format!("verdict {}", rep.verdict));
    }
    if let Some(k) = o.tail_bound {
        let bad = rep.schedule.iter().zip(&rep.values).find(|(s, v)| **v > k / (**s as f64 - 1.0));
        out.check(
            format!("T(s) <= {k}/(s-1)"),
            bad.is_none(),
            bad.map_or("holds at every scale".into(), |(s, v)| format!("T({s}) = {v}")),
        );
    }
    if let Some(v0) = o.constant_value {
        let tol = *o.constant_tolerance.get_or_insert(1e-12);
        let bad = rep.schedule.iter().zip(&rep.values).find(|(_, v)| (**v - v0).abs() > tol);
        out.check(
            format!("T(s) = {v0} +- {tol:?}"),
            bad.is_none(),
            bad.map_or("holds at every scale".into(), |(s, v)| format!("T({s}) = {v}")),
        );
    }
    out.add_csv("tail", |w| rep.write_csv(w))?;
    Ok(out)
}
