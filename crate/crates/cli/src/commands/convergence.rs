use anyhow::{bail, Result};
use dsine_core::convergence::probe::write_trace_csv;
use dsine_core::convergence::{
    band_nonincreasing, eta_search, interior_grid, lemma1_quantity, lemma2_quantities, lemma3_check,
    remark2_divergence, theorem7_bound_check, uniform_tail_probe, EtaConfig, Lemma3Params, Lemma3Result, ProbeConfig,
    TailRules,
};
use dsine_core::membership::{check_membership, dyadic_grid};
use dsine_core::{Axis, CoefficientSequence, DiffOrder, Error, Family, MajorantFamily};
use serde::Serialize;
use serde_json::json;

use crate::config::{verdict_matches, EtaOpts, LemmaOpts, MajorantOpts, Remark2Opts, SequenceOpts, UniformTailOpts};
use crate::output::Outcome;

/// Largest fitted constant over the three axes, with `r = 2`.
fn fit_constant(c: &CoefficientSequence, fam: &MajorantFamily, grid_max: u64) -> Result<f64> {
    let grid = dyadic_grid(2, grid_max);
    if grid.is_empty() {
        bail!("fit grid up to {grid_max} is empty");
    }
    let rep = check_membership(c, DiffOrder::new(2)?, fam, &grid, &Axis::ALL, None)?;
    Ok(Axis::ALL.iter().filter_map(|a| rep.fitted(*a)).fold(0.0, f64::max))
}

fn probe_config(grid: usize, lattice_max: u64, structured: bool) -> ProbeConfig {
    ProbeConfig { xy_grid: interior_grid(grid), lattice_max, structured_corners: structured, ..ProbeConfig::default() }
}

pub fn uniform_tail(seq: &SequenceOpts, o: &mut UniformTailOpts) -> Result<Outcome> {
    let c = seq.build()?;
    let d = ProbeConfig::default();
    let mut cfg = probe_config(
        *o.grid.get_or_insert(23),
        *o.lattice_max.get_or_insert(d.lattice_max),
        *o.structured_corners.get_or_insert(d.structured_corners),
    );
    cfg.thresholds = o.thresholds.get_or_insert(d.thresholds).clone();
    cfg.rules = TailRules {
        decay_factor: *o.decay_factor.get_or_insert(d.rules.decay_factor),
        band: *o.band.get_or_insert(d.rules.band),
    };
    let (rep, trace) = uniform_tail_probe(&c, &cfg)?;
    let mut out = Outcome { result: json!({ "sequence": c.name(), "tail": &rep }), ..Outcome::default() };
    if let Some(e) = &o.expect {
        out.check(format!("verdict is {e}"), verdict_matches(e, rep.verdict)?, format!("verdict {}", rep.verdict));
    }
    out.add_csv("tail", |w| rep.write_csv(w))?;
    out.add_csv("trace", |w| write_trace_csv(w, &trace))?;
    Ok(out)
}

#[derive(Serialize)]
struct LemmaRow {
    m: u64,
    lemma1: f64,
    lemma1_upper: Option<f64>,
    lemma2_row: f64,
    lemma2_row_upper: Option<f64>,
    lemma2_col: f64,
    lemma2_col_upper: Option<f64>,
}

pub fn lemma(seq: &SequenceOpts, maj: &mut MajorantOpts, o: &mut LemmaOpts) -> Result<Outcome> {
    let c = seq.build()?;
    let fam = maj.resolve(Family::Two, 1 << 12)?;
    let schedule = o.schedule.get_or_insert_with(|| vec![4, 8, 16, 32, 64]).clone();
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        bail!("lemma schedule must be nonempty and strictly increasing");
    }
    let sum_horizon = *o.sum_horizon.get_or_insert(1 << 14);
    let band = *o.band.get_or_insert(0.05);
    let fit_max = *o.fit_grid_max.get_or_insert(1024);
    let constant = match o.constant {
        Some(v) => v,
        None => fit_constant(&c, &fam, fit_max)?,
    };
    let params = Lemma3Params::from_family(&fam, constant);

    let mut rows = Vec::new();
    let mut pointwise: Vec<Lemma3Result> = Vec::new();
    for &m in &schedule {
        let l1 = lemma1_quantity(&c, m, m, sum_horizon)?;
        let l2 = lemma2_quantities(&c, m, m, fam.sup_horizon, sum_horizon)?;
        rows.push(LemmaRow {
            m,
            lemma1: l1.value,
            lemma1_upper: l1.upper,
            lemma2_row: l2.row.value,
            lemma2_row_upper: l2.row.upper,
            lemma2_col: l2.col.value,
            lemma2_col_upper: l2.col.upper,
        });
        if m >= fam.lambda {
            pointwise.push(lemma3_check(&c, &params, m, m, fam.sup_horizon)?);
        }
    }

    let mut out = Outcome {
        result: json!({ "sequence": c.name(), "constant": constant, "tails": &rows, "pointwise": &pointwise }),
        ..Outcome::default()
    };
    let series: [(&str, Vec<f64>); 3] = [
        ("double tail", rows.iter().map(|r| r.lemma1).collect()),
        ("row tail", rows.iter().map(|r| r.lemma2_row).collect()),
        ("column tail", rows.iter().map(|r| r.lemma2_col).collect()),
    ];
    for (name, vals) in series {
        out.check(format!("{name} nonincreasing within {band}"), band_nonincreasing(&vals, band), format!("{vals:?}"));
    }
    let worst = pointwise.iter().min_by(|a, b| a.slack.total_cmp(&b.slack));
    out.check(
        "pointwise estimate slack >= 0",
        !pointwise.is_empty() && pointwise.iter().all(|p| p.slack >= 0.0),
        match worst {
            Some(w) => format!("smallest slack {} at m = n = {}", w.slack, w.m),
            None => format!("no schedule point reaches lambda = {}", fam.lambda),
        },
    );
    out.add_rows("tails", &rows)?;
    out.add_rows("pointwise", &pointwise)?;
    Ok(out)
}

#[derive(Serialize)]
struct EtaRow {
    epsilon: f64,
    eta: Option<u64>,
    bound: Option<f64>,
    worst_abs: Option<f64>,
    slack: Option<f64>,
}

pub fn eta(seq: &SequenceOpts, maj: &mut MajorantOpts, o: &mut EtaOpts) -> Result<Outcome> {
    let c = seq.build()?;
    let fam = maj.resolve(Family::Three, 1 << 14)?;
    let eps = o.epsilon.get_or_insert_with(|| vec![0.2, 0.05]).clone();
    if eps.is_empty() {
        bail!("no epsilon given");
    }
    let fit_max = *o.fit_grid_max.get_or_insert(1024);
    let constant = match o.constant {
        Some(v) => v,
        None => fit_constant(&c, &fam, fit_max)?,
    };
    let d = EtaConfig::default();
    let cfg = EtaConfig {
        lambda: fam.lambda,
        constant,
        cap: *o.cap.get_or_insert(d.cap),
        verify_max: *o.verify_max.get_or_insert(d.verify_max),
        window: *o.window.get_or_insert(d.window),
        horizon: *o.horizon.get_or_insert(d.horizon),
    };
    let check = *o.check_bound.get_or_insert(true);
    let probe = probe_config(
        *o.grid.get_or_insert(23),
        *o.lattice_max.get_or_insert(4096),
        *o.structured_corners.get_or_insert(true),
    );

    let mut out = Outcome::default();
    let mut searches = Vec::new();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &e in &eps {
        let found = match eta_search(&c, e, &cfg) {
            Ok(r) => r,
            Err(Error::EtaNotFound { cap }) => {
                out.check(format!("eta found for epsilon {e}"), false, format!("none up to {cap}"));
                rows.push(EtaRow { epsilon: e, eta: None, bound: None, worst_abs: None, slack: None });
                continue;
            }
            Err(err) => return Err(err.into()),
        };
        out.check(format!("eta found for epsilon {e}"), true, format!("eta = {}", found.eta));
        let mut row = EtaRow { epsilon: e, eta: Some(found.eta), bound: None, worst_abs: None, slack: None };
        if check {
            let t = theorem7_bound_check(&c, e, found.eta, constant, &probe)?;
            out.check(
                format!("tail bound holds beyond eta for epsilon {e}"),
                t.nonempty && t.slack < 0.0,
                format!(
                    "worst {} against bound {} (slack {}), probe nonempty: {}",
                    t.worst_abs, t.bound, t.slack, t.nonempty
                ),
            );
            (row.bound, row.worst_abs, row.slack) = (Some(t.bound), Some(t.worst_abs), Some(t.slack));
            checks.push(t);
        }
        rows.push(row);
        searches.push(found);
    }
    out.result = json!({ "sequence": c.name(), "constant": constant, "search": &searches, "bound_checks": &checks });
    out.add_rows("eta", &rows)?;
    Ok(out)
}

pub fn remark2(o: &mut Remark2Opts) -> Result<Outcome> {
    let schedule = o.schedule.get_or_insert_with(|| vec![10, 100, 1000, 10_000]).clone();
    let tol = *o.max_rel_err.get_or_insert(1e-10);
    let rep = remark2_divergence(&schedule)?;
    let mut out = Outcome { result: json!({ "divergence": &rep }), ..Outcome::default() };
    let vals: Vec<f64> = rep.rows.iter().map(|r| r.direct).collect();
    out.check("partial sums strictly increasing", rep.strictly_increasing, format!("{vals:?}"));
    out.check("partial sums above the lower bound", rep.above_lower_bound, {
        let lb: Vec<f64> = rep.rows.iter().map(|r| r.lower_bound).collect();
        format!("lower bounds {lb:?}")
    });
    out.check(
        format!("product form matches to {tol:?}"),
        rep.max_product_rel_err <= tol,
        format!("largest relative gap {:e}", rep.max_product_rel_err),
    );
    out.add_rows("rows", &rep.rows)?;
    Ok(out)
}
