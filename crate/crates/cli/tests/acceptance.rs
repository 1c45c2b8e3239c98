//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dsine_core::convergence::{
    band_nonincreasing, eta_search, interior_grid, lemma1_quantity, lemma2_quantities, lemma3_check,
    remark2_divergence, theorem7_bound_check, EtaConfig, Lemma3Params, ProbeConfig, TailRules, TailVerdict,
};
use dsine_core::identities::{by_parts_1d, by_parts_2d, difference_decompositions, random_table, IdentityCheck};
use dsine_core::kernels::{kernel_bound_check, kernel_grid};
use dsine_core::membership::{check_condition_22, check_membership, dyadic_grid};
use dsine_core::{Axis, CoefficientSequence, DiffOrder, Family, MajorantFamily, Preset};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 20240611;

fn osc() -> CoefficientSequence {
    Preset::OscillatingQuadratic.build().unwrap()
}

fn mod3() -> CoefficientSequence {
    Preset::Mod3LogProduct.build().unwrap()
}

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn identity_summary(checks: &[IdentityCheck]) -> (bool, String) {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let worst = checks.iter().map(|c| c.worst / c.tolerance).fold(0.0, f64::max);
    let detail = format!("{} checks, worst error {:.3e} of tolerance, failed {:?}", checks.len(), worst, failed);
    (failed.is_empty(), detail)
}

fn summation_by_parts() -> Outcome {
    let checks = [by_parts_1d(SEED, 1000, 64, 1e-9), by_parts_2d(SEED + 1, 200, 30, 1e-9)];
    let (ok, detail) = identity_summary(&checks);
    let cases: Vec<usize> = checks.iter().map(|c| c.cases).collect();
    require(ok && cases == [1000, 200], format!("{detail}, cases {cases:?}"))
}

fn difference_splits() -> Outcome {
    let mut checks = Vec::new();
    for c in [osc(), mod3(), random_table(SEED + 2, 202)] {
        checks.extend(difference_decompositions(&c, 200, 8.0));
    }
    let (ok, detail) = identity_summary(&checks);
    require(ok, detail)
}

fn kernel_bounds() -> Outcome {
    let grid = kernel_grid(10_000);
    let rep = kernel_bound_check(2, &grid, 512).map_err(|e| e.to_string())?;
    require(
        rep.violations == 0 && grid.len() >= 19_999,
        format!(
            "{} points, {} violations, worst slack {:e} at x = {}",
            rep.points_checked, rep.violations, rep.worst_slack, rep.worst_x
        ),
    )
}

fn three(horizon: u64) -> MajorantFamily {
    MajorantFamily::new(Family::Three).with_horizon(horizon)
}

fn separation() -> Outcome {
    let grid = dyadic_grid(2, 1 << 12);
    let r = |v| DiffOrder::new(v).unwrap();
    let rep = check_membership(&osc(), r(2), &three(1 << 14), &grid, &Axis::ALL, None).map_err(|e| e.to_string())?;
    let (row, double) = (rep.fitted(Axis::Row).unwrap(), rep.fitted(Axis::Double).unwrap());

    let rep1 = check_membership(&osc(), r(1), &three(1 << 14), &grid, &[Axis::Row], None).map_err(|e| e.to_string())?;
    let running: Vec<f64> =
        (1..=12).map(|t| rep1.points.iter().filter(|p| p.m <= 1 << t).map(|p| p.ratio).fold(0.0, f64::max)).collect();
    let grows = running.windows(2).all(|w| w[1] > w[0]);
    let slope = rep1.axis(Axis::Row).and_then(|a| a.growth_fit).unwrap_or(f64::NAN);
    // frozen brute-force value
    let slope_matches = (slope - 1.0447308167723985).abs() <= 1e-6;
    require(
        row <= 4.0 && double <= 16.0 && grows && slope >= 0.8 && slope_matches,
        format!("r = 2: row {row:.4}, double {double:.4}; r = 1: running constant grows {grows}, slope {slope:.4}"),
    )
}

fn mod3_remark() -> Outcome {
    let grid = dyadic_grid(2, 1 << 12);
    let rep = check_membership(&mod3(), DiffOrder::new(3).unwrap(), &three(1 << 14), &grid, &Axis::ALL, None)
        .map_err(|e| e.to_string())?;
    let (row, double) = (rep.fitted(Axis::Row).unwrap(), rep.fitted(Axis::Double).unwrap());
    let div = remark2_divergence(&[10, 100, 1000, 10_000]).map_err(|e| e.to_string())?;
    let vals: Vec<String> = div.rows.iter().map(|r| format!("{:.4}", r.direct)).collect();
    require(
        row <= 6.0
            && double <= 36.0
            && div.strictly_increasing
            && div.above_lower_bound
            && div.max_product_rel_err <= 1e-10,
        format!(
            "row {row:.4}, double {double:.4}; sums [{}], above bound {}, product gap {:e}",
            vals.join(", "),
            div.above_lower_bound,
            div.max_product_rel_err
        ),
    )
}

fn condition_22() -> Outcome {
    let rules = TailRules::default();
    let a = check_condition_22(&osc(), 1024, None, rules).map_err(|e| e.to_string())?;
    let bounded = a.schedule.iter().zip(&a.values).all(|(s, v)| *v <= 9.0 / (*s as f64 - 1.0));
    let h = Preset::ProductPower { p: 1.0, q: 1.0 }.build().unwrap();
    let b = check_condition_22(&h, 1024, None, rules).map_err(|e| e.to_string())?;
    let flat = b.values.iter().all(|v| (v - 1.0).abs() <= 1e-12);
    require(
        a.verdict == TailVerdict::Decaying && bounded && b.verdict != TailVerdict::Decaying && flat,
        format!("oscillating {} (T <= 9/(s-1): {bounded}); 1/(jk) {} (T = 1: {flat})", a.verdict, b.verdict),
    )
}

fn fit_constant(c: &CoefficientSequence, fam: &MajorantFamily) -> f64 {
    let rep = check_membership(c, DiffOrder::new(2).unwrap(), fam, &dyadic_grid(2, 1024), &Axis::ALL, None).unwrap();
    Axis::ALL.iter().filter_map(|a| rep.fitted(*a)).fold(0.0, f64::max)
}

fn uniform_bound() -> Outcome {
    let c = osc();
    let constant = fit_constant(&c, &three(1 << 14));
    let cfg = EtaConfig { constant, ..EtaConfig::default() };
    let probe = ProbeConfig {
        xy_grid: interior_grid(23),
        lattice_max: 4096,
        structured_corners: true,
        ..ProbeConfig::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.2, 0.05] {
        let found = eta_search(&c, eps, &cfg).map_err(|e| format!("epsilon {eps}: {e}"))?;
        let t = theorem7_bound_check(&c, eps, found.eta, constant, &probe).map_err(|e| e.to_string())?;
        ok &= found.eta <= 1 << 14 && t.nonempty && t.slack < 0.0;
        parts.push(format!("epsilon {eps}: eta {}, worst {:.4e} vs bound {:.4}", found.eta, t.worst_abs, t.bound));
    }
    require(ok, format!("C = {constant:.4}; {}", parts.join("; ")))
}

fn lemma_decay() -> Outcome {
    let c = osc();
    let fam = MajorantFamily::new(Family::Two).with_horizon(1 << 12);
    let schedule = [4u64, 8, 16, 32, 64];
    let mut l1 = Vec::new();
    let (mut rows, mut cols) = (Vec::new(), Vec::new());
    for &m in &schedule {
        l1.push(lemma1_quantity(&c, m, m, 1 << 14).map_err(|e| e.to_string())?.value);
        let l2 = lemma2_quantities(&c, m, m, 1 << 12, 1 << 14).map_err(|e| e.to_string())?;
        rows.push(l2.row.value);
        cols.push(l2.col.value);
    }
    let decays = [&l1, &rows, &cols].iter().all(|v| band_nonincreasing(v, 0.05) && v[v.len() - 1] < v[0]);

    let params = Lemma3Params::from_family(&fam, fit_constant(&c, &fam));
    let pts = dyadic_grid(fam.lambda, 64);
    let mut worst = f64::INFINITY;
    for &(m, n) in &pts {
        worst = worst.min(lemma3_check(&c, &params, m, n, 1 << 12).map_err(|e| e.to_string())?.slack);
    }
    require(
        decays && worst >= 0.0,
        format!(
            "tails at 4 -> 64: {:.3e} -> {:.3e}, {:.3e} -> {:.3e}, {:.3e} -> {:.3e}; pointwise slack >= {worst:.4} over {} points (C = {:.4})",
            l1[0], l1[4], rows[0], rows[4], cols[0], cols[4], pts.len(), params.constant
        ),
    )
}

fn run_suite(dir: &Path, threads: &str) -> Result<(), String> {
    let recipes = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
    let mut names: Vec<_> =
        std::fs::read_dir(&recipes).map_err(|e| e.to_string())?.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    names.sort();
    for path in names.iter().filter(|p| p.extension().is_some_and(|e| e == "toml")) {
        let out = dir.join(path.file_stem().unwrap());
        let status = Command::new(env!("CARGO_BIN_EXE_dsine"))
            .args(["run", path.to_str().unwrap(), "--threads", threads, "--out-dir", out.to_str().unwrap()])
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if status.code() != Some(0) {
            return Err(format!("{} exited with {status}", path.display()));
        }
    }
    Ok(())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap().flatten() {
        let p = entry.path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push((p.to_string_lossy().into_owned(), std::fs::read(&p).unwrap()));
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_suite(&a, "1")?;
    run_suite(&b, "4")?;
    let (fa, fb) = (files(&a), files(&b));
    let strip = |v: Vec<(String, Vec<u8>)>, root: &Path| -> Vec<(String, Vec<u8>)> {
        let root = root.to_string_lossy().into_owned();
        v.into_iter().map(|(p, b)| (p.trim_start_matches(&root).to_string(), b)).collect()
    };
    let (fa, fb) = (strip(fa, &a), strip(fb, &b));
    let differing: Vec<&str> = fa.iter().zip(&fb).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    require(
        !fa.is_empty() && fa.len() == fb.len() && differing.is_empty(),
        format!("{} report files per run, differing {:?}", fa.len(), differing),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("summation by parts, 1-D and 2-D", summation_by_parts),
        ("difference decompositions", difference_splits),
        ("conjugate kernel bounds", kernel_bounds),
        ("first/second order separation", separation),
        ("mod-3 product membership and divergence", mod3_remark),
        ("anti-diagonal decay condition", condition_22),
        ("uniform tail bound beyond eta", uniform_bound),
        ("tail quantities decay", lemma_decay),
        ("byte-identical reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS {} {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {} {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
