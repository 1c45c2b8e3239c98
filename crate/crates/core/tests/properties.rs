use std::sync::Arc;

use dsine_core::differences::{delta_0r, delta_r0, delta_rr};
use dsine_core::kernels::{rect_sum_direct, rect_sum_parts, row_sum_by_parts, row_sum_direct};
use dsine_core::majorants::rhs;
use dsine_core::membership::{check_membership, lhs};
use dsine_core::{
    Axis, CoefficientSequence, Complex64, DiffOrder, Family, MajorantFamily, Preset, Rect, SingleSequence,
};
use proptest::prelude::*;

fn preset() -> impl Strategy<Value = Preset> {
    prop_oneof![
        Just(Preset::OscillatingQuadratic),
        Just(Preset::Mod3LogProduct),
        (0.6f64..3.0, 0.6f64..3.0).prop_map(|(p, q)| Preset::ProductPower { p, q }),
    ]
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::One), Just(Family::Two), Just(Family::Three)]
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::Row), Just(Axis::Column), Just(Axis::Double)]
}

/// Abscissa in `(0, π)` away from the poles of order `r`.
fn admissible(r: u32) -> impl Strategy<Value = f64> {
    (0.01f64..3.13).prop_filter("near a kernel pole", move |x| (r as f64 * x / 2.0).sin().abs() > 0.05)
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rhs_scales_linearly(p in preset(), fam in family(), ax in axis(), t in 0.0f64..50.0, m in 2u64..60, n in 2u64..60) {
        let c = p.build().unwrap();
        let fam = MajorantFamily::new(fam).with_horizon(512);
        let base = rhs(&c, &fam, ax, m, n).unwrap().value;
        let scaled = rhs(&c.scaled(t), &fam, ax, m, n).unwrap().value;
        prop_assert!(base >= 0.0);
        prop_assert!((scaled - t * base).abs() <= 1e-12 * t * base + 1e-300);
    }

    #[test]
    fn larger_horizon_never_lowers_family_three(p in preset(), ax in axis(), m in 1u64..40, n in 1u64..40, h in 64u64..256, extra in 1u64..256) {
        let c = p.build().unwrap();
        let small = rhs(&c, &MajorantFamily::new(Family::Three).with_horizon(h), ax, m, n).unwrap().value;
        let large = rhs(&c, &MajorantFamily::new(Family::Three).with_horizon(h + extra), ax, m, n).unwrap().value;
        prop_assert!(large >= small);
    }

    // needs p >= 1: slower decay makes the block sums grow with M
    #[test]
    fn decreasing_rows_attain_sup_at_start(pw in 1.0f64..3.0, m in 1u64..200, n in 1u64..20) {
        let c = Preset::ProductPower { p: pw, q: 2.0 }.build().unwrap();
        let fam = MajorantFamily::new(Family::Three).with_horizon(4096);
        let got = rhs(&c, &fam, Axis::Row, m, n).unwrap().value;
        let block: f64 = (m..=2 * m).map(|j| c.eval(j, n).re).sum();
        prop_assert!((got - block / m as f64).abs() <= 1e-13 * got);
    }

    #[test]
    fn fitted_constants_are_scale_invariant(p in preset(), fam in family(), t in 0.01f64..100.0, rr in 1i64..4) {
        let c = p.build().unwrap();
        let fam = MajorantFamily::new(fam).with_horizon(512);
        let r = DiffOrder::new(rr).unwrap();
        let grid = [(2, 2), (4, 8), (16, 4), (32, 32)];
        let a = check_membership(&c, r, &fam, &grid, &Axis::ALL, None).unwrap();
        let b = check_membership(&c.scaled(t), r, &fam, &grid, &Axis::ALL, None).unwrap();
        for ax in Axis::ALL {
            let (x, y) = (a.fitted(ax).unwrap(), b.fitted(ax).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * x.max(y), "{ax}: {x} vs {y}");
        }
    }

    #[test]
    fn adding_grid_points_never_lowers_constants(p in preset(), extra in prop::collection::vec((2u64..64, 2u64..64), 1..6)) {
        let c = p.build().unwrap();
        let fam = MajorantFamily::new(Family::Three).with_horizon(256);
        let r = DiffOrder::new(2).unwrap();
        let base = vec![(2, 2), (8, 8)];
        let mut grown = base.clone();
        grown.extend(extra);
        let a = check_membership(&c, r, &fam, &base, &Axis::ALL, None).unwrap();
        let b = check_membership(&c, r, &fam, &grown, &Axis::ALL, None).unwrap();
        for ax in Axis::ALL {
            prop_assert!(b.fitted(ax).unwrap() >= a.fitted(ax).unwrap());
        }
    }

    #[test]
    fn step_two_row_lhs_splits(p in preset(), m in 1u64..100, n in 1u64..50) {
        let c = p.build().unwrap();
        let (one, two) = (DiffOrder::new(1).unwrap(), DiffOrder::new(2).unwrap());
        let shifted: f64 = (m + 1..=2 * m).map(|j| delta_r0(&c, one, j, n).norm()).sum();
        let l2 = lhs(&c, two, Axis::Row, m, n);
        let l1 = lhs(&c, one, Axis::Row, m, n);
        prop_assert!(l2 <= (l1 + shifted) * (1.0 + 1e-12));
        for j in m..2 * m {
            let split = delta_r0(&c, one, j, n) + delta_r0(&c, one, j + 1, n);
            let scale = c.eval(j, n).norm() + c.eval(j + 2, n).norm() + c.eval(j + 1, n).norm();
            prop_assert!((delta_r0(&c, two, j, n) - split).norm() <= 4.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn nested_differences_commute(p in preset(), rr in 1i64..4, j in 1u64..500, k in 1u64..500) {
        let c = p.build().unwrap();
        let r = DiffOrder::new(rr).unwrap();
        let ru = rr as u64;
        let row_then_col = delta_0r(&c, r, j, k) - delta_0r(&c, r, j + ru, k);
        let col_then_row = delta_r0(&c, r, j, k) - delta_r0(&c, r, j, k + ru);
        let d = delta_rr(&c, r, j, k);
        let scale: f64 = [c.eval(j, k), c.eval(j + ru, k), c.eval(j, k + ru), c.eval(j + ru, k + ru)].iter().map(|v| v.norm()).sum();
        prop_assert!((row_then_col - d).norm() <= 4.0 * f64::EPSILON * scale);
        prop_assert!((col_then_row - d).norm() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn separable_eval_is_the_product(p in preset(), j in 1u64..100, k in 1u64..100) {
        let c = p.build().unwrap();
        let (a, b) = c.separable_parts().unwrap();
        let prod = a.eval(j) * b.eval(k);
        prop_assert!((c.eval(j, k) - prod).norm() <= 4.0 * f64::EPSILON * prod.norm());
    }

    #[test]
    fn one_dimensional_by_parts(vals in complex_vec(70), n in 1u64..30, len in 1u64..34, rr in 1u32..4, x in admissible(3)) {
        prop_assume!((rr as f64 * x / 2.0).sin().abs() > 0.05);
        let vals = Arc::new(vals);
        let a = SingleSequence::new("v", move |k| vals[k as usize - 1]);
        let m = n + len - 1;
        let direct = row_sum_direct(&a, n, m, x);
        let parts = row_sum_by_parts(&a, n, m, DiffOrder::new(rr as i64).unwrap(), x).unwrap();
        prop_assert!((parts - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
    }

    #[test]
    fn two_dimensional_by_parts(p in preset(), m in 1u64..40, dm in 0u64..64, n in 1u64..40, dn in 0u64..64, rr in 1i64..4, x in admissible(3), y in admissible(3)) {
        let r = DiffOrder::new(rr).unwrap();
        prop_assume!((rr as f64 * x / 2.0).sin().abs() > 0.05 && (rr as f64 * y / 2.0).sin().abs() > 0.05);
        let c = p.build().unwrap();
        let rect = Rect::new(m, m + dm, n, n + dn).unwrap();
        let direct = rect_sum_direct(&c, rect, x, y);
        let parts = rect_sum_parts(&c, rect, x, y, r).unwrap();
        prop_assert!((parts - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
    }

    #[test]
    fn separable_and_generic_rect_sums_agree(p in preset(), m in 1u64..50, dm in 0u64..80, n in 1u64..50, dn in 0u64..80, x in 0.0f64..std::f64::consts::PI, y in 0.0f64..std::f64::consts::PI) {
        let c = p.build().unwrap();
        let rect = Rect::new(m, m + dm, n, n + dn).unwrap();
        let fast = rect_sum_direct(&c, rect, x, y);
        let slow = rect_sum_direct(&c.without_separable(), rect, x, y);
        let scale: f64 = (m..=m + dm).flat_map(|j| (n..=n + dn).map(move |k| (j, k))).map(|(j, k)| c.eval(j, k).norm()).sum();
        prop_assert!((fast - slow).norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn mirrored_summands_change_sign_by_parity(j in 1u64..2000, k in 1u64..2000, x in 0.01f64..3.13, y in 0.01f64..3.13) {
        let s = |i: u64, t: f64| (i as f64 * t).sin();
        let parity = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = s(j, std::f64::consts::PI - x) * s(k, std::f64::consts::PI - y);
        let rhs = parity * s(j, x) * s(k, y);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (j + k) as f64);
    }
}

#[test]
fn slowly_decaying_rows_peak_late() {
    let c = Preset::ProductPower { p: 0.6, q: 2.0 }.build().unwrap();
    let fam = MajorantFamily::new(Family::Three).with_horizon(4096);
    let got = rhs(&c, &fam, Axis::Row, 1, 1).unwrap().value;
    let first: f64 = (1..=2).map(|j| c.eval(j, 1).re).sum();
    assert!(got > first);
}

#[test]
fn mirrored_rect_sum_matches_alternating_coefficients() {
    let c = Preset::OscillatingQuadratic.build().unwrap();
    let alt = {
        let c = c.clone();
        CoefficientSequence::new("alt", move |j, k| {
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            c.eval(j, k) * sign
        })
    };
    let rect = Rect::new(3, 90, 5, 70).unwrap();
    let (x, y) = (0.7, 2.2);
    let mirrored = rect_sum_direct(&c, rect, std::f64::consts::PI - x, std::f64::consts::PI - y);
    let flipped = rect_sum_direct(&alt, rect, x, y);
    assert!((mirrored - flipped).norm() <= 1e-12);
}
