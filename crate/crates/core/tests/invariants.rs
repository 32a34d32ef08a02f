#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use proptest::prelude::*;

use dlv::constructions::{blow_up, double_cover, strict_transform, PointSpec};
use dlv::linsys::{h0_unique_member, ForcingConclusion, SectionCount};
use dlv::pipeline::{m_threshold, verify_instance, InstanceStatus, Tower};
use dlv::report;
use dlv::{SurfaceKind, SurfaceModel};

fn sym_model(n: usize, entries: &[i64]) -> SurfaceModel {
    let mut rows = vec![vec![BigInt::from(0); n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            rows[i][j] = BigInt::from(entries[k]);
            rows[j][i] = BigInt::from(entries[k]);
            k += 1;
        }
    }
    let mut b = SurfaceModel::builder("S", SurfaceKind::Other)
        .basis((0..n).map(|i| format!("b{i}")))
        .gram(rows);
    for i in 0..n {
        let mut c = vec![BigInt::from(0); n];
        c[i] = BigInt::from(1);
        b = b.curve(format!("b{i}"), c, "");
    }
    b.build().unwrap()
}

fn model_strategy() -> impl Strategy<Value = (SurfaceModel, Vec<i64>, Vec<i64>)> {
    (1usize..=4).prop_flat_map(|n| {
        let entries = n * (n + 1) / 2;
        (
            prop::collection::vec(-50i64..=50, entries),
            prop::collection::vec(-20i64..=20, n),
            prop::collection::vec(-20i64..=20, n),
        )
            .prop_map(move |(g, a, b)| (sym_model(n, &g), a, b))
    })
}

fn odd_n() -> impl Strategy<Value = u64> {
    (1u64..=30).prop_map(|k| 2 * k + 1)
}

proptest! {
    #[test]
    fn blow_up_preserves_pairings_and_adds_orthonormal_exceptionals(
        (s, a, b) in model_strategy(),
        points in 1usize..=3,
    ) {
        let specs: Vec<PointSpec> = (0..points)
            .map(|i| PointSpec::new(format!("p{i}"), format!("e{i}")))
            .collect();
        let (up, map) = blow_up(&s, "bl", &specs).unwrap();
        let da = s.class_from_i64(&a).unwrap();
        let db = s.class_from_i64(&b).unwrap();
        let pa = map.pullback(&da).unwrap();
        let pb = map.pullback(&db).unwrap();
        prop_assert_eq!(up.pair(&pa, &pb).unwrap(), s.pair(&da, &db).unwrap());
        let es = up.exceptional_classes();
        for (i, ei) in es.iter().enumerate() {
            prop_assert_eq!(up.pair(ei, &pa).unwrap(), BigInt::from(0));
            for (j, ej) in es.iter().enumerate() {
                let want = if i == j { -1 } else { 0 };
                prop_assert_eq!(up.pair(ei, ej).unwrap(), BigInt::from(want));
            }
        }
    }

    #[test]
    fn double_cover_doubles_pairings((s, a, b) in model_strategy()) {
        let da = s.class_from_i64(&a).unwrap();
        let db = s.class_from_i64(&b).unwrap();
        let (x, f) = double_cover(&s, "f", &da).unwrap();
        let lhs = x.pair(&f.pullback(&da).unwrap(), &f.pullback(&db).unwrap()).unwrap();
        prop_assert_eq!(lhs, BigInt::from(2) * s.pair(&da, &db).unwrap());
    }

    #[test]
    fn strict_transform_self_intersection_drops_by_mult_squares(
        (s, a, _b) in model_strategy(),
        mults in prop::collection::vec(0i64..=4, 1..=3),
    ) {
        let specs: Vec<PointSpec> = (0..mults.len())
            .map(|i| PointSpec::new(format!("p{i}"), format!("e{i}")))
            .collect();
        let (up, map) = blow_up(&s, "bl", &specs).unwrap();
        let d = s.class_from_i64(&a).unwrap();
        let ms: Vec<BigInt> = mults.iter().map(|&k| BigInt::from(k)).collect();
        let st = strict_transform(&map, &d, &ms).unwrap();
        let drop: i64 = mults.iter().map(|k| k * k).sum();
        prop_assert_eq!(up.self_int(&st).unwrap(), s.self_int(&d).unwrap() - drop);
    }

    #[test]
    fn forcing_uses_exactly_the_registry_measure(n in odd_n(), m in 1u64..=40) {
        let t = Tower::new(n).unwrap();
        let l = t.l_n.scale(m);
        let trace = t.force_on_y_prime(m).unwrap();
        let measure = t.y_prime.registry_measure(&l).unwrap().unwrap();
        prop_assert_eq!(BigInt::from(trace.steps.len()), measure);
        prop_assert!(trace.steps.iter().all(|s| s.pairing < BigInt::from(0)));
        prop_assert!(matches!(trace.conclusion, ForcingConclusion::UniqueMember(_)));
        prop_assert_eq!(h0_unique_member(&t.y_prime, &trace).value(), SectionCount::Exactly(1));
    }

    #[test]
    fn status_flips_exactly_past_the_threshold(n in odd_n(), extra in 0u64..=5) {
        let threshold = m_threshold(n).unwrap();
        let at = verify_instance(n, threshold).unwrap();
        prop_assert_eq!(at.status, InstanceStatus::Verified);
        let past = verify_instance(n, threshold + 1 + extra).unwrap();
        prop_assert_eq!(past.status, InstanceStatus::BeyondThreshold);
        prop_assert!(past.certificate_value >= BigInt::from(0));
    }
}

#[test]
fn reports_validate_against_the_schema() {
    for n in [3, 9, 15] {
        let r = dlv::pipeline::verify_all(n).unwrap();
        let json = report::to_json(&report::report_doc(&r)).unwrap();
        report::validate_str(&json).unwrap();
    }
    let sweep = dlv::pipeline::sweep(&[3, 5]).unwrap();
    report::validate_str(&report::to_json(&report::sweep_doc(&sweep)).unwrap()).unwrap();
}

#[test]
fn schema_rejects_a_tampered_report() {
    let r = dlv::pipeline::verify_all(3).unwrap();
    let mut v: serde_json::Value =
        serde_json::from_str(&report::to_json(&report::report_doc(&r)).unwrap()).unwrap();
    v["instances"][0]["status"] = "Maybe".into();
    assert!(report::validate(&v).is_err());
}

#[test]
fn huge_n_stays_exact() {
    let n = 10_001u64;
    let threshold = m_threshold(n).unwrap();
    assert_eq!(threshold, 25_005_001);
    let low = verify_instance(n, 2).unwrap();
    assert_eq!(low.status, InstanceStatus::Verified);
    assert_eq!(low.certificate_value, BigInt::from(4 - 100_020_001i64));
    let past = verify_instance(n, threshold + 1).unwrap();
    assert_eq!(past.status, InstanceStatus::BeyondThreshold);
    assert_eq!(past.certificate_value, BigInt::from(3));
}
