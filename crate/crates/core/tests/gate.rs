use std::path::PathBuf;
use std::sync::OnceLock;

use proptest::prelude::*;
use shavis_core::gate::{
    check_level_lowering, evaluate_corollary, find_heegner_discriminant, is_fundamental_discriminant, kronecker_symbol,
    scan_pairs, GateContext, HeegnerField, GateError, Prediction, ScanOptions, Status, CONGRUENCE, HEEGNER, J0_TORSION,
    LEVEL_LOWERING, MULTIPLICITY_ONE,
};
use shavis_core::hecke::{congruence_modulus, CoefficientPolicy};
use shavis_core::ingest::CurveDb;

fn db() -> &'static CurveDb {
    static DB: OnceLock<CurveDb> = OnceLock::new();
    DB.get_or_init(|| {
        CurveDb::load(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ecdata")]).expect("database loads")
    })
}

#[test]
fn heegner_discriminants() {
    // Least D, cross-checked with a PARI search.
    for (n, d) in [(1, -7), (11, -7), (37, -7), (389, -7), (5077, -7), (4006, -7), (14, -31), (28042, -31)] {
        let h = find_heegner_discriminant(n, 10_000).unwrap();
        assert_eq!(h.discriminant, d, "N = {n}");
        assert!(h.is_valid_for(n));
    }
    let h = find_heegner_discriminant(28042, 10_000).unwrap();
    assert!(h.discriminant < 0 && h.discriminant != -3 && h.discriminant != -4);
    assert!(is_fundamental_discriminant(h.discriminant));
    for p in [2, 7, 2003] {
        assert_eq!(kronecker_symbol(h.discriminant, p), 1);
        assert_eq!(h.splitting_witness[&p], 1);
    }
}

#[test]
fn verdict_for_28042() {
    let db = db();
    let ctx = GateContext::new(db);
    let (e, f) = (db.get("28042a1").unwrap(), db.get("28042b1").unwrap());
    let bound = ctx.bound_for(28042);
    assert_eq!(bound, 8016);
    let cand = congruence_modulus(&ctx.table(e, bound).unwrap(), &ctx.table(f, bound).unwrap(), CoefficientPolicy::AllPrimes)
        .unwrap();
    assert_eq!(cand.modulus, 3);
    assert!(cand.certified);
    let v = evaluate_corollary(e, f, 3, &cand, &ctx).unwrap();
    assert_eq!(v.prediction, Prediction::PredictsDivisibility);
    assert_eq!(v.failed().count(), 0);
    assert_eq!(v.checklist[CONGRUENCE].status, Status::Verified);
    assert_eq!(v.checklist[J0_TORSION].status, Status::Assumed);
    assert_eq!(v.checklist[LEVEL_LOWERING].status, Status::Partial);
    assert_eq!(v.checklist[MULTIPLICITY_ONE].status, Status::Verified);
    assert!(v.checklist[HEEGNER].evidence.starts_with("D = -31"));
    assert!(v.predicted_statement.contains("sqrt(-31)"));

    assert_eq!(
        evaluate_corollary(e, f, 5, &cand, &ctx),
        Err(GateError::NotCongruent { q: 5, modulus: 3 })
    );
    let other = db.get("11a1").unwrap();
    assert_eq!(
        evaluate_corollary(e, other, 3, &cand, &ctx),
        Err(GateError::LevelMismatch(28042, 11))
    );
}

#[test]
fn level_lowering_examines_divisor_levels() {
    let db = db();
    let ctx = GateContext::new(db);
    let s = check_level_lowering(db.get("28042a1").unwrap(), 3, &ctx).unwrap();
    assert_eq!(s.status, Status::Partial);
    assert!(s.evidence.contains("[14, 4006, 14021]"), "{}", s.evidence);
    // 11a1 has no lower level at all.
    let s = check_level_lowering(db.get("11a1").unwrap(), 5, &ctx).unwrap();
    assert_eq!(s.status, Status::Partial);
}

#[test]
fn scan_finds_the_pair() {
    let db = db();
    let ctx = GateContext::new(db);
    let opts = ScanOptions {
        min_level: 28042,
        max_level: 28042,
        ..ScanOptions::default()
    };
    let out = scan_pairs(&ctx, &opts);
    assert!(out.issues.is_empty(), "{:?}", out.issues);
    let keys: Vec<(&str, &str, u64)> = out.verdicts.iter().map(|v| (v.label_e.as_str(), v.label_f.as_str(), v.q)).collect();
    assert!(keys.contains(&("28042a1", "28042b1", 3)), "{keys:?}");
    // rank 1: a, d, e; rank >= 2: b, c. Every pair is either a verdict or non-congruent.
    let pairs: std::collections::BTreeSet<(&str, &str)> = out
        .verdicts
        .iter()
        .map(|v| (v.label_e.as_str(), v.label_f.as_str()))
        .chain(out.non_congruent.iter().map(|(_, a, b, _)| (a.as_str(), b.as_str())))
        .collect();
    assert_eq!(pairs.len(), 6);
}

#[test]
fn scan_without_pairs() {
    let db = db();
    let ctx = GateContext::new(db).with_bound_cap(50);
    let opts = ScanOptions {
        min_level: 11,
        max_level: 11,
        ..ScanOptions::default()
    };
    assert_eq!(scan_pairs(&ctx, &opts), Default::default());
}

#[test]
fn scan_is_deterministic() {
    let db = db();
    let ctx = GateContext::new(db).with_bound_cap(200);
    let opts = ScanOptions {
        min_level: 1,
        max_level: 1000,
        ..ScanOptions::default()
    };
    let a = scan_pairs(&ctx, &opts);
    let b = scan_pairs(&ctx, &opts);
    assert_eq!(a, b);
    let mut sorted = a.verdicts.clone();
    sorted.sort_by(|x, y| (x.level, &x.label_e, &x.label_f, x.q).cmp(&(y.level, &y.label_e, &y.label_f, y.q)));
    assert_eq!(sorted, a.verdicts);
}

fn valid(d: i64, n: u64) -> bool {
    HeegnerField {
        discriminant: d,
        splitting_witness: Default::default(),
    }
    .is_valid_for(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kronecker_is_multiplicative_in_n(d in -500i64..500, m in 1u64..400, n in 1u64..400) {
        prop_assert_eq!(kronecker_symbol(d, m * n), kronecker_symbol(d, m) * kronecker_symbol(d, n));
    }

    #[test]
    fn kronecker_is_multiplicative_in_d(a in -200i64..200, b in -200i64..200, n in 1u64..300) {
        prop_assert_eq!(kronecker_symbol(a * b, n), kronecker_symbol(a, n) * kronecker_symbol(b, n));
    }

    #[test]
    fn heegner_result_is_valid(n in 1u64..5000) {
        let h = find_heegner_discriminant(n, 1_000_000).unwrap();
        prop_assert!(h.is_valid_for(n));
        for k in 5..h.discriminant.unsigned_abs() {
            let d = -(k as i64);
            prop_assert!(!valid(d, n));
        }
    }
}
