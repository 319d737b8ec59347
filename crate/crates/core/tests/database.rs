//! Cross-checks of the curve routines against the bundled curve database.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use shavis_core::curve::{local_data_all, minimal_model, torsion_order, Kodaira, ReductionKind};
use shavis_core::ingest::{CurveDb, CurveRecord};

fn db_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ecdata")
}

fn db() -> &'static CurveDb {
    static DB: OnceLock<CurveDb> = OnceLock::new();
    DB.get_or_init(|| CurveDb::load(&[db_path()]).expect("database loads"))
}

fn extra_map(rec: &CurveRecord, key: &str) -> BTreeMap<u64, String> {
    rec.extras[key]
        .as_object()
        .unwrap()
        .iter()
        .map(|(p, v)| {
            let s = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
            (p.parse().unwrap(), s)
        })
        .collect()
}

#[test]
fn every_record_validates() {
    let db = db();
    assert!(db.len() > 5000, "{}", db.len());
    assert!(db.quarantined().is_empty(), "{:?}", db.quarantined().first());
}

#[test]
fn local_data_matches_database() {
    let mut kinds = BTreeMap::new();
    for rec in db().records() {
        let model = rec.model().unwrap();
        assert_eq!(minimal_model(&model).unwrap(), model, "{} not minimal", rec.label());
        let local = local_data_all(&model).unwrap();
        let tam: BTreeMap<u64, u64> = local.iter().map(|l| (l.p, l.tamagawa)).collect();
        assert_eq!(Some(&tam), rec.tamagawa.as_ref(), "{}", rec.label());
        let kod = extra_map(rec, "kodaira");
        let fexp = extra_map(rec, "conductor_exponents");
        for l in &local {
            assert_eq!(l.kodaira, kod[&l.p].parse::<Kodaira>().unwrap(), "{} at {}", rec.label(), l.p);
            assert_eq!(l.conductor_exponent.to_string(), fexp[&l.p], "{} at {}", rec.label(), l.p);
            *kinds.entry(l.kodaira.to_string().replace(|c: char| c.is_ascii_digit(), "n")).or_insert(0) += 1;
        }
    }
    for k in ["In", "In*", "II", "III", "IV", "IV*", "III*", "II*"] {
        assert!(kinds.contains_key(k), "no {k} in corpus: {kinds:?}");
    }
}

#[test]
fn torsion_matches_database() {
    for rec in db().records() {
        let t = torsion_order(&rec.model().unwrap());
        assert_eq!(t.certified_order, Some(u64::from(rec.torsion)), "{}", rec.label());
    }
}

#[test]
fn reduction_kinds_present() {
    let rec = db().get("28042a1").unwrap();
    let local = local_data_all(&rec.model().unwrap()).unwrap();
    assert!(local.iter().all(|l| l.reduction != ReductionKind::Good));
}
