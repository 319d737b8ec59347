use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use num_bigint::BigInt;
use serde_json::{Map, Value};

use super::{validate, CurveRecord, IngestError, Ingested, Quarantined};

const KNOWN_KEYS: [&str; 10] = [
    "level",
    "label",
    "number",
    "ainvs",
    "rank",
    "torsion",
    "sha_an",
    "isogeny_degrees",
    "tamagawa",
    "optimal",
];

/// Read one JSON object per line. Required keys: `level`, `label`,
/// `number`, `ainvs`, `rank`, `torsion`. Unknown keys land in `extras`.
///
/// `label` may be the class letters (`a`), the class label (`28042a`) or
/// the full curve label (`28042a1`). Coefficients outside the i64 range
/// must be written as decimal strings.
pub fn load_jsonl<R: BufRead>(reader: R) -> Result<Ingested, IngestError> {
    let mut out = Ingested::default();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| IngestError::parse(n, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|e| IngestError::parse(n, e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(IngestError::parse(n, "expected a JSON object"));
        };
        let record = from_object(obj, n)?;
        if !seen.insert(record.label()) {
            return Err(IngestError::DuplicateLabel(record.label()));
        }
        match validate(&record, n)? {
            Ok(()) => out.records.push(record),
            Err(error) => out.quarantined.push(Quarantined { record, error }),
        }
    }
    Ok(out)
}

fn from_object(mut obj: Map<String, Value>, n: usize) -> Result<CurveRecord, IngestError> {
    let err = |reason: String| IngestError::parse(n, reason);
    let mut take = |key: &str| obj.remove(key);
    let level = take("level")
        .and_then(|v| v.as_u64())
        .filter(|&l| l > 0)
        .ok_or_else(|| err("missing or invalid 'level'".into()))?;
    let number = take("number")
        .and_then(|v| v.as_u64())
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| err("missing or invalid 'number'".into()))?;
    let label = take("label")
        .and_then(|v| v.as_str().map(str::to_ascii_lowercase))
        .ok_or_else(|| err("missing or invalid 'label'".into()))?;
    let class = class_from_label(&label, level, number).ok_or_else(|| err(format!("label '{label}' does not match level/number")))?;
    let ainvs = match take("ainvs") {
        Some(Value::Array(items)) => {
            let coeffs = items
                .iter()
                .map(big_from_value)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err("non-integer coefficient".into()))?;
            let len = coeffs.len();
            <[BigInt; 5]>::try_from(coeffs).map_err(|_| err(format!("expected 5 coefficients, found {len}")))?
        }
        _ => return Err(err("missing or invalid 'ainvs'".into())),
    };
    let small = |v: Option<Value>, key: &str| {
        v.and_then(|v| v.as_u64())
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(|| err(format!("missing or invalid '{key}'")))
    };
    let rank = small(take("rank"), "rank")?;
    let torsion = small(take("torsion"), "torsion")?;
    let mut rec = CurveRecord::new(level, &class, number, ainvs, rank, torsion);
    if let Some(v) = take("sha_an").filter(|v| !v.is_null()) {
        rec.sha_an = Some(sha_from_value(&v).ok_or_else(|| err("invalid 'sha_an'".into()))?);
    }
    if let Some(v) = take("isogeny_degrees").filter(|v| !v.is_null()) {
        let degrees = v
            .as_array()
            .and_then(|a| a.iter().map(Value::as_u64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| err("invalid 'isogeny_degrees'".into()))?;
        rec.isogeny_degrees = Some(degrees);
    }
    if let Some(v) = take("tamagawa").filter(|v| !v.is_null()) {
        let map = v
            .as_object()
            .and_then(|m| {
                m.iter()
                    .map(|(p, c)| Some((p.parse::<u64>().ok()?, c.as_u64()?)))
                    .collect::<Option<BTreeMap<_, _>>>()
            })
            .ok_or_else(|| err("invalid 'tamagawa'".into()))?;
        rec.tamagawa = Some(map);
    }
    if let Some(v) = take("optimal").filter(|v| !v.is_null()) {
        rec.optimal = Some(v.as_bool().ok_or_else(|| err("invalid 'optimal'".into()))?);
    }
    debug_assert!(KNOWN_KEYS.iter().all(|k| !obj.contains_key(*k)));
    rec.extras = obj.into_iter().collect();
    Ok(rec)
}

fn class_from_label(label: &str, level: u64, number: u32) -> Option<String> {
    let prefix = level.to_string();
    let rest = label.strip_prefix(&prefix).unwrap_or(label);
    let letters: String = rest.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let suffix = &rest[letters.len()..];
    let digits_ok = suffix.is_empty() || suffix.parse::<u32>().ok() == Some(number);
    let starts_ok = rest.len() < label.len() || label.starts_with(|c: char| c.is_ascii_alphabetic());
    (!letters.is_empty() && digits_ok && starts_ok).then_some(letters)
}

fn big_from_value(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from)),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Database Sha values are integers, sometimes written as `9.0`.
fn sha_from_value(v: &Value) -> Option<u64> {
    if let Some(k) = v.as_u64() {
        return (k > 0).then_some(k);
    }
    let f = v.as_f64()?;
    let k = f.round();
    ((f - k).abs() < 1e-6 && k >= 1.0 && k < 1e15).then_some(k as u64)
}

fn big_to_value(b: &BigInt) -> Value {
    match i64::try_from(b) {
        Ok(k) => Value::from(k),
        Err(_) => Value::from(b.to_string()),
    }
}

/// The JSON-lines form of a record (one line, no trailing newline).
pub fn record_to_json(rec: &CurveRecord) -> String {
    let mut obj = Map::new();
    obj.insert("level".into(), rec.level.into());
    obj.insert("label".into(), rec.class_label().into());
    obj.insert("number".into(), rec.number.into());
    obj.insert("ainvs".into(), Value::Array(rec.ainvs.iter().map(big_to_value).collect()));
    obj.insert("rank".into(), rec.rank.into());
    obj.insert("torsion".into(), rec.torsion.into());
    if let Some(s) = rec.sha_an {
        obj.insert("sha_an".into(), s.into());
    }
    if let Some(d) = &rec.isogeny_degrees {
        obj.insert("isogeny_degrees".into(), d.clone().into());
    }
    if let Some(t) = &rec.tamagawa {
        let m: Map<String, Value> = t.iter().map(|(p, c)| (p.to_string(), Value::from(*c))).collect();
        obj.insert("tamagawa".into(), Value::Object(m));
    }
    if let Some(o) = rec.optimal {
        obj.insert("optimal".into(), o.into());
    }
    for (k, v) in &rec.extras {
        obj.insert(k.clone(), v.clone());
    }
    Value::Object(obj).to_string()
}
