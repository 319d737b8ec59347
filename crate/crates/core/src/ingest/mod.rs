//! Curve records from Cremona-style flat files and an enriched JSON-lines format.

mod allcurves;
mod jsonl;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub use allcurves::parse_allcurves;
pub use jsonl::{load_jsonl, record_to_json};

use crate::curve::{conductor, minimal_model, CurveError, WeierstrassModel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{label}: recomputed conductor {computed} differs from level {declared}")]
    ConductorMismatch {
        label: String,
        declared: u64,
        computed: u64,
    },
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("{label}: {source}")]
    Curve { label: String, source: CurveError },
}

impl IngestError {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        IngestError::Parse {
            line,
            reason: reason.into(),
        }
    }
}

/// Torsion orders that occur over Q.
pub const ALLOWED_TORSION: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub level: u64,
    /// Isogeny class letters, e.g. `a` or `bc`.
    pub class: String,
    pub number: u32,
    pub ainvs: [BigInt; 5],
    pub rank: u32,
    pub torsion: u32,
    pub sha_an: Option<u64>,
    pub isogeny_degrees: Option<Vec<u64>>,
    /// `p -> c_p` for the primes of bad reduction.
    pub tamagawa: Option<BTreeMap<u64, u64>>,
    pub optimal: Option<bool>,
    pub extras: BTreeMap<String, serde_json::Value>,
}

impl CurveRecord {
    pub fn new(level: u64, class: &str, number: u32, ainvs: [BigInt; 5], rank: u32, torsion: u32) -> Self {
        CurveRecord {
            level,
            class: class.to_string(),
            number,
            ainvs,
            rank,
            torsion,
            sha_an: None,
            isogeny_degrees: None,
            tamagawa: None,
            optimal: None,
            extras: BTreeMap::new(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}{}{}", self.level, self.class, self.number)
    }

    pub fn class_label(&self) -> String {
        format!("{}{}", self.level, self.class)
    }

    pub fn model(&self) -> Result<WeierstrassModel, CurveError> {
        WeierstrassModel::new(self.ainvs.clone())
    }

    /// Reduced minimal model; identical to `model()` for database curves.
    pub fn minimal(&self) -> Result<WeierstrassModel, CurveError> {
        minimal_model(&self.model()?)
    }

    /// The database optimality convention: an explicit flag if present,
    /// otherwise curve number 1 in its class.
    pub fn is_optimal(&self) -> bool {
        self.optimal.unwrap_or(self.number == 1)
    }
}

/// Normalize a label such as `28042A1` or `28042a1` to the lowercase form.
pub fn normalize_label(label: &str) -> String {
    label.trim().to_ascii_lowercase()
}

/// Records that parsed but failed validation, kept for auditing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quarantined {
    pub record: CurveRecord,
    pub error: IngestError,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ingested {
    pub records: Vec<CurveRecord>,
    pub quarantined: Vec<Quarantined>,
}

/// Structural problems are hard errors (outer `Err`); a conductor that
/// disagrees with the declared level is returned as the inner `Err` so the
/// caller can quarantine the record.
pub(crate) fn validate(record: &CurveRecord, line: usize) -> Result<Result<(), IngestError>, IngestError> {
    if record.number == 0 {
        return Err(IngestError::parse(line, "curve number must be at least 1"));
    }
    if !ALLOWED_TORSION.contains(&record.torsion) {
        return Err(IngestError::parse(line, format!("impossible torsion order {}", record.torsion)));
    }
    let label = record.label();
    let model = match record.minimal() {
        Ok(m) => m,
        Err(CurveError::SingularModel) => {
            return Err(IngestError::parse(line, "singular a-invariants"))
        }
        Err(source) => return Ok(Err(IngestError::Curve { label, source })),
    };
    match conductor(&model) {
        Ok(n) if n == record.level => Ok(Ok(())),
        Ok(computed) => Ok(Err(IngestError::ConductorMismatch {
            label,
            declared: record.level,
            computed,
        })),
        Err(source) => Ok(Err(IngestError::Curve { label, source })),
    }
}

/// All records from a set of paths, in the order given. Directories are
/// read file by file in name order; `.jsonl` files use the JSON-lines
/// reader, anything else the allcurves reader.
#[derive(Clone, Debug, Default)]
pub struct CurveDb {
    records: Vec<CurveRecord>,
    quarantined: Vec<Quarantined>,
    by_label: HashMap<String, usize>,
}

impl CurveDb {
    pub fn from_records(records: Vec<CurveRecord>) -> Result<Self, IngestError> {
        let mut db = CurveDb::default();
        db.extend(Ingested {
            records,
            quarantined: Vec::new(),
        })?;
        Ok(db)
    }

    pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<Self, IngestError> {
        let mut db = CurveDb::default();
        for path in paths {
            let path = path.as_ref();
            let io = |e: std::io::Error| IngestError::Io(path.display().to_string(), e.to_string());
            let meta = fs::metadata(path).map_err(io)?;
            let mut files = Vec::new();
            if meta.is_dir() {
                for entry in fs::read_dir(path).map_err(io)? {
                    let p = entry.map_err(io)?.path();
                    if p.is_file() {
                        files.push(p);
                    }
                }
                files.sort();
            } else {
                files.push(path.to_path_buf());
            }
            for file in files {
                let text = fs::read_to_string(&file)
                    .map_err(|e| IngestError::Io(file.display().to_string(), e.to_string()))?;
                let is_jsonl = file.extension().is_some_and(|e| e == "jsonl");
                let parsed = if is_jsonl {
                    load_jsonl(text.as_bytes())
                } else {
                    parse_allcurves(text.as_bytes())
                }
                .map_err(|e| match e {
                    IngestError::Parse { line, reason } => IngestError::Parse {
                        line,
                        reason: format!("{}: {reason}", file.display()),
                    },
                    other => other,
                })?;
                db.extend(parsed)?;
            }
        }
        Ok(db)
    }

    fn extend(&mut self, batch: Ingested) -> Result<(), IngestError> {
        for rec in batch.records {
            let label = rec.label();
            if self.by_label.contains_key(&label) {
                return Err(IngestError::DuplicateLabel(label));
            }
            self.by_label.insert(label, self.records.len());
            self.records.push(rec);
        }
        self.quarantined.extend(batch.quarantined);
        Ok(())
    }

    pub fn records(&self) -> &[CurveRecord] {
        &self.records
    }

    pub fn quarantined(&self) -> &[Quarantined] {
        &self.quarantined
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Look up `28042a1`, `28042A1`, or a bare class label `28042a` (which
    /// resolves to the optimal curve of the class).
    pub fn get(&self, label: &str) -> Option<&CurveRecord> {
        let key = normalize_label(label);
        if let Some(&i) = self.by_label.get(&key) {
            return Some(&self.records[i]);
        }
        self.records
            .iter()
            .filter(|r| r.class_label() == key && r.is_optimal())
            .min_by_key(|r| r.number)
    }

    pub fn at_level(&self, level: u64) -> impl Iterator<Item = &CurveRecord> {
        self.records.iter().filter(move |r| r.level == level)
    }

    /// Distinct levels in increasing order.
    pub fn levels(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.records.iter().map(|r| r.level).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Write a value as pretty JSON with a trailing newline, through a rename.
pub fn persist_golden<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let path = path.as_ref();
    let io = |e: std::io::Error| IngestError::Io(path.display().to_string(), e.to_string());
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| IngestError::Io(path.display().to_string(), e.to_string()))?;
    text.push('\n');
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn load_golden<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| IngestError::Io(path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| IngestError::parse(e.line(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        let r = CurveRecord::new(
            28042,
            "a",
            1,
            [1, -1, 0, -1367381, 615777525].map(BigInt::from),
            1,
            2,
        );
        assert_eq!(r.label(), "28042a1");
        assert_eq!(normalize_label("28042A1"), "28042a1");
        let db = CurveDb::from_records(vec![r.clone()]).unwrap();
        assert_eq!(db.get("28042A1"), Some(&r));
        assert_eq!(db.get("28042A"), Some(&r));
        assert!(db.get("28042b1").is_none());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = CurveRecord::new(11, "a", 1, [0, -1, 1, -10, -20].map(BigInt::from), 0, 5);
        assert_eq!(
            CurveDb::from_records(vec![r.clone(), r]).unwrap_err(),
            IngestError::DuplicateLabel("11a1".into())
        );
    }
}
