//! Valuation bookkeeping for the BSD formula and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arith::{factor_u64, valuation_u64};
use crate::curve::{local_data_all, torsion_order, CurveError};
use crate::gate::{Checklist, Prediction, Status, VisibilityVerdict};
use crate::ingest::CurveRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManinStatus {
    /// p does not divide the Manin constant.
    ForcedTrivial,
    Unknown,
}

/// `ForcedTrivial` exactly when `p^2` does not divide `4N`.
pub fn manin_constant_status(n: u64, p: u64) -> ManinStatus {
    let four_n = 4 * n as u128;
    if four_n % (p as u128 * p as u128) != 0 {
        ManinStatus::ForcedTrivial
    } else {
        ManinStatus::Unknown
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsdSnapshot {
    pub label: String,
    pub level: u64,
    pub rank: u32,
    pub torsion_order: u64,
    /// `p -> c_p` for every prime `p | N`.
    pub tamagawa: BTreeMap<u64, u64>,
    /// Analytic order of Sha over Q as stored in the database.
    pub sha_analytic_q: Option<u64>,
    pub manin_status: BTreeMap<u64, ManinStatus>,
}

impl BsdSnapshot {
    /// Snapshot from a record: Tamagawa numbers and torsion are recomputed,
    /// Sha is taken from the record. Manin status is filled for `primes`.
    pub fn from_record(rec: &CurveRecord, primes: &[u64]) -> Result<Self, CurveError> {
        let model = rec.minimal()?;
        let tamagawa = local_data_all(&model)?
            .into_iter()
            .map(|l| (l.p, l.tamagawa))
            .collect();
        let torsion = torsion_order(&model)
            .certified_order
            .unwrap_or(u64::from(rec.torsion));
        Ok(BsdSnapshot {
            label: rec.label(),
            level: rec.level,
            rank: rec.rank,
            torsion_order: torsion,
            tamagawa,
            sha_analytic_q: rec.sha_an,
            manin_status: primes
                .iter()
                .map(|&p| (p, manin_constant_status(rec.level, p)))
                .collect(),
        })
    }

    pub fn tamagawa_product(&self) -> u64 {
        self.tamagawa.values().product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhsValuations {
    pub manin: u32,
    pub manin_status: ManinStatus,
    pub tamagawa_product: u32,
    /// ord_q of the Sha order itself. The formula carries |Sha|^(1/2); no
    /// halving is applied here.
    pub sha: u32,
    pub total: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceMode {
    OverQDatabase,
    Unavailable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityVerdict {
    pub verdict: VisibilityVerdict,
    pub rhs_valuations: Option<RhsValuations>,
    pub evidence_mode: EvidenceMode,
    pub conclusion: String,
}

impl DivisibilityVerdict {
    pub fn q(&self) -> u64 {
        self.verdict.q
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("snapshot for {snapshot} does not belong to verdict curve {verdict}")]
    SnapshotMismatch { verdict: String, snapshot: String },
    #[error("missing Sha or Tamagawa data for {0}")]
    MissingSnapshot(String),
    #[error("report parse error: {0}")]
    Parse(String),
}

/// Compare the prediction against over-Q data. A missing snapshot or Sha
/// value gives `EvidenceMode::Unavailable` rather than an error.
pub fn bsd_divisibility_verdict(
    v: &VisibilityVerdict,
    snap: Option<&BsdSnapshot>,
) -> Result<DivisibilityVerdict, LedgerError> {
    let q = v.q;
    let prefix = match v.prediction {
        Prediction::PredictsDivisibility => String::new(),
        Prediction::NoPrediction => {
            let failed: Vec<&str> = v.failed().collect();
            format!("no prediction (failed: {}); ", failed.join(", "))
        }
    };
    let snap = match snap {
        Some(s) if s.label != v.label_e => {
            return Err(LedgerError::SnapshotMismatch {
                verdict: v.label_e.clone(),
                snapshot: s.label.clone(),
            })
        }
        Some(s) if s.sha_analytic_q.is_some() && !s.tamagawa.is_empty() => s,
        _ => {
            return Ok(DivisibilityVerdict {
                verdict: v.clone(),
                rhs_valuations: None,
                evidence_mode: EvidenceMode::Unavailable,
                conclusion: format!(
                    "{prefix}untestable: {}",
                    LedgerError::MissingSnapshot(v.label_e.clone())
                ),
            })
        }
    };
    let manin_status = manin_constant_status(v.level, q);
    let manin = 0;
    let tam = snap.tamagawa.values().map(|&c| valuation_u64(c, q)).sum::<u32>();
    let sha = valuation_u64(snap.sha_analytic_q.expect("checked above"), q);
    let rhs = RhsValuations {
        manin,
        manin_status,
        tamagawa_product: tam,
        sha,
        total: manin + tam + sha,
    };
    let manin_note = match manin_status {
        ManinStatus::ForcedTrivial => format!("{q}^2 does not divide 4N so q does not divide the Manin constant"),
        ManinStatus::Unknown => "Manin constant valuation unknown, counted as 0".to_string(),
    };
    let body = if rhs.total == 0 {
        format!(
            "not corroborated by over-Q data: ord_{q}(prod c_p) = 0 and ord_{q}(Sha(E/Q)) = 0; this does not decide the statement over K"
        )
    } else {
        let via = match (tam > 0, sha > 0) {
            (true, true) => "the Tamagawa and Sha factors",
            (true, false) => "the Tamagawa factor (q divides prod c_p or the Sha term)",
            _ => "the Sha factor",
        };
        format!(
            "consistent with over-Q data via {via}: ord_{q}(prod c_p) = {tam}, ord_{q}(Sha(E/Q)) = {sha} from |Sha| = {}; over-Q evidence only, the formula uses |Sha(E/K)|^(1/2)",
            snap.sha_analytic_q.expect("checked above")
        )
    };
    Ok(DivisibilityVerdict {
        verdict: v.clone(),
        rhs_valuations: Some(rhs),
        evidence_mode: EvidenceMode::OverQDatabase,
        conclusion: format!("{prefix}{body}; {manin_note}"),
    })
}

/// One row of the JSON report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub level: u64,
    #[serde(rename = "labelE")]
    pub label_e: String,
    #[serde(rename = "labelF")]
    pub label_f: String,
    pub q: u64,
    pub checklist: Checklist,
    pub rhs_valuations: Option<RhsValuations>,
    pub evidence_mode: EvidenceMode,
    pub conclusion: String,
}

impl From<&DivisibilityVerdict> for ReportRow {
    fn from(d: &DivisibilityVerdict) -> Self {
        ReportRow {
            level: d.verdict.level,
            label_e: d.verdict.label_e.clone(),
            label_f: d.verdict.label_f.clone(),
            q: d.verdict.q,
            checklist: d.verdict.checklist.clone(),
            rhs_valuations: d.rhs_valuations,
            evidence_mode: d.evidence_mode,
            conclusion: d.conclusion.clone(),
        }
    }
}

impl From<ReportRow> for DivisibilityVerdict {
    fn from(r: ReportRow) -> Self {
        DivisibilityVerdict {
            verdict: VisibilityVerdict::from_checklist(&r.label_e, &r.label_f, r.level, r.q, r.checklist),
            rhs_valuations: r.rhs_valuations,
            evidence_mode: r.evidence_mode,
            conclusion: r.conclusion,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

fn sorted(verdicts: &[DivisibilityVerdict]) -> Vec<&DivisibilityVerdict> {
    let mut v: Vec<&DivisibilityVerdict> = verdicts.iter().collect();
    v.sort_by(|a, b| {
        (a.verdict.level, &a.verdict.label_e, &a.verdict.label_f, a.verdict.q)
            .cmp(&(b.verdict.level, &b.verdict.label_e, &b.verdict.label_f, b.verdict.q))
    });
    v
}

pub fn render_report(verdicts: &[DivisibilityVerdict], format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => render_json(verdicts),
        ReportFormat::Text => render_text(verdicts),
    }
}

fn render_json(verdicts: &[DivisibilityVerdict]) -> String {
    let rows: Vec<ReportRow> = sorted(verdicts).into_iter().map(ReportRow::from).collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("report rows serialize");
    s.push('\n');
    s
}

fn status_summary(c: &Checklist) -> String {
    let count = |s: Status| c.values().filter(|x| x.status == s).count();
    format!(
        "{}v/{}f/{}a/{}p",
        count(Status::Verified),
        count(Status::Failed),
        count(Status::Assumed),
        count(Status::Partial)
    )
}

fn render_text(verdicts: &[DivisibilityVerdict]) -> String {
    let mut out = format!(
        "{:<8} {:<10} {:<10} {:>3} {:<12} {:<11} {:>4} {:>4} {:<8} {}\n",
        "LEVEL", "E", "F", "Q", "CHECKLIST", "PREDICTION", "TAM", "SHA", "MODE", "CONCLUSION"
    );
    for d in sorted(verdicts) {
        let v = &d.verdict;
        let (tam, sha) = d
            .rhs_valuations
            .map_or(("-".to_string(), "-".to_string()), |r| {
                (r.tamagawa_product.to_string(), r.sha.to_string())
            });
        let prediction = match v.prediction {
            Prediction::PredictsDivisibility => "divides",
            Prediction::NoPrediction => "none",
        };
        let mode = match d.evidence_mode {
            EvidenceMode::OverQDatabase => "over_q",
            EvidenceMode::Unavailable => "none",
        };
        let _ = writeln!(
            out,
            "{:<8} {:<10} {:<10} {:>3} {:<12} {:<11} {:>4} {:>4} {:<8} {}",
            v.level,
            v.label_e,
            v.label_f,
            v.q,
            status_summary(&v.checklist),
            prediction,
            tam,
            sha,
            mode,
            d.conclusion
        );
    }
    out
}

/// Inverse of the JSON rendering.
pub fn parse_report(json: &str) -> Result<Vec<DivisibilityVerdict>, LedgerError> {
    let rows: Vec<ReportRow> = serde_json::from_str(json).map_err(|e| LedgerError::Parse(e.to_string()))?;
    Ok(rows.into_iter().map(DivisibilityVerdict::from).collect())
}

/// Primes dividing `n`, as used for Manin bookkeeping.
pub fn level_primes(n: u64) -> Vec<u64> {
    factor_u64(n).into_iter().map(|(p, _)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::ConditionStatus;

    #[test]
    fn manin_examples() {
        assert_eq!(manin_constant_status(28042, 3), ManinStatus::ForcedTrivial);
        assert_eq!(manin_constant_status(1, 2), ManinStatus::Unknown);
        assert_eq!(manin_constant_status(50, 5), ManinStatus::Unknown);
        assert_eq!(manin_constant_status(11, 2), ManinStatus::Unknown);
        assert_eq!(manin_constant_status(11, 3), ManinStatus::ForcedTrivial);
    }

    fn verdict(q: u64) -> VisibilityVerdict {
        let mut c = Checklist::new();
        c.insert(
            "01_q_odd_prime".into(),
            ConditionStatus {
                status: Status::Verified,
                evidence: "q".into(),
                citation: "c".into(),
            },
        );
        VisibilityVerdict::from_checklist("100a1", "100b1", 100, q, c)
    }

    fn snap(tamagawa: &[(u64, u64)], sha: Option<u64>) -> BsdSnapshot {
        BsdSnapshot {
            label: "100a1".into(),
            level: 100,
            rank: 1,
            torsion_order: 1,
            tamagawa: tamagawa.iter().copied().collect(),
            sha_analytic_q: sha,
            manin_status: BTreeMap::new(),
        }
    }

    #[test]
    fn tamagawa_factor_corroborates() {
        let d = bsd_divisibility_verdict(&verdict(3), Some(&snap(&[(2, 3), (5, 1)], Some(1)))).unwrap();
        let r = d.rhs_valuations.unwrap();
        assert_eq!((r.tamagawa_product, r.sha, r.total), (1, 0, 1));
        assert!(d.conclusion.contains("Tamagawa factor"));
    }

    #[test]
    fn missing_sha_is_unavailable() {
        let d = bsd_divisibility_verdict(&verdict(3), Some(&snap(&[(2, 1)], None))).unwrap();
        assert_eq!(d.evidence_mode, EvidenceMode::Unavailable);
        assert!(d.rhs_valuations.is_none());
        let d = bsd_divisibility_verdict(&verdict(3), None).unwrap();
        assert_eq!(d.evidence_mode, EvidenceMode::Unavailable);
    }

    #[test]
    fn mismatched_snapshot() {
        let mut s = snap(&[(2, 1)], Some(1));
        s.label = "other".into();
        assert!(matches!(
            bsd_divisibility_verdict(&verdict(3), Some(&s)),
            Err(LedgerError::SnapshotMismatch { .. })
        ));
    }

    #[test]
    fn empty_reports() {
        assert_eq!(render_report(&[], ReportFormat::Json), "[]\n");
        assert_eq!(render_report(&[], ReportFormat::Text).lines().count(), 1);
    }

    #[test]
    fn json_round_trip_and_order() {
        let a = bsd_divisibility_verdict(&verdict(5), Some(&snap(&[(2, 5)], Some(25)))).unwrap();
        let b = bsd_divisibility_verdict(&verdict(3), Some(&snap(&[(2, 1)], Some(9)))).unwrap();
        let json = render_report(&[a.clone(), b.clone()], ReportFormat::Json);
        let back = parse_report(&json).unwrap();
        assert_eq!(back, vec![b, a]);
    }
}
