//! Hypothesis checks for the visibility corollary and the level-wide pair scan.

mod heegner;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use heegner::{
    find_heegner_discriminant, is_fundamental_discriminant, kronecker_symbol, HeegnerField,
    DEFAULT_HEEGNER_CEILING,
};

use crate::arith::{factor_u64, is_prime};
use crate::curve::{torsion_order, CurveError};
use crate::hecke::{
    build_trace_table, congruence_modulus, sturm_bound, Certification, CoefficientPolicy,
    CongruenceCandidate, HeckeError, TraceCache, TraceTable,
};
use crate::ingest::{CurveDb, CurveRecord};

/// Primes `q` for which some elliptic curve over Q has a rational q-isogeny.
pub const ISOGENY_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 37, 43, 67, 163];

/// Default cap on the coefficient bound used by scans.
pub const DEFAULT_BOUND_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GateError {
    #[error("no Heegner discriminant for level {level} with |D| <= {ceiling}")]
    SearchExhausted { level: u64, ceiling: u64 },
    #[error("{q} does not divide the congruence modulus {modulus}")]
    NotCongruent { q: u64, modulus: u64 },
    #[error("curves have different levels ({0} vs {1})")]
    LevelMismatch(u64, u64),
    #[error("unknown curve label {0}")]
    UnknownLabel(String),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Failed,
    Assumed,
    Partial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionStatus {
    pub status: Status,
    pub evidence: String,
    pub citation: String,
}

impl ConditionStatus {
    fn new(status: Status, evidence: impl Into<String>, citation: &str) -> Self {
        ConditionStatus {
            status,
            evidence: evidence.into(),
            citation: citation.to_string(),
        }
    }
}

fn verified_if(ok: bool) -> Status {
    if ok {
        Status::Verified
    } else {
        Status::Failed
    }
}

/// Worst status wins: failed, then assumed, then partial, then verified.
fn combine(a: Status, b: Status) -> Status {
    let rank = |s: Status| match s {
        Status::Failed => 3,
        Status::Assumed => 2,
        Status::Partial => 1,
        Status::Verified => 0,
    };
    if rank(a) >= rank(b) {
        a
    } else {
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    PredictsDivisibility,
    NoPrediction,
}

pub type Checklist = BTreeMap<String, ConditionStatus>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibilityVerdict {
    pub label_e: String,
    pub label_f: String,
    pub level: u64,
    pub q: u64,
    pub checklist: Checklist,
    pub prediction: Prediction,
    pub predicted_statement: String,
}

impl VisibilityVerdict {
    /// Assemble a verdict; prediction and statement follow from the checklist.
    pub fn from_checklist(label_e: &str, label_f: &str, level: u64, q: u64, checklist: Checklist) -> Self {
        let failed: Vec<&str> = checklist
            .iter()
            .filter(|(_, c)| c.status == Status::Failed)
            .map(|(k, _)| k.as_str())
            .collect();
        let (prediction, predicted_statement) = if failed.is_empty() {
            let field = checklist
                .get(HEEGNER)
                .and_then(|c| c.evidence.split_whitespace().nth(2))
                .map(|d| format!(" with K = Q(sqrt({}))", d.trim_end_matches(';')))
                .unwrap_or_default();
            (
                Prediction::PredictsDivisibility,
                format!(
                    "q = {q} divides the Birch and Swinnerton-Dyer conjectural order of Sha({label_e}/K){field}"
                ),
            )
        } else {
            (
                Prediction::NoPrediction,
                format!("no prediction; failed: {}", failed.join(", ")),
            )
        };
        VisibilityVerdict {
            label_e: label_e.to_string(),
            label_f: label_f.to_string(),
            level,
            q,
            checklist,
            prediction,
            predicted_statement,
        }
    }

    pub fn failed(&self) -> impl Iterator<Item = &str> {
        self.checklist
            .iter()
            .filter(|(_, c)| c.status == Status::Failed)
            .map(|(k, _)| k.as_str())
    }

    fn sort_key(&self) -> (u64, &str, &str, u64) {
        (self.level, &self.label_e, &self.label_f, self.q)
    }
}

pub const CONGRUENCE: &str = "00_congruence_mod_q";
pub const Q_ODD_PRIME: &str = "01_q_odd_prime";
pub const Q_SQUARED: &str = "02_q_squared_not_dividing_level";
pub const RANK_E: &str = "03_rank_e_one";
pub const RANK_F: &str = "04_rank_f_at_least_two";
pub const IRREDUCIBLE: &str = "05_irreducible_mod_q";
pub const TORSION: &str = "06_q_coprime_to_torsion";
pub const J0_TORSION: &str = "07_q_coprime_to_j0_torsion_over_k";
pub const LEVEL_LOWERING: &str = "08_no_level_lowering";
pub const P_MINUS_ONE: &str = "09_q_coprime_to_p_minus_one";
pub const HEEGNER: &str = "10_heegner_field";
pub const MULTIPLICITY_ONE: &str = "11_multiplicity_one";
pub const ORDER_ONE: &str = "12_l_function_order_one_over_k";

/// Shared inputs for the checks.
#[derive(Clone, Copy)]
pub struct GateContext<'a> {
    pub db: &'a CurveDb,
    pub cache: Option<&'a TraceCache>,
    pub bound_cap: u64,
    pub heegner_ceiling: u64,
}

impl<'a> GateContext<'a> {
    pub fn new(db: &'a CurveDb) -> Self {
        GateContext {
            db,
            cache: None,
            bound_cap: DEFAULT_BOUND_CAP,
            heegner_ceiling: DEFAULT_HEEGNER_CEILING,
        }
    }

    pub fn with_cache(mut self, cache: &'a TraceCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_bound_cap(mut self, cap: u64) -> Self {
        self.bound_cap = cap.max(1);
        self
    }

    /// min(Sturm bound, cap), never below 2 so that every table has a prime.
    pub fn bound_for(&self, level: u64) -> u64 {
        sturm_bound(level).min(self.bound_cap).max(2)
    }

    pub fn table(&self, rec: &CurveRecord, bound: u64) -> Result<TraceTable, GateError> {
        let model = rec.minimal()?;
        Ok(build_trace_table(&model, &rec.label(), rec.level, bound, self.cache)?)
    }
}

/// Whether E[q] is irreducible, from Mazur's list and the isogeny data.
pub fn check_irreducibility(record: &CurveRecord, q: u64) -> ConditionStatus {
    const CITE: &str = "corollary hypothesis: E[q] and F[q] irreducible";
    let label = record.label();
    if !ISOGENY_PRIMES.contains(&q) {
        return ConditionStatus::new(
            Status::Verified,
            format!("{label}: q = {q} outside rational isogeny-prime list (Mazur)"),
            CITE,
        );
    }
    match &record.isogeny_degrees {
        Some(degrees) => {
            let bad: Vec<u64> = degrees.iter().copied().filter(|d| d % q == 0).collect();
            if bad.is_empty() {
                ConditionStatus::new(
                    Status::Verified,
                    format!("{label}: isogeny degrees {degrees:?} contain no multiple of {q}"),
                    CITE,
                )
            } else {
                ConditionStatus::new(
                    Status::Failed,
                    format!("{label}: rational isogeny of degree {bad:?} divisible by {q}"),
                    CITE,
                )
            }
        }
        None => ConditionStatus::new(
            Status::Assumed,
            format!("{label}: q = {q} is an isogeny prime and the record has no isogeny data"),
            CITE,
        ),
    }
}

/// Look for a curve of level properly dividing N congruent to E mod q on
/// coefficients of index prime to Nq, up to the Sturm bound of N (or the cap).
pub fn check_level_lowering(e: &CurveRecord, q: u64, ctx: &GateContext) -> Result<ConditionStatus, GateError> {
    const CITE: &str = "corollary hypothesis: no congruence mod q with a newform of level dividing N/p";
    let n = e.level;
    let levels: Vec<u64> = ctx
        .db
        .levels()
        .into_iter()
        .filter(|&m| m < n && n % m == 0)
        .collect();
    if levels.is_empty() {
        return Ok(ConditionStatus::new(
            Status::Partial,
            "no lower-level rational newforms in the database; higher-dimensional newforms not scanned",
            CITE,
        ));
    }
    let bound = ctx.bound_for(n);
    let te = ctx.table(e, bound)?;
    let compared = |ell: u64| (n * q) % ell != 0;
    let mut congruent = Vec::new();
    let mut examined = Vec::new();
    for rec in ctx.db.records().iter().filter(|r| levels.contains(&r.level)) {
        let th = ctx.table(rec, bound)?;
        examined.push(rec.label());
        let all = te
            .traces
            .iter()
            .filter(|(&l, _)| compared(l))
            .all(|(l, &a)| (a - th.traces[l]).rem_euclid(q as i64) == 0);
        if all {
            congruent.push(rec.label());
        }
    }
    let capped = if bound < sturm_bound(n) { " (capped below the Sturm bound)" } else { "" };
    if congruent.is_empty() {
        Ok(ConditionStatus::new(
            Status::Partial,
            format!(
                "levels {levels:?} examined ({} curves) up to {bound}{capped}; none congruent mod {q}; higher-dimensional newforms not scanned",
                examined.len()
            ),
            CITE,
        ))
    } else {
        Ok(ConditionStatus::new(
            Status::Failed,
            format!("congruent mod {q} to {} up to {bound}{capped}", congruent.join(", ")),
            CITE,
        ))
    }
}

fn torsion_status(e: &CurveRecord, f: &CurveRecord, q: u64) -> Result<ConditionStatus, GateError> {
    const CITE: &str = "torsion coprimality: q does not divide |E(Q)_tors| or |F(Q)_tors|";
    let mut status = Status::Verified;
    let mut notes = Vec::new();
    for rec in [e, f] {
        let t = torsion_order(&rec.minimal()?);
        let s = match t.certified_order {
            Some(k) => verified_if(k % q != 0),
            None if t.bound % q != 0 => Status::Verified,
            None => Status::Assumed,
        };
        let shown = t
            .certified_order
            .map_or_else(|| format!("divides {}", t.bound), |k| k.to_string());
        let mut note = format!("{}: torsion {shown}", rec.label());
        if t.certified_order.is_some_and(|k| k != u64::from(rec.torsion)) {
            note.push_str(&format!(" (database says {})", rec.torsion));
        }
        notes.push(note);
        status = combine(status, s);
    }
    Ok(ConditionStatus::new(status, notes.join("; "), CITE))
}

/// Evaluate every hypothesis of the visibility corollary for (E, F, q).
pub fn evaluate_corollary(
    e: &CurveRecord,
    f: &CurveRecord,
    q: u64,
    cand: &CongruenceCandidate,
    ctx: &GateContext,
) -> Result<VisibilityVerdict, GateError> {
    if e.level != f.level {
        return Err(GateError::LevelMismatch(e.level, f.level));
    }
    if q == 0 || cand.modulus % q != 0 {
        return Err(GateError::NotCongruent {
            q,
            modulus: cand.modulus,
        });
    }
    let n = e.level;
    let mut c = Checklist::new();

    let cert = match cand.certification(q) {
        Some(Certification::Certified) => "certified",
        Some(Certification::PrimeCertifiedPowerHeuristic) => "certified mod q; prime-power level heuristic",
        _ => "heuristic",
    };
    c.insert(
        CONGRUENCE.into(),
        ConditionStatus::new(
            if cand.certified { Status::Verified } else { Status::Partial },
            format!(
                "modulus r = {} over primes <= {} (Sturm bound {}); {cert}",
                cand.modulus,
                cand.bound_used,
                sturm_bound(n)
            ),
            "congruence of f and g modulo q",
        ),
    );

    let odd_prime = q != 2 && is_prime(q);
    c.insert(
        Q_ODD_PRIME.into(),
        ConditionStatus::new(verified_if(odd_prime), format!("q = {q}"), "q odd prime"),
    );
    let q_sq = n % (q * q) != 0;
    c.insert(
        Q_SQUARED.into(),
        ConditionStatus::new(verified_if(q_sq), format!("N = {n}, q^2 = {}", q * q), "q^2 does not divide N"),
    );
    c.insert(
        RANK_E.into(),
        ConditionStatus::new(
            verified_if(e.rank == 1),
            format!(
                "{}: database Mordell-Weil rank {}; analytic rank one taken from the rank <= 1 equivalence, not recomputed",
                e.label(),
                e.rank
            ),
            "E of analytic rank one",
        ),
    );
    c.insert(
        RANK_F.into(),
        ConditionStatus::new(
            verified_if(f.rank >= 2),
            format!("{}: database Mordell-Weil rank {}", f.label(), f.rank),
            "F of Mordell-Weil rank more than one",
        ),
    );

    let ie = check_irreducibility(e, q);
    let if_ = check_irreducibility(f, q);
    let irreducible = ConditionStatus::new(
        combine(ie.status, if_.status),
        format!("{}; {}", ie.evidence, if_.evidence),
        &ie.citation,
    );
    let irreducible_status = irreducible.status;
    c.insert(IRREDUCIBLE.into(), irreducible);
    c.insert(TORSION.into(), torsion_status(e, f, q)?);
    c.insert(
        J0_TORSION.into(),
        ConditionStatus::new(
            Status::Assumed,
            "no decision procedure for |J_0(N)(K)_tors|; alternative: r coprime to the torsion of the projection of TP (also not computable here)",
            "q does not divide |J_0(N)(K)_tors|",
        ),
    );
    c.insert(LEVEL_LOWERING.into(), check_level_lowering(e, q, ctx)?);

    let primes: Vec<u64> = factor_u64(n).into_iter().map(|(p, _)| p).collect();
    let p_minus_one = if n % q != 0 {
        ConditionStatus::new(Status::Verified, format!("q = {q} does not divide N"), "q does not divide N or q does not divide p - 1")
    } else {
        let bad: Vec<u64> = primes.iter().copied().filter(|p| (p - 1) % q == 0).collect();
        ConditionStatus::new(
            verified_if(bad.is_empty()),
            if bad.is_empty() {
                format!("q | N and q does not divide p - 1 for p in {primes:?}")
            } else {
                format!("q divides p - 1 for p in {bad:?}")
            },
            "q does not divide N or q does not divide p - 1",
        )
    };
    c.insert(P_MINUS_ONE.into(), p_minus_one);

    let heegner = match find_heegner_discriminant(n, ctx.heegner_ceiling) {
        Ok(h) => {
            let witness: Vec<String> = h
                .splitting_witness
                .iter()
                .map(|(p, s)| format!("({}|{p})={s}", h.discriminant))
                .collect();
            ConditionStatus::new(
                Status::Verified,
                format!("D = {}; {}", h.discriminant, witness.join(", ")),
                "imaginary quadratic K, disc not -3 or -4, all p | N split",
            )
        }
        Err(err) => ConditionStatus::new(Status::Failed, err.to_string(), "imaginary quadratic K, all p | N split"),
    };
    c.insert(HEEGNER.into(), heegner);

    let criterion_ok = odd_prime && q_sq && irreducible_status == Status::Verified;
    c.insert(
        MULTIPLICITY_ONE.into(),
        if criterion_ok {
            ConditionStatus::new(
                Status::Verified,
                "verified by criterion: q odd, q^2 does not divide N, E[q] and F[q] irreducible",
                "multiplicity one for maximal ideals of residue characteristic q",
            )
        } else {
            ConditionStatus::new(
                Status::Assumed,
                "sufficient criterion (q odd, q^2 not dividing N, irreducibility) not established",
                "multiplicity one for maximal ideals of residue characteristic q",
            )
        },
    );
    c.insert(
        ORDER_ONE.into(),
        ConditionStatus::new(
            Status::Assumed,
            "L(E/K, s) vanishing to order one at s = 1 is arranged by the choice of K; not verified",
            "L(E/K, s) vanishes to order one at s = 1",
        ),
    );

    Ok(VisibilityVerdict::from_checklist(&e.label(), &f.label(), n, q, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    pub min_level: u64,
    pub max_level: u64,
    pub rank_e: u32,
    pub min_rank_f: u32,
    pub policy: CoefficientPolicy,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            min_level: 1,
            max_level: u64::MAX,
            rank_e: 1,
            min_rank_f: 2,
            policy: CoefficientPolicy::AllPrimes,
        }
    }
}

/// A pair the scan could not evaluate, kept next to the verdicts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanIssue {
    pub level: u64,
    pub label_e: String,
    pub label_f: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanOutcome {
    pub verdicts: Vec<VisibilityVerdict>,
    /// Pairs whose odd congruence primes are empty, listed with their modulus.
    pub non_congruent: Vec<(u64, String, String, u64)>,
    pub issues: Vec<ScanIssue>,
}

/// Every (E, F) pair of optimal curves at each level in range with
/// rank(E) = rank_e and rank(F) >= min_rank_f, one verdict per odd q | r.
pub fn scan_pairs(ctx: &GateContext, opts: &ScanOptions) -> ScanOutcome {
    let levels: Vec<u64> = ctx
        .db
        .levels()
        .into_iter()
        .filter(|&n| n >= opts.min_level && n <= opts.max_level)
        .collect();
    let per_level: Vec<ScanOutcome> = levels.par_iter().map(|&n| scan_level(ctx, opts, n)).collect();
    let mut out = ScanOutcome::default();
    for o in per_level {
        out.verdicts.extend(o.verdicts);
        out.non_congruent.extend(o.non_congruent);
        out.issues.extend(o.issues);
    }
    out.verdicts.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    out.non_congruent.sort();
    out.issues
        .sort_by(|a, b| (a.level, &a.label_e, &a.label_f).cmp(&(b.level, &b.label_e, &b.label_f)));
    out
}

fn scan_level(ctx: &GateContext, opts: &ScanOptions, n: u64) -> ScanOutcome {
    let mut optimal: Vec<&CurveRecord> = ctx.db.at_level(n).filter(|r| r.is_optimal()).collect();
    optimal.sort_by_key(|r| r.label());
    let mut out = ScanOutcome::default();
    let bound = ctx.bound_for(n);
    for e in optimal.iter().filter(|r| r.rank == opts.rank_e) {
        for f in optimal.iter().filter(|r| r.rank >= opts.min_rank_f) {
            if e.label() == f.label() {
                continue;
            }
            let issue = |message: String| ScanIssue {
                level: n,
                label_e: e.label(),
                label_f: f.label(),
                message,
            };
            let cand = ctx
                .table(e, bound)
                .and_then(|te| Ok((te, ctx.table(f, bound)?)))
                .and_then(|(te, tf)| Ok(congruence_modulus(&te, &tf, opts.policy)?));
            let cand = match cand {
                Ok(c) => c,
                Err(err) => {
                    out.issues.push(issue(err.to_string()));
                    continue;
                }
            };
            let qs = cand.odd_primes();
            if qs.is_empty() {
                out.non_congruent.push((n, e.label(), f.label(), cand.modulus));
            }
            for q in qs {
                match evaluate_corollary(e, f, q, &cand, ctx) {
                    Ok(v) => out.verdicts.push(v),
                    Err(err) => out.issues.push(issue(format!("q = {q}: {err}"))),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rec(level: u64, class: &str, a: [i64; 5], rank: u32, torsion: u32) -> CurveRecord {
        CurveRecord::new(level, class, 1, a.map(BigInt::from), rank, torsion)
    }

    #[test]
    fn irreducibility_rules() {
        let mut r = rec(11, "a", [0, -1, 1, -10, -20], 0, 5);
        assert_eq!(check_irreducibility(&r, 23).status, Status::Verified);
        assert!(check_irreducibility(&r, 23).evidence.contains("outside rational isogeny-prime list"));
        assert_eq!(check_irreducibility(&r, 3).status, Status::Assumed);
        r.isogeny_degrees = Some(vec![1, 2]);
        assert_eq!(check_irreducibility(&r, 3).status, Status::Verified);
        r.isogeny_degrees = Some(vec![1, 5, 25]);
        assert_eq!(check_irreducibility(&r, 5).status, Status::Failed);
    }

    #[test]
    fn combine_is_worst() {
        assert_eq!(combine(Status::Verified, Status::Assumed), Status::Assumed);
        assert_eq!(combine(Status::Failed, Status::Assumed), Status::Failed);
        assert_eq!(combine(Status::Partial, Status::Verified), Status::Partial);
    }

    #[test]
    fn prediction_follows_failures() {
        let mut c = Checklist::new();
        c.insert("a".into(), ConditionStatus::new(Status::Assumed, "", ""));
        let v = VisibilityVerdict::from_checklist("e", "f", 1, 3, c.clone());
        assert_eq!(v.prediction, Prediction::PredictsDivisibility);
        c.insert("b".into(), ConditionStatus::new(Status::Failed, "", ""));
        let v = VisibilityVerdict::from_checklist("e", "f", 1, 3, c);
        assert_eq!(v.prediction, Prediction::NoPrediction);
        assert!(v.predicted_statement.contains("b"));
    }
}
