//! Sturm bounds, trace tables and congruence moduli between rational newforms.

mod cache;

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cache::{CacheStats, TraceCache};
use cache::StoredTable;

use crate::arith::{factor_u64, isqrt, primes_up_to};
use crate::curve::{trace_of_frobenius, CountStrategy, CurveError, WeierstrassModel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HeckeError {
    #[error("trace tables have different levels ({0} vs {1})")]
    LevelMismatch(u64, u64),
    #[error("trace tables have different bounds ({0} vs {1})")]
    BoundMismatch(u64, u64),
    #[error("every compared trace agrees for {0} and {1}; distinct newforms must differ")]
    IdenticalTraces(String, String),
    #[error("trace cache corrupt at line {line}: {reason}")]
    CacheCorrupt { line: usize, reason: String },
    #[error("stored traces for {0} violate table invariants")]
    CorruptEntry(String),
    #[error("cache io: {0}")]
    Io(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Index of Gamma_0(N) in SL_2(Z).
pub fn gamma0_index(n: u64) -> u64 {
    assert!(n >= 1, "level must be positive");
    let mut mu = n;
    for (p, _) in factor_u64(n) {
        mu = mu / p * (p + 1);
    }
    mu
}

/// Sturm bound for weight 2 on Gamma_0(N): floor(mu / 6).
pub fn sturm_bound(n: u64) -> u64 {
    gamma0_index(n) / 6
}

/// The coefficients `a_l` for every prime `l <= bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceTable {
    pub label: String,
    pub level: u64,
    pub bound: u64,
    pub traces: BTreeMap<u64, i64>,
}

impl TraceTable {
    pub fn get(&self, ell: u64) -> Option<i64> {
        self.traces.get(&ell).copied()
    }

    /// Restrict to primes `<= bound`.
    pub fn truncated(&self, bound: u64) -> TraceTable {
        TraceTable {
            label: self.label.clone(),
            level: self.level,
            bound: bound.min(self.bound),
            traces: self.traces.range(..=bound).map(|(&l, &a)| (l, a)).collect(),
        }
    }

    /// Check the table invariants: domain is exactly the primes up to the
    /// bound, good primes obey Hasse, bad primes carry -1, 0 or 1.
    pub fn validate(&self) -> bool {
        let primes = primes_up_to(self.bound);
        if primes.len() != self.traces.len() || !primes.iter().all(|p| self.traces.contains_key(p)) {
            return false;
        }
        self.traces.iter().all(|(&l, &a)| {
            if self.level % l == 0 {
                (-1..=1).contains(&a)
            } else {
                a.unsigned_abs() <= isqrt(4 * l)
            }
        })
    }
}

/// Compute (or fetch) the trace table of a minimal model of conductor `level`.
pub fn build_trace_table(
    model: &WeierstrassModel,
    label: &str,
    level: u64,
    bound: u64,
    cache: Option<&TraceCache>,
) -> Result<TraceTable, HeckeError> {
    build_trace_table_with(model, label, level, bound, cache, CountStrategy::Auto)
}

pub fn build_trace_table_with(
    model: &WeierstrassModel,
    label: &str,
    level: u64,
    bound: u64,
    cache: Option<&TraceCache>,
    strategy: CountStrategy,
) -> Result<TraceTable, HeckeError> {
    if let Some(stored) = cache.and_then(|c| c.get(label)) {
        if stored.bound >= bound {
            let full = TraceTable {
                label: label.to_string(),
                level,
                bound: stored.bound,
                traces: stored.traces,
            };
            if full.validate() {
                cache.expect("cache present").note_hit();
                return Ok(full.truncated(bound));
            }
            cache.expect("cache present").note_recovered();
        }
    }
    let primes = primes_up_to(bound);
    let traces = primes
        .par_iter()
        .map(|&l| trace_of_frobenius(model, l, strategy).map(|a| (l, a)))
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let table = TraceTable {
        label: label.to_string(),
        level,
        bound,
        traces,
    };
    if let Some(c) = cache {
        c.note_miss(primes.len() as u64);
        c.commit(
            label,
            StoredTable {
                bound,
                traces: table.traces.clone(),
            },
        )?;
    }
    Ok(table)
}

/// Which primes enter the gcd.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientPolicy {
    #[default]
    AllPrimes,
    GoodPrimesOnly,
    CoprimeTo(u64),
}

impl CoefficientPolicy {
    pub fn includes(self, ell: u64, level: u64) -> bool {
        match self {
            CoefficientPolicy::AllPrimes => true,
            CoefficientPolicy::GoodPrimesOnly => level % ell != 0,
            CoefficientPolicy::CoprimeTo(m) => m % ell != 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    /// Agreement mod p up to the Sturm bound: the congruence mod p holds.
    Certified,
    /// Only the prime-level congruence is certified; the exponent is
    /// what finitely many coefficients show and nothing more.
    PrimeCertifiedPowerHeuristic,
    /// Bound below the Sturm bound or coefficients were skipped.
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceCandidate {
    pub label_e: String,
    pub label_f: String,
    pub level: u64,
    pub modulus: u64,
    /// `p -> ord_p(modulus)`.
    pub factorization: BTreeMap<u64, u32>,
    /// For each `p^e || modulus`, a prime `l` with `p^(e+1)` not dividing
    /// `a_l(E) - a_l(F)`.
    pub exactness_witness: BTreeMap<u64, u64>,
    pub bound_used: u64,
    pub policy: CoefficientPolicy,
    pub certified: bool,
}

impl CongruenceCandidate {
    pub fn certification(&self, p: u64) -> Option<Certification> {
        let e = *self.factorization.get(&p)?;
        Some(match (self.certified, e) {
            (false, _) => Certification::Heuristic,
            (true, 1) => Certification::Certified,
            (true, _) => Certification::PrimeCertifiedPowerHeuristic,
        })
    }

    pub fn odd_primes(&self) -> Vec<u64> {
        self.factorization.keys().copied().filter(|&p| p != 2).collect()
    }
}

/// gcd of `a_l(E) - a_l(F)` over the primes selected by `policy`.
pub fn congruence_modulus(
    te: &TraceTable,
    tf: &TraceTable,
    policy: CoefficientPolicy,
) -> Result<CongruenceCandidate, HeckeError> {
    if te.level != tf.level {
        return Err(HeckeError::LevelMismatch(te.level, tf.level));
    }
    if te.bound != tf.bound {
        return Err(HeckeError::BoundMismatch(te.bound, tf.bound));
    }
    let diffs: Vec<(u64, u64)> = te
        .traces
        .iter()
        .filter(|(&l, _)| policy.includes(l, te.level))
        .filter_map(|(&l, &a)| tf.get(l).map(|b| (l, (a - b).unsigned_abs())))
        .collect();
    let r = diffs.iter().fold(0u64, |g, &(_, d)| g.gcd(&d));
    if r == 0 {
        return Err(HeckeError::IdenticalTraces(te.label.clone(), tf.label.clone()));
    }
    let factorization: BTreeMap<u64, u32> = factor_u64(r).into_iter().collect();
    let exactness_witness = factorization
        .iter()
        .map(|(&p, &e)| {
            let pe1 = p.pow(e + 1);
            let l = diffs
                .iter()
                .find(|(_, d)| d % pe1 != 0)
                .map(|&(l, _)| l)
                .expect("gcd has exact valuation");
            (p, l)
        })
        .collect();
    let certified = policy == CoefficientPolicy::AllPrimes && te.bound >= sturm_bound(te.level);
    Ok(CongruenceCandidate {
        label_e: te.label.clone(),
        label_f: tf.label.clone(),
        level: te.level,
        modulus: r,
        factorization,
        exactness_witness,
        bound_used: te.bound,
        policy,
        certified,
    })
}
