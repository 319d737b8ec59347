use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GateError;
use crate::arith::{factor_u64, jacobi};

pub const DEFAULT_HEEGNER_CEILING: u64 = 1_000_000;

/// Kronecker symbol `(d | n)` for `n >= 1`, with `(d | 2)` read off `d mod 8`.
pub fn kronecker_symbol(d: i64, n: u64) -> i32 {
    if n == 0 {
        return i32::from(d == 1 || d == -1);
    }
    let twos = n.trailing_zeros();
    let odd = n >> twos;
    let mut sign = 1;
    if twos > 0 {
        let k2 = match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
        if k2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            sign = k2;
        }
    }
    if odd == 1 {
        return sign;
    }
    let a = d.rem_euclid(odd as i64) as u64;
    sign * jacobi(a, odd)
}

fn squarefree(n: u64) -> bool {
    factor_u64(n).iter().all(|&(_, e)| e == 1)
}

/// Discriminant of the ring of integers of a quadratic field.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let m = d.rem_euclid(4);
    if m == 1 {
        return squarefree(d.unsigned_abs());
    }
    if m != 0 {
        return false;
    }
    let q = d / 4;
    matches!(q.rem_euclid(4), 2 | 3) && squarefree(q.unsigned_abs())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeegnerField {
    pub discriminant: i64,
    /// `p -> (D | p)` for each prime `p | N`; all equal to 1.
    pub splitting_witness: BTreeMap<u64, i32>,
}

impl HeegnerField {
    /// Re-check the defining properties from scratch.
    pub fn is_valid_for(&self, n: u64) -> bool {
        let d = self.discriminant;
        d < 0
            && d != -3
            && d != -4
            && is_fundamental_discriminant(d)
            && factor_u64(n).iter().all(|&(p, _)| kronecker_symbol(d, p) == 1)
    }
}

/// Fundamental discriminant `D < 0`, `D != -3, -4`, of least absolute value
/// with every prime dividing `n` split in `Q(sqrt D)`.
pub fn find_heegner_discriminant(n: u64, ceiling: u64) -> Result<HeegnerField, GateError> {
    assert!(n >= 1, "level must be positive");
    let primes: Vec<u64> = factor_u64(n).into_iter().map(|(p, _)| p).collect();
    for k in 5..=ceiling {
        let d = -(k as i64);
        if !is_fundamental_discriminant(d) {
            continue;
        }
        if primes.iter().all(|&p| kronecker_symbol(d, p) == 1) {
            return Ok(HeegnerField {
                discriminant: d,
                splitting_witness: primes.iter().map(|&p| (p, 1)).collect(),
            });
        }
    }
    Err(GateError::SearchExhausted { level: n, ceiling })
}
