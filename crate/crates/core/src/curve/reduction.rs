use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{CurveError, WeierstrassModel};
use crate::arith::{inv_mod, is_prime, legendre, mod_u64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Good,
    MultiplicativeSplit,
    MultiplicativeNonsplit,
    Additive,
}

impl ReductionKind {
    /// Hecke eigenvalue at a bad prime, `None` for good reduction.
    pub fn bad_trace(self) -> Option<i64> {
        match self {
            ReductionKind::Good => None,
            ReductionKind::MultiplicativeSplit => Some(1),
            ReductionKind::MultiplicativeNonsplit => Some(-1),
            ReductionKind::Additive => Some(0),
        }
    }
}

/// A model reduced modulo a prime, with its reduction type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedCurve {
    pub p: u64,
    /// a1, a2, a3, a4, a6 modulo p.
    pub coefficients: [u64; 5],
    pub kind: ReductionKind,
}

/// Classify the reduction of `model` at `p`. The model must be minimal at
/// `p`; otherwise an additive answer may be spurious.
pub fn reduce(model: &WeierstrassModel, p: u64) -> Result<ReducedCurve, CurveError> {
    if !is_prime(p) {
        return Err(CurveError::NotPrime(p));
    }
    let coefficients = model.ainvs().clone().map(|a| mod_u64(&a, p));
    let kind = if mod_u64(model.discriminant(), p) != 0 {
        ReductionKind::Good
    } else if mod_u64(model.c4(), p) == 0 {
        ReductionKind::Additive
    } else {
        let (r, t) = singular_shift(model, p);
        let moved = model.rst(&r, &BigInt::zero(), &t);
        // Tangent slopes m at the node satisfy m^2 + a1 m - a2 = 0.
        if quadratic_has_root(&BigInt::one(), moved.a1(), &(-moved.a2()), p) {
            ReductionKind::MultiplicativeSplit
        } else {
            ReductionKind::MultiplicativeNonsplit
        }
    };
    Ok(ReducedCurve {
        p,
        coefficients,
        kind,
    })
}

/// Translation (r, t) moving the singular point of the reduction mod p to
/// (0, 0). Only meaningful when p divides the discriminant.
pub(super) fn singular_shift(m: &WeierstrassModel, p: u64) -> (BigInt, BigInt) {
    let modp = |x: &BigInt| mod_u64(x, p);
    let (r, t) = match p {
        2 => {
            if modp(m.b2()) == 0 {
                let r = modp(m.a4());
                let t = modp(&(BigInt::from(r) * (1 + m.a2() + m.a4()) + m.a6()));
                (r, t)
            } else {
                let r = modp(m.a3());
                let t = modp(&(m.a3() + m.a4()));
                (r, t)
            }
        }
        3 => {
            let r = if modp(m.b2()) == 0 {
                modp(&-m.b6())
            } else {
                modp(&-(m.b2() * m.b4()))
            };
            let t = modp(&(m.a1() * r + m.a3()));
            (r, t)
        }
        _ => {
            let r = if modp(m.c4()) == 0 {
                let inv12 = inv_mod(12, p).expect("p >= 5");
                modp(&(-(m.b2()) * inv12))
            } else {
                let inv = inv_mod(modp(&(m.c4() * 12)), p).expect("c4 is a unit");
                modp(&(-(m.c6() + m.b2() * m.c4()) * inv))
            };
            let half = inv_mod(2, p).expect("p odd");
            let t = modp(&(-(m.a1() * r + m.a3()) * half));
            (r, t)
        }
    };
    (BigInt::from(r), BigInt::from(t))
}

/// Whether `a T^2 + b T + c` has a root in F_p.
pub(super) fn quadratic_has_root(a: &BigInt, b: &BigInt, c: &BigInt, p: u64) -> bool {
    let (a, b, c) = (mod_u64(a, p), mod_u64(b, p), mod_u64(c, p));
    if p == 2 {
        return c == 0 || (a + b + c) % 2 == 0;
    }
    if a == 0 {
        return b != 0 || c == 0;
    }
    let disc = (b as i128 * b as i128 - 4 * a as i128 * c as i128).rem_euclid(p as i128) as u64;
    legendre(disc, p) >= 0
}
