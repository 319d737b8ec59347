//! Point counting over prime fields.
//!
//! Two independent routes: a character sum over x (naive, O(p)) and a
//! baby-step giant-step search for the group order that uses the quadratic
//! twist to remove ambiguity inside the Hasse interval (Mestre).

use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{reduce, CurveError, ReductionKind, WeierstrassModel};
use crate::arith::{
    add_mod, factor_u64, inv_mod, isqrt, legendre, mod_u64, mul_mod, sqrt_mod, sub_mod,
};

/// Below this prime the twist trick can leave the order ambiguous, so the
/// BSGS route hands over to the naive count.
pub const BSGS_MIN_PRIME: u64 = 229;

/// Above this prime `Auto` switches from naive counting to BSGS.
const AUTO_NAIVE_LIMIT: u64 = 1 << 12;

const BSGS_MAX_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountStrategy {
    Naive,
    Bsgs,
    #[default]
    Auto,
}

/// Inclusive Hasse interval `[p + 1 - 2 sqrt p, p + 1 + 2 sqrt p]`.
pub fn hasse_interval(p: u64) -> (u64, u64) {
    let w = isqrt(4 * p);
    (p + 1 - w, p + 1 + w)
}

/// `#E(F_p)` by summing quadratic characters; valid for every prime of good
/// reduction, including 2 and 3.
pub fn count_points_naive(model: &WeierstrassModel, p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = model.ainvs().clone().map(|a| mod_u64(&a, p));
    if p == 2 {
        let mut n = 1;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if (lhs + rhs) % 2 == 0 {
                    n += 1;
                }
            }
        }
        return n;
    }
    // y^2 + (a1 x + a3) y = f(x) has 1 + chi(4x^3 + b2 x^2 + 2 b4 x + b6) roots.
    let b2 = mod_u64(model.b2(), p);
    let b4 = mod_u64(model.b4(), p);
    let b6 = mod_u64(model.b6(), p);
    let chi = character_table(p);
    let mut total: i64 = p as i64 + 1;
    for x in 0..p {
        let x2 = mul_mod(x, x, p);
        let x3 = mul_mod(x2, x, p);
        let mut d = mul_mod(4, x3, p);
        d = add_mod(d, mul_mod(b2, x2, p), p);
        d = add_mod(d, mul_mod(mul_mod(2, b4, p), x, p), p);
        d = add_mod(d, b6, p);
        total += chi[d as usize] as i64;
    }
    total as u64
}

fn character_table(p: u64) -> Vec<i8> {
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for y in 1..=(p / 2) {
        chi[mul_mod(y, y, p) as usize] = 1;
    }
    chi
}

/// `y^2 = x^3 + a x + b` over F_p, p >= 5.
#[derive(Clone, Copy, Debug)]
struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

type Pt = Option<(u64, u64)>;

impl ShortCurve {
    fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        add_mod(
            add_mod(mul_mod(mul_mod(x, x, p), x, p), mul_mod(self.a, x, p), p),
            self.b,
            p,
        )
    }

    fn neg(&self, pt: Pt) -> Pt {
        pt.map(|(x, y)| (x, if y == 0 { 0 } else { self.p - y }))
    }

    fn add(&self, lhs: Pt, rhs: Pt) -> Pt {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (lhs, rhs) {
            (None, q) | (q, None) => return q,
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if add_mod(y1, y2, p) == 0 {
                return None;
            }
            let num = add_mod(mul_mod(3, mul_mod(x1, x1, p), p), self.a, p);
            mul_mod(num, inv_mod(mul_mod(2, y1, p), p)?, p)
        } else {
            mul_mod(sub_mod(y2, y1, p), inv_mod(sub_mod(x2, x1, p), p)?, p)
        };
        let x3 = sub_mod(sub_mod(mul_mod(lambda, lambda, p), x1, p), x2, p);
        let y3 = sub_mod(mul_mod(lambda, sub_mod(x1, x3, p), p), y1, p);
        Some((x3, y3))
    }

    fn mul(&self, pt: Pt, mut k: u64) -> Pt {
        let mut acc = None;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// Deterministic pseudo-random point indexed by `seed`.
    fn point(&self, seed: u64) -> (u64, u64) {
        let p = self.p;
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491);
        loop {
            state ^= state >> 29;
            state = state.wrapping_mul(0xBF58_476D_1CE4_E5B9);
            state ^= state >> 32;
            let x = state % p;
            let r = self.rhs(x);
            if let Some(y) = sqrt_mod(r, p) {
                return (x, y);
            }
        }
    }

    /// Exact order of `pt`, given that the group order lies in `[lo, hi]`.
    fn order(&self, pt: Pt, lo: u64, hi: u64) -> Option<u64> {
        if pt.is_none() {
            return Some(1);
        }
        let width = hi - lo;
        let steps = isqrt(width) + 1;
        let mut baby: HashMap<Pt, u64> = HashMap::with_capacity(steps as usize);
        let mut cur: Pt = None;
        for j in 0..steps {
            if j > 0 && cur.is_none() {
                return Some(self.refine_order(pt, j));
            }
            baby.entry(cur).or_insert(j);
            cur = self.add(cur, pt);
        }
        let giant = self.mul(pt, steps);
        let mut r = self.mul(pt, lo);
        let mut base = lo;
        while base <= hi {
            if let Some(&j) = baby.get(&self.neg(r)) {
                let m = base + j;
                if m <= hi {
                    return Some(self.refine_order(pt, m));
                }
            }
            r = self.add(r, giant);
            base += steps;
        }
        None
    }

    fn refine_order(&self, pt: Pt, multiple: u64) -> u64 {
        let mut ord = multiple;
        for (q, _) in factor_u64(multiple) {
            while ord % q == 0 && self.mul(pt, ord / q).is_none() {
                ord /= q;
            }
        }
        ord
    }
}

fn short_model(model: &WeierstrassModel, p: u64) -> ShortCurve {
    let a = mod_u64(&(model.c4() * -27), p);
    let b = mod_u64(&(model.c6() * -54), p);
    ShortCurve { a, b, p }
}

/// `#E(F_p)` by BSGS on the curve and its quadratic twist. Primes below
/// [`BSGS_MIN_PRIME`] (and the rare undetermined case) use the naive count.
pub fn count_points_bsgs(model: &WeierstrassModel, p: u64) -> u64 {
    if p < BSGS_MIN_PRIME {
        return count_points_naive(model, p);
    }
    let curve = short_model(model, p);
    let mut nonres = 2;
    while legendre(nonres, p) != -1 {
        nonres += 1;
    }
    let d2 = mul_mod(nonres, nonres, p);
    let twist = ShortCurve {
        a: mul_mod(d2, curve.a, p),
        b: mul_mod(mul_mod(d2, nonres, p), curve.b, p),
        p,
    };
    let (lo, hi) = hasse_interval(p);
    let total = 2 * p + 2;
    let (mut l_curve, mut l_twist) = (1u64, 1u64);
    for i in 0..BSGS_MAX_POINTS {
        let seed = (i / 2) as u64;
        if i % 2 == 0 {
            let pt = Some(curve.point(seed));
            match curve.order(pt, lo, hi) {
                Some(o) => l_curve = l_curve.lcm(&o),
                None => break,
            }
        } else {
            let pt = Some(twist.point(seed));
            match twist.order(pt, lo, hi) {
                Some(o) => l_twist = l_twist.lcm(&o),
                None => break,
            }
        }
        let mut found = None;
        let mut count = 0;
        let mut n = lo.div_ceil(l_curve) * l_curve;
        while n <= hi {
            if (total - n) % l_twist == 0 {
                count += 1;
                found = Some(n);
                if count > 1 {
                    break;
                }
            }
            n += l_curve;
        }
        if count == 1 {
            return found.expect("one candidate");
        }
    }
    count_points_naive(model, p)
}

/// Trace of Frobenius `a_p`. At bad primes this is the Hecke eigenvalue
/// (+1 split, -1 nonsplit, 0 additive). The model must be minimal at `p`.
pub fn trace_of_frobenius(
    model: &WeierstrassModel,
    p: u64,
    strategy: CountStrategy,
) -> Result<i64, CurveError> {
    let kind = reduce(model, p)?.kind;
    if let Some(t) = kind.bad_trace() {
        return Ok(t);
    }
    debug_assert_eq!(kind, ReductionKind::Good);
    let n = match strategy {
        CountStrategy::Naive => count_points_naive(model, p),
        CountStrategy::Bsgs => count_points_bsgs(model, p),
        CountStrategy::Auto if p < AUTO_NAIVE_LIMIT => count_points_naive(model, p),
        CountStrategy::Auto => count_points_bsgs(model, p),
    };
    Ok(p as i64 + 1 - n as i64)
}
