//! Rational torsion: a reduction bound followed by a Lutz-Nagell search.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{count_points_naive, WeierstrassModel};
use crate::arith::{factor, mod_u64, primes_up_to};

const BOUND_PRIME_LIMIT: u64 = 200;
const MIN_BOUND_PRIMES: usize = 20;
/// Mazur: a rational torsion point has order at most 12.
const MAX_POINT_ORDER: u64 = 12;

/// Affine rational point on the model the search was run against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalPoint {
    pub x: BigRational,
    pub y: BigRational,
    pub order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionResult {
    /// gcd of `#E(F_p)` over good odd primes; an upper bound for the torsion order.
    pub bound: u64,
    /// Exact torsion order when the search completed.
    pub certified_order: Option<u64>,
    pub witness_points: Vec<RationalPoint>,
    /// Number of good primes that entered the bound.
    pub primes_used: usize,
}

/// Torsion order of a minimal model.
pub fn torsion_order(model: &WeierstrassModel) -> TorsionResult {
    let (bound, primes_used) = reduction_bound(model);
    if bound == 1 {
        return TorsionResult {
            bound,
            certified_order: Some(1),
            witness_points: Vec::new(),
            primes_used,
        };
    }
    let (certified_order, witness_points) = match lutz_nagell(model, bound) {
        Some(points) => {
            let order = points.len() as u64 + 1;
            if bound % order == 0 {
                (Some(order), points)
            } else {
                (None, points)
            }
        }
        None => (None, Vec::new()),
    };
    TorsionResult {
        bound,
        certified_order,
        witness_points,
        primes_used,
    }
}

fn reduction_bound(model: &WeierstrassModel) -> (u64, usize) {
    let mut g = 0u64;
    let mut used = 0;
    // Torsion injects into E(F_p) at good p >= 3.
    for p in primes_up_to(BOUND_PRIME_LIMIT).into_iter().skip(1) {
        if mod_u64(model.discriminant(), p) == 0 {
            continue;
        }
        g = g.gcd(&count_points_naive(model, p));
        used += 1;
        if g == 1 && used >= MIN_BOUND_PRIMES {
            break;
        }
    }
    (g.max(1), used)
}

/// Short integral model `Y^2 = X^3 + A X + B` with `X = 36x + 3b2`,
/// `Y = 108(2y + a1 x + a3)`.
struct ShortModel {
    a: BigInt,
    b: BigInt,
}

impl ShortModel {
    fn cubic(&self, x: &BigInt) -> BigInt {
        x * x * x + &self.a * x + &self.b
    }
}

type Affine = Option<(BigRational, BigRational)>;

fn add_points(a: &BigRational, p: &Affine, q: &Affine) -> Affine {
    let ((x1, y1), (x2, y2)) = match (p, q) {
        (None, r) | (r, None) => return r.clone(),
        (Some(u), Some(v)) => (u, v),
    };
    let lambda = if x1 == x2 {
        if (y1 + y2).is_zero() {
            return None;
        }
        (x1 * x1 * BigRational::from_integer(3.into()) + a) / (y1 * BigRational::from_integer(2.into()))
    } else {
        (y2 - y1) / (x2 - x1)
    };
    let x3 = &lambda * &lambda - x1 - x2;
    let y3 = &lambda * (x1 - &x3) - y1;
    Some((x3, y3))
}

/// Order of an integral point, or `None` once a multiple is non-integral
/// (then the point has infinite order) or exceeds Mazur's bound.
fn point_order(a: &BigRational, pt: &(BigRational, BigRational)) -> Option<u64> {
    let start = Some(pt.clone());
    let mut cur = start.clone();
    for n in 1..=MAX_POINT_ORDER {
        match &cur {
            None => return Some(n),
            Some((x, y)) if !x.is_integer() || !y.is_integer() => return None,
            _ => {}
        }
        cur = add_points(a, &cur, &start);
    }
    None
}

/// Every integer root of a monic cubic `X^3 + c1 X + c0`.
fn integer_roots(c1: &BigInt, c0: &BigInt) -> Vec<BigInt> {
    let f = |x: &BigInt| x * x * x + c1 * x + c0;
    let cauchy = BigInt::one() + c1.abs().max(c0.abs());
    // Integer monotone pieces split at +-c with c = floor(sqrt(-c1/3)).
    let mut pieces: Vec<(BigInt, BigInt, bool)> = Vec::new();
    if c1.is_negative() {
        let third: BigInt = -c1 / 3;
        let c = third.sqrt();
        pieces.push((-&cauchy, -&c - 1, true));
        pieces.push((-c.clone(), c.clone(), false));
        pieces.push((c + 1, cauchy, true));
    } else {
        pieces.push((-&cauchy, cauchy, true));
    }
    let mut roots = Vec::new();
    for (mut lo, mut hi, increasing) in pieces {
        if lo > hi {
            continue;
        }
        // find x in [lo, hi] with f(x) = 0 on a monotone integer range
        while lo < hi {
            let mid = (&lo + &hi).div_floor(&BigInt::from(2));
            let v = f(&mid);
            let go_right = if increasing { v.is_negative() } else { v.is_positive() };
            if go_right {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if f(&lo).is_zero() && !roots.contains(&lo) {
            roots.push(lo);
        }
    }
    roots.sort();
    roots
}

fn divisors_with_square_dividing(n: &BigInt) -> Option<Vec<BigInt>> {
    let fac = factor(n).ok()?;
    let mut out = vec![BigInt::one()];
    for (p, e) in fac {
        let mut next = Vec::with_capacity(out.len() * (e as usize / 2 + 1));
        for d in &out {
            let mut pk = d.clone();
            for _ in 0..=(e / 2) {
                next.push(pk.clone());
                pk *= p;
            }
        }
        out = next;
    }
    out.sort();
    Some(out)
}

/// All nontrivial torsion points, mapped back to the input model. `None`
/// when the discriminant could not be factored.
fn lutz_nagell(model: &WeierstrassModel, bound: u64) -> Option<Vec<RationalPoint>> {
    let short = ShortModel {
        a: model.c4() * -27,
        b: model.c6() * -54,
    };
    let a_rat = BigRational::from_integer(short.a.clone());
    let mut found: Vec<(BigInt, BigInt, u64)> = Vec::new();
    let mut try_point = |x: BigInt, y: BigInt| {
        let pt = (BigRational::from_integer(x.clone()), BigRational::from_integer(y.clone()));
        if let Some(order) = point_order(&a_rat, &pt) {
            if bound % order == 0 && !found.iter().any(|(fx, fy, _)| fx == &x && fy == &y) {
                found.push((x, y, order));
            }
        }
    };
    for x in integer_roots(&short.a, &short.b) {
        try_point(x, BigInt::zero());
    }
    // Only 2-torsion is possible when 4 does not divide the bound and it is a power of 2.
    let only_two = bound == 2;
    if !only_two {
        let d = &short.a * &short.a * &short.a * 4 + &short.b * &short.b * 27;
        for y in divisors_with_square_dividing(&d)? {
            let k = &y * &y;
            for x in integer_roots(&short.a, &(&short.b - &k)) {
                debug_assert_eq!(short.cubic(&x), k);
                try_point(x.clone(), y.clone());
                try_point(x, -y.clone());
            }
        }
    }
    found.sort_by(|a, b| (a.2, &a.0, &a.1).cmp(&(b.2, &b.0, &b.1)));
    let b2 = BigRational::from_integer(model.b2().clone());
    let a1 = BigRational::from_integer(model.a1().clone());
    let a3 = BigRational::from_integer(model.a3().clone());
    let points = found
        .into_iter()
        .map(|(big_x, big_y, order)| {
            let x = (BigRational::from_integer(big_x) - &b2 * BigRational::from_integer(3.into()))
                / BigRational::from_integer(36.into());
            let y = (BigRational::from_integer(big_y) / BigRational::from_integer(108.into())
                - &a1 * &x
                - &a3)
                / BigRational::from_integer(2.into());
            RationalPoint { x, y, order }
        })
        .collect();
    Some(points)
}
