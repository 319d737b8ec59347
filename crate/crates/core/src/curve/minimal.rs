//! Global minimal models via the Laska-Kraus-Connell reduction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{compute_invariants, CurveError, WeierstrassModel};
use crate::arith::{big_pow, factor, mod_u64, sym_mod, valuation};

/// Return the reduced global minimal model isomorphic to `model`.
///
/// The output has `a1, a3 in {0, 1}` and `a2 in {-1, 0, 1}`, which pins
/// down a unique representative of the isomorphism class.
pub fn minimal_model(model: &WeierstrassModel) -> Result<WeierstrassModel, CurveError> {
    let mut c4 = model.c4().clone();
    let mut c6 = model.c6().clone();
    let g = c6.gcd(model.discriminant());
    let mut u = BigInt::one();
    if !g.is_one() {
        for (p, _) in factor(&g)? {
            let vd = valuation(model.discriminant(), p);
            let v6 = if c6.is_zero() { u32::MAX } else { valuation(&c6, p) };
            // g = gcd(c6^2, disc) has valuation min(2 v6, vd)
            let vg = vd.min(v6.saturating_mul(2));
            let mut d = vg / 12;
            if d == 0 {
                continue;
            }
            if p == 2 {
                let a = mod_u64(&(&c4 / big_pow(2, 4 * d)), 16);
                let b = mod_u64(&(&c6 / big_pow(2, 6 * d)), 32);
                if b % 4 != 3 && !(a == 0 && (b == 0 || b == 8)) {
                    d -= 1;
                }
            } else if p == 3 && v6 == 6 * d + 2 {
                d -= 1;
            }
            if d > 0 {
                u *= big_pow(p, d);
                c4 /= big_pow(p, 4 * d);
                c6 /= big_pow(p, 6 * d);
            }
        }
    }
    let reduced = from_c4_c6(&c4, &c6)?;
    debug_assert_eq!(reduced.j_invariant(), model.j_invariant());
    Ok(reduced)
}

/// Kraus: rebuild integral a-invariants from (c4, c6) satisfying the local
/// conditions at 2 and 3.
fn from_c4_c6(c4: &BigInt, c6: &BigInt) -> Result<WeierstrassModel, CurveError> {
    let b2 = sym_mod(&(-c6), 12);
    let num4 = &b2 * &b2 - c4;
    if !num4.is_multiple_of(&BigInt::from(24)) {
        return Err(CurveError::NotIntegral);
    }
    let b4 = num4 / 24;
    let cube: BigInt = &b2 * &b2 * &b2;
    let num6: BigInt = -cube + &b2 * &b4 * 36 - c6;
    if !num6.is_multiple_of(&BigInt::from(216)) {
        return Err(CurveError::NotIntegral);
    }
    let b6: BigInt = num6 / 216;
    let a1 = b2.mod_floor(&BigInt::from(2));
    let a3 = b6.mod_floor(&BigInt::from(2));
    let a2 = (&b2 - &a1) / 4;
    let a4 = (&b4 - &a1 * &a3) / 2;
    let a6 = (&b6 - &a3) / 4;
    compute_invariants([a1, a2, a3, a4, a6])
}

/// Whether `model` is already in reduced minimal form.
pub fn is_reduced_minimal(model: &WeierstrassModel) -> Result<bool, CurveError> {
    Ok(&minimal_model(model)? == model)
}
