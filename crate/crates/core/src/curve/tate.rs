//! Tate's algorithm: Kodaira symbol, conductor exponent, and Tamagawa
//! number at a single prime, including the residue characteristics 2 and 3.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::reduction::{quadratic_has_root, singular_shift};
use super::{CurveError, ReductionKind, WeierstrassModel};
use crate::arith::{big_pow, factor, inv_mod, is_prime, mod_u64, valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kodaira {
    /// I_n; n = 0 is good reduction.
    I(u32),
    /// I_n^*
    IStar(u32),
    II,
    III,
    IV,
    IVStar,
    IIIStar,
    IIStar,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::IStar(n) => write!(f, "I{n}*"),
            Kodaira::II => f.write_str("II"),
            Kodaira::III => f.write_str("III"),
            Kodaira::IV => f.write_str("IV"),
            Kodaira::IVStar => f.write_str("IV*"),
            Kodaira::IIIStar => f.write_str("III*"),
            Kodaira::IIStar => f.write_str("II*"),
        }
    }
}

impl std::str::FromStr for Kodaira {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "II" => Kodaira::II,
            "III" => Kodaira::III,
            "IV" => Kodaira::IV,
            "IV*" => Kodaira::IVStar,
            "III*" => Kodaira::IIIStar,
            "II*" => Kodaira::IIStar,
            _ => {
                let body = s.strip_prefix('I').ok_or_else(|| format!("bad Kodaira symbol {s}"))?;
                let (digits, star) = match body.strip_suffix('*') {
                    Some(d) => (d, true),
                    None => (body, false),
                };
                let n: u32 = digits.parse().map_err(|_| format!("bad Kodaira symbol {s}"))?;
                if star {
                    Kodaira::IStar(n)
                } else {
                    Kodaira::I(n)
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub p: u64,
    pub kodaira: Kodaira,
    pub conductor_exponent: u32,
    pub tamagawa: u64,
    pub reduction: ReductionKind,
    pub disc_valuation: u32,
}

struct Local {
    p: u64,
    pb: BigInt,
}

impl Local {
    fn val(&self, x: &BigInt) -> u32 {
        valuation(x, self.p)
    }
    fn divides(&self, x: &BigInt) -> bool {
        mod_u64(x, self.p) == 0
    }
    fn residue(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.pb)
    }
    fn inv(&self, x: &BigInt) -> BigInt {
        BigInt::from(inv_mod(mod_u64(x, self.p), self.p).expect("unit"))
    }
    fn pow(&self, e: u32) -> BigInt {
        big_pow(self.p, e)
    }
    fn roots_of_cubic(&self, b: &BigInt, c: &BigInt, d: &BigInt) -> u64 {
        let p = self.p;
        let (b, c, d) = (mod_u64(b, p) as u128, mod_u64(c, p) as u128, mod_u64(d, p) as u128);
        let p128 = p as u128;
        (0..p as u128)
            .filter(|&t| ((((t + b) * t % p128 + c) * t) % p128 + d) % p128 == 0)
            .count() as u64
    }
}

fn exact_div(x: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = x.div_rem(d);
    assert!(r.is_zero(), "inexact division in Tate's algorithm");
    q
}

/// Run Tate's algorithm at `p` on a model minimal at `p`.
pub fn tate_local_data(model: &WeierstrassModel, p: u64) -> Result<LocalData, CurveError> {
    if !is_prime(p) {
        return Err(CurveError::NotPrime(p));
    }
    let lc = Local {
        p,
        pb: BigInt::from(p),
    };
    let zero = BigInt::zero();
    let vd = lc.val(model.discriminant());
    let done = |kodaira, f: u32, c: u64, reduction| LocalData {
        p,
        kodaira,
        conductor_exponent: f,
        tamagawa: c,
        reduction,
        disc_valuation: vd,
    };
    if vd == 0 {
        return Ok(done(Kodaira::I(0), 0, 1, ReductionKind::Good));
    }

    let (r, t) = singular_shift(model, p);
    let mut e = model.rst(&r, &zero, &t);

    if !lc.divides(e.c4()) {
        let split = quadratic_has_root(&BigInt::from(1), e.a1(), &(-e.a2()), p);
        let (c, kind) = if split {
            (vd as u64, ReductionKind::MultiplicativeSplit)
        } else {
            (
                if vd % 2 == 1 { 1 } else { 2 },
                ReductionKind::MultiplicativeNonsplit,
            )
        };
        return Ok(done(Kodaira::I(vd), 1, c, kind));
    }
    let additive = |k, f, c| Ok(done(k, f, c, ReductionKind::Additive));
    if lc.val(e.a6()) < 2 {
        return additive(Kodaira::II, vd, 1);
    }
    if lc.val(e.b8()) < 3 {
        return additive(Kodaira::III, vd - 1, 2);
    }
    if lc.val(e.b6()) < 3 {
        let a3t = exact_div(e.a3(), &lc.pb);
        let a6t = exact_div(e.a6(), &lc.pow(2));
        let c = if quadratic_has_root(&BigInt::from(1), &a3t, &(-a6t), p) { 3 } else { 1 };
        return additive(Kodaira::IV, vd - 2, c);
    }

    // Arrange p | a1, a2; p^2 | a3, a4; p^3 | a6.
    let (s, t) = match p {
        2 => {
            let s = lc.residue(e.a2());
            let t = lc.residue(&exact_div(e.a6(), &lc.pow(2))) * 2;
            (s, t)
        }
        3 => (e.a1().clone(), e.a3().clone()),
        _ => {
            let half = lc.inv(&BigInt::from(2));
            let p2 = lc.pow(2);
            (lc.residue(&(-e.a1() * &half)), (-e.a3() * &half).mod_floor(&p2))
        }
    };
    e = e.rst(&zero, &s, &t);

    let b = exact_div(e.a2(), &lc.pb);
    let c = exact_div(e.a4(), &lc.pow(2));
    let d = exact_div(e.a6(), &lc.pow(3));
    let w = &d * &d * 27 - &b * &b * &c * &c + &b * &b * &b * &d * 4 - &b * &c * &d * 18
        + &c * &c * &c * 4;
    let x = &c * 3 - &b * &b;

    if !lc.divides(&w) {
        // three distinct roots
        let roots = lc.roots_of_cubic(&b, &c, &d);
        return additive(Kodaira::IStar(0), vd - 4, 1 + roots);
    }

    if !lc.divides(&x) {
        // one double root: I_m^*
        let r = match p {
            2 => lc.residue(&c),
            3 => lc.residue(&(&c * lc.inv(&b))),
            _ => lc.residue(&((&b * &c - &d * 9) * lc.inv(&(&x * 2)))),
        };
        e = e.rst(&(r * &lc.pb), &zero, &zero);
        let (mut ix, mut iy) = (3u32, 3u32);
        let mut mx = lc.pow(2);
        let mut my = lc.pow(2);
        let cp;
        loop {
            let a3t = exact_div(e.a3(), &my);
            let a6t = exact_div(e.a6(), &(&mx * &my));
            if !lc.divides(&(&a3t * &a3t + &a6t * 4)) {
                cp = if quadratic_has_root(&BigInt::from(1), &a3t, &(-&a6t), p) { 4 } else { 2 };
                break;
            }
            let t = if p == 2 {
                &my * lc.residue(&a6t)
            } else {
                &my * lc.residue(&(-&a3t * lc.inv(&BigInt::from(2))))
            };
            e = e.rst(&zero, &zero, &t);
            my *= &lc.pb;
            iy += 1;
            let a2t = exact_div(e.a2(), &lc.pb);
            let a4t = exact_div(e.a4(), &(&lc.pb * &mx));
            let a6t = exact_div(e.a6(), &(&mx * &my));
            if !lc.divides(&(&a4t * &a4t - &a6t * &a2t * 4)) {
                cp = if quadratic_has_root(&a2t, &a4t, &a6t, p) { 4 } else { 2 };
                break;
            }
            let r = if p == 2 {
                &mx * lc.residue(&(&a6t * lc.inv(&a2t)))
            } else {
                &mx * lc.residue(&(-&a4t * lc.inv(&(&a2t * 2))))
            };
            e = e.rst(&r, &zero, &zero);
            mx *= &lc.pb;
            ix += 1;
        }
        let m = ix + iy - 5;
        return additive(Kodaira::IStar(m), vd - m - 4, cp);
    }

    // triple root
    let r = match p {
        2 => lc.residue(&b),
        3 => lc.residue(&(-&d)),
        _ => lc.residue(&(-&b * lc.inv(&BigInt::from(3)))),
    };
    e = e.rst(&(r * &lc.pb), &zero, &zero);
    let x3t = exact_div(e.a3(), &lc.pow(2));
    let x6t = exact_div(e.a6(), &lc.pow(4));
    if !lc.divides(&(&x3t * &x3t + &x6t * 4)) {
        let c = if quadratic_has_root(&BigInt::from(1), &x3t, &(-&x6t), p) { 3 } else { 1 };
        return additive(Kodaira::IVStar, vd - 6, c);
    }
    let t = if p == 2 {
        -(lc.pow(2) * lc.residue(&x6t))
    } else {
        lc.pow(2) * lc.residue(&(-&x3t * lc.inv(&BigInt::from(2))))
    };
    e = e.rst(&zero, &zero, &t);
    if lc.val(e.a4()) < 4 {
        return additive(Kodaira::IIIStar, vd - 7, 2);
    }
    if lc.val(e.a6()) < 6 {
        return additive(Kodaira::IIStar, vd - 8, 1);
    }
    Err(CurveError::NonMinimalModel(p))
}

/// Local data at every prime dividing the discriminant, ascending by p.
pub fn local_data_all(model: &WeierstrassModel) -> Result<Vec<LocalData>, CurveError> {
    factor(model.discriminant())?
        .into_iter()
        .map(|(p, _)| tate_local_data(model, p))
        .collect()
}

/// Conductor `prod p^f_p`, computed from Tate's algorithm.
pub fn conductor(model: &WeierstrassModel) -> Result<u64, CurveError> {
    let mut n = 1u64;
    for ld in local_data_all(model)? {
        n *= ld.p.pow(ld.conductor_exponent);
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: [i64; 5]) -> WeierstrassModel {
        WeierstrassModel::from_i64(a).unwrap()
    }

    fn summary(a: [i64; 5], p: u64) -> (String, u32, u64) {
        let ld = tate_local_data(&m(a), p).unwrap();
        (ld.kodaira.to_string(), ld.conductor_exponent, ld.tamagawa)
    }

    #[test]
    fn good_prime() {
        assert_eq!(summary([0, -1, 1, -10, -20], 3), ("I0".into(), 0, 1));
    }

    #[test]
    fn eleven_a1_split_i5() {
        assert_eq!(summary([0, -1, 1, -10, -20], 11), ("I5".into(), 1, 5));
    }

    #[test]
    fn conductors_of_small_curves() {
        assert_eq!(conductor(&m([0, -1, 1, -10, -20])).unwrap(), 11);
        assert_eq!(conductor(&m([0, 0, 1, -1, 0])).unwrap(), 37);
        assert_eq!(conductor(&m([1, 0, 1, 4, -6])).unwrap(), 14);
        assert_eq!(conductor(&m([0, 0, 0, -1, 0])).unwrap(), 32);
        assert_eq!(conductor(&m([0, 0, 0, 0, 1])).unwrap(), 36);
        assert_eq!(conductor(&m([0, 0, 1, 0, -7])).unwrap(), 27);
        assert_eq!(conductor(&m([0, 1, 1, -2, 0])).unwrap(), 389);
        assert_eq!(conductor(&m([0, 0, 1, -7, 6])).unwrap(), 5077);
    }

    #[test]
    fn kodaira_symbols_parse() {
        for s in ["I0", "I7", "I0*", "I3*", "II", "III", "IV", "IV*", "III*", "II*"] {
            assert_eq!(s.parse::<Kodaira>().unwrap().to_string(), s);
        }
        assert!("V".parse::<Kodaira>().is_err());
    }

    #[test]
    fn non_minimal_detected() {
        let e = m([0, -1, 1, -10, -20]).scaled(11);
        assert_eq!(tate_local_data(&e, 11), Err(CurveError::NonMinimalModel(11)));
    }
}
