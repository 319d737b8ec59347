use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::CurveError;

/// An integral Weierstrass equation
/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` together with its
/// standard derived quantities.
///
/// Construction always goes through [`compute_invariants`], so a value of
/// this type is nonsingular and satisfies `4 b8 = b2 b6 - b4^2` and
/// `c4^3 - c6^2 = 1728 disc`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[BigInt; 5]", into = "[BigInt; 5]")]
pub struct WeierstrassModel {
    a: [BigInt; 5],
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
    c4: BigInt,
    c6: BigInt,
    disc: BigInt,
    j_num: BigInt,
    j_den: BigInt,
}

/// Evaluate the Weierstrass formulary for raw a-invariants.
pub fn compute_invariants(a: [BigInt; 5]) -> Result<WeierstrassModel, CurveError> {
    let [a1, a2, a3, a4, a6] = &a;
    let b2 = a1 * a1 + a2 * 4;
    let b4 = a1 * a3 + a4 * 2;
    let b6 = a3 * a3 + a6 * 4;
    let b8 = a1 * a1 * a6 + a2 * a6 * 4 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let c4 = &b2 * &b2 - &b4 * 24;
    let cube: BigInt = &b2 * &b2 * &b2;
    let c6: BigInt = -cube + &b2 * &b4 * 36 - &b6 * 216;
    let b2b2b8: BigInt = &b2 * &b2 * &b8;
    let disc: BigInt = -b2b2b8 - &b4 * &b4 * &b4 * 8 - &b6 * &b6 * 27 + &b2 * &b4 * &b6 * 9;
    if disc.is_zero() {
        return Err(CurveError::SingularModel);
    }
    let mut j_num: BigInt = &c4 * &c4 * &c4;
    let mut j_den = disc.clone();
    let g = j_num.gcd(&j_den);
    j_num /= &g;
    j_den /= &g;
    if j_den.is_negative() {
        j_num = -j_num;
        j_den = -j_den;
    }
    Ok(WeierstrassModel {
        a,
        b2,
        b4,
        b6,
        b8,
        c4,
        c6,
        disc,
        j_num,
        j_den,
    })
}

impl WeierstrassModel {
    pub fn new(a: [BigInt; 5]) -> Result<Self, CurveError> {
        compute_invariants(a)
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self, CurveError> {
        compute_invariants(a.map(BigInt::from))
    }

    pub fn ainvs(&self) -> &[BigInt; 5] {
        &self.a
    }
    pub fn a1(&self) -> &BigInt {
        &self.a[0]
    }
    pub fn a2(&self) -> &BigInt {
        &self.a[1]
    }
    pub fn a3(&self) -> &BigInt {
        &self.a[2]
    }
    pub fn a4(&self) -> &BigInt {
        &self.a[3]
    }
    pub fn a6(&self) -> &BigInt {
        &self.a[4]
    }
    pub fn b2(&self) -> &BigInt {
        &self.b2
    }
    pub fn b4(&self) -> &BigInt {
        &self.b4
    }
    pub fn b6(&self) -> &BigInt {
        &self.b6
    }
    pub fn b8(&self) -> &BigInt {
        &self.b8
    }
    pub fn c4(&self) -> &BigInt {
        &self.c4
    }
    pub fn c6(&self) -> &BigInt {
        &self.c6
    }
    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    /// Reduced j-invariant as (numerator, positive denominator).
    pub fn j_invariant(&self) -> (&BigInt, &BigInt) {
        (&self.j_num, &self.j_den)
    }

    /// Substitute `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
    ///
    /// Fails with [`CurveError::NotIntegral`] when the new coefficients are
    /// not integers.
    pub fn transform(
        &self,
        u: &BigInt,
        r: &BigInt,
        s: &BigInt,
        t: &BigInt,
    ) -> Result<Self, CurveError> {
        if u.is_zero() {
            return Err(CurveError::NotIntegral);
        }
        let [a1, a2, a3, a4, a6] = &self.a;
        let n1 = a1 + s * 2;
        let n2 = a2 - s * a1 + r * 3 - s * s;
        let n3 = a3 + r * a1 + t * 2;
        let n4 = a4 - s * a3 + r * a2 * 2 - (t + r * s) * a1 + r * r * 3 - s * t * 2;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        let mut out: [BigInt; 5] = [n1, n2, n3, n4, n6];
        if !u.is_one() {
            for (coef, w) in out.iter_mut().zip([1u32, 2, 3, 4, 6]) {
                let uw = num_traits::pow(u.clone(), w as usize);
                let (q, rem) = coef.div_rem(&uw);
                if !rem.is_zero() {
                    return Err(CurveError::NotIntegral);
                }
                *coef = q;
            }
        }
        compute_invariants(out)
    }

    /// Shorthand for a `u = 1` change of variables.
    pub fn rst(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> Self {
        self.transform(&BigInt::one(), r, s, t)
            .expect("unimodular translation keeps integrality")
    }

    /// The model `a_i -> u^i a_i`, isomorphic over Q and non-minimal for |u| > 1.
    pub fn scaled(&self, u: i64) -> Self {
        let u = BigInt::from(u);
        let a = [1usize, 2, 3, 4, 6]
            .iter()
            .zip(self.a.iter())
            .map(|(&w, c)| c * num_traits::pow(u.clone(), w))
            .collect::<Vec<_>>();
        compute_invariants(a.try_into().expect("five coefficients"))
            .expect("scaling by a nonzero unit keeps the curve nonsingular")
    }

    /// Whether the integral point (x, y) satisfies the equation.
    pub fn contains(&self, x: &BigInt, y: &BigInt) -> bool {
        let [a1, a2, a3, a4, a6] = &self.a;
        let lhs = y * y + a1 * x * y + a3 * y;
        let rhs = x * x * x + a2 * x * x + a4 * x + a6;
        lhs == rhs
    }
}

impl TryFrom<[BigInt; 5]> for WeierstrassModel {
    type Error = CurveError;
    fn try_from(a: [BigInt; 5]) -> Result<Self, Self::Error> {
        compute_invariants(a)
    }
}

impl From<WeierstrassModel> for [BigInt; 5] {
    fn from(m: WeierstrassModel) -> Self {
        m.a
    }
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = &self.a;
        write!(f, "[{a1},{a2},{a3},{a4},{a6}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y2_x3_plus_1() {
        let m = WeierstrassModel::from_i64([0, 0, 0, 0, 1]).unwrap();
        assert_eq!(m.discriminant(), &BigInt::from(-432));
        assert!(m.c4().is_zero());
        assert_eq!(m.j_invariant(), (&BigInt::zero(), &BigInt::one()));
    }

    #[test]
    fn y2_x3_minus_x() {
        let m = WeierstrassModel::from_i64([0, 0, 0, -1, 0]).unwrap();
        assert!(m.c6().is_zero());
        assert_eq!(m.discriminant(), &BigInt::from(64));
        // j = 1728
        assert_eq!(m.j_invariant(), (&BigInt::from(1728), &BigInt::one()));
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(
            WeierstrassModel::from_i64([0, 0, 0, 0, 0]),
            Err(CurveError::SingularModel)
        );
        // node y^2 = x^3 + x^2
        assert_eq!(
            WeierstrassModel::from_i64([0, 1, 0, 0, 0]),
            Err(CurveError::SingularModel)
        );
    }

    #[test]
    fn eleven_a1_invariants() {
        let m = WeierstrassModel::from_i64([0, -1, 1, -10, -20]).unwrap();
        assert_eq!(m.c4(), &BigInt::from(496));
        assert_eq!(m.c6(), &BigInt::from(20008));
        assert_eq!(m.discriminant(), &BigInt::from(-161051));
    }

    #[test]
    fn transform_round_trip() {
        let m = WeierstrassModel::from_i64([1, -1, 0, -1367381, 615777525]).unwrap();
        let (r, s, t) = (BigInt::from(5), BigInt::from(-3), BigInt::from(11));
        let moved = m.rst(&r, &s, &t);
        assert_eq!(moved.discriminant(), m.discriminant());
        assert_eq!(moved.j_invariant(), m.j_invariant());
        let up = m.scaled(6);
        let down = up
            .transform(&BigInt::from(6), &BigInt::zero(), &BigInt::zero(), &BigInt::zero())
            .unwrap();
        assert_eq!(down, m);
    }
}
