use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lattice::{from_columns, kernel, smith, solve};

pub type Element = Vec<i64>;

/// `Z/d1 x Z/d2 x ... x Z/dk` with `1 < d1 | d2 | ... | dk`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    orders: Vec<u64>,
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.orders.iter().map(|d| format!("Z/{d}")).collect();
        f.write_str(&parts.join(" x "))
    }
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { orders: Vec::new() }
    }

    /// Accepts only the canonical form.
    pub fn new(orders: Vec<u64>) -> Option<Self> {
        let ok = orders.iter().all(|&d| d > 1) && orders.windows(2).all(|w| w[1] % w[0] == 0);
        ok.then_some(AbelianGroup { orders })
    }

    /// Canonical form of `Z/a1 x ... x Z/am` for arbitrary positive `ai`.
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        let k = orders.len();
        let rels: Vec<Vec<i128>> = (0..k)
            .map(|j| (0..k).map(|i| if i == j { orders[j] as i128 } else { 0 }).collect())
            .collect();
        AbelianGroup {
            orders: invariants(k, &rels),
        }
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn zero(&self) -> Element {
        vec![0; self.rank()]
    }

    pub fn basis(&self) -> Vec<Element> {
        (0..self.rank())
            .map(|j| (0..self.rank()).map(|i| i64::from(i == j)).collect())
            .collect()
    }

    pub fn reduce(&self, x: &[i128]) -> Element {
        x.iter()
            .zip(&self.orders)
            .map(|(&v, &d)| v.rem_euclid(d as i128) as i64)
            .collect()
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Element {
        x.iter()
            .zip(y)
            .zip(&self.orders)
            .map(|((&a, &b), &d)| (a + b).rem_euclid(d as i64))
            .collect()
    }

    pub fn sub(&self, x: &[i64], y: &[i64]) -> Element {
        x.iter()
            .zip(y)
            .zip(&self.orders)
            .map(|((&a, &b), &d)| (a - b).rem_euclid(d as i64))
            .collect()
    }

    pub fn scale(&self, c: i64, x: &[i64]) -> Element {
        x.iter()
            .zip(&self.orders)
            .map(|(&a, &d)| (i128::from(c) * i128::from(a)).rem_euclid(d as i128) as i64)
            .collect()
    }

    pub fn is_zero(&self, x: &[i64]) -> bool {
        x.iter().all(|&v| v == 0)
    }

    /// Every element, in lexicographic order.
    pub fn elements(&self) -> Vec<Element> {
        let mut out = vec![self.zero()];
        for (i, &d) in self.orders.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * d as usize);
            for e in &out {
                for v in 0..d as i64 {
                    let mut x = e.clone();
                    x[i] = v;
                    next.push(x);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Diagonal relation columns.
    pub(crate) fn relations(&self) -> Vec<Vec<i128>> {
        let k = self.rank();
        (0..k)
            .map(|j| (0..k).map(|i| if i == j { self.orders[j] as i128 } else { 0 }).collect())
            .collect()
    }

    /// Canonical form of `self / <gens>`.
    pub fn quotient(&self, gens: &[Element]) -> AbelianGroup {
        let mut rels = self.relations();
        rels.extend(gens.iter().map(|g| widen(g)));
        AbelianGroup {
            orders: invariants(self.rank(), &rels),
        }
    }

    /// Order of the subgroup generated by `gens`.
    pub fn subgroup_order(&self, gens: &[Element]) -> u64 {
        self.order() / self.quotient(gens).order()
    }

    /// Coefficients `c` with `sum c_i gens_i = x`, if `x` is in the span.
    pub fn express(&self, gens: &[Element], x: &[i64]) -> Option<Vec<i128>> {
        let k = self.rank();
        if k == 0 {
            return Some(vec![0; gens.len()]);
        }
        let mut cols: Vec<Vec<i128>> = gens.iter().map(|g| widen(g)).collect();
        cols.extend(self.relations());
        let a = from_columns(k, &cols);
        let sol = solve(&a, k, cols.len(), &widen(x))?;
        let exp = i128::from(*self.orders.last().expect("nontrivial group"));
        Some(sol[..gens.len()].iter().map(|c| c.rem_euclid(exp)).collect())
    }

    pub fn contains(&self, gens: &[Element], x: &[i64]) -> bool {
        self.express(gens, x).is_some()
    }

    /// Generators of the kernel of `Z^s -> self / <extra>`, `e_j -> images[j]`,
    /// as coefficient vectors.
    pub(crate) fn kernel_lattice(&self, images: &[Element], extra: &[Element]) -> Vec<Vec<i128>> {
        let k = self.rank();
        let s = images.len();
        if k == 0 {
            return (0..s)
                .map(|j| (0..s).map(|i| i128::from(i == j)).collect())
                .collect();
        }
        let mut cols: Vec<Vec<i128>> = images.iter().map(|g| widen(g)).collect();
        cols.extend(self.relations());
        cols.extend(extra.iter().map(|g| widen(g)));
        let a = from_columns(k, &cols);
        kernel(&a, k, cols.len())
            .into_iter()
            .map(|v| v[..s].to_vec())
            .filter(|v| v.iter().any(|&c| c != 0))
            .collect()
    }

    /// `sum c_i gens_i`.
    pub fn combine(&self, gens: &[Element], coeffs: &[i128]) -> Element {
        let mut acc = vec![0i128; self.rank()];
        for (g, &c) in gens.iter().zip(coeffs) {
            for (a, &v) in acc.iter_mut().zip(g) {
                *a += c * i128::from(v);
            }
        }
        self.reduce(&acc)
    }

    /// Elements `x` of `<gens>` with `x` lying in `<other>`: generators of the
    /// intersection of the two subgroups.
    pub fn intersection(&self, gens: &[Element], other: &[Element]) -> Vec<Element> {
        self.kernel_lattice(gens, other)
            .iter()
            .map(|c| self.combine(gens, c))
            .filter(|x| !self.is_zero(x))
            .collect()
    }
}

pub(crate) fn widen(x: &[i64]) -> Vec<i128> {
    x.iter().map(|&v| i128::from(v)).collect()
}

/// Invariant factors (> 1) of `Z^k / <relations>`; the quotient must be finite.
pub(crate) fn invariants(k: usize, relations: &[Vec<i128>]) -> Vec<u64> {
    if k == 0 {
        return Vec::new();
    }
    let a = from_columns(k, relations);
    let s = smith(&a, k, relations.len());
    assert_eq!(s.rank, k, "presentation describes an infinite group");
    s.diag
        .iter()
        .take(k)
        .filter(|&&d| d > 1)
        .map(|&d| u64::try_from(d).expect("invariant factor fits in u64"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(AbelianGroup::from_cyclic_orders(&[2, 3]).orders(), &[6]);
        assert_eq!(AbelianGroup::from_cyclic_orders(&[4, 6]).orders(), &[2, 12]);
        assert_eq!(AbelianGroup::from_cyclic_orders(&[1, 1]).orders(), &[] as &[u64]);
        assert!(AbelianGroup::new(vec![4, 2]).is_none());
        assert_eq!(AbelianGroup::new(vec![2, 4]).unwrap().to_string(), "Z/2 x Z/4");
        assert_eq!(AbelianGroup::trivial().to_string(), "0");
    }

    #[test]
    fn subgroups() {
        let g = AbelianGroup::new(vec![2, 4]).unwrap();
        assert_eq!(g.elements().len(), 8);
        assert_eq!(g.subgroup_order(&[vec![0, 2]]), 2);
        assert_eq!(g.subgroup_order(&[vec![1, 1]]), 4);
        assert_eq!(g.quotient(&[vec![1, 1]]).orders(), &[2]);
        assert!(g.contains(&[vec![1, 1]], &[0, 2]));
        assert!(!g.contains(&[vec![1, 1]], &[1, 0]));
        let c = g.express(&[vec![1, 1]], &[1, 3]).unwrap();
        assert_eq!(g.combine(&[vec![1, 1]], &c), vec![1, 3]);
        let meet = g.intersection(&[vec![1, 1]], &[vec![0, 1]]);
        assert_eq!(g.subgroup_order(&meet), 2);
    }
}
