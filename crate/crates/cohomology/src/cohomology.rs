use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::group::{invariants, AbelianGroup, Element};
use crate::module::{FiniteCyclicModule, ModuleMap, Submodule};
use crate::triple::ExactTriple;
use crate::CohomologyError;

/// Largest `|M|^n` the cocycle enumeration will attempt.
pub const BRUTEFORCE_BUDGET: u64 = 1_000_000;
/// Largest group order the cocycle enumeration supports.
pub const BRUTEFORCE_MAX_N: u32 = 6;

/// Fixed points `ker(g - 1)`.
pub fn h0(m: &FiniteCyclicModule) -> Submodule {
    let g = m.group();
    let basis = g.basis();
    let gens: Vec<Element> = g
        .kernel_lattice(&m.augmentation_image(), &[])
        .iter()
        .map(|c| g.combine(&basis, c))
        .collect();
    m.submodule(&gens)
}

/// `sub / quot` for subgroups `quot <= sub` of `g`.
fn subquotient(g: &AbelianGroup, sub: &[Element], quot: &[Element]) -> AbelianGroup {
    if sub.is_empty() {
        return AbelianGroup::trivial();
    }
    let rels = g.kernel_lattice(sub, quot);
    AbelianGroup::new(invariants(sub.len(), &rels)).expect("canonical")
}

/// `ker(Norm) / (g - 1) M`.
pub fn h1_cyclic(m: &FiniteCyclicModule) -> AbelianGroup {
    subquotient(m.group(), &m.norm_kernel(), &m.augmentation_image())
}

/// The kernel of `H^1(S) -> H^1(T)` induced by `map: S -> T`.
pub fn h1_kernel(map: &ModuleMap) -> AbelianGroup {
    let s = map.source();
    let t = map.target();
    let z = s.norm_kernel();
    let images: Vec<Element> = z.iter().map(|x| map.apply(x)).collect();
    let mut gens: Vec<Element> = t
        .group()
        .kernel_lattice(&images, &t.augmentation_image())
        .iter()
        .map(|c| s.group().combine(&z, c))
        .collect();
    gens.extend(s.augmentation_image());
    subquotient(s.group(), &gens, &s.augmentation_image())
}

/// H^1 by enumerating every function `G -> M`, keeping the cocycles and
/// dividing by the coboundaries.
pub fn h1_bruteforce(m: &FiniteCyclicModule) -> Result<AbelianGroup, CohomologyError> {
    let n = m.n();
    let size = m.order();
    let total = (size as u128).checked_pow(n);
    if n > BRUTEFORCE_MAX_N || total.is_none_or(|t| t > u128::from(BRUTEFORCE_BUDGET)) {
        return Err(CohomologyError::BudgetExceeded {
            order: size,
            n,
            budget: BRUTEFORCE_BUDGET,
        });
    }
    let g = m.group();
    let elems = g.elements();
    let index: BTreeMap<Element, usize> = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let idx = |x: &Element| index[x];
    let act: Vec<usize> = elems.iter().map(|x| idx(&m.act(x))).collect();
    let add = |a: usize, b: usize| idx(&g.add(&elems[a], &elems[b]));
    let mut act_pow = vec![(0..elems.len()).collect::<Vec<usize>>()];
    for i in 1..n as usize {
        act_pow.push(act_pow[i - 1].iter().map(|&x| act[x]).collect());
    }
    let n = n as usize;
    let q = elems.len();
    let mut cocycles: Vec<Vec<usize>> = Vec::new();
    let mut f = vec![0usize; n];
    'outer: loop {
        // f(g^(i+j)) = f(g^i) + g^i f(g^j)
        let ok = (0..n).all(|i| (0..n).all(|j| f[(i + j) % n] == add(f[i], act_pow[i][f[j]])));
        if ok {
            cocycles.push(f.clone());
        }
        for slot in f.iter_mut() {
            *slot += 1;
            if *slot < q {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    let coboundaries: HashSet<Vec<usize>> = (0..q)
        .map(|x| (0..n).map(|i| idx(&g.sub(&elems[act_pow[i][x]], &elems[x]))).collect())
        .collect();
    let scale = |c: u64, v: &[usize]| -> Vec<usize> { v.iter().map(|&x| idx(&g.scale(c as i64, &elems[x]))).collect() };
    let quotient_order = cocycles.len() as u64 / coboundaries.len() as u64;
    // the p-parts from the number of classes killed by p^j
    let mut cyclic = Vec::new();
    for p in prime_factors(quotient_order) {
        let mut killed = vec![0u32];
        let mut pj = 1u64;
        loop {
            pj *= p;
            let count = cocycles.iter().filter(|z| coboundaries.contains(&scale(pj, z))).count() as u64
                / coboundaries.len() as u64;
            killed.push(log(count, p));
            if count == p_part(quotient_order, p) {
                break;
            }
        }
        // killed[j] = sum_i min(j, e_i)
        for j in 1..killed.len() {
            let at_least_j = killed[j] - killed[j - 1];
            let at_least_next = if j + 1 < killed.len() { killed[j + 1] - killed[j] } else { 0 };
            for _ in 0..at_least_j - at_least_next {
                cyclic.push(p.pow(j as u32));
            }
        }
    }
    Ok(AbelianGroup::from_cyclic_orders(&cyclic))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn p_part(mut n: u64, p: u64) -> u64 {
    let mut r = 1;
    while n % p == 0 {
        n /= p;
        r *= p;
    }
    r
}

fn log(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n > 1 {
        n /= p;
        e += 1;
    }
    e
}

/// A class in `H^1(G, M)`, stored as the value of a cocycle at `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Class {
    pub value: Element,
    pub is_zero: bool,
}

/// Two cocycle values `z1, z2` give the same class iff `z1 - z2` is in `(g - 1) M`.
pub fn same_class(m: &FiniteCyclicModule, z1: &[i64], z2: &[i64]) -> bool {
    m.group().contains(&m.augmentation_image(), &m.group().sub(z1, z2))
}

/// The boundary `H^0(A) -> H^1(F')` of a short exact sequence.
pub fn connecting_delta(t: &ExactTriple, a: &[i64]) -> Result<H1Class, CohomologyError> {
    connecting_delta_impl(t, a, false)
}

pub(crate) fn connecting_delta_impl(t: &ExactTriple, a: &[i64], corrupt: bool) -> Result<H1Class, CohomologyError> {
    let (sub, proj) = (t.sub(), t.proj());
    let (f, j, quot) = (sub.source(), sub.target(), proj.target());
    if !quot.is_fixed(a) {
        return Err(CohomologyError::NotFixed);
    }
    let x = proj.lift(a).expect("projection is onto");
    let cocycle = |x: &Element| -> Result<Element, CohomologyError> {
        let y = if corrupt { j.act(x) } else { j.g_minus_one(x) };
        sub.lift(&y).ok_or(CohomologyError::NotExact("(g - 1) of a lift is not in the kernel".into()))
    };
    let z = cocycle(&x)?;
    for w in f.group().basis() {
        let x2 = j.group().add(&x, &sub.apply(&w));
        let z2 = cocycle(&x2)?;
        if !same_class(f, &z, &z2) {
            return Err(CohomologyError::NotExact("boundary depends on the chosen lift".into()));
        }
    }
    let is_zero = f.group().contains(&f.augmentation_image(), &z);
    Ok(H1Class { value: z, is_zero })
}
