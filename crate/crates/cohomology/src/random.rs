//! Seeded random instances for the oracle and identity checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cohomology::h0;
use crate::group::{AbelianGroup, Element};
use crate::module::FiniteCyclicModule;
use crate::triple::ExactTriple;

/// Independent stream `index` under `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_element<R: Rng>(rng: &mut R, g: &AbelianGroup) -> Element {
    g.orders().iter().map(|&d| rng.gen_range(0..d as i64)).collect()
}

fn random_combination<R: Rng>(rng: &mut R, g: &AbelianGroup, gens: &[Element]) -> Element {
    let coeffs: Vec<i128> = gens.iter().map(|_| rng.gen_range(0..64)).collect();
    g.combine(gens, &coeffs)
}

fn pow_mod(u: u64, e: u32, m: u64) -> u64 {
    (0..e).fold(1 % m, |acc, _| acc * u % m)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cohomology of the cyclic group of order `n` is `n`-torsion, so prime
/// powers of divisors of `n` are favoured.
fn biased_order<R: Rng>(rng: &mut R, cap: u64, n: u32) -> u64 {
    let n = u64::from(n);
    let powers: Vec<u64> = (2..=cap)
        .filter(|&m| {
            let p = (2..=m).find(|p| m % p == 0).expect("m >= 2");
            n % p == 0 && (1..8).any(|e| p.pow(e) == m)
        })
        .collect();
    if !powers.is_empty() && rng.gen_bool(0.6) {
        *powers.choose(rng).expect("nonempty")
    } else {
        rng.gen_range(2..=cap)
    }
}

/// A module of order at most `max_order` for the cyclic group of order `n`:
/// a sum of twisted cyclic pieces, regular representations and unipotent
/// blocks, cut down by a random submodule and put in canonical form.
pub fn random_module<R: Rng>(rng: &mut R, max_order: u64, n: u32) -> FiniteCyclicModule {
    let mut orders: Vec<u64> = Vec::new();
    let mut blocks: Vec<(usize, Vec<Vec<i64>>)> = Vec::new();
    let mut budget = max_order;
    let pieces = rng.gen_range(1..=3);
    for _ in 0..pieces {
        if budget < 2 {
            break;
        }
        let m = biased_order(rng, budget.min(16), n);
        match rng.gen_range(0..3) {
            1 if m.checked_pow(n).is_some_and(|s| s <= budget) && n > 1 => {
                let k = n as usize;
                let shift = (0..k).map(|i| (0..k).map(|j| i64::from(i == (j + 1) % k)).collect()).collect();
                orders.extend(std::iter::repeat(m).take(k));
                blocks.push((k, shift));
                budget /= m.pow(n);
            }
            2 if u64::from(n) % m == 0 && m * m <= budget => {
                orders.extend([m, m]);
                blocks.push((2, vec![vec![1, 1], vec![0, 1]]));
                budget /= m * m;
            }
            _ => {
                let units: Vec<u64> = (1..m).filter(|&u| gcd(u, m) == 1 && pow_mod(u, n, m) == 1).collect();
                let u = *units.choose(rng).unwrap_or(&1);
                orders.push(m);
                blocks.push((1, vec![vec![u as i64]]));
                budget /= m;
            }
        }
    }
    let k = orders.len();
    let mut action = vec![vec![0i64; k]; k];
    let mut at = 0;
    for (size, b) in &blocks {
        for i in 0..*size {
            for j in 0..*size {
                action[at + i][at + j] = b[i][j];
            }
        }
        at += size;
    }
    let mut extra: Vec<Vec<i64>> = Vec::new();
    if k > 0 && rng.gen_bool(0.25) {
        let mut v: Vec<i64> = orders.iter().map(|&d| rng.gen_range(0..d as i64)).collect();
        for _ in 0..n {
            extra.push(v.clone());
            v = (0..k)
                .map(|i| (0..k).map(|j| action[i][j] * v[j]).sum::<i64>().rem_euclid(orders[i] as i64))
                .collect();
        }
    }
    if k == 0 {
        return FiniteCyclicModule::trivial_action(AbelianGroup::trivial(), n);
    }
    FiniteCyclicModule::from_presentation(&orders, &extra, action, n)
        .expect("constructed action is valid")
        .0
}

/// `F' -> J' -> J'/F'` with `|J'| <= max_order`.
pub fn random_triple<R: Rng>(rng: &mut R, max_order: u64, n: u32) -> ExactTriple {
    let j = random_module(rng, max_order, n);
    let count = rng.gen_range(0..=2);
    let gens: Vec<Element> = (0..count).map(|_| random_element(rng, j.group())).collect();
    ExactTriple::from_submodule(&j, &gens).expect("submodule gives an exact triple")
}

/// Generators of a random subgroup of the fixed points.
pub fn random_fixed_subgroup<R: Rng>(rng: &mut R, m: &FiniteCyclicModule) -> Vec<Element> {
    let fixed = h0(m).ambient_gens();
    let count = rng.gen_range(0..=2);
    (0..count).map(|_| random_combination(rng, m.group(), &fixed)).collect()
}

/// Generators of two G-submodules `E'`, `F'` with `E' + F' = J'`.
pub fn random_covering_pair<R: Rng>(rng: &mut R, j: &FiniteCyclicModule) -> (Vec<Element>, Vec<Element>) {
    let g = j.group();
    let count = rng.gen_range(0..=2);
    let e_gens: Vec<Element> = (0..count).map(|_| random_element(rng, g)).collect();
    let e = j.submodule(&e_gens).ambient_gens();
    let (q, proj) = j.quotient(&e);
    let mut f_gens: Vec<Element> = q
        .group()
        .basis()
        .iter()
        .map(|b| {
            let lift = proj.lift(b).expect("projection is onto");
            g.add(&lift, &random_combination(rng, g, &e))
        })
        .collect();
    if rng.gen_bool(0.5) {
        f_gens.push(random_combination(rng, g, &e));
    }
    (e_gens, f_gens)
}

/// `J' = (E0 (+) F0) / {(-c, c)}` glued along a common submodule, with
/// `E'`, `F'` the images of the two sides. `E0` and `F0` are sums of
/// twisted cyclic groups `Z/a`, `Z/b` sharing `Z/d` with matching actions.
pub fn random_glued_pair<R: Rng>(rng: &mut R, max_order: u64, n: u32) -> (FiniteCyclicModule, Vec<Element>, Vec<Element>) {
    let mut e_side: Vec<(u64, u64)> = Vec::new();
    let mut f_side: Vec<(u64, u64)> = Vec::new();
    let mut glue: Vec<(usize, usize, u64)> = Vec::new();
    let mut budget = max_order;
    for _ in 0..rng.gen_range(1..=2) {
        if budget < 2 {
            break;
        }
        let d = biased_order(rng, budget.min(8), n);
        let s = rng.gen_range(1..=4u64);
        let t = rng.gen_range(1..=4u64);
        if d * s * t > budget {
            continue;
        }
        let (a, b) = (d * s, d * t);
        let units = |m: u64| -> Vec<u64> { (1..m.max(2)).filter(|&u| gcd(u, m) == 1 && pow_mod(u, n, m) == 1).collect() };
        let u = *units(a).choose(rng).unwrap_or(&1);
        let vs: Vec<u64> = units(b).into_iter().filter(|v| (v + d - u % d) % d == 0).collect();
        let Some(&v) = vs.choose(rng) else { continue };
        glue.push((e_side.len(), f_side.len(), d));
        e_side.push((a, u));
        f_side.push((b, v));
        budget /= d * s * t;
    }
    if budget >= 2 && rng.gen_bool(0.5) {
        let m = biased_order(rng, budget.min(8), n);
        let units: Vec<u64> = (1..m).filter(|&u| gcd(u, m) == 1 && pow_mod(u, n, m) == 1).collect();
        e_side.push((m, *units.choose(rng).unwrap_or(&1)));
    }
    if e_side.is_empty() {
        let j = random_module(rng, max_order, n);
        let (e, f) = random_covering_pair(rng, &j);
        return (j, e, f);
    }
    let (ke, kf) = (e_side.len(), f_side.len());
    let k = ke + kf;
    let orders: Vec<u64> = e_side.iter().chain(&f_side).map(|&(m, _)| m).collect();
    let mut action = vec![vec![0i64; k]; k];
    for (i, &(_, u)) in e_side.iter().chain(&f_side).enumerate() {
        action[i][i] = u as i64;
    }
    let extra: Vec<Vec<i64>> = glue
        .iter()
        .map(|&(ie, jf, d)| {
            let mut v = vec![0i64; k];
            v[ie] = -((e_side[ie].0 / d) as i64);
            v[ke + jf] = (f_side[jf].0 / d) as i64;
            v
        })
        .collect();
    let (j, to, _) = FiniteCyclicModule::from_presentation(&orders, &extra, action, n).expect("glued action is valid");
    let column = |c: usize| -> Element { j.group().reduce(&to.iter().map(|row| i128::from(row[c])).collect::<Vec<_>>()) };
    let e_gens = (0..ke).map(column).collect();
    let f_gens = (ke..k).map(column).collect();
    (j, e_gens, f_gens)
}
