use std::collections::BTreeSet;

use proptest::prelude::*;
use shavis_cohomology::random::{
    instance_rng, random_covering_pair, random_fixed_subgroup, random_glued_pair, random_module, random_triple,
};
use shavis_cohomology::{
    connecting_delta, enact_r_split, h0, h1_bruteforce, h1_cyclic, run_selftest, verify_antidiagonal, verify_prop_fact,
    AbelianGroup, CohomologyError, Element, ExactTriple, Fault, FiniteCyclicModule, RSplitConfig, SelftestConfig,
    SPLIT_RS,
};

type Set = BTreeSet<Element>;

fn span(g: &AbelianGroup, gens: &[Element]) -> Set {
    let mut out: Set = [g.zero()].into_iter().collect();
    loop {
        let mut next = out.clone();
        for x in &out {
            for y in gens {
                next.insert(g.add(x, y));
            }
        }
        if next.len() == out.len() {
            return out;
        }
        out = next;
    }
}

fn fixed(m: &FiniteCyclicModule) -> Set {
    m.group().elements().into_iter().filter(|x| m.is_fixed(x)).collect()
}

fn sum_set(g: &AbelianGroup, a: &Set, b: &Set) -> Set {
    a.iter().flat_map(|x| b.iter().map(move |y| g.add(x, y))).collect()
}

/// `|{z : N z = 0, i(z) in (g-1)J}| / |(g-1)F|` by enumeration.
fn h1_kernel_by_enumeration(t: &ExactTriple) -> u64 {
    let (f, j) = (t.kernel_module(), t.middle());
    let bj: Set = j.group().elements().iter().map(|x| j.g_minus_one(x)).collect();
    let bf: Set = f.group().elements().iter().map(|x| f.g_minus_one(x)).collect();
    let z = f
        .group()
        .elements()
        .into_iter()
        .filter(|x| f.group().is_zero(&f.norm(x)) && bj.contains(&t.sub().apply(x)))
        .count();
    z as u64 / bf.len() as u64
}

#[test]
fn prop_fact_against_enumeration() {
    for i in 0..150 {
        let mut rng = instance_rng(11, i);
        let t = random_triple(&mut rng, 64, 2);
        let tp = random_fixed_subgroup(&mut rng, t.middle());
        let got = verify_prop_fact(&t, &tp).unwrap();
        assert!(got.equal, "instance {i}: {got:?}");

        let (f, j, a) = (t.kernel_module(), t.middle(), t.quotient_module());
        let pi_tp: Vec<Element> = tp.iter().map(|x| t.proj().apply(x)).collect();
        let lhs = fixed(a).len() / span(a.group(), &pi_tp).len();
        let ff: Set = fixed(f).iter().map(|x| t.sub().apply(x)).collect();
        let denom = sum_set(j.group(), &ff, &span(j.group(), &tp));
        let factor1 = fixed(j).len() / denom.len();
        assert_eq!((got.lhs, got.factor1), (lhs as u64, factor1 as u64), "instance {i}");
        assert_eq!(got.factor2, h1_kernel_by_enumeration(&t), "instance {i}");
    }
}

#[test]
fn antidiagonal_against_enumeration() {
    for i in 0..150 {
        let mut rng = instance_rng(12, i);
        let (j, e, f) = if i % 2 == 0 {
            random_glued_pair(&mut rng, 64, 2)
        } else {
            let j = random_module(&mut rng, 64, 2);
            let (e, f) = random_covering_pair(&mut rng, &j);
            (j, e, f)
        };
        let got = verify_antidiagonal(&j, &e, &f).unwrap();
        assert!(got.equal, "instance {i}: {got:?}");
        let g = j.group();
        let es = span(g, &j.orbit_closure(&e));
        let fs = span(g, &j.orbit_closure(&f));
        let fix = fixed(&j);
        let he: Set = es.intersection(&fix).cloned().collect();
        let hf: Set = fs.intersection(&fix).cloned().collect();
        assert_eq!(got.lhs, (fix.len() / sum_set(g, &he, &hf).len()) as u64, "instance {i}");
    }
}

#[test]
fn not_covering_is_rejected() {
    let m = FiniteCyclicModule::trivial_action(AbelianGroup::new(vec![4]).unwrap(), 2);
    assert_eq!(verify_antidiagonal(&m, &[vec![2]], &[]), Err(CohomologyError::NotCovering));
}

#[test]
fn connecting_map_is_exact() {
    for i in 0..200 {
        let mut rng = instance_rng(13, i);
        let t = random_triple(&mut rng, 64, 2);
        let a = t.quotient_module();
        let lifts: Set = fixed(t.middle()).iter().map(|x| t.proj().apply(x)).collect();
        for x in fixed(a) {
            let d = connecting_delta(&t, &x).unwrap();
            assert_eq!(d.is_zero, lifts.contains(&x), "instance {i}, a = {x:?}");
        }
    }
}

#[test]
fn boundary_requires_fixed_point() {
    let z3 = FiniteCyclicModule::cyclic(9, -1, 2).unwrap();
    let t = ExactTriple::from_submodule(&z3, &[vec![3]]).unwrap();
    assert_eq!(connecting_delta(&t, &[1]), Err(CohomologyError::NotFixed));
}

#[test]
fn r_split_on_constructed_configs() {
    for r in SPLIT_RS {
        for k in 0..r {
            let c = RSplitConfig::standard(r, k).unwrap();
            let s = enact_r_split(&c, r).unwrap();
            assert_eq!(s.sigma_order, r, "r={r} k={k}");
            assert_eq!(s.r_prime, gcd(k, r), "r={r} k={k}");
            assert!(s.factor1_divisible && s.factor2_divisible, "r={r} k={k}: {s:?}");
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn h1_oracle_on_random_modules() {
    for i in 0..300 {
        let mut rng = instance_rng(14, i);
        let n = 1 + (i % 4) as u32;
        let m = random_module(&mut rng, 16, n);
        assert_eq!(h1_bruteforce(&m).unwrap(), h1_cyclic(&m), "instance {i}: {m:?}");
    }
}

#[test]
fn h0_of_direct_sum() {
    for i in 0..50 {
        let mut rng = instance_rng(15, i);
        let a = random_module(&mut rng, 32, 2);
        let b = random_module(&mut rng, 32, 2);
        let (s, _, _) = a.direct_sum(&b).unwrap();
        assert_eq!(h0(&s).order(), h0(&a).order() * h0(&b).order());
        assert_eq!(h1_cyclic(&s).order(), h1_cyclic(&a).order() * h1_cyclic(&b).order());
    }
}

#[test]
fn selftest_summary() {
    let ok = run_selftest(&SelftestConfig {
        seed: 0,
        instances: 50,
        fault: None,
    });
    assert_eq!((ok.instances, ok.failures, ok.first_failure), (50, 0, None));
    let empty = run_selftest(&SelftestConfig {
        seed: 0,
        instances: 0,
        fault: None,
    });
    assert_eq!(empty.failures, 0);
    let broken = run_selftest(&SelftestConfig {
        seed: 0,
        instances: 50,
        fault: Some(Fault::CorruptConnectingMap),
    });
    assert!(broken.failures > 0);
    assert!(broken.failed_checks.contains_key("connecting_delta"));
    assert_eq!(broken.failed_checks.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trivial_action_h1_is_gcd(n in 1u32..=6, m in 2u64..=12) {
        let z = FiniteCyclicModule::trivial_action(AbelianGroup::from_cyclic_orders(&[m]), n);
        prop_assert_eq!(h1_cyclic(&z).order(), gcd(u64::from(n), m));
    }

    #[test]
    fn random_seeds_keep_the_identity(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 0);
        let t = random_triple(&mut rng, 64, 2);
        let tp = random_fixed_subgroup(&mut rng, t.middle());
        prop_assert!(verify_prop_fact(&t, &tp).unwrap().equal);
    }
}
