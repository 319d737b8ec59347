use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohomology::{connecting_delta_impl, h0, h1_bruteforce, h1_cyclic};
use crate::random::{
    instance_rng, random_covering_pair, random_fixed_subgroup, random_glued_pair, random_module, random_triple,
};
use crate::triple::{enact_r_split, verify_antidiagonal, verify_prop_fact, ExactTriple, RSplitConfig};

pub const SCOPE: &str = "formal verification of the counting identity";
pub const SPLIT_RS: [u64; 5] = [2, 3, 4, 6, 9];

/// Deliberate faults for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// The boundary map forgets to subtract the lift.
    CorruptConnectingMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelftestConfig {
    pub seed: u64,
    pub instances: u64,
    pub fault: Option<Fault>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestSummary {
    pub instances: u64,
    pub failures: u64,
    pub seed: u64,
    /// Failing instance count per check.
    pub failed_checks: BTreeMap<String, u64>,
    /// Index of the first failing instance; rerun with the same seed.
    pub first_failure: Option<u64>,
    pub scope: String,
}

/// Boundary of every fixed point of the quotient vanishes exactly when the
/// point comes from a fixed point of the middle term.
fn delta_exact(t: &ExactTriple, corrupt: bool) -> bool {
    let a = t.quotient_module();
    let from_middle: Vec<_> = h0(t.middle()).ambient_gens().iter().map(|x| t.proj().apply(x)).collect();
    let fixed = h0(a);
    fixed.module.group().elements().iter().all(|c| {
        let x = fixed.inclusion.apply(c);
        match connecting_delta_impl(t, &x, corrupt) {
            Ok(class) => class.is_zero == a.group().contains(&from_middle, &x),
            Err(_) => false,
        }
    })
}

fn run_instance(seed: u64, index: u64, fault: Option<Fault>) -> Vec<&'static str> {
    let mut rng = instance_rng(seed, index);
    let mut failed = Vec::new();
    let corrupt = fault == Some(Fault::CorruptConnectingMap);

    let t = random_triple(&mut rng, 64, 2);
    let tp = random_fixed_subgroup(&mut rng, t.middle());
    if !verify_prop_fact(&t, &tp).is_ok_and(|p| p.equal) {
        failed.push("prop_fact");
    }
    if !delta_exact(&t, corrupt) {
        failed.push("connecting_delta");
    }

    let (j, e, f) = if rng.gen_bool(0.5) {
        random_glued_pair(&mut rng, 64, 2)
    } else {
        let j = random_module(&mut rng, 64, 2);
        let (e, f) = random_covering_pair(&mut rng, &j);
        (j, e, f)
    };
    if !verify_antidiagonal(&j, &e, &f).is_ok_and(|d| d.equal) {
        failed.push("antidiagonal");
    }

    let n = rng.gen_range(1..=4);
    let m = random_module(&mut rng, 16, n);
    if h1_bruteforce(&m).ok() != Some(h1_cyclic(&m)) {
        failed.push("h1_oracle");
    }

    let r = SPLIT_RS[(index % SPLIT_RS.len() as u64) as usize];
    let k = rng.gen_range(0..r);
    let split = RSplitConfig::standard(r, k).and_then(|c| enact_r_split(&c, r));
    if !split.is_ok_and(|s| s.factor1_divisible && s.factor2_divisible) {
        failed.push("r_split");
    }
    failed
}

pub fn run_selftest(config: &SelftestConfig) -> SelftestSummary {
    let mut failed_checks: BTreeMap<String, u64> = BTreeMap::new();
    let mut failures = 0;
    let mut first_failure = None;
    for index in 0..config.instances {
        let failed = run_instance(config.seed, index, config.fault);
        if !failed.is_empty() {
            failures += 1;
            first_failure.get_or_insert(index);
        }
        for name in failed {
            *failed_checks.entry(name.to_string()).or_insert(0) += 1;
        }
    }
    SelftestSummary {
        instances: config.instances,
        failures,
        seed: config.seed,
        failed_checks,
        first_failure,
        scope: SCOPE.to_string(),
    }
}
