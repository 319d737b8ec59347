use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cohomology::{h0, h1_kernel};
use crate::group::Element;
use crate::module::{FiniteCyclicModule, ModuleMap};
use crate::CohomologyError;

/// `0 -> F' -> J' -> A -> 0`, checked by enumerating elements.
#[derive(Clone, Debug)]
pub struct ExactTriple {
    sub: ModuleMap,
    proj: ModuleMap,
}

impl ExactTriple {
    pub fn new(sub: ModuleMap, proj: ModuleMap) -> Result<Self, CohomologyError> {
        if sub.target() != proj.source() {
            return Err(CohomologyError::NotExact("middle modules differ".into()));
        }
        let f_elems = sub.source().group().elements();
        let image: BTreeSet<Element> = f_elems.iter().map(|x| sub.apply(x)).collect();
        if image.len() != f_elems.len() {
            return Err(CohomologyError::NotExact("first map is not injective".into()));
        }
        let j = sub.target().group();
        let mut hit = BTreeSet::new();
        let mut kernel = BTreeSet::new();
        for x in j.elements() {
            let y = proj.apply(&x);
            if proj.target().group().is_zero(&y) {
                kernel.insert(x);
            }
            hit.insert(y);
        }
        if hit.len() as u64 != proj.target().order() {
            return Err(CohomologyError::NotExact("second map is not surjective".into()));
        }
        if kernel != image {
            return Err(CohomologyError::NotExact("image differs from kernel".into()));
        }
        Ok(ExactTriple { sub, proj })
    }

    /// `0 -> S -> J -> J/S -> 0` for the submodule generated by `gens`.
    pub fn from_submodule(j: &FiniteCyclicModule, gens: &[Element]) -> Result<Self, CohomologyError> {
        let s = j.submodule(gens);
        let (_, proj) = j.quotient(&s.ambient_gens());
        ExactTriple::new(s.inclusion, proj)
    }

    pub fn sub(&self) -> &ModuleMap {
        &self.sub
    }

    pub fn proj(&self) -> &ModuleMap {
        &self.proj
    }

    pub fn kernel_module(&self) -> &FiniteCyclicModule {
        self.sub.source()
    }

    pub fn middle(&self) -> &FiniteCyclicModule {
        self.sub.target()
    }

    pub fn quotient_module(&self) -> &FiniteCyclicModule {
        self.proj.target()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropFact {
    pub lhs: u64,
    pub factor1: u64,
    pub factor2: u64,
    pub equal: bool,
}

/// Both sides of `|A^G / pi(TP)| = |J'^G / (F'^G + TP)| * |ker(H^1(F') -> H^1(J'))|`
/// for a subgroup `TP` of `J'^G` given by generators.
pub fn verify_prop_fact(t: &ExactTriple, tp: &[Element]) -> Result<PropFact, CohomologyError> {
    let (f, j, a) = (t.kernel_module(), t.middle(), t.quotient_module());
    if tp.iter().any(|x| !j.is_fixed(x)) {
        return Err(CohomologyError::NotFixed);
    }
    let h0a = h0(a);
    let pi_tp: Vec<Element> = tp.iter().map(|x| t.proj.apply(x)).collect();
    let lhs = h0a.order() / a.group().subgroup_order(&pi_tp);

    let h0j = h0(j);
    let mut denom: Vec<Element> = h0(f).ambient_gens().iter().map(|x| t.sub.apply(x)).collect();
    denom.extend(tp.iter().cloned());
    let factor1 = h0j.order() / j.group().subgroup_order(&denom);

    let factor2 = h1_kernel(&t.sub).order();
    Ok(PropFact {
        lhs,
        factor1,
        factor2,
        equal: lhs == factor1 * factor2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Antidiagonal {
    pub lhs: u64,
    pub rhs: u64,
    pub equal: bool,
}

/// `|J'^G / (E'^G + F'^G)|` against `|ker(H^1(E' n F') -> H^1(E' (+) F'))|`
/// with the map `x -> (-x, x)`, for G-submodules with `E' + F' = J'`.
pub fn verify_antidiagonal(j: &FiniteCyclicModule, e_gens: &[Element], f_gens: &[Element]) -> Result<Antidiagonal, CohomologyError> {
    let e = j.submodule(e_gens);
    let f = j.submodule(f_gens);
    let mut both = e.ambient_gens();
    both.extend(f.ambient_gens());
    if j.group().subgroup_order(&both) != j.order() {
        return Err(CohomologyError::NotCovering);
    }
    let mut fixed: Vec<Element> = h0(&e.module).ambient_gens().iter().map(|x| e.inclusion.apply(x)).collect();
    fixed.extend(h0(&f.module).ambient_gens().iter().map(|x| f.inclusion.apply(x)));
    let lhs = h0(j).order() / j.group().subgroup_order(&fixed);

    let meet = j.submodule(&j.group().intersection(&e.ambient_gens(), &f.ambient_gens()));
    let (sum, i1, i2) = e.module.direct_sum(&f.module)?;
    let cols: Vec<Element> = meet
        .ambient_gens()
        .iter()
        .map(|x| {
            let xe = e.coords(x).expect("intersection lies in E'");
            let xf = f.coords(x).expect("intersection lies in F'");
            let neg = e.module.group().scale(-1, &xe);
            sum.group().add(&i1.apply(&neg), &i2.apply(&xf))
        })
        .collect();
    let matrix = (0..sum.group().rank()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let anti = ModuleMap::new(meet.module.clone(), sum, matrix)?;
    let rhs = h1_kernel(&anti).order();
    Ok(Antidiagonal { lhs, rhs, equal: lhs == rhs })
}

/// Two G-submodules of `ambient` and a point `Q` standing in for a
/// generator of the free part of `E'^G`. `Q` must lie in `r E'` and be fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RSplitConfig {
    pub ambient: FiniteCyclicModule,
    pub e_gens: Vec<Element>,
    pub f_gens: Vec<Element>,
    pub point: Element,
}

impl RSplitConfig {
    /// `J' = (Z/r^2 (+) Z/r^2) / <(-r, r)>` for the cyclic group of order `r`,
    /// `g = diag(1 + r, 1 + k r)`, `E'` and `F'` the images of the two
    /// summands, `Q = (r, 0)`. Then `E'[r] = F'[r]` and the Kummer class of
    /// `Q` lands in the image of `F'` exactly to index `gcd(k, r)`.
    pub fn standard(r: u64, k: u64) -> Result<Self, CohomologyError> {
        if r < 2 {
            return Err(CohomologyError::InvalidModule("r must be at least 2".into()));
        }
        let (ri, ki) = (r as i64, k as i64);
        let r2 = r * r;
        let n = u32::try_from(r).map_err(|_| CohomologyError::InvalidModule("r too large".into()))?;
        let (ambient, to, _) = FiniteCyclicModule::from_presentation(
            &[r2, r2],
            &[vec![-ri, ri]],
            vec![vec![1 + ri, 0], vec![0, 1 + ki * ri]],
            n,
        )?;
        let image = |v: [i64; 2]| -> Element {
            let y: Vec<i128> = to
                .iter()
                .map(|row| i128::from(row[0]) * i128::from(v[0]) + i128::from(row[1]) * i128::from(v[1]))
                .collect();
            ambient.group().reduce(&y)
        };
        Ok(RSplitConfig {
            e_gens: vec![image([1, 0])],
            f_gens: vec![image([0, 1])],
            point: image([ri, 0]),
            ambient,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RSplit {
    pub r: u64,
    pub r_prime: u64,
    /// Order of the Kummer class of `Q` in `H^1(E'[r])`.
    pub sigma_order: u64,
    pub factor1: u64,
    pub factor2: u64,
    pub factor1_divisible: bool,
    pub factor2_divisible: bool,
}

/// The two-factor split: with `sigma` the Kummer class of `Q` and `r'` least
/// with `r' sigma` in the image of `F'^G`-points, check `r/r' | factor1` and
/// `r' | factor2` of the triple `F' -> J' -> J'/F'` with `TP = E'^G`.
pub fn enact_r_split(config: &RSplitConfig, r: u64) -> Result<RSplit, CohomologyError> {
    let j = &config.ambient;
    let g = j.group();
    if r == 0 {
        return Err(CohomologyError::PreconditionViolated("r must be positive".into()));
    }
    let e = j.submodule(&config.e_gens);
    let f = j.submodule(&config.f_gens);
    let er: Vec<Element> = e.module.torsion(r).ambient_gens().iter().map(|x| e.inclusion.apply(x)).collect();
    let fr: Vec<Element> = f.module.torsion(r).ambient_gens().iter().map(|x| f.inclusion.apply(x)).collect();
    let same = g.subgroup_order(&er) == g.subgroup_order(&fr) && er.iter().all(|x| g.contains(&fr, x));
    if !same {
        return Err(CohomologyError::PreconditionViolated("E'[r] and F'[r] differ".into()));
    }
    let q = &config.point;
    let r_e: Vec<Element> = e.ambient_gens().iter().map(|x| g.scale(r as i64, x)).collect();
    if !j.is_fixed(q) || !g.contains(&r_e, q) {
        return Err(CohomologyError::PreconditionViolated("Q must be a fixed point of rE'".into()));
    }
    let kummer = |lift_gens: &[Element], y: &Element| -> Element {
        let c = g.express(&lift_gens.iter().map(|x| g.scale(r as i64, x)).collect::<Vec<_>>(), y)
            .expect("point is divisible by r");
        let x = g.combine(lift_gens, &c);
        j.g_minus_one(&x)
    };
    let sigma = kummer(&e.ambient_gens(), q);

    let torsion = j.submodule(&er);
    let coboundaries: Vec<Element> = torsion.ambient_gens().iter().map(|x| j.g_minus_one(x)).collect();
    let rf = j.submodule(&f.ambient_gens().iter().map(|x| g.scale(r as i64, x)).collect::<Vec<_>>());
    let mut span = coboundaries.clone();
    for y in h0(&rf.module).ambient_gens().iter().map(|x| rf.inclusion.apply(x)) {
        span.push(kummer(&f.ambient_gens(), &y));
    }
    let least = |gens: &[Element]| (1..=r).find(|&k| g.contains(gens, &g.scale(k as i64, &sigma))).expect("r kills sigma");
    let r_prime = least(&span);
    let sigma_order = least(&coboundaries);

    let triple = ExactTriple::from_submodule(j, &config.f_gens)?;
    let tp: Vec<Element> = h0(&e.module).ambient_gens().iter().map(|x| e.inclusion.apply(x)).collect();
    let fact = verify_prop_fact(&triple, &tp)?;
    Ok(RSplit {
        r,
        r_prime,
        sigma_order,
        factor1: fact.factor1,
        factor2: fact.factor2,
        factor1_divisible: fact.factor1 % (r / r_prime) == 0,
        factor2_divisible: fact.factor2 % r_prime == 0,
    })
}
