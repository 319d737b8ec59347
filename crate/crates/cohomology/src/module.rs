use serde::{Deserialize, Serialize};

use crate::group::{invariants, widen, AbelianGroup, Element};
use crate::lattice::{from_columns, smith, Mat};
use crate::CohomologyError;

/// A finite abelian group with an action of the cyclic group of order `n`,
/// given by the matrix of the generator `g` acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteCyclicModule {
    group: AbelianGroup,
    action: Vec<Vec<i64>>,
    n: u32,
}

fn reduce_matrix(target: &AbelianGroup, m: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    (0..target.rank())
        .map(|i| {
            let d = target.orders()[i] as i64;
            (0..cols).map(|j| m[i][j].rem_euclid(d)).collect()
        })
        .collect()
}

fn mat_apply(group: &AbelianGroup, m: &[Vec<i64>], x: &[i64]) -> Element {
    let y: Vec<i128> = m
        .iter()
        .map(|row| row.iter().zip(x).map(|(&a, &b)| i128::from(a) * i128::from(b)).sum())
        .collect();
    group.reduce(&y)
}

/// Columns `d_j e_j` of the source must map to zero.
fn well_defined(source: &AbelianGroup, target: &AbelianGroup, m: &[Vec<i64>]) -> bool {
    (0..source.rank()).all(|j| {
        let d = source.orders()[j] as i128;
        (0..target.rank()).all(|i| (i128::from(m[i][j]) * d) % target.orders()[i] as i128 == 0)
    })
}

fn shape_ok(m: &[Vec<i64>], rows: usize, cols: usize) -> bool {
    m.len() == rows && m.iter().all(|r| r.len() == cols)
}

impl FiniteCyclicModule {
    pub fn new(group: AbelianGroup, action: Vec<Vec<i64>>, n: u32) -> Result<Self, CohomologyError> {
        let k = group.rank();
        if n == 0 {
            return Err(CohomologyError::InvalidModule("group order must be positive".into()));
        }
        if !shape_ok(&action, k, k) {
            return Err(CohomologyError::InvalidModule(format!("action must be {k}x{k}")));
        }
        if !well_defined(&group, &group, &action) {
            return Err(CohomologyError::InvalidModule("action is not well defined".into()));
        }
        let action = reduce_matrix(&group, &action, k);
        let m = FiniteCyclicModule { group, action, n };
        for e in m.group.basis() {
            if m.act_pow(&e, n) != e {
                return Err(CohomologyError::InvalidModule(format!("g^{n} is not the identity")));
            }
        }
        Ok(m)
    }

    pub fn trivial_action(group: AbelianGroup, n: u32) -> Self {
        let action = identity_i64(group.rank());
        FiniteCyclicModule::new(group, action, n).expect("identity action is valid")
    }

    /// `Z/m` with `g` acting as multiplication by `u`.
    pub fn cyclic(m: u64, u: i64, n: u32) -> Result<Self, CohomologyError> {
        Ok(FiniteCyclicModule::from_presentation(&[m], &[], vec![vec![u]], n)?.0)
    }

    /// Canonical form of `Z^k / <diag(orders), extra>` with `g` acting by
    /// `action` on `Z^k`. Also returns the coordinate change `to` (new
    /// coordinates of old generators, columns) and `from` (lifts of new
    /// generators in old coordinates, columns).
    pub fn from_presentation(
        orders: &[u64],
        extra: &[Vec<i64>],
        action: Vec<Vec<i64>>,
        n: u32,
    ) -> Result<(Self, Vec<Vec<i64>>, Vec<Vec<i64>>), CohomologyError> {
        let k = orders.len();
        if !shape_ok(&action, k, k) || extra.iter().any(|r| r.len() != k) {
            return Err(CohomologyError::InvalidModule("presentation has inconsistent sizes".into()));
        }
        let mut rels: Vec<Vec<i128>> = (0..k)
            .map(|j| (0..k).map(|i| if i == j { orders[j] as i128 } else { 0 }).collect())
            .collect();
        rels.extend(extra.iter().map(|r| widen(r)));
        canonicalize(k, &rels, &action, n)
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn action(&self) -> &[Vec<i64>] {
        &self.action
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u64 {
        self.group.order()
    }

    pub fn act(&self, x: &[i64]) -> Element {
        mat_apply(&self.group, &self.action, x)
    }

    pub fn act_pow(&self, x: &[i64], e: u32) -> Element {
        let mut y = x.to_vec();
        for _ in 0..e {
            y = self.act(&y);
        }
        y
    }

    /// `(g - 1) x`
    pub fn g_minus_one(&self, x: &[i64]) -> Element {
        self.group.sub(&self.act(x), x)
    }

    /// `(1 + g + ... + g^(n-1)) x`
    pub fn norm(&self, x: &[i64]) -> Element {
        let mut acc = self.group.zero();
        let mut y = x.to_vec();
        for _ in 0..self.n {
            acc = self.group.add(&acc, &y);
            y = self.act(&y);
        }
        acc
    }

    pub fn is_fixed(&self, x: &[i64]) -> bool {
        self.act(x) == self.group.reduce(&widen(x))
    }

    /// Images of the generators under `(g - 1)`: generators of `(g - 1) M`.
    pub fn augmentation_image(&self) -> Vec<Element> {
        self.group.basis().iter().map(|e| self.g_minus_one(e)).collect()
    }

    /// Generators of the kernel of the norm.
    pub fn norm_kernel(&self) -> Vec<Element> {
        let basis = self.group.basis();
        let images: Vec<Element> = basis.iter().map(|e| self.norm(e)).collect();
        self.group
            .kernel_lattice(&images, &[])
            .iter()
            .map(|c| self.group.combine(&basis, c))
            .filter(|x| !self.group.is_zero(x))
            .collect()
    }

    /// Close a set of elements under the action.
    pub fn orbit_closure(&self, gens: &[Element]) -> Vec<Element> {
        let mut out = Vec::new();
        for x in gens {
            let x = self.group.reduce(&widen(x));
            for i in 0..self.n {
                let y = self.act_pow(&x, i);
                if !self.group.is_zero(&y) && !out.contains(&y) {
                    out.push(y);
                }
            }
        }
        out
    }

    /// The G-submodule generated by `gens`.
    pub fn submodule(&self, gens: &[Element]) -> Submodule {
        let gens = self.orbit_closure(gens);
        let s = gens.len();
        // presentation Z^s / L
        let lattice = self.group.kernel_lattice(&gens, &[]);
        let action: Vec<Vec<i64>> = {
            let cols: Vec<Vec<i64>> = gens
                .iter()
                .map(|h| {
                    let c = self
                        .group
                        .express(&gens, &self.act(h))
                        .expect("orbit closure is stable");
                    c.iter().map(|&v| i64::try_from(v).expect("small coefficient")).collect()
                })
                .collect();
            (0..s).map(|i| (0..s).map(|j| cols[j][i]).collect()).collect()
        };
        let (module, to, from) = if s == 0 {
            (FiniteCyclicModule::trivial_action(AbelianGroup::trivial(), self.n), Vec::new(), Vec::new())
        } else {
            canonicalize(s, &lattice, &action, self.n).expect("restriction of a valid action")
        };
        let inclusion_cols: Vec<Vec<i64>> = (0..module.group.rank())
            .map(|j| {
                let c: Vec<i128> = (0..s).map(|i| i128::from(from[i][j])).collect();
                self.group.combine(&gens, &c)
            })
            .collect();
        let matrix = columns_to_matrix(self.group.rank(), &inclusion_cols);
        let inclusion = ModuleMap::new(module.clone(), self.clone(), matrix).expect("inclusion is equivariant");
        Submodule {
            module,
            inclusion,
            gens,
            to,
        }
    }

    /// `M / <G gens>` with its projection.
    pub fn quotient(&self, gens: &[Element]) -> (FiniteCyclicModule, ModuleMap) {
        let gens = self.orbit_closure(gens);
        let mut rels = self.group.relations();
        rels.extend(gens.iter().map(|g| widen(g)));
        let k = self.group.rank();
        let (q, to, _) = if k == 0 {
            (FiniteCyclicModule::trivial_action(AbelianGroup::trivial(), self.n), Vec::new(), Vec::new())
        } else {
            canonicalize(k, &rels, &self.action, self.n).expect("quotient of a valid module")
        };
        let proj = ModuleMap::new(self.clone(), q.clone(), to).expect("projection is equivariant");
        (q, proj)
    }

    /// `M[r]`
    pub fn torsion(&self, r: u64) -> Submodule {
        let basis = self.group.basis();
        let images: Vec<Element> = basis.iter().map(|e| self.group.scale(r as i64, e)).collect();
        let gens: Vec<Element> = self
            .group
            .kernel_lattice(&images, &[])
            .iter()
            .map(|c| self.group.combine(&basis, c))
            .collect();
        self.submodule(&gens)
    }

    /// `r M`
    pub fn multiple(&self, r: u64) -> Submodule {
        let gens: Vec<Element> = self.group.basis().iter().map(|e| self.group.scale(r as i64, e)).collect();
        self.submodule(&gens)
    }

    /// `M (+) N` with the two injections.
    pub fn direct_sum(&self, other: &FiniteCyclicModule) -> Result<(FiniteCyclicModule, ModuleMap, ModuleMap), CohomologyError> {
        if self.n != other.n {
            return Err(CohomologyError::InvalidModule("acting groups differ".into()));
        }
        let (a, b) = (self.group.rank(), other.group.rank());
        let mut orders = self.group.orders().to_vec();
        orders.extend_from_slice(other.group.orders());
        let action: Vec<Vec<i64>> = (0..a + b)
            .map(|i| {
                (0..a + b)
                    .map(|j| match (i < a, j < a) {
                        (true, true) => self.action[i][j],
                        (false, false) => other.action[i - a][j - a],
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        let (sum, to, _) = if a + b == 0 {
            (FiniteCyclicModule::trivial_action(AbelianGroup::trivial(), self.n), Vec::new(), Vec::new())
        } else {
            FiniteCyclicModule::from_presentation(&orders, &[], action, self.n)?
        };
        let k = sum.group.rank();
        let pick = |range: std::ops::Range<usize>| -> Vec<Vec<i64>> {
            (0..k).map(|i| range.clone().map(|j| to[i][j]).collect()).collect()
        };
        let i1 = ModuleMap::new(self.clone(), sum.clone(), pick(0..a))?;
        let i2 = ModuleMap::new(other.clone(), sum.clone(), pick(a..a + b))?;
        Ok((sum, i1, i2))
    }
}

fn identity_i64(k: usize) -> Vec<Vec<i64>> {
    (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect()
}

fn columns_to_matrix(rows: usize, cols: &[Element]) -> Vec<Vec<i64>> {
    (0..rows).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

fn canonicalize(
    k: usize,
    relations: &[Vec<i128>],
    action: &[Vec<i64>],
    n: u32,
) -> Result<(FiniteCyclicModule, Vec<Vec<i64>>, Vec<Vec<i64>>), CohomologyError> {
    let orders = invariants(k, relations);
    let group = AbelianGroup::new(orders.clone()).expect("invariant factors are canonical");
    if k == 0 {
        return Ok((FiniteCyclicModule::trivial_action(group, n), Vec::new(), Vec::new()));
    }
    let a: Mat = from_columns(k, relations);
    let s = smith(&a, k, relations.len());
    let kept: Vec<usize> = (0..k).filter(|&i| s.diag[i] > 1).collect();
    let to_raw: Vec<Vec<i128>> = kept.iter().map(|&i| s.u[i].clone()).collect();
    let from_raw: Vec<Vec<i128>> = (0..k).map(|r| kept.iter().map(|&j| s.u_inv[r][j]).collect()).collect();
    let to: Vec<Vec<i64>> = to_raw
        .iter()
        .zip(group.orders())
        .map(|(row, &d)| row.iter().map(|&v| v.rem_euclid(d as i128) as i64).collect())
        .collect();
    let from: Vec<Vec<i64>> = from_raw
        .iter()
        .map(|row| row.iter().map(|&v| i64::try_from(v).expect("small lift")).collect())
        .collect();
    // new action = to * A * from
    let kk = kept.len();
    let new_action: Vec<Vec<i64>> = (0..kk)
        .map(|i| {
            (0..kk)
                .map(|j| {
                    let mut acc: i128 = 0;
                    for p in 0..k {
                        let mut inner: i128 = 0;
                        for q in 0..k {
                            inner += i128::from(action[p][q]) * from_raw[q][j];
                        }
                        acc += to_raw[i][p] * inner;
                    }
                    acc.rem_euclid(group.orders()[i] as i128) as i64
                })
                .collect()
        })
        .collect();
    let module = FiniteCyclicModule::new(group, new_action, n)?;
    Ok((module, to, from))
}

/// A G-equivariant homomorphism; `matrix` is `target.rank() x source.rank()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleMap {
    source: FiniteCyclicModule,
    target: FiniteCyclicModule,
    matrix: Vec<Vec<i64>>,
}

impl ModuleMap {
    pub fn new(source: FiniteCyclicModule, target: FiniteCyclicModule, matrix: Vec<Vec<i64>>) -> Result<Self, CohomologyError> {
        let (ks, kt) = (source.group.rank(), target.group.rank());
        if source.n != target.n {
            return Err(CohomologyError::InvalidMap("acting groups differ".into()));
        }
        if !shape_ok(&matrix, kt, ks) {
            return Err(CohomologyError::InvalidMap(format!("matrix must be {kt}x{ks}")));
        }
        if !well_defined(&source.group, &target.group, &matrix) {
            return Err(CohomologyError::InvalidMap("map is not well defined".into()));
        }
        let matrix = reduce_matrix(&target.group, &matrix, ks);
        let map = ModuleMap { source, target, matrix };
        for e in map.source.group.basis() {
            if map.apply(&map.source.act(&e)) != map.target.act(&map.apply(&e)) {
                return Err(CohomologyError::InvalidMap("map does not commute with the action".into()));
            }
        }
        Ok(map)
    }

    pub fn source(&self) -> &FiniteCyclicModule {
        &self.source
    }

    pub fn target(&self) -> &FiniteCyclicModule {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn apply(&self, x: &[i64]) -> Element {
        mat_apply(&self.target.group, &self.matrix, x)
    }

    /// Images of the source generators.
    pub fn images(&self) -> Vec<Element> {
        self.source.group.basis().iter().map(|e| self.apply(e)).collect()
    }

    /// Some preimage of `y`, if `y` is in the image.
    pub fn lift(&self, y: &[i64]) -> Option<Element> {
        let c = self.target.group.express(&self.images(), y)?;
        Some(self.source.group.reduce(&c))
    }

    /// Generators of the kernel.
    pub fn kernel(&self) -> Vec<Element> {
        let basis = self.source.group.basis();
        self.target
            .group
            .kernel_lattice(&self.images(), &[])
            .iter()
            .map(|c| self.source.group.combine(&basis, c))
            .filter(|x| !self.source.group.is_zero(x))
            .collect()
    }

    pub fn compose(&self, after: &ModuleMap) -> Result<ModuleMap, CohomologyError> {
        let cols: Vec<Element> = self.images().iter().map(|y| after.apply(y)).collect();
        ModuleMap::new(
            self.source.clone(),
            after.target.clone(),
            columns_to_matrix(after.target.group.rank(), &cols),
        )
    }
}

/// A G-stable subgroup of a module together with its own canonical structure.
#[derive(Clone, Debug)]
pub struct Submodule {
    pub module: FiniteCyclicModule,
    pub inclusion: ModuleMap,
    gens: Vec<Element>,
    to: Vec<Vec<i64>>,
}

impl Submodule {
    /// Generators in the ambient module.
    pub fn ambient_gens(&self) -> Vec<Element> {
        self.inclusion.images()
    }

    pub fn order(&self) -> u64 {
        self.module.order()
    }

    /// Coordinates in the submodule of an ambient element, if it lies in it.
    pub fn coords(&self, x: &[i64]) -> Option<Element> {
        let amb = self.inclusion.target.group();
        let c = amb.express(&self.gens, x)?;
        let y: Vec<i128> = self
            .to
            .iter()
            .map(|row| row.iter().zip(&c).map(|(&a, &b)| i128::from(a) * b).sum())
            .collect();
        Some(self.module.group.reduce(&y))
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.inclusion.target.group().contains(&self.gens, x)
    }
}
