//! Group cohomology of finite modules over a finite cyclic group, and
//! checks of the counting identities that come out of the long exact
//! sequence. Groups are kept in Smith normal form; enumeration is used only
//! for the independent oracles and for validating exact triples.

mod cohomology;
mod group;
mod lattice;
mod module;
pub mod random;
mod selftest;
mod triple;

pub use cohomology::{
    connecting_delta, h0, h1_bruteforce, h1_cyclic, h1_kernel, same_class, H1Class, BRUTEFORCE_BUDGET,
    BRUTEFORCE_MAX_N,
};
pub use group::{AbelianGroup, Element};
pub use module::{FiniteCyclicModule, ModuleMap, Submodule};
pub use selftest::{run_selftest, Fault, SelftestConfig, SelftestSummary, SCOPE, SPLIT_RS};
pub use triple::{
    enact_r_split, verify_antidiagonal, verify_prop_fact, Antidiagonal, ExactTriple, PropFact, RSplit, RSplitConfig,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohomologyError {
    #[error("enumeration of |M|^n with |M| = {order}, n = {n} exceeds the budget {budget}")]
    BudgetExceeded { order: u64, n: u32, budget: u64 },
    #[error("E' + F' is not the whole module")]
    NotCovering,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("not exact: {0}")]
    NotExact(String),
    #[error("element is not fixed by the action")]
    NotFixed,
}
