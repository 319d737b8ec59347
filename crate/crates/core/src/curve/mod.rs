//! Exact arithmetic on integral Weierstrass models.
//!
//! Everything here is a pure function of its inputs; models are immutable
//! once built and can be shared freely across threads.

mod counting;
mod minimal;
mod model;
mod reduction;
mod tate;
mod torsion;

pub use counting::{
    count_points_bsgs, count_points_naive, hasse_interval, trace_of_frobenius, CountStrategy,
    BSGS_MIN_PRIME,
};
pub use minimal::{is_reduced_minimal, minimal_model};
pub use model::{compute_invariants, WeierstrassModel};
pub use reduction::{reduce, ReducedCurve, ReductionKind};
pub use tate::{conductor, local_data_all, tate_local_data, Kodaira, LocalData};
pub use torsion::{torsion_order, RationalPoint, TorsionResult};

use crate::arith::FactorError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("singular model: discriminant is zero")]
    SingularModel,
    #[error("model is not minimal at p = {0}")]
    NonMinimalModel(u64),
    #[error("coordinate change does not give an integral model")]
    NotIntegral,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error(transparent)]
    Factor(#[from] FactorError),
}
