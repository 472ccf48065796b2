//! Gauge and perspective duality for convex optimization.
//!
//! The crate builds gauge and perspective duals of problems of the form
//! `minimize f(x) subject to g(b − Ax) ≤ σ`, solves either side with a
//! Chambolle–Pock primal-dual iteration, certifies optimality through the
//! alignment conditions and recovers primal solutions from dual ones.
//!
//! It is `no_std` and only needs an allocator.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod duality;
mod error;
pub mod gauges;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod perspective;
pub mod plq;
pub mod recovery;
pub mod solvers;

pub use duality::{
    build_gauge_dual, build_perspective_dual, check_gauge_optimality, check_perspective_optimality,
    duality_gap_product, DualityProduct, GaugeDualSpec, OptimalityReport, PerspectiveDualSpec,
    ValueStatus,
};
pub use error::{Error, Result};
pub use gauges::{Cone, GaugeKind, GaugeSpec};
pub use model::{
    estimate_operator_norm, generate_sparse_robust_instance, DenseMap, Instance, InstanceSeedSpec,
    ProblemFn, ProblemSpec, ToleranceConfig, RNG_NAME,
};
pub use perspective::{BregmanFamily, PerspectiveFn, PerspectiveKind};
pub use plq::{PerspectiveDualFeasibleSet, PlqSpec};
pub use recovery::{active_support, Recovered, SupportSet};
pub use solvers::{cp_solve, CpConfig, CpOutcome, DualSolve, SolverTrace, TraceRecord};
