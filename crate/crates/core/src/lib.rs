//! Differentially private approximation solvers for positive linear programs.
//!
//! Positive LPs come in three flavors, all normalized so the right-hand
//! sides and objective coefficients are 1:
//!
//! ```text
//! packing:   max 1ᵀx  s.t.  Ax ≤ 1, x ≥ 0
//! covering:  min 1ᵀx  s.t.  Ax ≥ 1, x ≥ 0
//! mixed:     find x ≥ 0 with Px ≤ 1 and Cx ≥ 1
//! ```
//!
//! The privacy model is constraint-level: neighboring instances differ in a
//! single constraint row, so no private algorithm can approximately satisfy
//! every constraint. The solvers here return a solution that satisfies all
//! constraints up to a slack `alpha`, except for a bounded number `s` of
//! violated rows.
//!
//! The numerical heart is the truncated softmax over the capped simplex
//! `D^U = { r ∈ Δ_n : max r ≤ U }` (module [`capped_softmax`]): its gradient
//! is a dense weight vector with no coordinate above `U`, which bounds the
//! sensitivity of the selection scores fed to the exponential mechanism
//! (module [`mechanisms`]). Module [`solvers`] composes the two into
//! multiplicative-weights style solvers for all three LP families; module
//! [`instances`] holds the instance model, file format, generators, and
//! small exact baselines used as test oracles; module [`report`] holds the
//! machine-readable run report and an independent certifier.
//!
//! All numerical code is generic over the scalar type via the [`Real`]
//! trait (`f32` or `f64`). File formats and generators are `f64`-only;
//! the concrete aliases below are what most callers want.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;

pub mod capped_softmax;
pub mod instances;
pub mod mechanisms;
pub mod report;
pub mod solvers;

pub use capped_softmax::{smax_u, smin_u, solve_threshold, top_s_average, CappedWeights, SmaxEval};
pub use instances::{
    exact_opt_tiny, generate, nonprivate_mwu_baseline, opt_search_helper, parse_instance,
    serialize_instance, Family, GenSpec, LpInstance, LpKind, LpMatrices, PositiveMatrix,
};
pub use mechanisms::{
    compose_budget, em_probabilities, em_utility_bound, exp_mechanism, max_estimator, scale_search,
    BudgetSplit, PrivacyBudget, RandomStream, ScoredCandidates,
};
pub use report::{certify_report, parse_report, serialize_report, SolveReport, ViolationCensus};
pub use solvers::{
    certify_top_s, covering_oracle, derive_params, mpc_oracle, packing_oracle, solve_covering,
    solve_instance, solve_mixed_dd, solve_mixed_di, solve_packing, Direction, InstanceMeta,
    IterationTrace, SolveConfig, SolverKind, SolverParams,
};

/// Floating-point scalar the numerical core is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Draw a uniform sample from the open interval (0, 1).
    fn sample_open01<G: Rng + ?Sized>(rng: &mut G) -> Self;
}

impl Real for f64 {
    fn sample_open01<G: Rng + ?Sized>(rng: &mut G) -> Self {
        rng.sample(rand::distributions::Open01)
    }
}

impl Real for f32 {
    fn sample_open01<G: Rng + ?Sized>(rng: &mut G) -> Self {
        rng.sample(rand::distributions::Open01)
    }
}

/// Convert an `f64` constant into the working scalar type.
pub(crate) fn real<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("constant representable in scalar type")
}

/// Instance with `f64` entries, the type the file format produces.
pub type Instance = LpInstance<f64>;
/// Dense nonnegative matrix with `f64` entries.
pub type Matrix = PositiveMatrix<f64>;
/// Solver configuration with `f64` scalars.
pub type Config = SolveConfig<f64>;
/// Derived solver parameters with `f64` scalars.
pub type Params = SolverParams<f64>;
/// Solve report with `f64` scalars, the type the report format produces.
pub type Report = SolveReport<f64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input vector")]
    EmptyInput,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "cap {cap} is infeasible for dimension {n}: the capped simplex requires 1/n <= cap <= 1"
    )]
    InfeasibleCap { cap: f64, n: usize },

    #[error("{what} = {value} out of range: {requirement}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("privacy budget violated: composed loss {composed} exceeds epsilon {epsilon}")]
    BudgetViolation { epsilon: f64, composed: f64 },

    #[error("missing required configuration: {0}")]
    MissingConfig(&'static str),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),

    #[error("{0}")]
    Infeasible(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
