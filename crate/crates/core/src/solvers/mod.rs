//! Private solvers for the three positive-LP families.
//!
//! All four solvers share one skeleton: iterate `T` rounds, each round
//! asking an oracle to pick a coordinate via the exponential mechanism and
//! adding a fixed-size step along it, then normalize the accumulated
//! iterate. The oracles score coordinates by the constraint load measured
//! through the capped-softmax gradient, whose entries never exceed
//! `U = 1/s`; that cap is what bounds the score sensitivity, and `s` is
//! exactly the bound on the number of violated constraints the run is
//! allowed.
//!
//! Parameter derivation ([`derive_params`]) follows the per-family recipes:
//!
//! ```text
//! packing:   H = 2d/(α·OPT) (clipped) or the entry bound, T = ⌈20·H·OPT·ln n/α²⌉,
//!            s = ⌈60·H·OPT·(ln d + ln(T/β))/(α·ε′)⌉, η = α/(10·H·OPT)
//! covering:  H = 40d/(α·OPT) or the entry bound, T = ⌈20·H·OPT·ln n/α⌉,
//!            s = ⌈120·H·OPT·(ln d + ln(T/β))/(α·ε′)⌉
//! mixed dd:  T = ⌈480·(S+R)·V·ln n/α³⌉, step α/(30(S+R)),
//!            s = ⌈30·S·R·V²·(ln d + ln(T/β))/(α³·ε′)⌉
//! mixed di:  T = ⌈480·d²·ln n/α⁴⌉, s = ⌈4800·d²·(ln d + ln(T/β))/(α⁴·ε′)⌉
//! ```
//!
//! with `ε′` from strong composition (half split, or quarter for the
//! data-independent solver whose other half pays for pre-processing).
//! When the derived `s` exceeds the row count the guarantee is vacuous;
//! the run still executes (with the cap clamped to stay feasible) and the
//! report carries a warning flag.
//!
//! Deterministic (argmax) mode is the `ε → ∞` limit: selection becomes
//! exact maximization, `s` collapses to 1 and the cap to `U = 1`, which is
//! the classical multiplicative-weights update the tests use as an oracle.

mod mixed;
mod pure;

pub use mixed::{mpc_oracle, solve_mixed_dd, solve_mixed_di};
pub use pure::{covering_oracle, packing_oracle, solve_covering, solve_packing};

use crate::instances::{LpInstance, LpKind, LpMatrices, PositiveMatrix};
use crate::mechanisms::{compose_budget, BudgetSplit};
use crate::report::{SolveReport, ViolationCensus};
use crate::{real, Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Packing,
    Covering,
    /// Mixed packing-covering with the data-dependent guarantee
    /// (perturbation `α/V`).
    MixedDd,
    /// Mixed packing-covering with the data-independent guarantee
    /// (per-column max estimation, filtering, and clipping).
    MixedDi,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Packing => "packing",
            SolverKind::Covering => "covering",
            SolverKind::MixedDd => "mixed-dd",
            SolverKind::MixedDi => "mixed-di",
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, SolverKind::MixedDd | SolverKind::MixedDi)
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packing" => Ok(SolverKind::Packing),
            "covering" => Ok(SolverKind::Covering),
            "mixed-dd" => Ok(SolverKind::MixedDd),
            "mixed-di" => Ok(SolverKind::MixedDi),
            other => Err(Error::InvalidSpec(format!("unknown solver kind `{other}`"))),
        }
    }
}

/// Caller-facing knobs of one solver run.
#[derive(Debug, Clone)]
pub struct SolveConfig<R> {
    /// Approximation slack: constraints are allowed `1 ± alpha`.
    pub alpha: R,
    /// Failure probability of the utility guarantee.
    pub beta: R,
    pub epsilon: R,
    pub delta: R,
    /// Known optimum (packing/covering).
    pub opt: Option<R>,
    /// Known `1ᵀx₀` of a feasible point (mixed, data-dependent).
    pub feasible_mass: Option<R>,
    /// Declared range `[m, M]` of the column maxima.
    pub column_range: Option<(R, R)>,
    /// Clip large entries before solving (and, for packing, zero small
    /// solution entries afterwards) for the data-independent bound.
    pub preprocess: bool,
    /// Argmax mode: replace sampling by exact maximization (`ε → ∞`).
    pub deterministic: bool,
    pub seed: u64,
    /// Record the per-coordinate step histogram in the report.
    pub trace: bool,
}

impl<R: Real> Default for SolveConfig<R> {
    fn default() -> Self {
        Self {
            alpha: real(0.1),
            beta: real(0.05),
            epsilon: R::one(),
            delta: real(1e-6),
            opt: None,
            feasible_mass: None,
            column_range: None,
            preprocess: false,
            deterministic: false,
            seed: 0,
            trace: false,
        }
    }
}

/// Shape and entry-bound metadata a parameter derivation needs.
#[derive(Debug, Clone, Copy)]
pub struct InstanceMeta<R> {
    /// Rows of the single matrix (pure) or of the packing matrix (mixed).
    pub rows: usize,
    /// Rows of the covering matrix; zero for pure instances.
    pub covering_rows: usize,
    pub cols: usize,
    /// Largest entry of the single/packing matrix.
    pub max_entry: R,
    /// Largest entry of the covering matrix (mixed).
    pub covering_max_entry: R,
    pub declared_range: Option<(R, R)>,
}

impl<R: Real> InstanceMeta<R> {
    pub fn from_pure(a: &PositiveMatrix<R>, declared_range: Option<(R, R)>) -> Self {
        Self {
            rows: a.rows(),
            covering_rows: 0,
            cols: a.cols(),
            max_entry: a.max_entry(),
            covering_max_entry: R::zero(),
            declared_range,
        }
    }

    pub fn from_mixed(
        p: &PositiveMatrix<R>,
        c: &PositiveMatrix<R>,
        declared_range: Option<(R, R)>,
    ) -> Self {
        Self {
            rows: p.rows(),
            covering_rows: c.rows(),
            cols: p.cols(),
            max_entry: p.max_entry(),
            covering_max_entry: c.max_entry(),
            declared_range,
        }
    }

    fn total_rows(&self) -> usize {
        self.rows + self.covering_rows
    }
}

/// All derived scalars of one solver run. The report echoes these exactly
/// as used.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams<R> {
    pub kind: SolverKind,
    /// Rows of the single matrix (pure) or of P (mixed).
    pub rows: usize,
    /// Rows of C (mixed); zero for pure.
    pub covering_rows: usize,
    pub cols: usize,
    pub alpha: R,
    pub beta: R,
    pub epsilon: R,
    pub delta: R,
    pub opt: Option<R>,
    /// Entry bound `H` after optional clipping (pure solvers).
    pub entry_bound: Option<R>,
    /// Step count `T`.
    pub steps: u64,
    /// Per-step privacy `ε′`; infinite in deterministic mode.
    pub step_epsilon: R,
    /// Bound `s` on the number of violated constraints.
    pub violation_budget: u64,
    /// Weight cap `U = 1/s`.
    pub cap: R,
    /// Potential scale `η = α/(10·H·OPT)` (pure solvers).
    pub eta: Option<R>,
    /// Entry bound `S` for the packing matrix (mixed).
    pub pack_entry_bound: Option<R>,
    /// Entry bound for the covering matrix after perturbation/clipping (mixed).
    pub cover_entry_bound: Option<R>,
    /// Feasible mass `V` (mixed, data-dependent).
    pub feasible_mass: Option<R>,
    /// Declared column-max range `[m, M]`.
    pub column_range: Option<(R, R)>,
    /// Coordinate step `α/(30(S+R))` (mixed).
    pub step_size: Option<R>,
    pub preprocess: bool,
    pub deterministic: bool,
    /// Set when `s` exceeds the row count, making the bound vacuous.
    pub vacuous: bool,
}

impl<R: Real> SolverParams<R> {
    /// Effective violation budget a run can realize the cap for:
    /// `min(s, rows)`, at least one.
    pub fn run_s(&self, cap_rows: usize) -> u64 {
        self.violation_budget.min(cap_rows as u64).max(1)
    }

    /// Cap actually used by the weights: `1/run_s`. Equals `cap` whenever
    /// the bound is not vacuous.
    pub fn run_cap(&self, cap_rows: usize) -> R {
        R::one() / real(self.run_s(cap_rows) as f64)
    }

    /// Sensitivity of the oracle score fed to the exponential mechanism,
    /// matching the cap in use.
    pub fn oracle_sensitivity(&self, cap_rows: usize) -> Result<R> {
        let s = real::<R>(self.run_s(cap_rows) as f64);
        match self.kind {
            SolverKind::Packing | SolverKind::Covering => {
                let h = self
                    .entry_bound
                    .ok_or(Error::MissingConfig("entry bound"))?;
                let opt = self.opt.ok_or(Error::MissingConfig("opt"))?;
                Ok(real::<R>(3.0) * h * opt / s)
            }
            SolverKind::MixedDd => {
                let sp = self.pack_entry_bound.ok_or(Error::MissingConfig("S"))?;
                let rc = self.cover_entry_bound.ok_or(Error::MissingConfig("R"))?;
                let v = self.feasible_mass.ok_or(Error::MissingConfig("V"))?;
                Ok(real::<R>(3.0) * sp * rc * v * v / (s * self.alpha * self.alpha))
            }
            SolverKind::MixedDi => {
                let d = real::<R>(self.cols as f64);
                Ok(real::<R>(120.0) * d * d / (s * self.alpha * self.alpha * self.alpha))
            }
        }
    }
}

fn check_unit_interval<R: Real>(what: &'static str, v: R) -> Result<()> {
    if !v.is_finite() || v <= R::zero() || v >= R::one() {
        return Err(Error::OutOfRange {
            what,
            value: v.to_f64().unwrap_or(f64::NAN),
            requirement: "must lie strictly inside (0, 1)",
        });
    }
    Ok(())
}

fn ceil_count<R: Real>(v: R, what: &'static str) -> Result<u64> {
    if !v.is_finite() || v < R::zero() {
        return Err(Error::Internal(format!("derived {what} is not finite")));
    }
    let c = v.ceil();
    if c > real(1e12) {
        return Err(Error::OutOfRange {
            what,
            value: c.to_f64().unwrap_or(f64::NAN),
            requirement: "derived count exceeds the 1e12 runtime guard",
        });
    }
    Ok(c.to_u64().unwrap_or(0).max(1))
}

/// Derive every scalar of a run from the instance shape and the config.
pub fn derive_params<R: Real>(
    kind: SolverKind,
    meta: &InstanceMeta<R>,
    config: &SolveConfig<R>,
) -> Result<SolverParams<R>> {
    check_unit_interval("alpha", config.alpha)?;
    check_unit_interval("beta", config.beta)?;
    if !config.deterministic {
        if !config.epsilon.is_finite() || config.epsilon <= R::zero() {
            return Err(Error::OutOfRange {
                what: "epsilon",
                value: config.epsilon.to_f64().unwrap_or(f64::NAN),
                requirement: "must be positive and finite",
            });
        }
        check_unit_interval("delta", config.delta)?;
    }
    if let Some((m, big_m)) = config.column_range {
        if !(m.is_finite() && big_m.is_finite()) || m <= R::zero() || big_m < m {
            return Err(Error::OutOfRange {
                what: "range",
                value: m.to_f64().unwrap_or(f64::NAN),
                requirement: "0 < m <= M required",
            });
        }
    }

    let alpha = config.alpha;
    let n = meta.total_rows();
    let d = meta.cols;
    let ln_n = real::<R>(n as f64).ln();
    let ln_d = real::<R>(d as f64).ln();
    let range = config.column_range.or(meta.declared_range);
    // Entry bound when no clipping happens: the declared column-max upper
    // end if present, otherwise the observed maximum.
    let declared_bound = |observed: R| range.map(|(_, big_m)| big_m).unwrap_or(observed);

    let mut opt = None;
    let mut entry_bound = None;
    let mut eta = None;
    let mut pack_entry_bound = None;
    let mut cover_entry_bound = None;
    let mut feasible_mass = None;
    let mut step_size = None;

    let (steps, budget_split, cap_rows) = match kind {
        SolverKind::Packing | SolverKind::Covering => {
            let o = config.opt.ok_or(Error::MissingConfig("opt"))?;
            if !o.is_finite() || o <= R::zero() {
                return Err(Error::OutOfRange {
                    what: "opt",
                    value: o.to_f64().unwrap_or(f64::NAN),
                    requirement: "must be positive",
                });
            }
            let h = if config.preprocess {
                let factor = if kind == SolverKind::Packing {
                    real::<R>(2.0)
                } else {
                    real::<R>(40.0)
                };
                factor * real::<R>(d as f64) / (alpha * o)
            } else {
                declared_bound(meta.max_entry)
            };
            if h <= R::zero() {
                return Err(Error::OutOfRange {
                    what: "entry bound",
                    value: h.to_f64().unwrap_or(f64::NAN),
                    requirement: "matrix needs a positive entry bound",
                });
            }
            // Both families need T = 2·ln n/(η·α): the covering potential
            // chain −ln n + (1 − α/10)²·ηT ≥ ηT(1 − α) fails for small α
            // with anything shorter.
            let t = ceil_count(real::<R>(20.0) * h * o * ln_n / (alpha * alpha), "steps")?;
            opt = Some(o);
            entry_bound = Some(h);
            eta = Some(alpha / (real::<R>(10.0) * h * o));
            (t, BudgetSplit::Half, n)
        }
        SolverKind::MixedDd => {
            let v = config.feasible_mass.ok_or(Error::MissingConfig("V"))?;
            if !v.is_finite() || v <= R::zero() {
                return Err(Error::OutOfRange {
                    what: "V",
                    value: v.to_f64().unwrap_or(f64::NAN),
                    requirement: "must be positive",
                });
            }
            if range.is_none() {
                return Err(Error::MissingConfig("range (m, M)"));
            }
            let sp = declared_bound(meta.max_entry);
            // The oracle sees the covering matrix after the +α/V
            // perturbation, so the bound must absorb it.
            let rc = declared_bound(meta.covering_max_entry) + alpha / v;
            if sp <= R::zero() {
                return Err(Error::OutOfRange {
                    what: "packing entry bound",
                    value: sp.to_f64().unwrap_or(f64::NAN),
                    requirement: "packing matrix needs a positive entry bound",
                });
            }
            let total = sp + rc;
            let t = ceil_count(
                real::<R>(480.0) * total * v * ln_n / (alpha * alpha * alpha),
                "steps",
            )?;
            pack_entry_bound = Some(sp);
            cover_entry_bound = Some(rc);
            feasible_mass = Some(v);
            step_size = Some(alpha / (real::<R>(30.0) * total));
            (t, BudgetSplit::Half, meta.rows.min(meta.covering_rows))
        }
        SolverKind::MixedDi => {
            if range.is_none() {
                return Err(Error::MissingConfig("range (m, M)"));
            }
            let dd = real::<R>(d as f64);
            let a2 = alpha * alpha;
            let t = ceil_count(real::<R>(480.0) * dd * dd * ln_n / (a2 * a2), "steps")?;
            // S, R, and the step size depend on the private column-max
            // estimates; the solver fills them in after pre-processing.
            (t, BudgetSplit::Quarter, meta.rows.min(meta.covering_rows))
        }
    };

    let step_epsilon = if config.deterministic {
        R::infinity()
    } else {
        compose_budget(config.epsilon, config.delta, steps, budget_split)?.per_step_epsilon
    };

    let log_term = ln_d + (real::<R>(steps as f64) / config.beta).ln();
    let violation_budget = if config.deterministic {
        1
    } else {
        let s_real = match kind {
            SolverKind::Packing => {
                real::<R>(60.0) * entry_bound.unwrap() * opt.unwrap() * log_term
                    / (alpha * step_epsilon)
            }
            SolverKind::Covering => {
                real::<R>(120.0) * entry_bound.unwrap() * opt.unwrap() * log_term
                    / (alpha * step_epsilon)
            }
            SolverKind::MixedDd => {
                let v = feasible_mass.unwrap();
                real::<R>(30.0)
                    * pack_entry_bound.unwrap()
                    * cover_entry_bound.unwrap()
                    * v
                    * v
                    * log_term
                    / (alpha * alpha * alpha * step_epsilon)
            }
            SolverKind::MixedDi => {
                let dd = real::<R>(d as f64);
                let a2 = alpha * alpha;
                real::<R>(4800.0) * dd * dd * log_term / (a2 * a2 * step_epsilon)
            }
        };
        if !s_real.is_finite() {
            return Err(Error::Internal(
                "derived violation budget is not finite".into(),
            ));
        }
        // Far past vacuous; saturate so the integer stays meaningful.
        s_real
            .ceil()
            .min(real(9e18))
            .to_u64()
            .unwrap_or(u64::MAX)
            .max(1)
    };

    let cap = R::one() / real(violation_budget as f64);
    let vacuous = violation_budget > cap_rows as u64;

    Ok(SolverParams {
        kind,
        rows: meta.rows,
        covering_rows: meta.covering_rows,
        cols: d,
        alpha,
        beta: config.beta,
        epsilon: config.epsilon,
        delta: config.delta,
        opt,
        entry_bound,
        steps,
        step_epsilon,
        violation_budget,
        cap,
        eta,
        pack_entry_bound,
        cover_entry_bound,
        feasible_mass,
        column_range: range,
        step_size,
        preprocess: config.preprocess,
        deterministic: config.deterministic,
        vacuous,
    })
}

/// Per-step record of one run, kept only when tracing is enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<R> {
    /// Coordinate chosen at each step; length `T`.
    pub chosen_coordinates: Vec<usize>,
    /// Score of the selected candidate at each step.
    pub oracle_scores: Vec<R>,
    /// Softmax potential per step (packing and mixed runs).
    pub smax_path: Option<Vec<R>>,
    /// Softmin potential per step (covering and mixed runs).
    pub smin_path: Option<Vec<R>>,
}

impl<R: Real> IterationTrace<R> {
    pub(crate) fn new(steps: usize, smax: bool, smin: bool) -> Self {
        Self {
            chosen_coordinates: Vec::with_capacity(steps),
            oracle_scores: Vec::with_capacity(steps),
            smax_path: smax.then(|| Vec::with_capacity(steps)),
            smin_path: smin.then(|| Vec::with_capacity(steps)),
        }
    }

    pub fn steps(&self) -> usize {
        self.chosen_coordinates.len()
    }

    /// Compact summary carried by the report: the per-coordinate step
    /// histogram.
    pub fn digest(&self, cols: usize) -> crate::report::TraceDigest {
        let mut counts = vec![0u64; cols];
        for &j in &self.chosen_coordinates {
            counts[j] += 1;
        }
        crate::report::TraceDigest {
            steps: self.chosen_coordinates.len() as u64,
            coordinate_counts: counts,
        }
    }
}

/// Which side of the threshold counts as satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Packing style: values must stay at or below the threshold.
    AtMost,
    /// Covering style: values must stay at or above the threshold.
    AtLeast,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::AtMost => "le",
            Direction::AtLeast => "ge",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "le" => Ok(Direction::AtMost),
            "ge" => Ok(Direction::AtLeast),
            other => Err(Error::InvalidSpec(format!("unknown direction `{other}`"))),
        }
    }
}

/// Strictly beyond the threshold, with relative tolerance 1e-9: values at
/// the boundary count as satisfied.
pub(crate) fn is_violated<R: Real>(value: R, threshold: R, direction: Direction) -> bool {
    let tol = real::<R>(1e-9) * threshold.abs().max(R::one());
    match direction {
        Direction::AtMost => value > threshold + tol,
        Direction::AtLeast => value < threshold - tol,
    }
}

pub(crate) fn violated_count<R: Real>(values: &[R], threshold: R, direction: Direction) -> usize {
    values
        .iter()
        .filter(|&&v| is_violated(v, threshold, direction))
        .count()
}

/// Census of one constraint family against its threshold: the violated
/// indices plus the top-`s` average certificate (mean of the `s` most
/// extreme values in the violating direction), and whether the count stays
/// within the budget `s`.
pub fn certify_top_s<R: Real>(
    values: &[R],
    s: u64,
    threshold: R,
    direction: Direction,
) -> Result<(ViolationCensus<R>, bool)> {
    if s == 0 {
        return Err(Error::OutOfRange {
            what: "s",
            value: 0.0,
            requirement: "the violation budget must be at least 1",
        });
    }
    let indices: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| is_violated(v, threshold, direction))
        .map(|(i, _)| i)
        .collect();
    let top_s_average = if values.is_empty() {
        R::zero()
    } else {
        let s_eff = (s as usize).min(values.len());
        let mut sorted = values.to_vec();
        match direction {
            Direction::AtMost => sorted.sort_by(|a, b| b.partial_cmp(a).unwrap()),
            Direction::AtLeast => sorted.sort_by(|a, b| a.partial_cmp(b).unwrap()),
        }
        let sum: R = sorted[..s_eff].iter().copied().sum();
        sum / real(s_eff as f64)
    };
    let pass = indices.len() as u64 <= s;
    Ok((
        ViolationCensus {
            threshold,
            direction,
            indices,
            top_s_average,
        },
        pass,
    ))
}

/// Run the solver matching `kind` on an instance, merging the instance
/// metadata (known optimum, feasible mass, declared range) into the config
/// wherever the config leaves a field unset.
pub fn solve_instance<R: Real>(
    instance: &LpInstance<R>,
    kind: SolverKind,
    config: &SolveConfig<R>,
) -> Result<SolveReport<R>> {
    let mut cfg = config.clone();
    if cfg.opt.is_none() {
        cfg.opt = instance.known_opt;
    }
    if cfg.feasible_mass.is_none() {
        cfg.feasible_mass = instance.known_feasible_mass;
    }
    if cfg.column_range.is_none() {
        cfg.column_range = instance.declared_range;
    }
    match (&instance.matrices, kind) {
        (LpMatrices::Pure(a), SolverKind::Packing) if instance.kind == LpKind::Packing => {
            solve_packing(a, &cfg)
        }
        (LpMatrices::Pure(a), SolverKind::Covering) if instance.kind == LpKind::Covering => {
            solve_covering(a, &cfg)
        }
        (LpMatrices::Mixed { packing, covering }, SolverKind::MixedDd) => {
            solve_mixed_dd(packing, covering, &cfg)
        }
        (LpMatrices::Mixed { packing, covering }, SolverKind::MixedDi) => {
            solve_mixed_di(packing, covering, &cfg)
        }
        _ => Err(Error::InvalidSpec(format!(
            "solver kind {} does not match instance kind {}",
            kind.as_str(),
            instance.kind.as_str()
        ))),
    }
}
