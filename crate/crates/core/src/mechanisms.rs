//! Exponential mechanism, privacy budget accounting, and the private
//! max estimator used by the data-independent mixed solver.
//!
//! The exponential mechanism over scores `Q` with sensitivity `Δ` samples
//! candidate `i` with probability proportional to `exp(ε·Qᵢ/(2Δ))`, which
//! makes the standard utility theorem hold verbatim: with probability at
//! least `1 − β` the selected score is within `2Δ(ln d + ln(1/β))/ε` of the
//! maximum. Sampling uses the Gumbel-max trick in log space, so widely
//! spread scores over thousands of candidates cannot underflow.
//!
//! Privacy accounting uses strong composition in the form
//! `ε′·sqrt(2T·ln(1/δ)) + T·ε′²/2 ≤ ε`; [`compose_budget`] derives the
//! per-step `ε′` and re-verifies the inequality, failing loudly when the
//! requested total is too large for the step count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::{real, Error, Real, Result};

/// Seeded randomness stream for one solver run.
///
/// A run owns exactly one stream; every mechanism invocation draws from it
/// in sequence, so runs are bit-reproducible given (seed, instance, config).
/// Streams must not be shared across threads; concurrent runs each own
/// their own.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn uniform<R: Real>(&mut self) -> R {
        R::sample_open01(&mut self.rng)
    }

    /// Standard Gumbel draw: `−ln(−ln u)` for `u ~ U(0,1)`.
    pub fn gumbel<R: Real>(&mut self) -> R {
        let u: R = self.uniform();
        -(-(u.ln())).ln()
    }

    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.rng
    }
}

/// A finite candidate set scored for the exponential mechanism.
#[derive(Debug, Clone)]
pub struct ScoredCandidates<R> {
    scores: Vec<R>,
    sensitivity: R,
}

impl<R: Real> ScoredCandidates<R> {
    pub fn new(scores: Vec<R>, sensitivity: R) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyInput);
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("candidate scores"));
        }
        if !sensitivity.is_finite() || sensitivity <= R::zero() {
            return Err(Error::OutOfRange {
                what: "sensitivity",
                value: sensitivity.to_f64().unwrap_or(f64::NAN),
                requirement: "sensitivity must be positive",
            });
        }
        Ok(Self {
            scores,
            sensitivity,
        })
    }

    pub fn scores(&self) -> &[R] {
        &self.scores
    }

    pub fn sensitivity(&self) -> R {
        self.sensitivity
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Index of the largest value, ties broken by smallest index.
fn argmax<R: Real>(values: &[R]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Sample a candidate index with probability proportional to
/// `exp(ε·scoreᵢ/(2Δ))` via the Gumbel-max trick.
///
/// An infinite `epsilon` selects the exact argmax (smallest index on ties)
/// and consumes no randomness; this is the deterministic limit the solvers
/// expose as argmax mode.
pub fn exp_mechanism<R: Real>(
    candidates: &ScoredCandidates<R>,
    epsilon: R,
    rng: &mut RandomStream,
) -> Result<usize> {
    if !epsilon.is_finite() {
        if epsilon > R::zero() {
            return Ok(argmax(candidates.scores()));
        }
        return Err(Error::NonFinite("epsilon"));
    }
    if epsilon <= R::zero() {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: epsilon.to_f64().unwrap_or(f64::NAN),
            requirement: "epsilon must be positive",
        });
    }
    let scale = epsilon / (real::<R>(2.0) * candidates.sensitivity());
    let perturbed: Vec<R> = candidates
        .scores()
        .iter()
        .map(|&q| q * scale + rng.gumbel())
        .collect();
    Ok(argmax(&perturbed))
}

/// Analytic selection probabilities of the exponential mechanism,
/// max-shifted so spread-out scores cannot underflow the normalizer.
pub fn em_probabilities<R: Real>(candidates: &ScoredCandidates<R>, epsilon: R) -> Vec<R> {
    let scale = epsilon / (real::<R>(2.0) * candidates.sensitivity());
    let scaled: Vec<R> = candidates.scores().iter().map(|&q| q * scale).collect();
    let m = scaled.iter().fold(R::neg_infinity(), |a, &b| a.max(b));
    let weights: Vec<R> = scaled.iter().map(|&v| (v - m).exp()).collect();
    let total: R = weights.iter().copied().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Additive utility loss of the exponential mechanism: with probability at
/// least `1 − β` the selected score is within
/// `2Δ(ln d + ln(1/β))/ε` of the best among `d` candidates.
pub fn em_utility_bound<R: Real>(d: usize, beta: R, epsilon: R, sensitivity: R) -> R {
    real::<R>(2.0) * sensitivity * (real::<R>(d as f64).ln() + (R::one() / beta).ln()) / epsilon
}

/// How the per-step budget divides the total: `ε/(2√(T ln 1/δ))` for the
/// pure and data-dependent solvers, `ε/(4√(T ln 1/δ))` when half the budget
/// is reserved for pre-processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetSplit {
    Half,
    Quarter,
}

/// An `(ε, δ)` budget together with the per-step `ε′` it decomposes into
/// under strong composition over `steps` adaptive mechanisms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget<R> {
    pub epsilon: R,
    pub delta: R,
    pub per_step_epsilon: R,
    pub steps: u64,
}

impl<R: Real> PrivacyBudget<R> {
    /// Total loss `ε′√(2T ln(1/δ)) + Tε′²/2` of `steps` adaptive
    /// `ε′`-private mechanisms under strong composition.
    pub fn composed_loss(&self) -> R {
        let t = real::<R>(self.steps as f64);
        let log_term = (R::one() / self.delta).ln();
        self.per_step_epsilon * (real::<R>(2.0) * t * log_term).sqrt()
            + t * self.per_step_epsilon * self.per_step_epsilon / real(2.0)
    }
}

/// Derive the per-step budget for `steps` mechanisms and re-verify the
/// strong-composition inequality (which can fail for tiny `δ` combined with
/// a large total `ε`).
pub fn compose_budget<R: Real>(
    total_epsilon: R,
    delta: R,
    steps: u64,
    split: BudgetSplit,
) -> Result<PrivacyBudget<R>> {
    if !total_epsilon.is_finite() || total_epsilon <= R::zero() {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: total_epsilon.to_f64().unwrap_or(f64::NAN),
            requirement: "epsilon must be positive and finite",
        });
    }
    if !(delta > R::zero() && delta < R::one()) {
        return Err(Error::OutOfRange {
            what: "delta",
            value: delta.to_f64().unwrap_or(f64::NAN),
            requirement: "delta must lie in (0, 1)",
        });
    }
    if steps == 0 {
        return Err(Error::OutOfRange {
            what: "steps",
            value: 0.0,
            requirement: "steps must be at least 1",
        });
    }
    let divisor = match split {
        BudgetSplit::Half => real::<R>(2.0),
        BudgetSplit::Quarter => real::<R>(4.0),
    };
    let t = real::<R>(steps as f64);
    let per_step = total_epsilon / (divisor * (t * (R::one() / delta).ln()).sqrt());
    let budget = PrivacyBudget {
        epsilon: total_epsilon,
        delta,
        per_step_epsilon: per_step,
        steps,
    };
    let composed = budget.composed_loss();
    if composed > total_epsilon * (R::one() + real(1e-9)) {
        return Err(Error::BudgetViolation {
            epsilon: total_epsilon.to_f64().unwrap_or(f64::NAN),
            composed: composed.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(budget)
}

/// Privately estimate an upper bound `K` for the maximum of `values`, which
/// are known to lie in `[0, M]` with the maximum at least `m`.
///
/// Runs the exponential mechanism over `k ∈ {0, …, ceil(log2(2M/m))}` with
/// score `Q(k) = −|{aᵢ ≥ 2ᵏm}| − (2(ln ln(2M/m) + ln(1/β))/ε)·k` and
/// sensitivity 1, and returns `K = 2ᵏm` together with the indices of the
/// values at or above `K` (the constraints to filter out). With probability
/// at least `1 − β`, `K ≤ 4·max(values)` and the filtered set is small.
pub fn max_estimator<R: Real>(
    values: &[R],
    m: R,
    big_m: R,
    epsilon: R,
    beta: R,
    rng: &mut RandomStream,
) -> Result<(R, Vec<usize>)> {
    if !(m.is_finite() && big_m.is_finite()) || m <= R::zero() || big_m < m {
        return Err(Error::OutOfRange {
            what: "value range",
            value: m.to_f64().unwrap_or(f64::NAN),
            requirement: "0 < m <= M required",
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("max_estimator values"));
    }
    let two = real::<R>(2.0);
    let ratio = two * big_m / m;
    let k_max = ratio.log2().ceil().to_usize().unwrap_or(0);
    let penalty = two * ((ratio.ln()).ln() + (R::one() / beta).ln()) / epsilon;

    let mut scores = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let cut = two.powi(k as i32) * m;
        let count = values.iter().filter(|&&v| v >= cut).count();
        scores.push(-real::<R>(count as f64) - penalty * real(k as f64));
    }
    let candidates = ScoredCandidates::new(scores, R::one())?;
    let k = exp_mechanism(&candidates, epsilon, rng)?;
    let cut = two.powi(k as i32) * m;
    let filtered = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= cut)
        .map(|(i, _)| i)
        .collect();
    Ok((cut, filtered))
}

/// Privately pick the scale minimizing a violation count: exponential
/// mechanism over the candidate scales with score `−violations(scale)` and
/// sensitivity 1.
pub fn scale_search<R: Real>(
    candidate_scales: &[R],
    mut violation_counter: impl FnMut(R) -> usize,
    epsilon: R,
    rng: &mut RandomStream,
) -> Result<R> {
    if candidate_scales.is_empty() {
        return Err(Error::EmptyInput);
    }
    let scores: Vec<R> = candidate_scales
        .iter()
        .map(|&k| -real::<R>(violation_counter(k) as f64))
        .collect();
    let candidates = ScoredCandidates::new(scores, R::one())?;
    let idx = exp_mechanism(&candidates, epsilon, rng)?;
    Ok(candidate_scales[idx])
}
