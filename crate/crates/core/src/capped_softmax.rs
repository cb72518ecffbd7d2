//! Truncated softmax and softmin over the capped simplex.
//!
//! For a cap `0 < U <= 1` the capped simplex is
//! `D^U = { r ∈ Δ_n : max r ≤ U }` and the truncated softmax is
//!
//! ```text
//! smax^U(x) = max_{r ∈ D^U} ⟨x, r⟩ − ω(r),    ω(r) = Σᵢ rᵢ ln rᵢ
//! smin^U(x) = −smax^U(−x)
//! ```
//!
//! The maximizer has the water-filling form `rᵢ = min{U, exp(xᵢ − t)}`
//! where the threshold `t` normalizes `r` onto the simplex. With `U = 1`
//! this degenerates to the ordinary log-sum-exp / softmax pair.
//!
//! The threshold is found in closed form: sort coordinates descending and
//! grow the capped prefix until the remaining mass fits under the cap. Each
//! candidate prefix size `k` has threshold
//!
//! ```text
//! t_k = logsumexp(x over the n−k uncapped coordinates) − ln(1 − kU)
//! ```
//!
//! and the first `k` whose uncapped weights all stay below `U` is the
//! solution. Everything is evaluated max-shifted, so inputs of any finite
//! magnitude are safe.

use crate::{real, Error, Real, Result};

/// A point of the capped simplex `D^U`: nonnegative weights with
/// `max ≤ cap` that sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedWeights<R> {
    weights: Vec<R>,
    cap: R,
}

/// Tolerance for a single entry overshooting `[0, U]`.
const ENTRY_TOL: f64 = 1e-12;
/// Tolerance for the weight sum deviating from one.
const SUM_TOL: f64 = 1e-9;
/// Two weights within this of the cap are treated as tied at the cap.
const TIE_TOL: f64 = 1e-12;

impl<R: Real> CappedWeights<R> {
    /// Validates the capped-simplex invariants and takes ownership of the
    /// weight vector. The cap must satisfy `1/n ≤ cap ≤ 1`, every entry must
    /// lie in `[0, cap]` up to 1e-12, and the entries must sum to one up to
    /// 1e-9.
    pub fn new(weights: Vec<R>, cap: R) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        check_cap(cap, n)?;
        let entry_tol = real::<R>(ENTRY_TOL);
        let mut sum = R::zero();
        for &w in &weights {
            if !w.is_finite() {
                return Err(Error::NonFinite("weights"));
            }
            if w < -entry_tol || w > cap + entry_tol {
                return Err(Error::OutOfRange {
                    what: "weight",
                    value: w.to_f64().unwrap_or(f64::NAN),
                    requirement: "every weight must lie in [0, cap]",
                });
            }
            sum += w;
        }
        // f32 sums of long vectors accumulate more rounding than the f64
        // contract allows for; scale the floor with epsilon.
        let sum_tol = real::<R>(SUM_TOL).max(R::epsilon() * real(4.0 * n as f64));
        if (sum - R::one()).abs() > sum_tol {
            return Err(Error::OutOfRange {
                what: "weight sum",
                value: sum.to_f64().unwrap_or(f64::NAN),
                requirement: "weights must sum to 1",
            });
        }
        Ok(Self { weights, cap })
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn cap(&self) -> R {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Negative entropy `ω(r) = Σ rᵢ ln rᵢ`, with `0 ln 0 = 0`.
    pub fn neg_entropy(&self) -> R {
        self.weights
            .iter()
            .filter(|&&w| w > R::zero())
            .map(|&w| w * w.ln())
            .sum()
    }

    /// Inner product with a dense vector of the same length.
    pub fn dot(&self, other: &[R]) -> R {
        debug_assert_eq!(self.weights.len(), other.len());
        self.weights.iter().zip(other).map(|(&w, &v)| w * v).sum()
    }
}

/// Result of evaluating `smax^U` (or `smin^U`) at a point.
#[derive(Debug, Clone)]
pub struct SmaxEval<R> {
    /// The function value.
    pub value: R,
    /// The maximizer, i.e. the gradient of `smax^U` at `x`
    /// (for `smin^U`, the gradient has entries `min{U, exp(−xᵢ − t)}`).
    pub gradient: CappedWeights<R>,
    /// The normalizing threshold `t_U(x)`.
    pub threshold: R,
    /// Sorted indices of the coordinates pinned at the cap.
    pub capped_set: Vec<usize>,
}

impl<R: Real> SmaxEval<R> {
    /// Residual mass `1 − U·|C|` left for the uncapped coordinates.
    pub fn residual_mass(&self) -> R {
        (R::one() - self.gradient.cap() * real(self.capped_set.len() as f64)).max(R::zero())
    }
}

fn check_cap<R: Real>(cap: R, n: usize) -> Result<()> {
    if !cap.is_finite() || cap <= R::zero() || cap > R::one() {
        return Err(Error::InfeasibleCap {
            cap: cap.to_f64().unwrap_or(f64::NAN),
            n,
        });
    }
    // cap * n >= 1 up to the same slack as the sum invariant; U = 1/n must
    // pass even when 1/n is not exactly representable.
    if cap * real(n as f64) < R::one() - real(SUM_TOL) {
        return Err(Error::InfeasibleCap {
            cap: cap.to_f64().unwrap_or(f64::NAN),
            n,
        });
    }
    Ok(())
}

fn check_input<R: Real>(x: &[R], cap: R) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("smax input"));
    }
    check_cap(cap, x.len())
}

struct WaterFill<R> {
    threshold: R,
    /// Number of coordinates the closed-form selection pinned at the cap.
    prefix: usize,
    /// Indices sorted by descending value, ties by ascending index.
    order: Vec<usize>,
}

/// Closed-form water filling: find `t` such that
/// `Σᵢ min{cap, exp(xᵢ − t)} = 1`.
fn water_fill<R: Real>(x: &[R], cap: R) -> WaterFill<R> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap().then(a.cmp(&b)));

    // Suffix log-sum-exp over the sorted order: lse[k] = logsumexp of the
    // n−k smallest-ranked values. Built backwards so each combine is
    // max-shifted.
    let mut lse = vec![R::neg_infinity(); n + 1];
    for k in (0..n).rev() {
        let v = x[order[k]];
        let m = v.max(lse[k + 1]);
        lse[k] = m + ((v - m).exp() + (lse[k + 1] - m).exp()).ln();
    }

    let ln_cap = cap.ln();
    let tie = real::<R>(TIE_TOL);
    for k in 0..n {
        let remaining = R::one() - real::<R>(k as f64) * cap;
        if remaining <= R::zero() {
            break;
        }
        let t = lse[k] - remaining.ln();
        // Largest uncapped weight must not exceed the cap, and the smallest
        // capped weight must still reach it. Ties at the boundary accept.
        let upper_ok = (x[order[k]] - t).exp() <= cap * (R::one() + tie);
        let lower_ok = k == 0 || (x[order[k - 1]] - t).exp() >= cap * (R::one() - tie);
        if upper_ok && lower_ok {
            return WaterFill {
                threshold: t,
                prefix: k,
                order,
            };
        }
    }

    // Degenerate case: the cap is (numerically) 1/s for integer s and the
    // top s coordinates absorb all mass. Deterministic continuous limit:
    // pin the top s, threshold such that the s-th coordinate sits exactly
    // at the cap.
    let s = (R::one() / cap).round().to_usize().unwrap_or(n).clamp(1, n);
    WaterFill {
        threshold: x[order[s - 1]] - ln_cap,
        prefix: s,
        order,
    }
}

/// Evaluate the truncated softmax `smax^U(x) = max_{r ∈ D^U} ⟨x,r⟩ − ω(r)`.
///
/// The gradient is the exact maximizer `rᵢ = min{U, exp(xᵢ − t)}`; the value
/// is assembled in shifted log space from the threshold, so no exponential
/// of a raw input is ever taken.
pub fn smax_u<R: Real>(x: &[R], cap: R) -> Result<SmaxEval<R>> {
    check_input(x, cap)?;
    let n = x.len();
    let wf = water_fill(x, cap);
    let t = wf.threshold;

    // value = t·(1 − kU) + U·Σ_capped xᵢ − kU ln U, exact for the selected
    // prefix; reduces to ⟨x,r⟩ − ω(r) by substituting ln rᵢ = xᵢ − t on the
    // uncapped coordinates.
    let k = real::<R>(wf.prefix as f64);
    let capped_sum: R = wf.order[..wf.prefix].iter().map(|&i| x[i]).sum();
    let remaining = (R::one() - k * cap).max(R::zero());
    let value = t * remaining + cap * capped_sum - k * cap * cap.ln();

    let tie = real::<R>(TIE_TOL);
    let mut weights = vec![R::zero(); n];
    let mut capped_set = Vec::new();
    for (rank, &i) in wf.order.iter().enumerate() {
        if rank < wf.prefix {
            weights[i] = cap;
        } else {
            let w = (x[i] - t).exp();
            // Snap boundary ties onto the cap so the capped set is
            // deterministic.
            weights[i] = if w >= cap * (R::one() - tie) { cap } else { w };
        }
    }
    for (i, &w) in weights.iter().enumerate() {
        if w >= cap * (R::one() - tie) {
            capped_set.push(i);
        }
    }

    let gradient = CappedWeights::new(weights, cap)
        .map_err(|e| Error::Internal(format!("smax gradient left the capped simplex: {e}")))?;
    Ok(SmaxEval {
        value,
        gradient,
        threshold: t,
        capped_set,
    })
}

/// Evaluate the truncated softmin `smin^U(x) = −smax^U(−x)`.
///
/// Delegates to [`smax_u`] on `−x`: the value is negated, the gradient is
/// the maximizer of the negated problem, which matches
/// `min{U, exp(−xᵢ − t)}`.
pub fn smin_u<R: Real>(x: &[R], cap: R) -> Result<SmaxEval<R>> {
    let negated: Vec<R> = x.iter().map(|&v| -v).collect();
    let eval = smax_u(&negated, cap)?;
    Ok(SmaxEval {
        value: -eval.value,
        gradient: eval.gradient,
        threshold: eval.threshold,
        capped_set: eval.capped_set,
    })
}

/// Solve for the water-filling threshold alone: returns `(t, capped_set)`
/// with `Σᵢ min{U, exp(xᵢ − t)} = 1`. Deterministic: identical input gives
/// bit-identical output.
pub fn solve_threshold<R: Real>(x: &[R], cap: R) -> Result<(R, Vec<usize>)> {
    let eval = smax_u(x, cap)?;
    Ok((eval.threshold, eval.capped_set))
}

/// Mean of the `s` largest entries of `x`.
pub fn top_s_average<R: Real>(x: &[R], s: usize) -> Result<R> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if s == 0 || s > x.len() {
        return Err(Error::OutOfRange {
            what: "s",
            value: s as f64,
            requirement: "1 <= s <= len(x)",
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("top_s_average input"));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sum: R = sorted[..s].iter().copied().sum();
    Ok(sum / real(s as f64))
}
