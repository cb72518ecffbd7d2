//! Mixed packing-covering solvers.
//!
//! The oracle minimizes the ratio between the weighted packing load and the
//! weighted covering gain of a coordinate:
//!
//! ```text
//! Q(j) = −⟨∇smax^U(Px), P eⱼ⟩ / ⟨∇smin^U(Cx), C eⱼ⟩
//! ```
//!
//! The covering matrix is perturbed upfront so the denominator stays
//! bounded away from zero: `+α/V` everywhere for the data-dependent solver,
//! `+α·M̂ⱼ/d` per column (and clipping at `40d·M̂ⱼ/α`) for the
//! data-independent one, where `M̂ⱼ` is a private estimate of the column
//! maximum of `P`. The data-independent pre-processing also filters out the
//! packing rows at or above `M̂ⱼ`; those rows are reported separately and
//! count against the guarantee together with the violated ones.
//!
//! After the iterations, the exponential mechanism picks the power of
//! `1 + α` inside `[m/(αTM), 60M/(αm)]` whose rescaling of the iterate
//! violates the fewest original constraints.

use std::time::Instant;

use crate::instances::PositiveMatrix;
use crate::mechanisms::{
    exp_mechanism, max_estimator, scale_search, RandomStream, ScoredCandidates,
};
use crate::report::SolveReport;
use crate::solvers::{
    certify_top_s, derive_params, violated_count, Direction, InstanceMeta, IterationTrace,
    SolveConfig, SolverKind, SolverParams,
};
use crate::{real, Error, Real, Result};

/// Returns the selected coordinate, its score, and both potential values.
fn oracle_mixed<R: Real>(
    x: &[R],
    p: Option<&PositiveMatrix<R>>,
    c: &PositiveMatrix<R>,
    params: &SolverParams<R>,
    eps: R,
    rng: &mut RandomStream,
) -> Result<(usize, R, R, R)> {
    let d = c.cols();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            context: "solution length vs matrix columns",
            expected: d,
            got: x.len(),
        });
    }
    let cap_rows = c.rows().min(p.map(|m| m.rows()).unwrap_or(usize::MAX));
    let cap = params.run_cap(cap_rows);
    let pack_eval = match p {
        Some(m) => Some(crate::capped_softmax::smax_u(&m.mat_vec(x), cap)?),
        None => None,
    };
    let cover_eval = crate::capped_softmax::smin_u(&c.mat_vec(x), cap)?;
    let cover_weights = cover_eval.gradient.weights();
    let mut scores = Vec::with_capacity(d);
    for j in 0..d {
        let load = match (&pack_eval, p) {
            (Some(eval), Some(m)) => m.col_dot(eval.gradient.weights(), j),
            _ => R::zero(),
        };
        let gain = c.col_dot(cover_weights, j);
        if gain <= R::zero() {
            return Err(Error::Internal(format!(
                "covering gain vanished for coordinate {j} despite the perturbation"
            )));
        }
        scores.push(-(load / gain));
    }
    let sensitivity = params.oracle_sensitivity(cap_rows)?;
    let candidates = ScoredCandidates::new(scores, sensitivity)?;
    let j = exp_mechanism(&candidates, eps, rng)?;
    let smax_value = pack_eval.map(|e| e.value).unwrap_or(R::zero());
    Ok((j, candidates.scores()[j], smax_value, cover_eval.value))
}

/// One mixed selection: ratio score between packing load and covering gain,
/// sensitivity `3SRV²/(sα²)` (data-dependent) or `120d²/(sα³)`
/// (data-independent). `c` must already carry its positive perturbation.
pub fn mpc_oracle<R: Real>(
    x: &[R],
    p: &PositiveMatrix<R>,
    c: &PositiveMatrix<R>,
    params: &SolverParams<R>,
    eps: R,
    rng: &mut RandomStream,
) -> Result<usize> {
    oracle_mixed(x, Some(p), c, params, eps, rng).map(|(j, _, _, _)| j)
}

/// Candidate scales: powers of `1 + α` inside `[m/(αTM), 60M/(αm)]`.
fn scale_grid<R: Real>(m: R, big_m: R, alpha: R, steps: u64) -> Result<Vec<R>> {
    let t = real::<R>(steps as f64);
    let lo = m / (alpha * t * big_m);
    let hi = real::<R>(60.0) * big_m / (alpha * m);
    let base = (R::one() + alpha).ln();
    let i_lo = (lo.ln() / base)
        .ceil()
        .to_i32()
        .ok_or_else(|| Error::Internal("scale grid underflow".into()))?;
    let i_hi = (hi.ln() / base)
        .floor()
        .to_i32()
        .ok_or_else(|| Error::Internal("scale grid overflow".into()))?;
    if i_lo > i_hi {
        return Err(Error::Internal("scale grid is empty".into()));
    }
    Ok((i_lo..=i_hi).map(|i| (R::one() + alpha).powi(i)).collect())
}

struct MixedOutcome<R> {
    solution: Vec<R>,
    scale: R,
    trace: Option<IterationTrace<R>>,
}

/// Shared iterate-then-rescale driver. `p_run`/`c_run` are the matrices the
/// oracle sees; the violation counter for the scale search and the final
/// census run against the original matrices (minus filtered packing rows).
fn run_mixed_loop<R: Real>(
    p_run: Option<&PositiveMatrix<R>>,
    c_run: &PositiveMatrix<R>,
    p_census: Option<&PositiveMatrix<R>>,
    c_orig: &PositiveMatrix<R>,
    params: &SolverParams<R>,
    want_trace: bool,
    rng: &mut RandomStream,
) -> Result<MixedOutcome<R>> {
    let d = c_run.cols();
    let step = params
        .step_size
        .ok_or_else(|| Error::Internal("mixed params missing the step size".into()))?;
    let mut counts = vec![0u64; d];
    let mut x = vec![R::zero(); d];
    let mut trace = want_trace.then(|| IterationTrace::new(params.steps as usize, true, true));
    for _ in 0..params.steps {
        let (j, score, smax_value, smin_value) =
            oracle_mixed(&x, p_run, c_run, params, params.step_epsilon, rng)?;
        counts[j] += 1;
        x[j] = real::<R>(counts[j] as f64) * step;
        if let Some(t) = trace.as_mut() {
            t.chosen_coordinates.push(j);
            t.oracle_scores.push(score);
            t.smax_path.as_mut().unwrap().push(smax_value);
            t.smin_path.as_mut().unwrap().push(smin_value);
        }
    }

    let (m, big_m) = params
        .column_range
        .ok_or(Error::MissingConfig("range (m, M)"))?;
    let grid = scale_grid(m, big_m, params.alpha, params.steps)?;
    let thr_pack = R::one() + params.alpha;
    let thr_cover = R::one() - params.alpha;
    let counter = |k: R| -> usize {
        let scaled: Vec<R> = x.iter().map(|&v| v * k).collect();
        let pack = p_census
            .map(|pm| violated_count(&pm.mat_vec(&scaled), thr_pack, Direction::AtMost))
            .unwrap_or(0);
        let cover = violated_count(&c_orig.mat_vec(&scaled), thr_cover, Direction::AtLeast);
        pack + cover
    };
    let scale = scale_search(&grid, counter, params.step_epsilon, rng)?;
    let solution: Vec<R> = x.iter().map(|&v| v * scale).collect();
    Ok(MixedOutcome {
        solution,
        scale,
        trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_report<R: Real>(
    params: SolverParams<R>,
    config: &SolveConfig<R>,
    outcome: MixedOutcome<R>,
    p_census: Option<&PositiveMatrix<R>>,
    kept_rows: Option<&[usize]>,
    c_orig: &PositiveMatrix<R>,
    filtered: Vec<usize>,
    started: Instant,
) -> Result<SolveReport<R>> {
    let thr_pack = R::one() + params.alpha;
    let thr_cover = R::one() - params.alpha;
    let s = params.violation_budget;
    let (mut pack_census, _) = match p_census {
        Some(pm) => certify_top_s(
            &pm.mat_vec(&outcome.solution),
            s,
            thr_pack,
            Direction::AtMost,
        )?,
        None => certify_top_s(&[], s, thr_pack, Direction::AtMost)?,
    };
    if let Some(map) = kept_rows {
        for idx in pack_census.indices.iter_mut() {
            *idx = map[*idx];
        }
    }
    let (cover_census, _) = certify_top_s(
        &c_orig.mat_vec(&outcome.solution),
        s,
        thr_cover,
        Direction::AtLeast,
    )?;
    let objective: R = outcome.solution.iter().copied().sum();
    let trace_summary = outcome.trace.as_ref().map(|t| t.digest(c_orig.cols()));
    Ok(SolveReport {
        kind: params.kind,
        seed: config.seed,
        solution: outcome.solution,
        objective,
        violations: pack_census,
        covering_violations: Some(cover_census),
        filtered_constraints: filtered,
        scale: Some(outcome.scale),
        vacuous_bound: params.vacuous,
        params,
        wall_time_ms: started.elapsed().as_millis() as u64,
        trace_summary,
    })
}

/// Mixed solver with the data-dependent guarantee: perturb every covering
/// entry by `α/V`, iterate the ratio oracle, then privately rescale.
pub fn solve_mixed_dd<R: Real>(
    p: &PositiveMatrix<R>,
    c: &PositiveMatrix<R>,
    config: &SolveConfig<R>,
) -> Result<SolveReport<R>> {
    if p.cols() != c.cols() {
        return Err(Error::DimensionMismatch {
            context: "mixed matrices must share the column count",
            expected: p.cols(),
            got: c.cols(),
        });
    }
    let meta = InstanceMeta::from_mixed(p, c, None);
    let params = derive_params(SolverKind::MixedDd, &meta, config)?;
    let v = params.feasible_mass.expect("dd params carry V");
    let perturbation = params.alpha / v;
    let c_pert = c.map_columns(|_, val| val + perturbation);

    let started = Instant::now();
    let mut rng = RandomStream::from_seed(config.seed);
    let outcome = run_mixed_loop(
        Some(p),
        &c_pert,
        Some(p),
        c,
        &params,
        config.trace,
        &mut rng,
    )?;
    build_report(
        params,
        config,
        outcome,
        Some(p),
        None,
        c,
        Vec::new(),
        started,
    )
}

/// Mixed solver with the data-independent guarantee: per column, privately
/// estimate the packing maximum with budget `ε/(2d)` and failure share
/// `β/(2d)`, filter the packing rows at or above the estimate, perturb and
/// clip the covering matrix relative to the estimates, then run the ratio
/// oracle with the data-independent sensitivity.
pub fn solve_mixed_di<R: Real>(
    p: &PositiveMatrix<R>,
    c: &PositiveMatrix<R>,
    config: &SolveConfig<R>,
) -> Result<SolveReport<R>> {
    if p.cols() != c.cols() {
        return Err(Error::DimensionMismatch {
            context: "mixed matrices must share the column count",
            expected: p.cols(),
            got: c.cols(),
        });
    }
    let meta = InstanceMeta::from_mixed(p, c, None);
    let mut params = derive_params(SolverKind::MixedDi, &meta, config)?;
    let (m, big_m) = params.column_range.expect("di params carry the range");
    let d = p.cols();
    let dr = real::<R>(d as f64);

    let started = Instant::now();
    let mut rng = RandomStream::from_seed(config.seed);

    let est_eps = if config.deterministic {
        R::infinity()
    } else {
        config.epsilon / (real::<R>(2.0) * dr)
    };
    let est_beta = config.beta / (real::<R>(2.0) * dr);
    let mut column_estimates = Vec::with_capacity(d);
    let mut filtered: Vec<usize> = Vec::new();
    for j in 0..d {
        let (estimate, filt) =
            max_estimator(&p.column_values(j), m, big_m, est_eps, est_beta, &mut rng)?;
        column_estimates.push(estimate);
        filtered.extend(filt);
    }
    filtered.sort_unstable();
    filtered.dedup();

    let (p_run, kept_rows) = p.without_rows(&filtered);
    let forty = real::<R>(40.0);
    let c_run = c.map_columns(|j, val| {
        (val + params.alpha * column_estimates[j] / dr)
            .min(forty * dr * column_estimates[j] / params.alpha)
    });

    let s_bound = column_estimates.iter().fold(R::zero(), |a, &b| a.max(b));
    let r_bound = column_estimates
        .iter()
        .fold(R::zero(), |a, &b| a.max(forty * dr * b / params.alpha));
    params.pack_entry_bound = Some(s_bound);
    params.cover_entry_bound = Some(r_bound);
    params.step_size = Some(params.alpha / (real::<R>(30.0) * (s_bound + r_bound)));

    let outcome = run_mixed_loop(
        p_run.as_ref(),
        &c_run,
        p_run.as_ref(),
        c,
        &params,
        config.trace,
        &mut rng,
    )?;
    build_report(
        params,
        config,
        outcome,
        p_run.as_ref(),
        Some(&kept_rows),
        c,
        filtered,
        started,
    )
}
