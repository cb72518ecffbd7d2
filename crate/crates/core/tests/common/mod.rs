#![allow(dead_code)] // each test binary uses its own subset of these oracles

//! Shared brute-force oracles for the integration and acceptance tests.
//! Everything here is deliberately independent of the implementation path
//! it checks: Euclidean projection by bisection instead of the entropy
//! water filling, plain sort/loop recomputations instead of the library
//! census helpers.

/// Euclidean projection onto `{0 ≤ r ≤ cap, Σr = 1}` by bisection on the
/// shift.
pub fn project_capped_simplex(v: &[f64], cap: f64) -> Vec<f64> {
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        let sum: f64 = v.iter().map(|&x| (x - mid).clamp(0.0, cap)).sum();
        if sum > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    v.iter().map(|&x| (x - tau).clamp(0.0, cap)).collect()
}

/// Brute-force maximizer of `⟨x,r⟩ − Σ r ln r` over the capped simplex:
/// projected gradient ascent at step 1e-3, then a halving step schedule so
/// coordinates at the 1e-5 scale settle instead of oscillating against the
/// nonnegativity clamp.
pub fn smax_pga_schedule(
    x: &[f64],
    cap: f64,
    base_iters: usize,
    rounds: usize,
    round_iters: usize,
) -> (f64, Vec<f64>) {
    let n = x.len();
    let mut r = project_capped_simplex(&vec![1.0 / n as f64; n], cap);
    let ascend = |r: &mut Vec<f64>, step: f64, count: usize| {
        for _ in 0..count {
            let moved: Vec<f64> = r
                .iter()
                .zip(x)
                .map(|(&ri, &xi)| ri + step * (xi - 1.0 - ri.max(1e-9).ln()))
                .collect();
            *r = project_capped_simplex(&moved, cap);
        }
    };
    ascend(&mut r, 1e-3, base_iters);
    let mut step = 1e-3;
    for _ in 0..rounds {
        step *= 0.5;
        ascend(&mut r, step, round_iters);
    }
    let value = x.iter().zip(&r).map(|(&xi, &ri)| xi * ri).sum::<f64>()
        - r.iter()
            .filter(|&&ri| ri > 0.0)
            .map(|&ri| ri * ri.ln())
            .sum::<f64>();
    (value, r)
}

/// The spec-literal oracle: 1e5 iterations at step 1e-3 plus refinement.
pub fn smax_pga(x: &[f64], cap: f64, iters: usize) -> (f64, Vec<f64>) {
    smax_pga_schedule(x, cap, iters, 30, 2000)
}

/// Bisection solver for `Σ min(cap, exp(x_i − t)) = 1`, to 1e-12.
pub fn threshold_bisect(x: &[f64], cap: f64) -> f64 {
    let hi0 = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = hi0 - 60.0;
    let mut hi = hi0 + (x.len() as f64).ln() + 1.0;
    let mass = |t: f64| -> f64 { x.iter().map(|&xi| cap.min((xi - t).exp())).sum() };
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
