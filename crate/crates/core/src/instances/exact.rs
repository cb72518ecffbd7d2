//! Exact optimum for desk-size pure LPs by vertex enumeration.
//!
//! With `d ≤ 3` variables there are at most `C(n+d, d)` candidate vertices:
//! every choice of `d` active constraints among the `n` matrix rows and the
//! `d` nonnegativity facets. Each candidate is a `d×d` linear solve; the
//! feasible ones are scored and the best objective returned. Used as a test
//! oracle for the solvers and the optimum search, never in a private path.

use crate::instances::{LpInstance, LpKind};
use crate::{Error, Result};

const MAX_COLS: usize = 3;
const MAX_ROWS: usize = 12;
/// Feasibility slack when filtering candidate vertices; the hand-built
/// rational test instances stay well inside it.
const SLACK: f64 = 1e-9;

/// Solve a tiny `d×d` system by Gaussian elimination with partial
/// pivoting. Returns `None` when the system is singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let d = b.len();
    for col in 0..d {
        let pivot =
            (col..d).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..d {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (k, &pk) in pivot_row.iter().enumerate().skip(col) {
                a[row][k] -= factor * pk;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for row in (0..d).rev() {
        let mut acc = b[row];
        for (k, &xk) in x.iter().enumerate().skip(row + 1) {
            acc -= a[row][k] * xk;
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn combinations(pool: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(
        start: usize,
        pool: usize,
        k: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..pool {
            current.push(i);
            rec(i + 1, pool, k, current, out);
            current.pop();
        }
    }
    rec(0, pool, k, &mut current, &mut out);
    out
}

/// Exact optimum of a packing or covering instance with `d ≤ 3` and
/// `n ≤ 12` by enumerating candidate vertices.
pub fn exact_opt_tiny(instance: &LpInstance<f64>) -> Result<f64> {
    let a = instance.pure_matrix().ok_or_else(|| {
        Error::InvalidSpec("exact enumeration handles packing/covering only".into())
    })?;
    let (n, d) = (a.rows(), a.cols());
    if d > MAX_COLS || n > MAX_ROWS {
        return Err(Error::TooLarge(format!(
            "{n}x{d} exceeds the {MAX_ROWS}x{MAX_COLS} enumeration limit"
        )));
    }

    match instance.kind {
        LpKind::Packing => {
            // A zero column makes the packing objective unbounded.
            for j in 0..d {
                if a.column_max(j) <= 0.0 {
                    return Err(Error::Infeasible(format!(
                        "column {j} is all zeros: packing optimum unbounded"
                    )));
                }
            }
        }
        LpKind::Covering => {
            // A zero row can never reach 1.
            for i in 0..n {
                if a.row(i).iter().all(|&v| v <= 0.0) {
                    return Err(Error::Infeasible(format!(
                        "row {i} is all zeros: covering instance infeasible"
                    )));
                }
            }
        }
        LpKind::Mixed => unreachable!("pure_matrix returned for mixed"),
    }

    let mut best: Option<f64> = None;
    // Constraint index space: 0..n are matrix rows (active means A_i x = 1),
    // n..n+d are axes (active means x_j = 0).
    for combo in combinations(n + d, d) {
        let mut rows = Vec::with_capacity(d);
        let mut rhs = Vec::with_capacity(d);
        for &c in &combo {
            if c < n {
                rows.push(a.row(c).to_vec());
                rhs.push(1.0);
            } else {
                let mut e = vec![0.0; d];
                e[c - n] = 1.0;
                rows.push(e);
                rhs.push(0.0);
            }
        }
        let Some(x) = solve_dense(rows, rhs) else {
            continue;
        };
        if x.iter().any(|&v| !v.is_finite() || v < -SLACK) {
            continue;
        }
        let values = a.mat_vec(&x);
        let feasible = match instance.kind {
            LpKind::Packing => values.iter().all(|&v| v <= 1.0 + SLACK),
            LpKind::Covering => values.iter().all(|&v| v >= 1.0 - SLACK),
            LpKind::Mixed => unreachable!(),
        };
        if !feasible {
            continue;
        }
        let objective: f64 = x.iter().sum();
        best = Some(match (best, instance.kind) {
            (None, _) => objective,
            (Some(b), LpKind::Packing) => b.max(objective),
            (Some(b), LpKind::Covering) => b.min(objective),
            (_, LpKind::Mixed) => unreachable!(),
        });
    }

    best.ok_or_else(|| Error::Infeasible("no feasible vertex found".into()))
}
