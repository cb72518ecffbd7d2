//! Instance data model, text format, generators, and non-private baselines.
//!
//! An instance is a dense nonnegative constraint matrix (or a pair for the
//! mixed family) plus optional metadata: a known optimum, a known feasible
//! mass `V = 1ᵀx₀`, and a declared range `[m, M]` the column maxima are
//! promised to lie in. The file format is a line-oriented key-value text
//! document with canonical serialization (fixed key order, one matrix row
//! per line, shortest round-trip float rendering, LF newlines); see
//! [`parse_instance`] and [`serialize_instance`].
//!
//! The module also carries the test oracles the solvers are checked
//! against: an exact vertex-enumeration optimum for desk-size pure LPs
//! ([`exact_opt_tiny`]), the classical multiplicative-weights baseline
//! ([`nonprivate_mwu_baseline`], the argmax/untruncated limit of the
//! private solvers), and a non-private geometric search for the optimum
//! ([`opt_search_helper`]). The search helper deliberately stays outside
//! any privacy accounting.

mod exact;
pub(crate) mod format;
mod generate;

pub use exact::exact_opt_tiny;
pub use format::{parse_instance, serialize_instance};
pub use generate::{generate, Family, GenSpec};

use crate::solvers::{solve_covering, solve_packing, SolveConfig};
use crate::{real, Error, Real, Result};

/// Dense row-major nonnegative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMatrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> PositiveMatrix<R> {
    /// Validates shape and nonnegativity and takes ownership of the
    /// row-major entry buffer.
    pub fn new(rows: usize, cols: usize, data: Vec<R>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::OutOfRange {
                what: "matrix dimension",
                value: if rows == 0 { rows as f64 } else { cols as f64 },
                requirement: "rows and cols must be at least 1",
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entry count",
                expected: rows * cols,
                got: data.len(),
            });
        }
        for &v in &data {
            if !v.is_finite() {
                return Err(Error::NonFinite("matrix entry"));
            }
            if v < R::zero() {
                return Err(Error::OutOfRange {
                    what: "matrix entry",
                    value: v.to_f64().unwrap_or(f64::NAN),
                    requirement: "entries must be nonnegative",
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[R] {
        &self.data
    }

    /// Matrix-vector product `Ax`.
    pub fn mat_vec(&self, x: &[R]) -> Vec<R> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &v)| a * v).sum())
            .collect()
    }

    /// Weighted column sum `⟨w, A e_j⟩`.
    pub fn col_dot(&self, weights: &[R], j: usize) -> R {
        debug_assert_eq!(weights.len(), self.rows);
        (0..self.rows)
            .map(|i| weights[i] * self.data[i * self.cols + j])
            .sum()
    }

    pub fn column_values(&self, j: usize) -> Vec<R> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols + j])
            .collect()
    }

    pub fn column_max(&self, j: usize) -> R {
        (0..self.rows)
            .map(|i| self.data[i * self.cols + j])
            .fold(R::zero(), |a, b| a.max(b))
    }

    pub fn max_entry(&self) -> R {
        self.data.iter().fold(R::zero(), |a, &b| a.max(b))
    }

    /// Copy with every entry clipped at `cap` from above.
    pub fn clipped(&self, cap: R) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v.min(cap)).collect(),
        }
    }

    /// Copy with a function applied entry-wise; the function receives the
    /// column index so column-dependent perturbations can be expressed.
    pub fn map_columns(&self, f: impl Fn(usize, R) -> R) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                data.push(f(j, self.data[i * self.cols + j]));
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Copy with the given rows removed; returns the kept rows' original
    /// indices alongside. `remove` must be sorted ascending.
    pub fn without_rows(&self, remove: &[usize]) -> (Option<Self>, Vec<usize>) {
        let mut kept = Vec::new();
        let mut data = Vec::new();
        let mut r = 0;
        for i in 0..self.rows {
            if r < remove.len() && remove[r] == i {
                r += 1;
                continue;
            }
            kept.push(i);
            data.extend_from_slice(self.row(i));
        }
        if kept.is_empty() {
            (None, kept)
        } else {
            let m = Self {
                rows: kept.len(),
                cols: self.cols,
                data,
            };
            (Some(m), kept)
        }
    }
}

/// Which positive-LP family an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpKind {
    Packing,
    Covering,
    Mixed,
}

impl LpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LpKind::Packing => "packing",
            LpKind::Covering => "covering",
            LpKind::Mixed => "mixed",
        }
    }
}

/// Constraint matrices of an instance: one for the pure families, a
/// packing/covering pair for the mixed family.
#[derive(Debug, Clone, PartialEq)]
pub enum LpMatrices<R> {
    Pure(PositiveMatrix<R>),
    Mixed {
        packing: PositiveMatrix<R>,
        covering: PositiveMatrix<R>,
    },
}

/// A positive-LP instance, normalized so right-hand sides and objective
/// coefficients are one.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance<R> {
    pub kind: LpKind,
    pub matrices: LpMatrices<R>,
    /// Known optimal objective (packing/covering).
    pub known_opt: Option<R>,
    /// Known `1ᵀx₀` of a feasible solution (mixed).
    pub known_feasible_mass: Option<R>,
    /// Declared range `[m, M]` every column maximum lies in.
    pub declared_range: Option<(R, R)>,
}

impl<R: Real> LpInstance<R> {
    pub fn new(
        kind: LpKind,
        matrices: LpMatrices<R>,
        known_opt: Option<R>,
        known_feasible_mass: Option<R>,
        declared_range: Option<(R, R)>,
    ) -> Result<Self> {
        match (kind, &matrices) {
            (LpKind::Packing | LpKind::Covering, LpMatrices::Pure(_)) => {}
            (LpKind::Mixed, LpMatrices::Mixed { packing, covering }) => {
                if packing.cols() != covering.cols() {
                    return Err(Error::DimensionMismatch {
                        context: "mixed matrices must share the column count",
                        expected: packing.cols(),
                        got: covering.cols(),
                    });
                }
            }
            _ => {
                return Err(Error::InvalidSpec(
                    "matrix shape does not match the instance kind".into(),
                ));
            }
        }
        if let Some(opt) = known_opt {
            if !opt.is_finite() || opt <= R::zero() {
                return Err(Error::OutOfRange {
                    what: "opt",
                    value: opt.to_f64().unwrap_or(f64::NAN),
                    requirement: "known optimum must be positive",
                });
            }
        }
        if let Some(v) = known_feasible_mass {
            if !v.is_finite() || v <= R::zero() {
                return Err(Error::OutOfRange {
                    what: "V",
                    value: v.to_f64().unwrap_or(f64::NAN),
                    requirement: "feasible mass must be positive",
                });
            }
        }
        let instance = Self {
            kind,
            matrices,
            known_opt,
            known_feasible_mass,
            declared_range,
        };
        if let Some((m, big_m)) = declared_range {
            if !(m.is_finite() && big_m.is_finite()) || m <= R::zero() || big_m < m {
                return Err(Error::OutOfRange {
                    what: "range",
                    value: m.to_f64().unwrap_or(f64::NAN),
                    requirement: "0 < m <= M required",
                });
            }
            let tol = real::<R>(1e-9);
            for matrix in instance.all_matrices() {
                for j in 0..matrix.cols() {
                    let cm = matrix.column_max(j);
                    if cm < m - tol || cm > big_m + tol {
                        return Err(Error::OutOfRange {
                            what: "column maximum",
                            value: cm.to_f64().unwrap_or(f64::NAN),
                            requirement: "every column maximum must lie in the declared range",
                        });
                    }
                }
            }
        }
        Ok(instance)
    }

    fn all_matrices(&self) -> Vec<&PositiveMatrix<R>> {
        match &self.matrices {
            LpMatrices::Pure(a) => vec![a],
            LpMatrices::Mixed { packing, covering } => vec![packing, covering],
        }
    }

    /// The single matrix of a packing/covering instance.
    pub fn pure_matrix(&self) -> Option<&PositiveMatrix<R>> {
        match &self.matrices {
            LpMatrices::Pure(a) => Some(a),
            LpMatrices::Mixed { .. } => None,
        }
    }

    /// The `(P, C)` pair of a mixed instance.
    pub fn mixed_matrices(&self) -> Option<(&PositiveMatrix<R>, &PositiveMatrix<R>)> {
        match &self.matrices {
            LpMatrices::Pure(_) => None,
            LpMatrices::Mixed { packing, covering } => Some((packing, covering)),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.matrices {
            LpMatrices::Pure(a) => a.cols(),
            LpMatrices::Mixed { packing, .. } => packing.cols(),
        }
    }

    /// Total constraint rows (`p + c` for mixed).
    pub fn rows(&self) -> usize {
        match &self.matrices {
            LpMatrices::Pure(a) => a.rows(),
            LpMatrices::Mixed { packing, covering } => packing.rows() + covering.rows(),
        }
    }
}

/// Classical multiplicative-weights baseline: the private solvers in
/// argmax mode with the untruncated softmax (`U = 1`). Satisfies every
/// constraint at `1 ± alpha`, which makes it the feasibility oracle behind
/// [`opt_search_helper`] and the deterministic-limit tests.
pub fn nonprivate_mwu_baseline<R: Real>(instance: &LpInstance<R>, alpha: R) -> Result<Vec<R>> {
    let opt = instance.known_opt.ok_or(Error::MissingConfig(
        "opt (known_opt required for the baseline)",
    ))?;
    baseline_at(instance, alpha, opt)
}

fn baseline_at<R: Real>(instance: &LpInstance<R>, alpha: R, opt: R) -> Result<Vec<R>> {
    let a = instance.pure_matrix().ok_or_else(|| {
        Error::InvalidSpec("baseline requires a packing or covering instance".into())
    })?;
    let config = SolveConfig {
        alpha,
        opt: Some(opt),
        deterministic: true,
        preprocess: false,
        ..SolveConfig::default()
    };
    let report = match instance.kind {
        LpKind::Packing => solve_packing(a, &config)?,
        LpKind::Covering => solve_covering(a, &config)?,
        LpKind::Mixed => unreachable!("pure_matrix returned for mixed"),
    };
    Ok(report.solution)
}

/// Non-private geometric search for the optimum over `[1/(dM), d/m]`,
/// using the classical baseline as the feasibility oracle. Returns a value
/// within a `(1 ± alpha)` factor of the true optimum. Binary-search log
/// factors are deliberately not charged to any privacy budget.
pub fn opt_search_helper<R: Real>(instance: &LpInstance<R>, alpha: R) -> Result<R> {
    let (m, big_m) = instance.declared_range.ok_or(Error::MissingConfig(
        "range (declared [m, M] required for the search)",
    ))?;
    if instance.pure_matrix().is_none() {
        return Err(Error::InvalidSpec(
            "opt search requires a packing or covering instance".into(),
        ));
    }
    let d = real::<R>(instance.cols() as f64);
    let lo = R::one() / (d * big_m);
    let hi = d / m;
    let ratio = (R::one() + alpha).ln();
    let cells = ((hi / lo).ln() / ratio)
        .floor()
        .to_i64()
        .ok_or_else(|| Error::Internal("search grid size overflow".into()))?
        .max(0);
    let grid_point = |i: i64| lo * (R::one() + alpha).powi(i as i32);

    let feasible = |guess: R| -> Result<bool> {
        let x = baseline_at(instance, alpha, guess)?;
        let a = instance.pure_matrix().unwrap();
        let values = a.mat_vec(&x);
        let ok = match instance.kind {
            LpKind::Packing => {
                let cut = (R::one() + alpha) * (R::one() + real(1e-9));
                values.iter().all(|&v| v <= cut)
            }
            LpKind::Covering => {
                let cut = (R::one() - alpha) * (R::one() - real(1e-9));
                values.iter().all(|&v| v >= cut)
            }
            LpKind::Mixed => unreachable!(),
        };
        Ok(ok)
    };

    // Packing: the smallest guess is always feasible and guesses beyond
    // (1+alpha)·OPT are not, so bisect for the largest feasible cell.
    // Covering dually bisects for the smallest feasible cell.
    match instance.kind {
        LpKind::Packing => {
            if !feasible(grid_point(0))? {
                return Ok(grid_point(0));
            }
            let (mut ok, mut bad) = (0i64, cells + 1);
            while bad - ok > 1 {
                let mid = (ok + bad) / 2;
                if feasible(grid_point(mid))? {
                    ok = mid;
                } else {
                    bad = mid;
                }
            }
            Ok(grid_point(ok))
        }
        LpKind::Covering => {
            if feasible(grid_point(0))? {
                return Ok(grid_point(0));
            }
            let (mut bad, mut ok) = (0i64, cells);
            if !feasible(grid_point(cells))? {
                return Ok(grid_point(cells));
            }
            while ok - bad > 1 {
                let mid = (ok + bad) / 2;
                if feasible(grid_point(mid))? {
                    ok = mid;
                } else {
                    bad = mid;
                }
            }
            Ok(grid_point(ok))
        }
        LpKind::Mixed => unreachable!(),
    }
}
