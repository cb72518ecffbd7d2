//! Seeded instance generators.
//!
//! Every family is deterministic per `(spec, seed)`. The planted families
//! carry their optimum (pure) or a feasible mass certificate (mixed) by
//! construction, which is what the solver experiments check against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::instances::{LpInstance, LpKind, LpMatrices, PositiveMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Independent entries, `density` fill probability, no known optimum.
    RandomUniform,
    /// 0/1 element-set incidence with every set owning a private element,
    /// so the fractional cover optimum equals the set count. Covering only.
    SetCover,
    /// The identity matrix; optimum equals the dimension.
    Identity,
    /// Instances with a planted certificate: group-structured 0/1 matrices
    /// with known optimum for the pure families, a scaled dense pair with a
    /// known interior point for the mixed family.
    PlantedFeasible,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomUniform => "random_uniform",
            Family::SetCover => "set_cover",
            Family::Identity => "identity",
            Family::PlantedFeasible => "planted_feasible",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_uniform" => Ok(Family::RandomUniform),
            "set_cover" => Ok(Family::SetCover),
            "identity" => Ok(Family::Identity),
            "planted_feasible" => Ok(Family::PlantedFeasible),
            other => Err(Error::InvalidSpec(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenSpec {
    pub rows: usize,
    pub cols: usize,
    pub density: f64,
    pub seed: u64,
    pub family: Family,
}

/// Generate an instance of the requested kind. Identical `(kind, spec)`
/// produce identical instances, byte-for-byte after serialization.
pub fn generate(kind: LpKind, spec: &GenSpec) -> Result<LpInstance<f64>> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidSpec(
            "rows and cols must be at least 1".into(),
        ));
    }
    if !(spec.density > 0.0 && spec.density <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "density {} must lie in (0, 1]",
            spec.density
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    match spec.family {
        Family::Identity => identity(kind, spec),
        Family::RandomUniform => random_uniform(kind, spec, &mut rng),
        Family::SetCover => set_cover(kind, spec, &mut rng),
        Family::PlantedFeasible => match kind {
            LpKind::Packing | LpKind::Covering => planted_pure(kind, spec, &mut rng),
            LpKind::Mixed => planted_mixed(spec, &mut rng),
        },
    }
}

fn identity(kind: LpKind, spec: &GenSpec) -> Result<LpInstance<f64>> {
    if spec.rows != spec.cols {
        return Err(Error::InvalidSpec(
            "identity family requires rows == cols".into(),
        ));
    }
    let n = spec.rows;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = 1.0;
    }
    let eye = PositiveMatrix::new(n, n, data)?;
    match kind {
        LpKind::Packing | LpKind::Covering => LpInstance::new(
            kind,
            LpMatrices::Pure(eye),
            Some(n as f64),
            None,
            Some((1.0, 1.0)),
        ),
        LpKind::Mixed => LpInstance::new(
            kind,
            LpMatrices::Mixed {
                packing: eye.clone(),
                covering: eye,
            },
            None,
            Some(n as f64),
            Some((1.0, 1.0)),
        ),
    }
}

fn random_matrix(rows: usize, cols: usize, density: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let mut data = vec![0.0; rows * cols];
    for v in data.iter_mut() {
        if rng.gen::<f64>() < density {
            *v = rng.gen_range(0.0f64..1.0).max(f64::MIN_POSITIVE);
        }
    }
    data
}

fn random_uniform(kind: LpKind, spec: &GenSpec, rng: &mut ChaCha12Rng) -> Result<LpInstance<f64>> {
    match kind {
        LpKind::Packing | LpKind::Covering => {
            let data = random_matrix(spec.rows, spec.cols, spec.density, rng);
            LpInstance::new(
                kind,
                LpMatrices::Pure(PositiveMatrix::new(spec.rows, spec.cols, data)?),
                None,
                None,
                None,
            )
        }
        LpKind::Mixed => {
            let p_rows = (spec.rows / 2).max(1);
            let c_rows = (spec.rows - p_rows).max(1);
            let packing = random_matrix(p_rows, spec.cols, spec.density, rng);
            let covering = random_matrix(c_rows, spec.cols, spec.density, rng);
            LpInstance::new(
                kind,
                LpMatrices::Mixed {
                    packing: PositiveMatrix::new(p_rows, spec.cols, packing)?,
                    covering: PositiveMatrix::new(c_rows, spec.cols, covering)?,
                },
                None,
                None,
                None,
            )
        }
    }
}

fn set_cover(kind: LpKind, spec: &GenSpec, rng: &mut ChaCha12Rng) -> Result<LpInstance<f64>> {
    if kind != LpKind::Covering {
        return Err(Error::InvalidSpec(
            "set_cover family generates covering instances".into(),
        ));
    }
    let (n, d) = (spec.rows, spec.cols);
    if n < d {
        return Err(Error::InvalidSpec(
            "set_cover needs at least as many elements as sets".into(),
        ));
    }
    // Element i < d is the private element of set i, which pins the
    // fractional optimum at exactly d. Later elements get one owner plus
    // density-driven extra coverage.
    let mut data = vec![0.0; n * d];
    for i in 0..d {
        data[i * d + i] = 1.0;
    }
    for i in d..n {
        let owner = rng.gen_range(0..d);
        data[i * d + owner] = 1.0;
        for j in 0..d {
            if j != owner && rng.gen::<f64>() < spec.density {
                data[i * d + j] = 1.0;
            }
        }
    }
    LpInstance::new(
        kind,
        LpMatrices::Pure(PositiveMatrix::new(n, d, data)?),
        Some(d as f64),
        None,
        Some((1.0, 1.0)),
    )
}

/// Group-structured 0/1 instances with a planted optimum.
///
/// Columns are partitioned into `g` groups. The first `g` rows are the
/// group indicators. For packing, extra rows live inside a single group, so
/// they are dominated by its indicator and the optimum stays `g` (one unit
/// per group). For covering, extra rows are unions of whole groups, so mass
/// one per group covers them and LP duality on the disjoint indicators pins
/// the optimum at `g`.
fn planted_pure(kind: LpKind, spec: &GenSpec, rng: &mut ChaCha12Rng) -> Result<LpInstance<f64>> {
    let (n, d) = (spec.rows, spec.cols);
    let g = d.div_ceil(3).min(n);
    let group_of = |j: usize| j % g;
    let mut data = vec![0.0; n * d];
    for j in 0..d {
        data[group_of(j) * d + j] = 1.0;
    }
    for i in g..n {
        match kind {
            LpKind::Packing => {
                let group = rng.gen_range(0..g);
                let members: Vec<usize> = (0..d).filter(|&j| group_of(j) == group).collect();
                let mut any = false;
                for &j in &members {
                    if rng.gen::<f64>() < spec.density {
                        data[i * d + j] = 1.0;
                        any = true;
                    }
                }
                if !any {
                    data[i * d + members[rng.gen_range(0..members.len())]] = 1.0;
                }
            }
            LpKind::Covering => {
                let mut any = false;
                for group in 0..g {
                    if rng.gen::<f64>() < 0.5 {
                        for j in (0..d).filter(|&j| group_of(j) == group) {
                            data[i * d + j] = 1.0;
                        }
                        any = true;
                    }
                }
                if !any {
                    let group = rng.gen_range(0..g);
                    for j in (0..d).filter(|&j| group_of(j) == group) {
                        data[i * d + j] = 1.0;
                    }
                }
            }
            LpKind::Mixed => unreachable!(),
        }
    }
    LpInstance::new(
        kind,
        LpMatrices::Pure(PositiveMatrix::new(n, d, data)?),
        Some(g as f64),
        None,
        Some((1.0, 1.0)),
    )
}

/// Mixed instances with a planted interior point: rows are rescaled so a
/// drawn `x₀ > 0` satisfies `Px₀ ∈ [0.5, 1]` and `Cx₀ ∈ [1, 1.5]`;
/// `V = 1ᵀx₀` is recorded on the instance.
fn planted_mixed(spec: &GenSpec, rng: &mut ChaCha12Rng) -> Result<LpInstance<f64>> {
    let d = spec.cols;
    if spec.rows < 2 {
        return Err(Error::InvalidSpec(
            "planted mixed instances need at least 2 rows".into(),
        ));
    }
    let p_rows = (spec.rows / 2).max(1);
    let c_rows = (spec.rows - p_rows).max(1);
    let x0: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..1.5)).collect();

    let mut build = |rows: usize, lo: f64, hi: f64| -> Result<PositiveMatrix<f64>> {
        let mut data = random_matrix(rows, d, spec.density, rng);
        // no all-zero rows or columns: rescaling needs a positive row value
        // and declared column ranges need positive maxima
        for i in 0..rows {
            if data[i * d..(i + 1) * d].iter().all(|&v| v == 0.0) {
                data[i * d + rng.gen_range(0..d)] = rng.gen_range(0.5..1.0);
            }
        }
        for j in 0..d {
            if (0..rows).all(|i| data[i * d + j] == 0.0) {
                data[rng.gen_range(0..rows) * d + j] = rng.gen_range(0.5..1.0);
            }
        }
        for i in 0..rows {
            let value: f64 = (0..d).map(|j| data[i * d + j] * x0[j]).sum();
            let target = rng.gen_range(lo..hi);
            let scale = target / value;
            for j in 0..d {
                data[i * d + j] *= scale;
            }
        }
        PositiveMatrix::new(rows, d, data)
    };

    let packing = build(p_rows, 0.5, 1.0)?;
    let covering = build(c_rows, 1.0, 1.5)?;

    // planted certificate must hold by construction
    for (i, v) in packing.mat_vec(&x0).iter().enumerate() {
        if *v > 1.0 + 1e-9 {
            return Err(Error::Internal(format!(
                "planted point violates packing row {i}: {v}"
            )));
        }
    }
    for (i, v) in covering.mat_vec(&x0).iter().enumerate() {
        if *v < 1.0 - 1e-9 {
            return Err(Error::Internal(format!(
                "planted point violates covering row {i}: {v}"
            )));
        }
    }

    let column_range = {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for m in [&packing, &covering] {
            for j in 0..d {
                let cm = m.column_max(j);
                lo = lo.min(cm);
                hi = hi.max(cm);
            }
        }
        (lo, hi)
    };
    let v: f64 = x0.iter().sum();
    LpInstance::new(
        LpKind::Mixed,
        LpMatrices::Mixed { packing, covering },
        None,
        Some(v),
        Some(column_range),
    )
}
