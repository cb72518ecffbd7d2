//! Solve reports: the machine-readable record of one run, its canonical
//! text serialization, and an independent certifier.
//!
//! The report echoes the exact derived parameters, the solution, and a
//! violation census against the original instance. Serialization follows
//! the instance format conventions (fixed key order, LF, shortest
//! round-trip floats), so identical `(instance, config, seed)` produce
//! bit-identical report files. Wall-clock time is kept on the in-memory
//! struct for display but deliberately stays out of the document, which
//! would otherwise never be reproducible.
//!
//! [`certify_report`] re-derives everything checkable from the instance
//! and the report alone: the constraint values of the solution against the
//! original matrices, the violation census, the objective and its bounds,
//! and the violation budget. Violations themselves are data, not errors;
//! certification fails only when the report misstates them.

use crate::instances::format::{parse_f64, parse_usize, Lines};
use crate::instances::{LpInstance, LpKind, LpMatrices};
use crate::solvers::{certify_top_s, Direction, SolverKind, SolverParams};
use crate::{Error, Result};

/// Violated rows of one constraint family, with the top-`s` average
/// certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationCensus<R> {
    pub threshold: R,
    pub direction: Direction,
    pub indices: Vec<usize>,
    /// Mean of the `s` most extreme values in the violating direction;
    /// bounding it by the threshold is the stronger certificate behind the
    /// violation count.
    pub top_s_average: R,
}

impl<R> ViolationCensus<R> {
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

/// Per-coordinate step histogram of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDigest {
    pub steps: u64,
    pub coordinate_counts: Vec<u64>,
}

/// Everything one solver run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<R> {
    pub kind: SolverKind,
    pub seed: u64,
    pub solution: Vec<R>,
    pub objective: R,
    /// Census of the packing side (or the single family for pure runs).
    pub violations: ViolationCensus<R>,
    /// Census of the covering side (mixed runs).
    pub covering_violations: Option<ViolationCensus<R>>,
    /// Packing rows removed by the data-independent pre-processing, in
    /// original row ids. They count against the guarantee alongside the
    /// violated rows.
    pub filtered_constraints: Vec<usize>,
    /// Chosen rescaling factor (mixed runs).
    pub scale: Option<R>,
    pub params: SolverParams<R>,
    pub vacuous_bound: bool,
    /// Diagnostics only; not part of the serialized document.
    pub wall_time_ms: u64,
    pub trace_summary: Option<TraceDigest>,
}

impl<R> SolveReport<R> {
    /// Violations across both families.
    pub fn total_violations(&self) -> usize {
        self.violations.count()
            + self
                .covering_violations
                .as_ref()
                .map(|c| c.count())
                .unwrap_or(0)
    }
}

fn push_indices(out: &mut String, key: &str, indices: &[usize]) {
    out.push_str(&format!("{key} {}\n", indices.len()));
    if !indices.is_empty() {
        let parts: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
}

fn push_census(out: &mut String, key: &str, census: &ViolationCensus<f64>) {
    out.push_str(&format!(
        "{key} {} {} {} {}\n",
        census.direction.as_str(),
        census.threshold,
        census.top_s_average,
        census.indices.len()
    ));
    if !census.indices.is_empty() {
        let parts: Vec<String> = census.indices.iter().map(|i| i.to_string()).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
}

/// Canonical report document. Field order is fixed; optional fields appear
/// exactly when present, so serialize∘parse is the identity.
pub fn serialize_report(report: &SolveReport<f64>) -> String {
    let mut out = String::new();
    out.push_str(&format!("kind {}\n", report.kind.as_str()));
    out.push_str(&format!("seed {}\n", report.seed));
    out.push_str(&format!("vacuous_bound {}\n", report.vacuous_bound));
    out.push_str(&format!("objective {}\n", report.objective));
    out.push_str(&format!("solution {}\n", report.solution.len()));
    let parts: Vec<String> = report.solution.iter().map(|v| format!("{v}")).collect();
    out.push_str(&parts.join(" "));
    out.push('\n');
    if let Some(scale) = report.scale {
        out.push_str(&format!("scale {scale}\n"));
    }
    push_census(&mut out, "violations", &report.violations);
    if let Some(census) = &report.covering_violations {
        push_census(&mut out, "covering_violations", census);
    }
    push_indices(&mut out, "filtered", &report.filtered_constraints);

    let p = &report.params;
    out.push_str(&format!("param kind {}\n", p.kind.as_str()));
    out.push_str(&format!("param rows {}\n", p.rows));
    out.push_str(&format!("param covering_rows {}\n", p.covering_rows));
    out.push_str(&format!("param cols {}\n", p.cols));
    out.push_str(&format!("param alpha {}\n", p.alpha));
    out.push_str(&format!("param beta {}\n", p.beta));
    out.push_str(&format!("param epsilon {}\n", p.epsilon));
    out.push_str(&format!("param delta {}\n", p.delta));
    out.push_str(&format!("param steps {}\n", p.steps));
    out.push_str(&format!("param step_epsilon {}\n", p.step_epsilon));
    out.push_str(&format!("param violation_budget {}\n", p.violation_budget));
    out.push_str(&format!("param cap {}\n", p.cap));
    if let Some(v) = p.opt {
        out.push_str(&format!("param opt {v}\n"));
    }
    if let Some(v) = p.entry_bound {
        out.push_str(&format!("param entry_bound {v}\n"));
    }
    if let Some(v) = p.eta {
        out.push_str(&format!("param eta {v}\n"));
    }
    if let Some(v) = p.pack_entry_bound {
        out.push_str(&format!("param pack_entry_bound {v}\n"));
    }
    if let Some(v) = p.cover_entry_bound {
        out.push_str(&format!("param cover_entry_bound {v}\n"));
    }
    if let Some(v) = p.feasible_mass {
        out.push_str(&format!("param feasible_mass {v}\n"));
    }
    if let Some((m, big_m)) = p.column_range {
        out.push_str(&format!("param range {m} {big_m}\n"));
    }
    if let Some(v) = p.step_size {
        out.push_str(&format!("param step_size {v}\n"));
    }
    out.push_str(&format!("param preprocess {}\n", p.preprocess));
    out.push_str(&format!("param deterministic {}\n", p.deterministic));
    out.push_str(&format!("param vacuous {}\n", p.vacuous));

    if let Some(trace) = &report.trace_summary {
        out.push_str(&format!(
            "trace {} {}\n",
            trace.steps,
            trace.coordinate_counts.len()
        ));
        let parts: Vec<String> = trace
            .coordinate_counts
            .iter()
            .map(|c| c.to_string())
            .collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

fn parse_bool(token: &str, line: usize, what: &str) -> Result<bool> {
    match token {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse {
            line,
            msg: format!("{what}: expected true/false, found `{other}`"),
        }),
    }
}

fn expect_kv<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, Vec<&'a str>)> {
    let (ln, line) = lines.next_line().ok_or(Error::Parse {
        line: lines.line_number(),
        msg: format!("missing `{key}`"),
    })?;
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.first() != Some(&key) {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected `{key}`, found `{line}`"),
        });
    }
    Ok((ln, tokens[1..].to_vec()))
}

fn parse_index_line(lines: &mut Lines, count: usize, what: &str) -> Result<Vec<usize>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let (ln, line) = lines.next_line().ok_or(Error::Parse {
        line: lines.line_number(),
        msg: format!("missing {what} indices"),
    })?;
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != count {
        return Err(Error::Parse {
            line: ln,
            msg: format!("{what}: expected {count} indices, found {}", tokens.len()),
        });
    }
    tokens.iter().map(|t| parse_usize(t, ln, what)).collect()
}

fn parse_census(lines: &mut Lines, key: &str) -> Result<ViolationCensus<f64>> {
    let (ln, tokens) = expect_kv(lines, key)?;
    if tokens.len() != 4 {
        return Err(Error::Parse {
            line: ln,
            msg: format!("{key}: expected `direction threshold top_s_average count`"),
        });
    }
    let direction: Direction = tokens[0].parse().map_err(|_| Error::Parse {
        line: ln,
        msg: format!("{key}: unknown direction `{}`", tokens[0]),
    })?;
    let threshold = parse_f64(tokens[1], ln, "threshold")?;
    let top_s_average = parse_f64(tokens[2], ln, "top_s_average")?;
    let count = parse_usize(tokens[3], ln, "violation count")?;
    let indices = parse_index_line(lines, count, key)?;
    Ok(ViolationCensus {
        threshold,
        direction,
        indices,
        top_s_average,
    })
}

/// Parse a report document produced by [`serialize_report`].
pub fn parse_report(text: &str) -> Result<SolveReport<f64>> {
    let mut lines = Lines::new(text);

    let (ln, tokens) = expect_kv(&mut lines, "kind")?;
    let kind: SolverKind = tokens
        .first()
        .ok_or(Error::Parse {
            line: ln,
            msg: "missing kind value".into(),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line: ln,
            msg: format!("unknown kind `{}`", tokens[0]),
        })?;
    let (ln, tokens) = expect_kv(&mut lines, "seed")?;
    let seed = tokens
        .first()
        .and_then(|t| t.parse::<u64>().ok())
        .ok_or(Error::Parse {
            line: ln,
            msg: "seed must be an unsigned integer".into(),
        })?;
    let (ln, tokens) = expect_kv(&mut lines, "vacuous_bound")?;
    let vacuous_bound = parse_bool(tokens.first().copied().unwrap_or(""), ln, "vacuous_bound")?;
    let (ln, tokens) = expect_kv(&mut lines, "objective")?;
    let objective = parse_f64(tokens.first().copied().unwrap_or(""), ln, "objective")?;
    let (ln, tokens) = expect_kv(&mut lines, "solution")?;
    let len = parse_usize(tokens.first().copied().unwrap_or(""), ln, "solution length")?;
    let (ln, line) = lines.next_line().ok_or(Error::Parse {
        line: lines.line_number(),
        msg: "missing solution entries".into(),
    })?;
    let entries: Vec<&str> = line.split_whitespace().collect();
    if entries.len() != len {
        return Err(Error::Parse {
            line: ln,
            msg: format!("solution: expected {len} entries, found {}", entries.len()),
        });
    }
    let solution = entries
        .iter()
        .map(|t| parse_f64(t, ln, "solution entry"))
        .collect::<Result<Vec<f64>>>()?;

    let scale = if lines.peek_key() == Some("scale") {
        let (ln, tokens) = expect_kv(&mut lines, "scale")?;
        Some(parse_f64(
            tokens.first().copied().unwrap_or(""),
            ln,
            "scale",
        )?)
    } else {
        None
    };

    let violations = parse_census(&mut lines, "violations")?;
    let covering_violations = if lines.peek_key() == Some("covering_violations") {
        Some(parse_census(&mut lines, "covering_violations")?)
    } else {
        None
    };

    let (ln, tokens) = expect_kv(&mut lines, "filtered")?;
    let filtered_count = parse_usize(tokens.first().copied().unwrap_or(""), ln, "filtered count")?;
    let filtered_constraints = parse_index_line(&mut lines, filtered_count, "filtered")?;

    // params: fixed leading block, then optional fields, then flags
    let mut p = ParamAccumulator::default();
    while lines.peek_key() == Some("param") {
        let (ln, tokens) = expect_kv(&mut lines, "param")?;
        p.feed(ln, &tokens)?;
    }
    let params = p.finish(kind)?;

    let trace_summary = if lines.peek_key() == Some("trace") {
        let (ln, tokens) = expect_kv(&mut lines, "trace")?;
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: ln,
                msg: "trace: expected `steps count`".into(),
            });
        }
        let steps = tokens[0].parse::<u64>().map_err(|_| Error::Parse {
            line: ln,
            msg: "trace steps must be an unsigned integer".into(),
        })?;
        let count = parse_usize(tokens[1], ln, "trace length")?;
        let (ln, line) = lines.next_line().ok_or(Error::Parse {
            line: lines.line_number(),
            msg: "missing trace counts".into(),
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != count {
            return Err(Error::Parse {
                line: ln,
                msg: format!("trace: expected {count} counts, found {}", tokens.len()),
            });
        }
        let counts = tokens
            .iter()
            .map(|t| {
                t.parse::<u64>().map_err(|_| Error::Parse {
                    line: ln,
                    msg: "trace counts must be unsigned integers".into(),
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        Some(TraceDigest {
            steps,
            coordinate_counts: counts,
        })
    } else {
        None
    };

    if !lines.at_end() {
        return Err(Error::Parse {
            line: lines.line_number(),
            msg: "unexpected trailing content".into(),
        });
    }

    Ok(SolveReport {
        kind,
        seed,
        solution,
        objective,
        violations,
        covering_violations,
        filtered_constraints,
        scale,
        params,
        vacuous_bound,
        wall_time_ms: 0,
        trace_summary,
    })
}

#[derive(Default)]
struct ParamAccumulator {
    rows: Option<usize>,
    covering_rows: Option<usize>,
    cols: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    steps: Option<u64>,
    step_epsilon: Option<f64>,
    violation_budget: Option<u64>,
    cap: Option<f64>,
    opt: Option<f64>,
    entry_bound: Option<f64>,
    eta: Option<f64>,
    pack_entry_bound: Option<f64>,
    cover_entry_bound: Option<f64>,
    feasible_mass: Option<f64>,
    column_range: Option<(f64, f64)>,
    step_size: Option<f64>,
    preprocess: Option<bool>,
    deterministic: Option<bool>,
    vacuous: Option<bool>,
    kind: Option<SolverKind>,
}

impl ParamAccumulator {
    fn feed(&mut self, ln: usize, tokens: &[&str]) -> Result<()> {
        let name = *tokens.first().ok_or(Error::Parse {
            line: ln,
            msg: "empty param line".into(),
        })?;
        let value = tokens.get(1).copied().unwrap_or("");
        match name {
            "kind" => self.kind = Some(value.parse()?),
            "rows" => self.rows = Some(parse_usize(value, ln, "rows")?),
            "covering_rows" => self.covering_rows = Some(parse_usize(value, ln, "covering_rows")?),
            "cols" => self.cols = Some(parse_usize(value, ln, "cols")?),
            "alpha" => self.alpha = Some(parse_f64(value, ln, "alpha")?),
            "beta" => self.beta = Some(parse_f64(value, ln, "beta")?),
            "epsilon" => self.epsilon = Some(parse_f64(value, ln, "epsilon")?),
            "delta" => self.delta = Some(parse_f64(value, ln, "delta")?),
            "steps" => {
                self.steps = Some(value.parse().map_err(|_| Error::Parse {
                    line: ln,
                    msg: "steps must be an unsigned integer".into(),
                })?)
            }
            "step_epsilon" => self.step_epsilon = Some(parse_f64(value, ln, "step_epsilon")?),
            "violation_budget" => {
                self.violation_budget = Some(value.parse().map_err(|_| Error::Parse {
                    line: ln,
                    msg: "violation_budget must be an unsigned integer".into(),
                })?)
            }
            "cap" => self.cap = Some(parse_f64(value, ln, "cap")?),
            "opt" => self.opt = Some(parse_f64(value, ln, "opt")?),
            "entry_bound" => self.entry_bound = Some(parse_f64(value, ln, "entry_bound")?),
            "eta" => self.eta = Some(parse_f64(value, ln, "eta")?),
            "pack_entry_bound" => {
                self.pack_entry_bound = Some(parse_f64(value, ln, "pack_entry_bound")?)
            }
            "cover_entry_bound" => {
                self.cover_entry_bound = Some(parse_f64(value, ln, "cover_entry_bound")?)
            }
            "feasible_mass" => self.feasible_mass = Some(parse_f64(value, ln, "feasible_mass")?),
            "range" => {
                let m = parse_f64(value, ln, "range m")?;
                let big_m = parse_f64(tokens.get(2).copied().unwrap_or(""), ln, "range M")?;
                self.column_range = Some((m, big_m));
            }
            "step_size" => self.step_size = Some(parse_f64(value, ln, "step_size")?),
            "preprocess" => self.preprocess = Some(parse_bool(value, ln, "preprocess")?),
            "deterministic" => self.deterministic = Some(parse_bool(value, ln, "deterministic")?),
            "vacuous" => self.vacuous = Some(parse_bool(value, ln, "vacuous")?),
            other => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unknown param `{other}`"),
                });
            }
        }
        Ok(())
    }

    fn finish(self, kind: SolverKind) -> Result<SolverParams<f64>> {
        let missing = |what: &'static str| Error::Parse {
            line: 0,
            msg: format!("missing param `{what}`"),
        };
        Ok(SolverParams {
            kind: self.kind.unwrap_or(kind),
            rows: self.rows.ok_or_else(|| missing("rows"))?,
            covering_rows: self.covering_rows.ok_or_else(|| missing("covering_rows"))?,
            cols: self.cols.ok_or_else(|| missing("cols"))?,
            alpha: self.alpha.ok_or_else(|| missing("alpha"))?,
            beta: self.beta.ok_or_else(|| missing("beta"))?,
            epsilon: self.epsilon.ok_or_else(|| missing("epsilon"))?,
            delta: self.delta.ok_or_else(|| missing("delta"))?,
            opt: self.opt,
            entry_bound: self.entry_bound,
            steps: self.steps.ok_or_else(|| missing("steps"))?,
            step_epsilon: self.step_epsilon.ok_or_else(|| missing("step_epsilon"))?,
            violation_budget: self
                .violation_budget
                .ok_or_else(|| missing("violation_budget"))?,
            cap: self.cap.ok_or_else(|| missing("cap"))?,
            eta: self.eta,
            pack_entry_bound: self.pack_entry_bound,
            cover_entry_bound: self.cover_entry_bound,
            feasible_mass: self.feasible_mass,
            column_range: self.column_range,
            step_size: self.step_size,
            preprocess: self.preprocess.ok_or_else(|| missing("preprocess"))?,
            deterministic: self.deterministic.ok_or_else(|| missing("deterministic"))?,
            vacuous: self.vacuous.ok_or_else(|| missing("vacuous"))?,
        })
    }
}

/// One certification check with its outcome.
#[derive(Debug, Clone)]
pub struct CertCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of independently re-checking a report against its instance.
#[derive(Debug, Clone)]
pub struct Certification {
    pub checks: Vec<CertCheck>,
}

impl Certification {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn census_check(
    name: &'static str,
    values: &[f64],
    reported: &ViolationCensus<f64>,
    s: u64,
    threshold: f64,
    direction: Direction,
    index_map: Option<&[usize]>,
) -> Result<CertCheck> {
    let (mut recomputed, _) = certify_top_s(values, s, threshold, direction)?;
    if let Some(map) = index_map {
        for idx in recomputed.indices.iter_mut() {
            *idx = map[*idx];
        }
    }
    let pass = recomputed.indices == reported.indices
        && close(recomputed.threshold, reported.threshold)
        && close(recomputed.top_s_average, reported.top_s_average)
        && recomputed.direction == reported.direction;
    let detail = if pass {
        format!("{} violation(s)", recomputed.indices.len())
    } else {
        format!(
            "recomputed {} violation(s) at {:?}, report claims {} at {:?}",
            recomputed.indices.len(),
            recomputed.indices,
            reported.indices.len(),
            reported.indices
        )
    };
    Ok(CertCheck { name, pass, detail })
}

/// Independently recompute everything checkable in a report: constraint
/// values against the original instance, the violation census, the
/// objective and its bounds, and the violation budget. Returns
/// `Err(DimensionMismatch)` when the report does not fit the instance.
pub fn certify_report(
    instance: &LpInstance<f64>,
    report: &SolveReport<f64>,
) -> Result<Certification> {
    if report.solution.len() != instance.cols() {
        return Err(Error::DimensionMismatch {
            context: "report solution vs instance columns",
            expected: instance.cols(),
            got: report.solution.len(),
        });
    }
    let kind_fits = match instance.kind {
        LpKind::Packing => report.kind == SolverKind::Packing,
        LpKind::Covering => report.kind == SolverKind::Covering,
        LpKind::Mixed => report.kind.is_mixed(),
    };
    if !kind_fits {
        return Err(Error::InvalidSpec(format!(
            "report kind {} does not match instance kind {}",
            report.kind.as_str(),
            instance.kind.as_str()
        )));
    }

    let mut checks = Vec::new();
    let p = &report.params;
    let s = p.violation_budget;

    checks.push(CertCheck {
        name: "solution_nonnegative",
        pass: report
            .solution
            .iter()
            .all(|&v| v >= -1e-12 && v.is_finite()),
        detail: String::new(),
    });

    let objective: f64 = report.solution.iter().sum();
    checks.push(CertCheck {
        name: "objective_recomputed",
        pass: close(objective, report.objective),
        detail: format!("recomputed {objective}, report claims {}", report.objective),
    });

    match &instance.matrices {
        LpMatrices::Pure(a) => {
            let values = a.mat_vec(&report.solution);
            let (threshold, direction) = match instance.kind {
                LpKind::Packing => (1.0 + p.alpha, Direction::AtMost),
                LpKind::Covering => (1.0 - p.alpha, Direction::AtLeast),
                LpKind::Mixed => unreachable!(),
            };
            checks.push(census_check(
                "violation_census",
                &values,
                &report.violations,
                s,
                threshold,
                direction,
                None,
            )?);
            if let Some(opt) = p.opt {
                let (pass, detail) = match (instance.kind, p.preprocess) {
                    (LpKind::Packing, true) => (
                        objective >= (1.0 - p.alpha) * opt - 1e-9 && objective <= opt + 1e-9,
                        format!("objective {objective} vs floor {}", (1.0 - p.alpha) * opt),
                    ),
                    _ => (
                        close(objective, opt),
                        format!("objective {objective} vs opt {opt}"),
                    ),
                };
                checks.push(CertCheck {
                    name: "objective_bound",
                    pass,
                    detail,
                });
            }
        }
        LpMatrices::Mixed { packing, covering } => {
            let (kept_matrix, kept_rows) = packing.without_rows(&report.filtered_constraints);
            let pack_values = kept_matrix
                .as_ref()
                .map(|m| m.mat_vec(&report.solution))
                .unwrap_or_default();
            checks.push(census_check(
                "packing_census",
                &pack_values,
                &report.violations,
                s,
                1.0 + p.alpha,
                Direction::AtMost,
                Some(&kept_rows),
            )?);
            match &report.covering_violations {
                Some(reported) => {
                    let values = covering.mat_vec(&report.solution);
                    checks.push(census_check(
                        "covering_census",
                        &values,
                        reported,
                        s,
                        1.0 - p.alpha,
                        Direction::AtLeast,
                        None,
                    )?);
                }
                None => checks.push(CertCheck {
                    name: "covering_census",
                    pass: false,
                    detail: "mixed report lacks the covering census".into(),
                }),
            }
        }
    }

    let total = report.total_violations();
    checks.push(CertCheck {
        name: "violation_budget",
        pass: (total as u64) <= s,
        detail: format!("{total} violation(s) against budget s = {s}"),
    });

    Ok(Certification { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{LpMatrices, PositiveMatrix};
    use crate::solvers::{solve_covering, solve_packing, SolveConfig};

    fn identity_instance(kind: LpKind, n: usize) -> LpInstance<f64> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        LpInstance::new(
            kind,
            LpMatrices::Pure(PositiveMatrix::new(n, n, data).unwrap()),
            Some(n as f64),
            None,
            None,
        )
        .unwrap()
    }

    fn det_config(alpha: f64, opt: f64) -> SolveConfig<f64> {
        SolveConfig {
            alpha,
            opt: Some(opt),
            deterministic: true,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn report_round_trip_is_byte_exact() {
        let inst = identity_instance(LpKind::Packing, 3);
        let cfg = SolveConfig {
            trace: true,
            ..det_config(0.2, 3.0)
        };
        let report = solve_packing(inst.pure_matrix().unwrap(), &cfg).unwrap();
        let text = serialize_report(&report);
        let back = parse_report(&text).unwrap();
        assert_eq!(serialize_report(&back), text);
        assert_eq!(back.solution, report.solution);
        assert_eq!(back.params, report.params);
    }

    #[test]
    fn fresh_solve_certifies() {
        let inst = identity_instance(LpKind::Packing, 2);
        let report = solve_packing(inst.pure_matrix().unwrap(), &det_config(0.1, 2.0)).unwrap();
        let cert = certify_report(&inst, &report).unwrap();
        assert!(cert.pass(), "{:?}", cert.checks);
    }

    #[test]
    fn tampered_covering_report_fails_with_all_rows() {
        let inst = identity_instance(LpKind::Covering, 3);
        let mut report =
            solve_covering(inst.pure_matrix().unwrap(), &det_config(0.2, 3.0)).unwrap();
        for v in report.solution.iter_mut() {
            *v = 0.0;
        }
        let cert = certify_report(&inst, &report).unwrap();
        assert!(!cert.pass());
        let census = cert
            .checks
            .iter()
            .find(|c| c.name == "violation_census")
            .unwrap();
        assert!(!census.pass);
        assert!(
            census.detail.contains("recomputed 3 violation"),
            "{}",
            census.detail
        );
    }

    #[test]
    fn boundary_values_certify() {
        // A report whose constraint values sit exactly at 1+alpha passes.
        let a = PositiveMatrix::new(1, 1, vec![1.0]).unwrap();
        let inst = LpInstance::new(
            LpKind::Packing,
            LpMatrices::Pure(a.clone()),
            Some(1.0),
            None,
            None,
        )
        .unwrap();
        let mut report = solve_packing(&a, &det_config(0.1, 1.0)).unwrap();
        report.solution = vec![1.1];
        report.objective = 1.1;
        report.violations.top_s_average = 1.1;
        let cert = certify_report(&inst, &report).unwrap();
        let census = cert
            .checks
            .iter()
            .find(|c| c.name == "violation_census")
            .unwrap();
        assert!(census.pass, "boundary must count as satisfied");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let inst = identity_instance(LpKind::Packing, 2);
        let mut report = solve_packing(inst.pure_matrix().unwrap(), &det_config(0.1, 2.0)).unwrap();
        report.solution.push(0.0);
        assert!(matches!(
            certify_report(&inst, &report),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
