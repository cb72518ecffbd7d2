//! Text format for LP instances.
//!
//! Line-oriented key-value document, UTF-8 with LF newlines:
//!
//! ```text
//! kind packing
//! A 2 2
//! 1 0
//! 0 1
//! opt 2
//! range 1 1
//! ```
//!
//! Mixed instances carry `P` and `C` blocks instead of `A`, plus an
//! optional `V`. Canonical serialization writes keys in the order
//! `kind, A | P C, opt, V, range`, matrix rows on separate lines, and
//! floats in shortest round-trip decimal form, so serialize∘parse is the
//! identity byte-for-byte.

use crate::instances::{LpInstance, LpKind, LpMatrices, PositiveMatrix};
use crate::{Error, Result};

pub(crate) fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what}: cannot parse `{token}` as a decimal"),
    })?;
    Ok(v)
}

pub(crate) fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what}: cannot parse `{token}` as an integer"),
    })
}

/// Line cursor over a document, 1-based for error messages.
pub(crate) struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    pub(crate) fn peek_key(&self) -> Option<&'a str> {
        self.lines
            .get(self.pos)
            .and_then(|l| l.split_whitespace().next())
    }

    pub(crate) fn next_line(&mut self) -> Option<(usize, &'a str)> {
        let line = self.lines.get(self.pos).copied()?;
        self.pos += 1;
        Some((self.pos, line))
    }

    pub(crate) fn line_number(&self) -> usize {
        self.pos + 1
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.lines.len()
    }
}

fn parse_matrix(lines: &mut Lines, key: &str) -> Result<PositiveMatrix<f64>> {
    let (ln, header) = lines.next_line().ok_or(Error::Parse {
        line: lines.line_number(),
        msg: format!("expected `{key} <rows> <cols>`"),
    })?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 3 || tokens[0] != key {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected `{key} <rows> <cols>`, found `{header}`"),
        });
    }
    let rows = parse_usize(tokens[1], ln, "row count")?;
    let cols = parse_usize(tokens[2], ln, "column count")?;
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            line: ln,
            msg: "matrix dimensions must be at least 1x1".into(),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (ln, line) = lines.next_line().ok_or(Error::Parse {
            line: lines.line_number(),
            msg: format!("missing row {} of matrix {key}", r + 1),
        })?;
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != cols {
            return Err(Error::Parse {
                line: ln,
                msg: format!(
                    "row {} of matrix {key} has {} entries, expected {cols}",
                    r + 1,
                    entries.len()
                ),
            });
        }
        for (c, token) in entries.iter().enumerate() {
            let v = parse_f64(token, ln, "matrix entry")?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!(
                        "non-finite entry at row {} column {} of {key}",
                        r + 1,
                        c + 1
                    ),
                });
            }
            if v < 0.0 {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!(
                        "negative entry {v} at row {} column {} of {key}",
                        r + 1,
                        c + 1
                    ),
                });
            }
            data.push(v);
        }
    }
    PositiveMatrix::new(rows, cols, data).map_err(|e| Error::Parse {
        line: ln,
        msg: e.to_string(),
    })
}

/// Parse an instance document. Errors carry the offending line number and
/// field context.
pub fn parse_instance(text: &str) -> Result<LpInstance<f64>> {
    let mut lines = Lines::new(text);

    let (ln, first) = lines.next_line().ok_or(Error::Parse {
        line: 1,
        msg: "empty document".into(),
    })?;
    let tokens: Vec<&str> = first.split_whitespace().collect();
    if tokens.len() != 2 || tokens[0] != "kind" {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected `kind packing|covering|mixed`, found `{first}`"),
        });
    }
    let kind = match tokens[1] {
        "packing" => LpKind::Packing,
        "covering" => LpKind::Covering,
        "mixed" => LpKind::Mixed,
        other => {
            return Err(Error::Parse {
                line: ln,
                msg: format!("unknown kind `{other}`"),
            });
        }
    };

    let matrices = match kind {
        LpKind::Packing | LpKind::Covering => LpMatrices::Pure(parse_matrix(&mut lines, "A")?),
        LpKind::Mixed => {
            let packing = parse_matrix(&mut lines, "P")?;
            let covering = parse_matrix(&mut lines, "C")?;
            LpMatrices::Mixed { packing, covering }
        }
    };

    let mut known_opt = None;
    let mut known_feasible_mass = None;
    let mut declared_range = None;
    while !lines.at_end() {
        let key = lines.peek_key();
        let (ln, line) = lines.next_line().unwrap();
        if line.trim().is_empty() {
            return Err(Error::Parse {
                line: ln,
                msg: "unexpected blank line".into(),
            });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match key.unwrap_or("") {
            "opt" => {
                if kind == LpKind::Mixed {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "`opt` is only valid for packing/covering instances".into(),
                    });
                }
                if tokens.len() != 2 || known_opt.is_some() {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "expected a single `opt <decimal>`".into(),
                    });
                }
                known_opt = Some(parse_f64(tokens[1], ln, "opt")?);
            }
            "V" => {
                if kind != LpKind::Mixed {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "`V` is only valid for mixed instances".into(),
                    });
                }
                if tokens.len() != 2 || known_feasible_mass.is_some() {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "expected a single `V <decimal>`".into(),
                    });
                }
                known_feasible_mass = Some(parse_f64(tokens[1], ln, "V")?);
            }
            "range" => {
                if tokens.len() != 3 || declared_range.is_some() {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "expected a single `range <m> <M>`".into(),
                    });
                }
                let m = parse_f64(tokens[1], ln, "range m")?;
                let big_m = parse_f64(tokens[2], ln, "range M")?;
                declared_range = Some((m, big_m));
            }
            other => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unknown key `{other}`"),
                });
            }
        }
    }

    LpInstance::new(
        kind,
        matrices,
        known_opt,
        known_feasible_mass,
        declared_range,
    )
    .map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line: 1,
            msg: other.to_string(),
        },
    })
}

pub(crate) fn push_matrix(out: &mut String, key: &str, m: &PositiveMatrix<f64>) {
    out.push_str(&format!("{key} {} {}\n", m.rows(), m.cols()));
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// Canonical serialization: fixed key order, LF newlines, shortest
/// round-trip floats. `parse_instance(serialize_instance(x)) == x` and the
/// round trip is byte-exact on canonical documents.
pub fn serialize_instance(instance: &LpInstance<f64>) -> String {
    let mut out = String::new();
    out.push_str(&format!("kind {}\n", instance.kind.as_str()));
    match &instance.matrices {
        LpMatrices::Pure(a) => push_matrix(&mut out, "A", a),
        LpMatrices::Mixed { packing, covering } => {
            push_matrix(&mut out, "P", packing);
            push_matrix(&mut out, "C", covering);
        }
    }
    if let Some(opt) = instance.known_opt {
        out.push_str(&format!("opt {opt}\n"));
    }
    if let Some(v) = instance.known_feasible_mass {
        out.push_str(&format!("V {v}\n"));
    }
    if let Some((m, big_m)) = instance.declared_range {
        out.push_str(&format!("range {m} {big_m}\n"));
    }
    out
}
