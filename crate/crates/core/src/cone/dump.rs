//! Plain-text dump of a [`ConicProblem`], for debugging failed solves.
//!
//! ```text
//! [size]
//! rows 2
//! vars 3
//! [cones]
//! nonneg 1
//! soc 2
//! [objective]
//! 0 1
//! [A]
//! 0 0 1
//! 1 2 -0.5
//! [b]
//! 0 1
//! ```
//!
//! Only nonzero entries are listed; numbers are printed in shortest
//! round-trip form so reading the dump back gives identical data.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{ConeSpec, ConicProblem};
use crate::error::{Error, Result};

pub fn write_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[size]\nrows {}\nvars {}", p.num_rows(), p.num_vars());
    out.push_str("[cones]\n");
    for cone in &p.cones {
        let _ = match *cone {
            ConeSpec::NonNeg(n) => writeln!(out, "nonneg {n}"),
            ConeSpec::Soc(n) => writeln!(out, "soc {n}"),
            ConeSpec::Psd(n) => writeln!(out, "psd {n}"),
        };
    }
    out.push_str("[objective]\n");
    for (i, v) in p.c.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(out, "{i} {v}");
    }
    out.push_str("[A]\n");
    for r in 0..p.num_rows() {
        for c in 0..p.num_vars() {
            let v = p.a[(r, c)];
            if v != 0.0 {
                let _ = writeln!(out, "{r} {c} {v}");
            }
        }
    }
    out.push_str("[b]\n");
    for (i, v) in p.b.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(out, "{i} {v}");
    }
    out
}

fn bad(line: usize, msg: &str) -> Error {
    Error::InvalidInput(format!("problem dump line {line}: {msg}"))
}

pub fn read_problem(text: &str) -> Result<ConicProblem> {
    let mut section = "";
    let (mut rows, mut vars) = (None, None);
    let mut cones = Vec::new();
    let mut c_entries = Vec::new();
    let mut a_entries = Vec::new();
    let mut b_entries = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let ln = ln + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            section = match line {
                "[size]" | "[cones]" | "[objective]" | "[A]" | "[b]" => line,
                _ => return Err(bad(ln, "unknown section")),
            };
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad index"));
        match (section, fields.as_slice()) {
            ("[size]", ["rows", v]) => rows = Some(idx(v)?),
            ("[size]", ["vars", v]) => vars = Some(idx(v)?),
            ("[cones]", [kind, v]) => cones.push(match *kind {
                "nonneg" => ConeSpec::NonNeg(idx(v)?),
                "soc" => ConeSpec::Soc(idx(v)?),
                "psd" => ConeSpec::Psd(idx(v)?),
                _ => return Err(bad(ln, "unknown cone")),
            }),
            ("[objective]", [i, v]) => c_entries.push((idx(i)?, num(v)?)),
            ("[A]", [r, c, v]) => a_entries.push((idx(r)?, idx(c)?, num(v)?)),
            ("[b]", [i, v]) => b_entries.push((idx(i)?, num(v)?)),
            _ => return Err(bad(ln, "unexpected line")),
        }
    }
    let m = rows.ok_or_else(|| Error::InvalidInput("problem dump lacks row count".into()))?;
    let n = vars.ok_or_else(|| Error::InvalidInput("problem dump lacks variable count".into()))?;
    let mut c = DVector::zeros(n);
    let mut a = DMatrix::zeros(m, n);
    let mut b = DVector::zeros(m);
    for (i, v) in c_entries {
        *c.get_mut(i).ok_or_else(|| Error::InvalidInput("objective index out of range".into()))? = v;
    }
    for (r, col, v) in a_entries {
        if r >= m || col >= n {
            return Err(Error::InvalidInput("matrix index out of range".into()));
        }
        a[(r, col)] = v;
    }
    for (i, v) in b_entries {
        *b.get_mut(i).ok_or_else(|| Error::InvalidInput("rhs index out of range".into()))? = v;
    }
    ConicProblem::new(c, a, b, cones)
}
