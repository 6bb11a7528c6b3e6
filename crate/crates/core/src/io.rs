//! Text and JSON model formats.
//!
//! Sparse QUBO text: the first non-comment line is `n nnz`, followed by `nnz`
//! lines `i j w` with 1-based indices and `i <= j` (`i == j` is a linear term).
//! Lines starting with `#` are comments. Index `i` maps to variable id `i - 1`;
//! on output, variables are numbered by their rank in id order.
//!
//! Ising JSON: `{"h": {"<id>": value}, "J": [[i, j, value]], "offset": value}`.

use crate::error::{Error, Result};
use crate::model::{IsingModel, QuboModel, Var};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub fn parse_qubo_text(text: &str) -> Result<QuboModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing `n nnz` header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::parse(hline, "header must be `n nnz`"));
    }
    let n: u64 = head[0]
        .parse()
        .map_err(|_| Error::parse(hline, format!("bad variable count `{}`", head[0])))?;
    let nnz: usize = head[1]
        .parse()
        .map_err(|_| Error::parse(hline, format!("bad entry count `{}`", head[1])))?;
    let mut q = QuboModel::new();
    for i in 0..n {
        q.add_variable(Var(i));
    }
    let mut seen = 0;
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::parse(ln, "expected `i j w`"));
        }
        let idx = |s: &str| -> Result<u64> {
            let v: u64 = s
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad index `{s}`")))?;
            if v == 0 || v > n {
                return Err(Error::parse(ln, format!("index {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let i = idx(parts[0])?;
        let j = idx(parts[1])?;
        if i > j {
            return Err(Error::parse(ln, "entries must satisfy i <= j"));
        }
        let w: f64 = parts[2]
            .parse()
            .map_err(|_| Error::parse(ln, format!("bad weight `{}`", parts[2])))?;
        q.add_term(Var(i), Var(j), w);
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::parse(
            hline,
            format!("header declares {nnz} entries, found {seen}"),
        ));
    }
    Ok(q)
}

/// Writes the QUBO text format. The offset, when nonzero, is kept as a comment.
pub fn write_qubo_text(q: &QuboModel) -> String {
    let rank: BTreeMap<Var, usize> = q
        .variables()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i + 1))
        .collect();
    let mut out = String::new();
    if q.offset() != 0.0 {
        let _ = writeln!(out, "# offset {}", q.offset());
    }
    let _ = writeln!(out, "{} {}", q.num_variables(), q.num_terms());
    for ((i, j), w) in q.terms() {
        let _ = writeln!(out, "{} {} {}", rank[&i], rank[&j], w);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsingJson {
    pub h: BTreeMap<u64, f64>,
    #[serde(rename = "J")]
    pub j: Vec<(u64, u64, f64)>,
    #[serde(default)]
    pub offset: f64,
}

impl From<&IsingModel> for IsingJson {
    fn from(m: &IsingModel) -> Self {
        IsingJson {
            h: m.variables().iter().map(|&v| (v.0, m.field(v))).collect(),
            j: m.couplings().map(|((a, b), w)| (a.0, b.0, w)).collect(),
            offset: m.offset(),
        }
    }
}

impl From<&IsingJson> for IsingModel {
    fn from(js: &IsingJson) -> Self {
        let mut m = IsingModel::new();
        for (&v, &w) in &js.h {
            m.add_variable(Var(v));
            m.add_field(Var(v), w);
        }
        for &(a, b, w) in &js.j {
            m.add_coupling(Var(a), Var(b), w);
        }
        m.add_offset(js.offset);
        m
    }
}

pub fn ising_to_json(m: &IsingModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&IsingJson::from(m))?)
}

pub fn ising_from_json(text: &str) -> Result<IsingModel> {
    let js: IsingJson = serde_json::from_str(text)?;
    Ok(IsingModel::from(&js))
}

/// Reads either format: JSON objects are Ising models, anything else is QUBO
/// text converted to Ising form.
pub fn read_model(text: &str) -> Result<IsingModel> {
    if text.trim_start().starts_with('{') {
        ising_from_json(text)
    } else {
        Ok(parse_qubo_text(text)?.to_ising())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_with_comments() {
        let text = "# demo\n3 3\n1 1 -1.5\n# inner comment\n1 3 2\n2 2 0.5\n";
        let q = parse_qubo_text(text).unwrap();
        assert_eq!(q.num_variables(), 3);
        assert_eq!(q.get(Var(0), Var(0)), -1.5);
        assert_eq!(q.get(Var(0), Var(2)), 2.0);
        assert_eq!(q.get(Var(1), Var(1)), 0.5);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_qubo_text("2 1\n2 1 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_qubo_text("2 1\n1 3 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_qubo_text("2 2\n1 2 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_qubo_text("x 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn ising_json_keeps_isolated_variables() {
        let mut m = IsingModel::new();
        m.add_variable(Var(7));
        m.add_coupling(Var(1), Var(2), -0.5);
        m.add_field(Var(1), 2.0);
        m.add_offset(1.25);
        let back = ising_from_json(&ising_to_json(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn qubo_text_round_trip(
            n in 1u64..8,
            terms in prop::collection::vec((0u64..8, 0u64..8, -10i32..10), 0..20),
        ) {
            let mut q = QuboModel::new();
            for i in 0..n {
                q.add_variable(Var(i));
            }
            for (a, b, w) in terms {
                q.add_term(Var(a % n), Var(b % n), f64::from(w) / 4.0);
            }
            let text = write_qubo_text(&q);
            let back = parse_qubo_text(&text).unwrap();
            prop_assert_eq!(back.variables(), q.variables());
            for ((i, j), w) in q.terms() {
                prop_assert_eq!(back.get(i, j), w);
            }
            prop_assert_eq!(back.num_terms(), q.num_terms());
        }
    }
}
