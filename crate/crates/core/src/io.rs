//! Edge-list and vector text formats.
//!
//! Edge list: one `u v [mult]` per line, 0-based vertices, `#` starts a
//! comment, blank lines are skipped. The vertex count is one more than the
//! largest vertex seen, unless a `# n=<count>` line sets it (needed for
//! trailing isolated vertices).
//!
//! Vector: one decimal per line, with the same comment and blank-line rules.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::multigraph::Multigraph;

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens of a line with their 1-based columns,
/// stopping at `#`.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &body[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &body[s..]));
    }
    out
}

fn pragma_n(line: &str) -> Option<&str> {
    let rest = line.trim_start().strip_prefix('#')?.trim();
    rest.strip_prefix("n=").or_else(|| rest.strip_prefix("n ="))
}

pub fn parse_graph_str(text: &str) -> Result<Multigraph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_vertex: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(val) = pragma_n(line) {
            let col = line.find('=').unwrap() + 2;
            let n = val
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, col, format!("bad vertex count {:?}", val.trim())))?;
            if declared.replace(n).is_some() {
                return Err(parse_err(lineno, 1, "vertex count declared twice"));
            }
            continue;
        }
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(parse_err(
                lineno,
                toks[0].0,
                format!("expected `u v [mult]`, found {} fields", toks.len()),
            ));
        }
        let vertex = |(col, s): (usize, &str)| {
            s.parse::<usize>()
                .map_err(|_| parse_err(lineno, col, format!("expected a vertex index, found {s:?}")))
        };
        let u = vertex(toks[0])?;
        let v = vertex(toks[1])?;
        let mult = match toks.get(2) {
            Some(&(col, s)) => match s.parse::<u64>() {
                Ok(0) => return Err(parse_err(lineno, col, "multiplicity must be positive")),
                Ok(m) => m,
                Err(_) => return Err(parse_err(lineno, col, format!("expected a multiplicity, found {s:?}"))),
            },
            None => 1,
        };
        max_vertex = Some(max_vertex.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        edges.push((lineno, toks[0].0, u, v, mult));
    }
    let n = match (declared, max_vertex) {
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => return Err(Error::EmptyGraph),
    };
    for &(line, col, u, v, _) in &edges {
        if u.max(v) >= n {
            return Err(parse_err(line, col, format!("vertex {} out of range for n={n}", u.max(v))));
        }
    }
    Multigraph::from_edges(n, edges.into_iter().map(|(_, _, u, v, m)| (u, v, m)))
}

pub fn parse_graph(path: &Path) -> Result<Multigraph> {
    parse_graph_str(&std::fs::read_to_string(path)?)
}

pub fn parse_vector_str(text: &str) -> Result<DVector<f64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let toks = tokens(line);
        match toks.as_slice() {
            [] => {}
            [(col, s)] => {
                let x = s
                    .parse::<f64>()
                    .map_err(|_| parse_err(idx + 1, *col, format!("expected a decimal, found {s:?}")))?;
                if !x.is_finite() {
                    return Err(parse_err(idx + 1, *col, "value is not finite"));
                }
                out.push(x);
            }
            [_, (col, _), ..] => return Err(parse_err(idx + 1, *col, "expected one value per line")),
        }
    }
    Ok(DVector::from_vec(out))
}

pub fn parse_vector(path: &Path) -> Result<DVector<f64>> {
    parse_vector_str(&std::fs::read_to_string(path)?)
}

pub fn emit_graph(g: &Multigraph) -> String {
    let mut s = format!("# n={}\n", g.n());
    for &(u, v, m) in g.edges() {
        if m == 1 {
            writeln!(s, "{u} {v}").unwrap();
        } else {
            writeln!(s, "{u} {v} {m}").unwrap();
        }
    }
    s
}

/// Shortest decimal that parses back to the same f64.
pub fn emit_vector(x: &[f64]) -> String {
    let mut s = String::new();
    for v in x {
        writeln!(s, "{v:?}").unwrap();
    }
    s
}

/// Whitespace-separated rows.
pub fn emit_matrix(m: &nalgebra::DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
