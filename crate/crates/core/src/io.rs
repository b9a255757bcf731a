//! Plain-text artifacts: CSV with full-precision floats, Matrix Market for
//! the graph Laplacians, and columnar vertex functions.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::model::Fractal;

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// A cell in a CSV row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Matrix Market coordinate file of the lower triangle of a symmetric matrix.
pub fn matrix_market(a: &CsrMatrix, comment: &str) -> String {
    let lower: Vec<(usize, usize, f64)> = a.entries().filter(|&(i, j, _)| j <= i).collect();
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    for line in comment.lines() {
        let _ = writeln!(out, "% {line}");
    }
    let _ = writeln!(out, "{} {} {}", a.n(), a.n(), lower.len());
    for (i, j, v) in lower {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt_f64(v));
    }
    out
}

/// Sidecar for [`matrix_market`]: row index, vertex id, birth level and a
/// witness `(word, prototype)` for every vertex of level `m`.
pub fn vertex_id_map(fractal: &Fractal, m: usize) -> String {
    let h = fractal.hierarchy();
    let n = fractal.descriptor().branches();
    let rows: Vec<Vec<Cell>> = (0..fractal.table(m).vertex_count())
        .map(|id| {
            let (w, q) = h.witness(id);
            vec![
                Cell::from(id + 1),
                Cell::from(id),
                Cell::from(h.birth_level(id)),
                Cell::Text(w.display(n).to_string()),
                Cell::from(q),
            ]
        })
        .collect();
    csv_string(&["row", "vertex", "birth_level", "word", "prototype"], &rows)
}

/// `vertex,value` columns.
pub fn write_vertex_function(values: &[f64]) -> String {
    let rows: Vec<Vec<Cell>> = values.iter().enumerate().map(|(i, &v)| vec![Cell::from(i), Cell::from(v)]).collect();
    csv_string(&["vertex", "value"], &rows)
}

/// Read `vertex,value` columns (header optional, any order of ids, every id
/// below the count present exactly once).
pub fn read_vertex_function<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut pairs = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let (a, b) = match (it.next(), it.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Schema(format!("line {}: expected two columns", k + 1))),
        };
        match (a.parse::<usize>(), b.parse::<f64>()) {
            (Ok(i), Ok(v)) => pairs.push((i, v)),
            _ if k == 0 => continue,
            _ => return Err(Error::Schema(format!("line {}: cannot parse '{line}'", k + 1))),
        }
    }
    let n = pairs.len();
    let mut out = vec![f64::NAN; n];
    for (i, v) in pairs {
        if i >= n || !out[i].is_nan() {
            return Err(Error::Schema(format!("vertex ids must be a permutation of 0..{n}")));
        }
        out[i] = v;
    }
    Ok(out)
}
