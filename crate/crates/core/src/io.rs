//! Plain-text formats: points, edge lists, vertex sets.
//!
//! Blank lines and lines starting with `#` are skipped, except the edge-list
//! header `# n <count>`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::points::PointSet;
use crate::scalar::Scalar;

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse<V: FromStr>(line: usize, tok: &str) -> Result<V> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad number {tok:?}") })
}

/// One point per line, coordinates separated by whitespace.
pub fn parse_points<T: Scalar + FromStr>(text: &str) -> Result<PointSet<T>> {
    let mut d = None;
    let mut coords = Vec::new();
    for (line, l) in data_lines(text) {
        let row: Vec<T> = l.split_whitespace().map(|t| parse(line, t)).collect::<Result<_>>()?;
        match d {
            None => d = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Parse { line, msg: format!("expected {d} coordinates, got {}", row.len()) })
            }
            _ => {}
        }
        coords.extend(row);
    }
    let d = d.ok_or_else(|| Error::Parse { line: 0, msg: "no points".into() })?;
    PointSet::from_flat(d, coords)
}

pub fn format_points<T: Scalar>(points: &PointSet<T>) -> String {
    let mut out = String::new();
    for p in points.iter() {
        let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// `# n <count>` header, then `u v w` per edge with `u < v`, sorted.
pub fn format_edges<T: Scalar>(g: &WeightedGraph<T>) -> String {
    let mut out = format!("# n {}\n", g.n());
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "{u} {v} {w}");
    }
    out
}

/// Reads an edge list; without a header, `n` is one past the largest id.
/// A missing weight column defaults to 1.
pub fn parse_edges<T: Scalar + FromStr>(text: &str) -> Result<WeightedGraph<T>> {
    let mut n = None;
    for (i, l) in text.lines().enumerate() {
        if let Some(rest) = l.trim().strip_prefix("# n ") {
            n = Some(parse::<usize>(i + 1, rest.trim())?);
            break;
        }
    }
    let mut edges = Vec::new();
    let mut top = 0;
    for (line, l) in data_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if !(2..=3).contains(&toks.len()) {
            return Err(Error::Parse { line, msg: "expected `u v [w]`".into() });
        }
        let u: usize = parse(line, toks[0])?;
        let v: usize = parse(line, toks[1])?;
        let w: T = match toks.get(2) {
            Some(t) => parse(line, t)?,
            None => T::one(),
        };
        top = top.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    WeightedGraph::from_edges(n.unwrap_or(top), edges)
}

/// One vertex id per line (whitespace-separated ids are also accepted).
pub fn parse_vertex_set(text: &str) -> Result<VertexSet> {
    let mut ids = Vec::new();
    for (line, l) in data_lines(text) {
        for t in l.split_whitespace() {
            ids.push(parse(line, t)?);
        }
    }
    Ok(VertexSet::new(ids))
}

pub fn format_vertex_set(set: &VertexSet) -> String {
    set.iter().map(|v| format!("{v}\n")).collect()
}
