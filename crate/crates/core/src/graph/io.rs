//! Plain-text graph format: a header line `n m`, then `m` lines `u v` with
//! `0 <= u < v < n`. Lines starting with `#` and blank lines are ignored, so
//! files may carry a comment header.

use std::io::{BufRead, Write};

use super::Graph;
use crate::error::{parse, Result};

/// Yields `(line_number, trimmed_line)` for every non-blank, non-comment line.
pub(crate) fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(line) => {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

pub(crate) fn parse_fields<const N: usize>(line_no: usize, line: &str) -> Result<[u64; N]> {
    let mut out = [0u64; N];
    let mut fields = line.split_whitespace();
    for slot in out.iter_mut() {
        let field = fields
            .next()
            .ok_or_else(|| parse(line_no, format!("expected {N} fields, got `{line}`")))?;
        *slot = field
            .parse()
            .map_err(|_| parse(line_no, format!("`{field}` is not a non-negative integer")))?;
    }
    if fields.next().is_some() {
        return Err(parse(line_no, format!("expected {N} fields, got `{line}`")));
    }
    Ok(out)
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = content_lines(reader);
    let (header_line, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse(1, "missing `n m` header"))?;
    let [n, m] = parse_fields::<2>(header_line, &header)?;
    let n = n as usize;
    let mut g = Graph::new(n);
    let mut last_line = header_line;
    for item in lines {
        let (line_no, line) = item?;
        last_line = line_no;
        let [u, v] = parse_fields::<2>(line_no, &line)?;
        let (u, v) = (u as usize, v as usize);
        if u == v {
            return Err(parse(line_no, format!("self-loop at vertex {u}")));
        }
        if u > v {
            return Err(parse(line_no, format!("edge `{u} {v}` must list u < v")));
        }
        if v >= n {
            return Err(parse(line_no, format!("vertex {v} out of range for n = {n}")));
        }
        if g.has_edge(u, v) {
            return Err(parse(line_no, format!("duplicate edge `{u} {v}`")));
        }
        g.add_edge(u, v).map_err(|e| parse(line_no, e.to_string()))?;
    }
    if g.m() as u64 != m {
        return Err(parse(last_line, format!("header declares {m} edges, found {}", g.m())));
    }
    Ok(g)
}

/// Writes `g` in the text format, preceded by `comments` as `# ` lines.
pub fn write_graph<W: Write>(mut out: W, g: &Graph, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{} {}", g.n(), g.m())?;
    for e in g.edges() {
        writeln!(out, "{} {}", e.u, e.v)?;
    }
    Ok(())
}
