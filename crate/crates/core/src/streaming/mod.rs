//! Turnstile graph streams and the multi-pass streaming spanner.

mod sampler;
mod spanner;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;

pub use sampler::{GroupSampler, GroupShape, HashFamily, L0Sampler, MERSENNE_61};
pub use spanner::{stream_spanner, SpaceReport, StreamOptions, StreamSpannerResult};

use crate::error::{domain, parse, Error, Result};
use crate::generators::rng_from_seed;
use crate::graph::io::{content_lines, parse_fields};
use crate::graph::{edge_from_index, edge_index, pair_count, Edge, Graph};

/// One signed update to the edge-count vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub index: u64,
    pub delta: i64,
}

/// A sequence of `(edge index, +1 | -1)` updates over the `n choose 2` pairs.
/// The graph it describes holds the edges with positive net count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TurnstileStream {
    n: usize,
    updates: Vec<Update>,
}

impl TurnstileStream {
    pub fn new(n: usize) -> Self {
        TurnstileStream { n, updates: Vec::new() }
    }

    /// Inserts every edge of `g` in canonical order.
    pub fn from_graph(g: &Graph) -> Self {
        let mut s = Self::new(g.n());
        for e in g.edges() {
            s.updates.push(Update {
                index: edge_index(e, g.n()),
                delta: 1,
            });
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> u64 {
        pair_count(self.n)
    }

    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn push(&mut self, index: u64, delta: i64) -> Result<()> {
        if index >= self.dimension() {
            return Err(domain(format!(
                "edge index {index} out of range for n = {} ({} pairs)",
                self.n,
                self.dimension()
            )));
        }
        if delta != 1 && delta != -1 {
            return Err(domain(format!("stream updates must be +1 or -1, got {delta}")));
        }
        self.updates.push(Update { index, delta });
        Ok(())
    }

    pub fn insert(&mut self, e: Edge) -> Result<()> {
        self.check_edge(e)?;
        self.push(edge_index(e, self.n), 1)
    }

    pub fn delete(&mut self, e: Edge) -> Result<()> {
        self.check_edge(e)?;
        self.push(edge_index(e, self.n), -1)
    }

    fn check_edge(&self, e: Edge) -> Result<()> {
        if e.v >= self.n || e.u == e.v {
            return Err(domain(format!("edge {e} invalid for n = {}", self.n)));
        }
        Ok(())
    }

    /// Nonzero net counts by edge index.
    pub fn net_counts(&self) -> BTreeMap<u64, i64> {
        let mut net = BTreeMap::new();
        for u in &self.updates {
            *net.entry(u.index).or_insert(0) += u.delta;
        }
        net.retain(|_, c| *c != 0);
        net
    }

    /// The graph of positive net counts. A negative net count breaks the
    /// stream model and is an error.
    pub fn net_graph(&self) -> Result<Graph> {
        let mut g = Graph::new(self.n);
        for (index, count) in self.net_counts() {
            if count < 0 {
                return Err(domain(format!("edge index {index} has negative net count {count}")));
            }
            g.insert_edge(edge_from_index(index, self.n)?)?;
        }
        Ok(g)
    }
}

/// Streams `g` with churn: every edge of `g` is inserted once, and
/// `round(churn * m)` noise pairs (any vertex pair, edges of `g` included) are
/// inserted and later deleted. Order is a seeded shuffle in which each noise
/// insertion precedes its deletion, so net counts never go negative.
pub fn churned_stream(g: &Graph, churn: f64, seed: u64) -> Result<TurnstileStream> {
    if !(churn >= 0.0 && churn.is_finite()) {
        return Err(domain(format!(
            "churn must be a finite non-negative fraction, got {churn}"
        )));
    }
    let n = g.n();
    let mut rng = rng_from_seed(seed);
    let noise = (churn * g.m() as f64).round() as usize;
    if noise > 0 && n < 2 {
        return Err(domain("churn needs at least two vertices"));
    }
    // (index, noise id); real edges carry no id.
    let mut events: Vec<(u64, Option<usize>)> = g.edges().map(|e| (edge_index(e, n), None)).collect();
    for id in 0..noise {
        let index = rng.gen_range(0..pair_count(n));
        events.push((index, Some(id)));
        events.push((index, Some(id)));
    }
    events.shuffle(&mut rng);
    let mut opened = vec![false; noise];
    let mut stream = TurnstileStream::new(n);
    for (index, id) in events {
        let delta = match id {
            None => 1,
            Some(id) if !opened[id] => {
                opened[id] = true;
                1
            }
            Some(_) => -1,
        };
        stream.push(index, delta)?;
    }
    Ok(stream)
}

/// Reads `n u_count` followed by `edge_index delta` lines.
pub fn read_stream<R: BufRead>(reader: R) -> Result<TurnstileStream> {
    let mut lines = content_lines(reader);
    let (line_no, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse(1, "missing `n u_count` header"))?;
    let [n, count] = parse_fields::<2>(line_no, &header)?;
    let mut stream = TurnstileStream::new(n as usize);
    for item in lines {
        let (line_no, line) = item?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [index, delta] = fields[..] else {
            return Err(parse(line_no, format!("expected `edge_index delta`, got {line:?}")));
        };
        let index: u64 = index
            .parse()
            .map_err(|_| parse(line_no, format!("bad edge index {index:?}")))?;
        let delta: i64 = delta
            .parse()
            .map_err(|_| parse(line_no, format!("bad delta {delta:?}")))?;
        stream.push(index, delta).map_err(|e| match e {
            Error::Domain(msg) => parse(line_no, msg),
            other => other,
        })?;
    }
    if stream.len() as u64 != count {
        return Err(parse(
            line_no,
            format!("header announces {count} updates, found {}", stream.len()),
        ));
    }
    Ok(stream)
}

pub fn write_stream<W: Write>(mut out: W, stream: &TurnstileStream, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{} {}", stream.n, stream.len())?;
    for u in &stream.updates {
        writeln!(out, "{} {}", u.index, u.delta)?;
    }
    Ok(())
}
