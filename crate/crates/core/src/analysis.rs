//! Parameter sweeps over protocol runs and log-log scaling fits.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::generators::{complete_bipartite, partition_edges, random_gnm, PartitionMode};
use crate::graph::{pair_count, Graph};
use crate::simnet::{run_protocol, Protocol, ProtocolOptions};

/// Default largest `n` for which sweep rows are verified.
pub const DEFAULT_VERIFY_CAP: usize = 256;

/// Input graphs of a sweep, as a function of `n` and the seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphFamily {
    /// `G(n, m)` with `m = round(coeff * n^exponent)`, capped at `C(n, 2)`.
    Gnm { coeff: f64, exponent: f64 },
    /// `K_{floor(n/2), ceil(n/2)}`.
    CompleteBipartite,
}

impl GraphFamily {
    pub fn edge_count(&self, n: usize) -> usize {
        match *self {
            GraphFamily::Gnm { coeff, exponent } => {
                let m = (coeff * (n as f64).powf(exponent)).round() as u64;
                m.min(pair_count(n)) as usize
            }
            GraphFamily::CompleteBipartite => (n / 2) * n.div_ceil(2),
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<Graph> {
        match self {
            GraphFamily::Gnm { .. } => random_gnm(n, self.edge_count(n), seed),
            GraphFamily::CompleteBipartite => complete_bipartite(n / 2, n.div_ceil(2)),
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFamily::Gnm { coeff, exponent } => write!(f, "gnm:{coeff}:{exponent}"),
            GraphFamily::CompleteBipartite => f.write_str("complete-bipartite"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    /// `gnm:<coeff>:<exponent>` or `complete-bipartite`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "complete-bipartite" {
            return Ok(GraphFamily::CompleteBipartite);
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts[..] {
            ["gnm", c, e] => {
                let coeff: f64 = c.parse().map_err(|_| domain(format!("bad coefficient {c:?}")))?;
                let exponent: f64 = e.parse().map_err(|_| domain(format!("bad exponent {e:?}")))?;
                if !(coeff > 0.0 && exponent.is_finite()) {
                    return Err(domain(format!("graph family {s:?} needs a positive coefficient")));
                }
                Ok(GraphFamily::Gnm { coeff, exponent })
            }
            _ => Err(domain(format!(
                "unknown graph family {s:?}; expected gnm:<coeff>:<exponent> or complete-bipartite"
            ))),
        }
    }
}

/// Outcome of the stretch check on one row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verified {
    #[serde(rename = "1")]
    Pass,
    #[serde(rename = "0")]
    Fail,
    /// `n` was above the verification cap.
    #[serde(rename = "unchecked")]
    Unchecked,
}

/// One run of a sweep. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub protocol: String,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub param: u32,
    pub seed: u64,
    pub bits_up: u64,
    pub bits_down: u64,
    pub total_bits: u64,
    pub rounds: u64,
    pub messages: u64,
    pub spanner_edges: usize,
    pub verified: Verified,
}

/// A sweep: the cross product `ns x ss x ks x seeds` for one protocol.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub protocol: String,
    pub ns: Vec<usize>,
    pub ss: Vec<usize>,
    /// Ignored by `additive2`, which has no parameter.
    pub ks: Vec<u32>,
    pub seeds: Vec<u64>,
    pub family: GraphFamily,
    pub mode: PartitionMode,
    pub options: ProtocolOptions,
    pub verify_cap: usize,
}

impl SweepGrid {
    /// Grid points in output order.
    pub fn points(&self) -> Result<Vec<(Protocol, usize, usize, u64)>> {
        if self.ns.is_empty() || self.ss.is_empty() || self.ks.is_empty() || self.seeds.is_empty() {
            return Err(domain("sweep grid needs at least one n, s, k and seed"));
        }
        let mut protocols = Vec::new();
        for &k in &self.ks {
            let p = Protocol::from_name(&self.protocol, k)?;
            if !protocols.contains(&p) {
                protocols.push(p);
            }
        }
        let mut out = Vec::new();
        for &n in &self.ns {
            for &s in &self.ss {
                for &p in &protocols {
                    for &seed in &self.seeds {
                        out.push((p, n, s, seed));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs one grid point: graph from `(n, seed)`, partition from `seed`, then the
/// protocol, then the stretch check when `n <= verify_cap`.
pub fn run_point(grid: &SweepGrid, protocol: Protocol, n: usize, s: usize, seed: u64) -> Result<SweepRow> {
    let g = grid.family.generate(n, seed)?;
    let partition = partition_edges(&g, s, grid.mode, seed)?;
    let r = run_protocol(protocol, &g, &partition, seed, &grid.options)?;
    let verified = if n > grid.verify_cap {
        Verified::Unchecked
    } else if protocol.guarantee().verify(&g, &r.spanner)? {
        Verified::Pass
    } else {
        Verified::Fail
    };
    let t = &r.transcript;
    Ok(SweepRow {
        protocol: protocol.name().to_string(),
        n,
        m: g.m(),
        s,
        param: protocol.param(),
        seed,
        bits_up: t.bits_up(),
        bits_down: t.bits_down(),
        total_bits: t.total_bits(),
        rounds: t.rounds,
        messages: t.messages,
        spanner_edges: r.spanner.m(),
        verified,
    })
}

/// Runs every grid point, in parallel on up to `jobs` threads (all cores when
/// `None`). Rows come back in grid order whatever the completion order.
pub fn sweep(grid: &SweepGrid, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    let points = grid.points()?;
    let run_all = || {
        points
            .par_iter()
            .map(|&(p, n, s, seed)| {
                run_point(grid, p, n, s, seed).map_err(|e| Error::Run {
                    coordinates: format!("protocol={p} n={n} s={s} param={} seed={seed}", p.param()),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    match jobs {
        None => run_all(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| domain(format!("cannot start worker pool: {e}")))?
            .install(run_all),
    }
}

/// Writes rows as CSV, preceded by `# ` comment lines.
pub fn write_rows<W: Write>(mut out: W, rows: &[SweepRow], comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "protocol",
            "n",
            "m",
            "s",
            "param",
            "seed",
            "bits_up",
            "bits_down",
            "total_bits",
            "rounds",
            "messages",
            "spanner_edges",
            "verified",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_rows`]; `#` lines are skipped.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Which coordinate a fit runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    N,
    S,
}

/// Which measurement a fit explains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TotalBits,
    SpannerEdges,
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(Variable::N),
            "s" => Ok(Variable::S),
            _ => Err(domain(format!("fit variable must be n or s, got {s:?}"))),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total_bits" => Ok(Metric::TotalBits),
            "spanner_edges" => Ok(Metric::SpannerEdges),
            _ => Err(domain(format!(
                "fit metric must be total_bits or spanner_edges, got {s:?}"
            ))),
        }
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub variable: Variable,
    pub metric: Metric,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

impl Fit {
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Ordinary least squares on `ln y` against `ln x`: `(slope, intercept, r2)`.
/// Needs at least three distinct `x` values, all coordinates positive.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(domain("fit needs as many x values as y values"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(domain("log-log fit needs positive finite values"));
    }
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(domain(format!(
            "fit needs at least 3 distinct values of the swept variable, got {}",
            distinct.len()
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, intercept, r2))
}

/// Fits `metric ~ variable^slope` over `rows`. Every coordinate other than
/// the swept variable and the seed must be the same on all rows.
pub fn fit_exponent(rows: &[SweepRow], variable: Variable, metric: Metric) -> Result<Fit> {
    let Some(first) = rows.first() else {
        return Err(domain("fit needs at least 3 rows"));
    };
    let fixed = |r: &SweepRow| match variable {
        Variable::N => (r.protocol.clone(), r.param, r.s, 0),
        Variable::S => (r.protocol.clone(), r.param, 0, r.n),
    };
    if let Some(r) = rows.iter().find(|r| fixed(r) != fixed(first)) {
        return Err(domain(format!(
            "rows disagree on a fixed coordinate: {:?} vs {:?}",
            fixed(first),
            fixed(r)
        )));
    }
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| match variable {
            Variable::N => r.n as f64,
            Variable::S => r.s as f64,
        })
        .collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| match metric {
            Metric::TotalBits => r.total_bits as f64,
            Metric::SpannerEdges => r.spanner_edges as f64,
        })
        .collect();
    let (slope, intercept, r2) = fit_power_law(&xs, &ys)?;
    Ok(Fit {
        variable,
        metric,
        slope,
        intercept,
        r2,
        points: rows.len(),
    })
}
