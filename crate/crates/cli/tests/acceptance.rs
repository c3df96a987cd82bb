//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fails.

mod common;

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use commspan::analysis::{fit_exponent, sweep, GraphFamily, Metric, SweepGrid, Variable, DEFAULT_VERIFY_CAP};
use commspan::generators::{hard_instance_mult3, partition_edges, projective_incidence, random_gnm, PartitionMode};
use commspan::graph::{bfs, verify_additive, verify_multiplicative};
use commspan::protocols::dist_bfs;
use commspan::simnet::{
    edge_list_prefix_bits, run_protocol, set_prefix_bits, Mode, Protocol, ProtocolContext, ProtocolOptions,
};
use commspan::streaming::{churned_stream, stream_spanner, HashFamily, L0Sampler, TurnstileStream};
use commspan::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Shortest cycle length by removing each edge and measuring the detour.
fn girth_oracle(h: &Graph) -> Option<usize> {
    let n = h.n();
    let mut best: Option<usize> = None;
    for e in h.edges() {
        let mut dist = vec![usize::MAX; n];
        dist[e.u] = 0;
        let mut queue = VecDeque::from([e.u]);
        while let Some(x) = queue.pop_front() {
            for &y in h.neighbors(x) {
                if (x, y) == (e.u, e.v) || dist[y] != usize::MAX {
                    continue;
                }
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
        if dist[e.v] != usize::MAX {
            let c = dist[e.v] + 1;
            best = Some(best.map_or(c, |b| b.min(c)));
        }
    }
    best
}

fn modes() -> impl Iterator<Item = PartitionMode> {
    PartitionMode::ALL.into_iter().cycle()
}

fn random_instance(rng: &mut ChaCha8Rng, max_n: usize) -> Result<Graph, String> {
    let n = rng.gen_range(4..=max_n);
    let cap = ((n as f64).powf(1.5) as usize).min(n * (n - 1) / 2);
    let m = rng.gen_range(0..=cap);
    random_gnm(n, m, rng.gen()).map_err(|e| e.to_string())
}

/// Greedy with k = 2, 3, 4 on 200 instances: how many pass stretch, girth
/// and size for every k.
fn greedy_instances() -> Result<(usize, usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut stretch, mut girth, mut size) = (0, 0, 0);
    for (i, mode) in modes().take(200).enumerate() {
        let g = random_instance(&mut rng, 64)?;
        let s = [1, 2, 4, 8][i % 4];
        let p = partition_edges(&g, s, mode, i as u64).map_err(|e| e.to_string())?;
        let (mut st, mut gi, mut si) = (true, true, true);
        for k in [2, 3, 4] {
            let r = run_protocol(Protocol::Greedy { k }, &g, &p, 0, &Default::default()).map_err(|e| e.to_string())?;
            st &= verify_multiplicative(&g, &r.spanner, 2 * k - 1).map_err(|e| e.to_string())?;
            gi &= girth_oracle(&r.spanner).is_none_or(|c| c > 2 * k as usize);
            let n = g.n() as f64;
            si &= r.spanner.m() as f64 <= n.powf(1.0 + 1.0 / f64::from(k)) + n;
        }
        stretch += usize::from(st);
        girth += usize::from(gi);
        size += usize::from(si);
    }
    Ok((stretch, girth, size))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (stretch, girth, _) = greedy_instances()?;
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("stretch {stretch}/200, girth > 2k {girth}/200, {secs:.1}s");
    if stretch == 200 && girth == 200 && secs < 120.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cases: [(Protocol, usize, usize); 5] = [
        (Protocol::Additive2, 64, 600),
        (Protocol::AdditiveK { k: 8 }, 64, 600),
        (Protocol::BaswanaSen { k: 3 }, 64, 800),
        (Protocol::BaswanaSen { k: 4 }, 64, 800),
        (Protocol::BaswanaSen { k: 5 }, 64, 800),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (proto, n, m) in cases {
        let (mut verified, mut broken_implications) = (0, 0);
        for seed in 0..100u64 {
            let g = random_gnm(n, m, seed).map_err(|e| e.to_string())?;
            let s = if seed % 2 == 0 { 2 } else { 4 };
            let p = partition_edges(&g, s, PartitionMode::DisjointRandom, seed).map_err(|e| e.to_string())?;
            let r = run_protocol(proto, &g, &p, seed, &ProtocolOptions::default()).map_err(|e| e.to_string())?;
            let good = match proto {
                Protocol::Additive2 => verify_additive(&g, &r.spanner, 2),
                Protocol::AdditiveK { k } => verify_additive(&g, &r.spanner, k),
                _ => verify_multiplicative(&g, &r.spanner, 2 * proto.param() - 1),
            }
            .map_err(|e| e.to_string())?;
            verified += usize::from(good);
            if r.audit.sampling_events_hold(&g, &r.spanner) == Some(true) && !good {
                broken_implications += 1;
            }
        }
        ok &= verified >= 99 && broken_implications == 0;
        parts.push(format!("{}(k={}) {verified}/100", proto.name(), proto.param()));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    let msg = format!("{}, events imply stretch on every run, {secs:.1}s", parts.join(", "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3() -> Outcome {
    let (_, _, size) = greedy_instances()?;
    let msg = format!("|H| <= n^(1+1/k) + n on {size}/200");
    if size == 200 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut equal, mut within) = (0, 0);
    let mut duplicated = 0;
    for (i, mode) in modes().take(100).enumerate() {
        let g = random_instance(&mut rng, 64)?;
        let s = rng.gen_range(1..=8);
        let p = partition_edges(&g, s, mode, i as u64).map_err(|e| e.to_string())?;
        duplicated += usize::from(p.allow_duplication());
        let root = rng.gen_range(0..g.n());
        let mut ctx = ProtocolContext::new(&p, 0, Mode::Interactive, false);
        let tree = dist_bfs(&mut ctx, root, None).map_err(|e| e.to_string())?;
        let reference = bfs(&g, root).map_err(|e| e.to_string())?;
        equal += usize::from(tree.depth == reference.depth);
        let n = g.n();
        let log = u64::from(commspan::graph::ceil_log2(n as u64));
        let t = ctx.transcript();
        let overhead = t.messages * (set_prefix_bits(n) + edge_list_prefix_bits(n));
        within += usize::from(t.total_bits() <= 4 * s as u64 * n as u64 * log + overhead);
    }
    let msg = format!("depths equal {equal}/100, bits within bound {within}/100, {duplicated} duplicated partitions");
    if equal == 100 && within == 100 && duplicated > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn probe(protocol: &str, ns: Vec<usize>, ss: Vec<usize>, k: u32, variable: Variable) -> Result<f64, String> {
    let grid = SweepGrid {
        protocol: protocol.into(),
        ns,
        ss,
        ks: vec![k],
        seeds: (0..5).collect(),
        family: GraphFamily::Gnm {
            coeff: 0.125,
            exponent: 2.0,
        },
        mode: PartitionMode::DisjointRandom,
        options: ProtocolOptions::default(),
        verify_cap: DEFAULT_VERIFY_CAP,
    };
    let rows = sweep(&grid, None).map_err(|e| e.to_string())?;
    let fit = fit_exponent(&rows, variable, Metric::TotalBits).map_err(|e| e.to_string())?;
    Ok(fit.slope)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let a = probe("additive2", vec![2048], vec![4, 16, 64], 2, Variable::S)?;
    let b = probe("greedy", vec![128, 512, 2048], vec![4], 2, Variable::N)?;
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("additive2 bits ~ s^{a:.3}, greedy k=2 bits ~ n^{b:.3}, {secs:.1}s");
    if (0.35..=0.65).contains(&a) && (1.35..=1.75).contains(&b) && secs < 600.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_6() -> Outcome {
    let g = random_gnm(24, 80, 6).map_err(|e| e.to_string())?;
    let stream = TurnstileStream::from_graph(&g);
    let mut passes_ok = true;
    for k in 2..=8u32 {
        let r = stream_spanner(&stream, k, 0, &Default::default()).map_err(|e| e.to_string())?;
        passes_ok &= r.passes == (k / 2 + 1) as usize;
    }
    let mut verified = 0;
    for seed in 0..100u64 {
        let n = 32 + (seed as usize % 33);
        let g = random_gnm(n, n * (n - 1) / 4, seed).map_err(|e| e.to_string())?;
        let s = churned_stream(&g, 0.2, seed).map_err(|e| e.to_string())?;
        let r = stream_spanner(&s, 3, seed, &Default::default()).map_err(|e| e.to_string())?;
        verified += usize::from(verify_multiplicative(&g, &r.spanner, 5).map_err(|e| e.to_string())?);
    }
    let space = |n: usize| -> Result<f64, String> {
        let g = random_gnm(n, 4 * n, 7).map_err(|e| e.to_string())?;
        let r =
            stream_spanner(&TurnstileStream::from_graph(&g), 3, 7, &Default::default()).map_err(|e| e.to_string())?;
        Ok(r.space.instantiated_words as f64)
    };
    let ratio = space(1024)? / space(512)?;
    let limit = 2f64.powf(4.0 / 3.0) * 1.5;
    let msg = format!(
        "passes exact for k=2..8: {passes_ok}, k=3 verified {verified}/100, space ratio {ratio:.2} (limit {limit:.2})"
    );
    if passes_ok && verified >= 95 && ratio <= limit {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7() -> Outcome {
    const DIM: u64 = 1 << 16;
    let n = 362.0f64; // C(362, 2) is just below 2^16
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let family = |seed: u64| Arc::new(HashFamily::new(DIM, n.powi(-3), seed).expect("valid family"));

    let mut hits = 0;
    for trial in 0..10_000u64 {
        let i = rng.gen_range(0..DIM);
        let mut s = L0Sampler::with_family(family(trial));
        s.update(i, 1).expect("in range");
        hits += usize::from(s.query() == Some(i));
    }
    let needed = (10_000.0 * (1.0 - n.powi(-3))).ceil() as usize;

    let support: Vec<u64> = (0..16)
        .map(|_| rng.gen_range(0..DIM))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut counts = vec![0u64; support.len()];
    for trial in 0..10_000u64 {
        let mut s = L0Sampler::with_family(family(1 << 32 | trial));
        for &i in &support {
            s.update(i, 1).expect("in range");
        }
        if let Some(pos) = s.query().and_then(|got| support.iter().position(|&i| i == got)) {
            counts[pos] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let expect = total as f64 / support.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let p = 1.0 - ChiSquared::new((support.len() - 1) as f64).expect("df > 0").cdf(chi2);

    let mut linear = 0;
    for pair in 0..1_000u64 {
        let f = family(2 << 32 | pair);
        let updates = |rng: &mut ChaCha8Rng| -> Vec<(u64, i64)> {
            (0..rng.gen_range(0..40))
                .map(|_| (rng.gen_range(0..DIM), rng.gen_range(-3..=3)))
                .collect()
        };
        let (a, b) = (updates(&mut rng), updates(&mut rng));
        let feed = |u: &[(u64, i64)]| {
            let mut s = L0Sampler::with_family(Arc::clone(&f));
            for &(i, d) in u {
                s.update(i, d).expect("in range");
            }
            s
        };
        let mut merged = feed(&a);
        merged.merge(&feed(&b)).expect("same family");
        let joined: Vec<_> = a.iter().chain(&b).copied().collect();
        linear += usize::from(merged == feed(&joined) && merged.query() == feed(&joined).query());
    }
    let msg = format!(
        "singleton recovered {hits}/10000 (need {needed}), support 16 chi2 {chi2:.1} p {p:.3} over {total} samples, linearity {linear}/1000"
    );
    if hits >= needed && p > 0.001 && total == 10_000 && linear == 1000 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Outcome {
    let mut projective = true;
    for q in [2u64, 3, 5, 7] {
        let g = projective_incidence(q).map_err(|e| e.to_string())?;
        let nq = (q * q + q + 1) as usize;
        projective &= g.n() == 2 * nq;
        projective &= g.m() == nq * (q as usize + 1);
        projective &= (0..g.n()).all(|v| g.degree(v) == q as usize + 1);
        projective &= girth_oracle(&g) == Some(6);
        let p = partition_edges(&g, 4, PartitionMode::DisjointRandom, q).map_err(|e| e.to_string())?;
        let r = run_protocol(Protocol::Greedy { k: 2 }, &g, &p, 0, &Default::default()).map_err(|e| e.to_string())?;
        projective &= r.spanner == g;
    }
    let (g, p) = hard_instance_mult3(2, 4).map_err(|e| e.to_string())?;
    let disjoint = !p.allow_duplication() && p.total_held() == g.m();
    let (mut verified, mut retained) = (0, 0);
    for seed in 0..20u64 {
        let r = run_protocol(Protocol::Additive2, &g, &p, seed, &Default::default()).map_err(|e| e.to_string())?;
        if verify_multiplicative(&g, &r.spanner, 3).map_err(|e| e.to_string())? {
            verified += 1;
            retained += usize::from(r.spanner.m() >= 21);
        }
    }
    let msg = format!(
        "projective q=2,3,5,7 girth 6, regular, fixed by greedy: {projective}; hard instance disjoint: {disjoint}; \
         additive2 x3-verified {verified}/20, all keeping >= 21 edges: {}",
        retained == verified
    );
    if projective && disjoint && verified > 0 && retained == verified {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = common::run_script(a.path())?;
    let second = common::run_script(b.path())?;
    let same = first == second;
    let differing = common::check_golden(&first);
    let msg = format!(
        "{} artifacts, identical across runs: {same}, golden mismatches: {differing:?}",
        first.len()
    );
    if same && differing.is_empty() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("greedy stretch and girth", criterion_1),
        ("randomized stretch", criterion_2),
        ("greedy size bound", criterion_3),
        ("distributed BFS", criterion_4),
        ("scaling probes", criterion_5),
        ("streaming spanner", criterion_6),
        ("l0 sampler", criterion_7),
        ("extremal fixtures", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS {} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
