use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use commspan::analysis::{self, GraphFamily, Metric, SweepGrid, Variable, Verified};
use commspan::generators::{self, read_partition, write_partition, EdgePartition, PartitionMode};
use commspan::graph::{girth, read_graph, verify_additive, verify_multiplicative, write_graph, Graph};
use commspan::simnet::{run_protocol, Protocol, ProtocolOptions};
use commspan::streaming::{churned_stream, read_stream, stream_spanner, write_stream, StreamOptions};

/// Communication-metered simulation of distributed spanner protocols.
///
/// Exit codes: 0 success, 1 a requested check failed, 2 usage or input error.
#[derive(Parser, Debug)]
#[command(name = "commspan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate graphs, partitions and streams.
    #[command(subcommand)]
    Gen(Gen),
    /// Run one protocol and print its transcript as a CSV row.
    Run(RunArgs),
    /// Check that a spanner file meets a stretch bound.
    Verify(VerifyArgs),
    /// Run the multi-pass streaming spanner on a stream file.
    StreamRun(StreamRunArgs),
    /// Run a protocol over a grid of (n, s, k, seed) and write CSV rows.
    Sweep(SweepArgs),
    /// Fit a log-log slope to sweep rows; prints one JSON line.
    Fit(FitArgs),
    /// Print the girth of a graph.
    Girth(GirthArgs),
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// Complete bipartite graph K_{a,b}.
    CompleteBipartite {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Uniform random graph with exactly m edges.
    Gnm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Point-line incidence graph of the projective plane over GF(q), q prime.
    Projective {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Girth-6 biregular graph: projective plane with each line split into g copies.
    Biregular {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        g: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Hard instance for multiplicative 3-spanners, with its s-player partition.
    HardMult3 {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        s: usize,
        /// Where to write the partition.
        #[arg(long)]
        partition_out: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Split a graph's edges among s players.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        s: usize,
        /// disjoint-random, duplicated-random or adversarial-by-vertex.
        #[arg(long, default_value = "disjoint-random", value_parser = parse_from_str::<PartitionMode>)]
        mode: PartitionMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Turnstile stream of a graph with insert-then-delete noise.
    Stream {
        #[arg(long)]
        graph: PathBuf,
        /// Noise updates per graph edge, as a fraction of m.
        #[arg(long, default_value_t = 0.2)]
        churn: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SamplingArgs {
    /// Multiplier c in every sample count ceil(c * f * ln(n / delta)).
    #[arg(long, default_value_t = 2.0)]
    c_sample: f64,
    /// Multiplier of the O~(k) part of the additive-k root sample.
    #[arg(long, default_value_t = 2.0)]
    c_sample_k: f64,
    /// Failure target delta; defaults to 1/n.
    #[arg(long)]
    delta: Option<f64>,
    /// Do not charge the broadcast of shared random samples.
    #[arg(long)]
    free_randomness: bool,
}

impl SamplingArgs {
    fn options(&self) -> Result<ProtocolOptions> {
        if !(self.c_sample > 0.0 && self.c_sample_k > 0.0) {
            bail!("sampling constants must be positive");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                bail!("--delta must be in (0, 1), got {d}");
            }
        }
        Ok(ProtocolOptions {
            c_sample: self.c_sample,
            c_sample_k: self.c_sample_k,
            delta: self.delta,
            free_randomness: self.free_randomness,
        })
    }

    fn echo(&self) -> String {
        format!(
            "c_sample={} c_sample_k={} delta={} free_randomness={}",
            self.c_sample,
            self.c_sample_k,
            self.delta.map_or("1/n".to_string(), |d| d.to_string()),
            self.free_randomness
        )
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// additive2, additive-k, greedy, baswana-sen or simultaneous.
    protocol: String,
    #[arg(long)]
    graph: PathBuf,
    /// Partition file; the whole graph goes to one player when omitted.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Stretch parameter of the multiplicative protocols.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Additive distortion of additive-k (same as --k for that protocol).
    #[arg(long)]
    beta: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Check the output against the protocol's stretch; exit 1 on failure.
    #[arg(long)]
    verify: bool,
    /// Also write the spanner graph here.
    #[arg(long)]
    spanner_out: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    spanner: PathBuf,
    /// Additive distortion beta.
    #[arg(long, conflicts_with = "multiplicative", required_unless_present = "multiplicative")]
    additive: Option<u32>,
    /// Multiplicative stretch alpha.
    #[arg(long)]
    multiplicative: Option<u32>,
}

#[derive(Args, Debug)]
struct StreamRunArgs {
    #[arg(long)]
    stream: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Group-sampler sizing constant.
    #[arg(long, default_value_t = 2.0)]
    c_group: f64,
    /// Sampler failure probability; defaults to n^-3.
    #[arg(long)]
    delta: Option<f64>,
    /// Exit 1 unless exactly floor(k/2) + 1 passes ran.
    #[arg(long)]
    passes_check: bool,
    /// Check stretch 2k-1 against the stream's net graph; exit 1 on failure.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    spanner_out: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    protocol: String,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Comma-separated player counts.
    #[arg(long, value_delimiter = ',', required = true)]
    s: Vec<usize>,
    /// Comma-separated stretch parameters.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    k: Vec<u32>,
    /// Number of seeds per grid point, starting at --first-seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// gnm:<coeff>:<exponent> (m = coeff * n^exponent) or complete-bipartite.
    #[arg(long, default_value = "gnm:0.125:2", value_parser = parse_from_str::<GraphFamily>)]
    family: GraphFamily,
    #[arg(long, default_value = "disjoint-random", value_parser = parse_from_str::<PartitionMode>)]
    mode: PartitionMode,
    /// Rows with n above this are reported as unchecked.
    #[arg(long, default_value_t = analysis::DEFAULT_VERIFY_CAP)]
    verify_cap: usize,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV written by `sweep` or `run`.
    #[arg(long)]
    input: PathBuf,
    /// n or s.
    #[arg(long, value_parser = parse_from_str::<Variable>)]
    variable: Variable,
    /// total_bits or spanner_edges.
    #[arg(long, default_value = "total_bits", value_parser = parse_from_str::<Metric>)]
    metric: Metric,
}

#[derive(Args, Debug)]
struct GirthArgs {
    #[arg(long)]
    graph: PathBuf,
}

fn parse_from_str<T>(s: &str) -> Result<T, String>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn load_graph(path: &Path) -> Result<Graph> {
    read_graph(open(path)?).with_context(|| format!("reading graph {}", path.display()))
}

fn sink(out: &Output) -> Result<Box<dyn Write>> {
    Ok(match &out.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

/// What a subcommand reports back to `main`.
enum Outcome {
    Ok,
    CheckFailed,
}

fn emit_graph(g: &Graph, comments: &[String], out: &Output) -> Result<Outcome> {
    let mut w = sink(out)?;
    write_graph(&mut w, g, comments)?;
    w.flush()?;
    Ok(Outcome::Ok)
}

fn gen(cmd: Gen) -> Result<Outcome> {
    match cmd {
        Gen::CompleteBipartite { a, b, out } => emit_graph(
            &generators::complete_bipartite(a, b)?,
            &[format!("gen complete-bipartite a={a} b={b}")],
            &out,
        ),
        Gen::Gnm { n, m, seed, out } => emit_graph(
            &generators::random_gnm(n, m, seed)?,
            &[format!("gen gnm n={n} m={m} seed={seed}")],
            &out,
        ),
        Gen::Projective { q, out } => emit_graph(
            &generators::projective_incidence(q)?,
            &[format!("gen projective q={q}")],
            &out,
        ),
        Gen::Biregular { q, g, out } => emit_graph(
            &generators::biregular_girth6(q, g)?,
            &[format!("gen biregular q={q} g={g}")],
            &out,
        ),
        Gen::HardMult3 {
            q,
            s,
            partition_out,
            out,
        } => {
            let (g, p) = generators::hard_instance_mult3(q, s)?;
            let echo = vec![format!("gen hard-mult3 q={q} s={s}")];
            let mut w = create(&partition_out)?;
            write_partition(&mut w, &p, &echo)?;
            w.flush()?;
            emit_graph(&g, &echo, &out)
        }
        Gen::Partition {
            graph,
            s,
            mode,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let p = generators::partition_edges(&g, s, mode, seed)?;
            let mut w = sink(&out)?;
            write_partition(
                &mut w,
                &p,
                &[format!(
                    "gen partition graph={} s={s} mode={mode} seed={seed}",
                    graph.display()
                )],
            )?;
            w.flush()?;
            Ok(Outcome::Ok)
        }
        Gen::Stream {
            graph,
            churn,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let stream = churned_stream(&g, churn, seed)?;
            let mut w = sink(&out)?;
            write_stream(
                &mut w,
                &stream,
                &[format!(
                    "gen stream graph={} churn={churn} seed={seed}",
                    graph.display()
                )],
            )?;
            w.flush()?;
            Ok(Outcome::Ok)
        }
    }
}

fn run(args: RunArgs) -> Result<Outcome> {
    let g = load_graph(&args.graph)?;
    let partition = match &args.partition {
        Some(p) => read_partition(open(p)?).with_context(|| format!("reading partition {}", p.display()))?,
        None => EdgePartition::single(&g),
    };
    let param = match (args.protocol.as_str(), args.beta) {
        ("additive-k", Some(beta)) => beta,
        (_, Some(_)) => bail!("--beta only applies to additive-k"),
        _ => args.k,
    };
    let protocol = Protocol::from_name(&args.protocol, param)?;
    let options = args.sampling.options()?;
    let r = run_protocol(protocol, &g, &partition, args.seed, &options)?;
    let verified = if args.verify {
        if protocol.guarantee().verify(&g, &r.spanner)? {
            Verified::Pass
        } else {
            Verified::Fail
        }
    } else {
        Verified::Unchecked
    };
    let t = &r.transcript;
    let row = analysis::SweepRow {
        protocol: protocol.name().to_string(),
        n: g.n(),
        m: g.m(),
        s: partition.s(),
        param: protocol.param(),
        seed: args.seed,
        bits_up: t.bits_up(),
        bits_down: t.bits_down(),
        total_bits: t.total_bits(),
        rounds: t.rounds,
        messages: t.messages,
        spanner_edges: r.spanner.m(),
        verified,
    };
    let echo = vec![
        format!(
            "run {} graph={} partition={} param={param} seed={}",
            protocol,
            args.graph.display(),
            args.partition
                .as_deref()
                .map_or("single".into(), |p| p.display().to_string()),
            args.seed
        ),
        args.sampling.echo(),
    ];
    if let Some(path) = &args.spanner_out {
        let mut w = create(path)?;
        write_graph(&mut w, &r.spanner, &echo)?;
        w.flush()?;
    }
    let mut w = sink(&args.out)?;
    analysis::write_rows(&mut w, &[row], &echo)?;
    w.flush()?;
    Ok(match verified {
        Verified::Fail => Outcome::CheckFailed,
        _ => Outcome::Ok,
    })
}

fn verify(args: VerifyArgs) -> Result<Outcome> {
    let g = load_graph(&args.graph)?;
    let h = load_graph(&args.spanner)?;
    let (ok, label) = match (args.additive, args.multiplicative) {
        (Some(beta), _) => (verify_additive(&g, &h, beta)?, format!("additive={beta}")),
        (None, Some(alpha)) => (verify_multiplicative(&g, &h, alpha)?, format!("multiplicative={alpha}")),
        (None, None) => bail!("pass --additive or --multiplicative"),
    };
    println!("{label} verified={}", u8::from(ok));
    Ok(if ok { Outcome::Ok } else { Outcome::CheckFailed })
}

fn stream_run(args: StreamRunArgs) -> Result<Outcome> {
    let stream =
        read_stream(open(&args.stream)?).with_context(|| format!("reading stream {}", args.stream.display()))?;
    let options = StreamOptions {
        c_group: args.c_group,
        delta: args.delta,
    };
    let r = stream_spanner(&stream, args.k, args.seed, &options)?;
    let expected = (args.k / 2 + 1) as usize;
    let mut failed = args.passes_check && r.passes != expected;
    let mut w = sink(&args.out)?;
    writeln!(
        w,
        "# stream-run stream={} k={} seed={} c_group={} delta={}",
        args.stream.display(),
        args.k,
        args.seed,
        args.c_group,
        args.delta.map_or("n^-3".into(), |d| d.to_string())
    )?;
    writeln!(w, "passes={}", r.passes)?;
    writeln!(w, "spanner_edges={}", r.spanner.m())?;
    writeln!(w, "worst_case_words={}", r.space.worst_case_words)?;
    writeln!(w, "instantiated_words={}", r.space.instantiated_words)?;
    if args.verify {
        let net = stream.net_graph()?;
        let ok = verify_multiplicative(&net, &r.spanner, 2 * args.k - 1)?;
        writeln!(w, "verified={}", u8::from(ok))?;
        failed |= !ok;
    }
    w.flush()?;
    if let Some(path) = &args.spanner_out {
        let mut f = create(path)?;
        write_graph(
            &mut f,
            &r.spanner,
            &[format!("stream-run k={} seed={}", args.k, args.seed)],
        )?;
        f.flush()?;
    }
    Ok(if failed { Outcome::CheckFailed } else { Outcome::Ok })
}

fn sweep(args: SweepArgs) -> Result<Outcome> {
    if args.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let grid = SweepGrid {
        protocol: args.protocol.clone(),
        ns: args.n.clone(),
        ss: args.s.clone(),
        ks: args.k.clone(),
        seeds: (args.first_seed..args.first_seed + args.seeds).collect(),
        family: args.family,
        mode: args.mode,
        options: args.sampling.options()?,
        verify_cap: args.verify_cap,
    };
    let rows = analysis::sweep(&grid, args.jobs)?;
    let list = |v: &[String]| v.join(",");
    let echo = vec![
        format!(
            "sweep protocol={} n={} s={} k={} seeds={}..{} family={} mode={} verify_cap={}",
            args.protocol,
            list(&args.n.iter().map(ToString::to_string).collect::<Vec<_>>()),
            list(&args.s.iter().map(ToString::to_string).collect::<Vec<_>>()),
            list(&args.k.iter().map(ToString::to_string).collect::<Vec<_>>()),
            args.first_seed,
            args.first_seed + args.seeds,
            args.family,
            args.mode,
            args.verify_cap
        ),
        args.sampling.echo(),
    ];
    let mut w = sink(&args.out)?;
    analysis::write_rows(&mut w, &rows, &echo)?;
    w.flush()?;
    Ok(Outcome::Ok)
}

fn fit(args: FitArgs) -> Result<Outcome> {
    let rows =
        analysis::read_rows(open(&args.input)?).with_context(|| format!("reading rows {}", args.input.display()))?;
    let fit = analysis::fit_exponent(&rows, args.variable, args.metric)?;
    println!("{}", fit.to_json_line()?);
    Ok(Outcome::Ok)
}

fn girth_cmd(args: GirthArgs) -> Result<Outcome> {
    let g = load_graph(&args.graph)?;
    println!("girth={}", girth(&g));
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(g) => gen(g),
        Command::Run(a) => run(a),
        Command::Verify(a) => verify(a),
        Command::StreamRun(a) => stream_run(a),
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a),
        Command::Girth(a) => girth_cmd(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
