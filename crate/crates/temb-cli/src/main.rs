use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use temb::io::{self, AnyLevel, JsonScalar, Mode};
use temb::kasteleyn::{aztec_embedding_from_integrals, Contours};
use temb::probability::aztec_embedding_from_probabilities;
use temb::recurrence::aztec_embedding;
use temb::tower::tower_embedding;
use temb::verify::{run_sequence, SuiteReport, VerifyConfig};
use temb::{Dyadic, Error, GraphKind, Scalar, TEmbeddingLevel};

#[derive(Parser)]
#[command(name = "temb", version, about = "Perfect t-embeddings and origami maps of Aztec diamonds and tower graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute an embedding and write it as JSON, optionally as SVG.
    Embed(EmbedArgs),
    /// Run the verification suite on a file or on freshly computed levels.
    Verify(VerifyArgs),
    /// Tabulate the continuum limits over a grid of the Aztec domain.
    Limits(LimitsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    Aztec,
    Tower,
}

impl From<Graph> for GraphKind {
    fn from(g: Graph) -> Self {
        match g {
            Graph::Aztec => GraphKind::Aztec,
            Graph::Tower => GraphKind::Tower,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Pipeline {
    Recurrence,
    Probability,
    Kasteleyn,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Double,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, value_enum)]
    graph: Graph,
    #[arg(long)]
    n: i64,
    #[arg(long, value_enum, default_value = "recurrence")]
    pipeline: Pipeline,
    /// Defaults to exact, or double for the kasteleyn pipeline.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Nodes per contour; a power of two, at least 64.
    #[arg(long, default_value_t = 64)]
    contour_nodes: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Compare the three Aztec pipelines and fail on a discrepancy above --tol.
    #[arg(long)]
    cross_check: bool,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Embedding file; without it, levels are computed from --graph and --n.
    file: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "file", conflicts_with = "file")]
    graph: Option<Graph>,
    /// One size or a comma-separated list; a list adds frozen-region collapse.
    #[arg(long, value_delimiter = ',', required_unless_present = "file", conflicts_with = "file")]
    n: Vec<i64>,
    #[arg(long, value_enum, default_value = "exact", conflicts_with = "file")]
    mode: ModeArg,
    /// Seed of every sampled check.
    #[arg(long)]
    seed: u64,
    /// Radius of the compact set K_r.
    #[arg(long, default_value_t = 0.8)]
    r: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_prime: Option<f64>,
    #[arg(long)]
    exp_fat_bound: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    c_cap: f64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pairs: usize,
    #[arg(long, default_value_t = 50)]
    balls: usize,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitsArgs {
    /// Points per axis.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures that end the run, with their exit codes.
enum Fail {
    Check(String),
    Usage(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Lib(Error::Io(e))
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Precondition(_) => "precondition",
        Error::Parity { .. } => "parity",
        Error::OutsideLiquid { .. } => "outside_liquid",
        Error::Quadrature(_) => "quadrature",
        Error::Degenerate(_) => "degenerate",
        Error::NoAdmissiblePairs => "no_admissible_pairs",
        Error::EmptySample(_) => "empty_sample",
        Error::Disconnected => "disconnected",
        Error::Format(_) => "malformed_input",
        Error::Io(_) => "io",
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Fail> {
    File::create(path).map(BufWriter::new).map_err(|e| Fail::Usage(format!("cannot write {}: {e}", path.display())))
}

fn save<S: JsonScalar>(level: &TEmbeddingLevel<S>, args: &EmbedArgs) -> Result<(), Fail> {
    let mut out = create(&args.out)?;
    io::write_level(level, &mut out)?;
    out.flush()?;
    if let Some(p) = &args.svg {
        let mut f = create(p)?;
        f.write_all(io::render_svg(level)?.as_bytes())?;
        f.flush()?;
    }
    Ok(())
}

fn build<S: JsonScalar>(graph: GraphKind, n: i64, pipeline: Pipeline) -> Result<TEmbeddingLevel<S>, Fail> {
    Ok(match (graph, pipeline) {
        (GraphKind::Aztec, Pipeline::Recurrence) => aztec_embedding::<S>(n)?,
        (GraphKind::Aztec, Pipeline::Probability) => aztec_embedding_from_probabilities::<S>(n)?,
        (GraphKind::Tower, Pipeline::Recurrence) => tower_embedding::<S>(n)?,
        _ => return Err(Fail::Usage("the tower graph is built by the recurrence pipeline only".into())),
    })
}

fn max_gap<A: Scalar, B: Scalar>(a: &TEmbeddingLevel<A>, b: &TEmbeddingLevel<B>) -> f64 {
    a.vertices
        .iter()
        .zip(&b.vertices)
        .map(|(x, y)| (x.t.to_c64() - y.t.to_c64()).norm().max((x.o.to_c64() - y.o.to_c64()).norm()))
        .fold(0.0, f64::max)
}

fn embed(args: EmbedArgs) -> Result<(), Fail> {
    if args.n < 1 {
        return Err(Fail::Usage(format!("--n must be at least 1, got {}", args.n)));
    }
    let contours = Contours::with_nodes(args.contour_nodes);
    contours.validate().map_err(|e| Fail::Usage(e.to_string()))?;
    let graph = GraphKind::from(args.graph);
    let mode = match (args.mode, args.pipeline) {
        (Some(ModeArg::Exact), Pipeline::Kasteleyn) => {
            return Err(Fail::Usage("the kasteleyn pipeline computes in double mode".into()))
        }
        (Some(ModeArg::Exact), _) | (None, Pipeline::Recurrence | Pipeline::Probability) => Mode::Exact,
        _ => Mode::Double,
    };
    let kasteleyn = || -> Result<TEmbeddingLevel<f64>, Fail> {
        if graph != GraphKind::Aztec {
            return Err(Fail::Usage("the tower graph is built by the recurrence pipeline only".into()));
        }
        Ok(aztec_embedding_from_integrals(args.n, &contours)?)
    };
    let level = match (mode, args.pipeline) {
        (_, Pipeline::Kasteleyn) => AnyLevel::Double(kasteleyn()?),
        (Mode::Exact, p) => AnyLevel::Exact(build::<Dyadic>(graph, args.n, p)?),
        (Mode::Double, p) => AnyLevel::Double(build::<f64>(graph, args.n, p)?),
    };
    match &level {
        AnyLevel::Exact(l) => save(l, &args)?,
        AnyLevel::Double(l) => save(l, &args)?,
    }
    if args.cross_check {
        if graph != GraphKind::Aztec {
            return Err(Fail::Usage("--cross-check compares the Aztec pipelines".into()));
        }
        let reference = aztec_embedding::<Dyadic>(args.n)?;
        let probability = aztec_embedding_from_probabilities::<Dyadic>(args.n)?;
        let integrals = match &level {
            AnyLevel::Double(l) if args.pipeline == Pipeline::Kasteleyn => l.clone(),
            _ => kasteleyn()?,
        };
        let gaps = [
            ("probability", max_gap(&reference, &probability)),
            ("kasteleyn", max_gap(&reference, &integrals)),
            (
                "output",
                match &level {
                    AnyLevel::Exact(l) => max_gap(&reference, l),
                    AnyLevel::Double(l) => max_gap(&reference, l),
                },
            ),
        ];
        let worst = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
        let report = json!({
            "cross_check": {
                "n": args.n,
                "tol": args.tol,
                "max_discrepancy": worst,
                "against_recurrence": gaps.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            }
        });
        println!("{report}");
        if !(worst <= args.tol) {
            return Err(Fail::Check(format!("pipelines differ by {worst:e}, above {:e}", args.tol)));
        }
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Fail> {
    let cfg = VerifyConfig {
        r: args.r,
        delta: args.delta,
        delta_prime: args.delta_prime,
        exp_fat_bound: args.exp_fat_bound,
        c_cap: args.c_cap,
        eps: args.eps,
        lip_pairs: args.pairs,
        lip_balls: args.balls,
        seed: args.seed,
        ..VerifyConfig::default()
    };
    if !(cfg.r > 0.0 && cfg.r < 1.0) {
        return Err(Fail::Usage(format!("--r must lie in (0,1), got {}", cfg.r)));
    }
    let report: SuiteReport = match &args.file {
        Some(path) => {
            let f = File::open(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))?;
            match io::read_level(BufReader::new(f))? {
                AnyLevel::Exact(l) => run_sequence(&[l], &cfg)?,
                AnyLevel::Double(l) => run_sequence(&[l], &cfg)?,
            }
        }
        None => {
            let graph = GraphKind::from(args.graph.expect("required by clap"));
            if let Some(&bad) = args.n.iter().find(|&&n| n < 1) {
                return Err(Fail::Usage(format!("--n must be at least 1, got {bad}")));
            }
            match args.mode {
                ModeArg::Exact => {
                    let levels = args.n.iter().map(|&n| build::<Dyadic>(graph, n, Pipeline::Recurrence)).collect::<Result<Vec<_>, _>>()?;
                    run_sequence(&levels, &cfg)?
                }
                ModeArg::Double => {
                    let levels = args.n.iter().map(|&n| build::<f64>(graph, n, Pipeline::Recurrence)).collect::<Result<Vec<_>, _>>()?;
                    run_sequence(&levels, &cfg)?
                }
            }
        }
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Fail::Lib(Error::Format(e.to_string())))?;
    match &args.out {
        Some(p) => {
            let mut f = create(p)?;
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        None => println!("{text}"),
    }
    let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Fail::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

fn limits(args: LimitsArgs) -> Result<(), Fail> {
    if args.grid < 2 {
        return Err(Fail::Usage(format!("--grid must be at least 2, got {}", args.grid)));
    }
    let rows = io::limits_grid(args.grid)?;
    match &args.out {
        Some(p) => {
            let mut f = create(p)?;
            io::write_limits_csv(&rows, &mut f)?;
            f.flush()?;
        }
        None => io::write_limits_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn threads() -> Result<(), Fail> {
    let Ok(v) = std::env::var("TEMB_THREADS") else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| Fail::Usage(format!("TEMB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Fail::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = threads().and_then(|()| match cli.cmd {
        Cmd::Embed(a) => embed(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Limits(a) => limits(a),
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Check(m)) => {
            eprintln!("temb: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Usage(m)) => {
            eprintln!("{}", json!({"error": {"kind": "usage", "message": m}}));
            ExitCode::from(2)
        }
        Err(Fail::Lib(e)) => {
            eprintln!("{}", json!({"error": {"kind": error_kind(&e), "message": e.to_string()}}));
            ExitCode::from(2)
        }
    }
}
