use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use netdecomp::alt::{full_alt_decomposition_with_mode, max_weak_diameter, parse_eps, AltParams};
use netdecomp::apps::{
    cut_split_problem, delta_plus_one_coloring, derandomize_with, list_coloring_with_mode, mis_with_mode, DerandOptions,
};
use netdecomp::cluster::{DecompositionKind, WeakDecomposition};
use netdecomp::engine::Mode;
use netdecomp::graph::{ceil_log2, floor_log2, gen_complete, gen_cycle, gen_path, gen_random, gen_torus, GraphFile};
use netdecomp::power::power_decomposition_with_mode;
use netdecomp::ruling::ruling_set_with_mode;
use netdecomp::strong::{strong_decomposition_with_mode, StrongDecomposition};
use netdecomp::verify::{verify_coloring, verify_mis, verify_ruling, verify_strong, verify_weak, Report, WeakBounds};
use netdecomp::weak::weak_decomposition_with_mode;
use netdecomp::Graph;

#[derive(Parser)]
#[command(name = "netdecomp", version, about = "Deterministic network decompositions and their applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Decompose a graph.
    Decompose {
        #[command(subcommand)]
        algorithm: Algorithm,
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        model: Model,
    },
    /// Maximal independent set.
    Mis {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        model: Model,
    },
    /// List coloring; without `--lists` every node gets the palette `0..=deg`.
    Color {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        model: Model,
        /// JSON array of per-node color lists.
        #[arg(long)]
        lists: Option<PathBuf>,
    },
    /// Fix random bits by conditional expectations.
    Derand {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        model: Model,
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ruling set over all nodes.
    Ruling {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        model: Model,
    },
    /// Check an output against its definition. Exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        kind: VerifyKind,
        /// Graph file; defaults to the graph embedded in the output.
        #[arg(short, long)]
        graph: Option<PathBuf>,
        /// Output to check; `-` or absent reads standard input.
        #[arg(short, long)]
        data: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Scaling table of the weak decomposition over a graph family.
    Bench {
        #[arg(long, value_enum)]
        family: BenchFamily,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    Torus { dim: u32, side: usize },
    Random { n: usize, p: f64 },
}

#[derive(Subcommand)]
enum Algorithm {
    Weak,
    Strong,
    Power {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
    },
    Alt {
        #[arg(long)]
        t: Option<u64>,
        /// Fraction `p/q` or decimal in (0, 1).
        #[arg(long)]
        eps: Option<String>,
    },
}

#[derive(Args)]
struct Io {
    /// Graph file (JSON or text edge list); `-` or absent reads standard input.
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Model {
    #[arg(long, global = true, value_enum, default_value_t = ModelKind::Local)]
    mode: ModelKind,
    /// Per-message bit budget in CONGEST mode.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Local,
    Congest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    CutSplit,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Weak,
    Strong,
    Mis,
    Coloring,
    Ruling,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchFamily {
    Torus,
    Random,
    Path,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
    Rejected,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<netdecomp::Error> for Failure {
    fn from(e: netdecomp::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Rejected) => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { family, seed, output } => {
            let g = match family {
                GenFamily::Path { n } => gen_path(n),
                GenFamily::Cycle { n } => gen_cycle(n),
                GenFamily::Complete { n } => gen_complete(n),
                GenFamily::Torus { dim, side } => gen_torus(dim, side),
                GenFamily::Random { n, p } => gen_random(n, p, seed),
            }
            .map_err(usage)?;
            write_output(output.as_deref(), &g.to_json())
        }
        Command::Decompose { algorithm, io, model } => {
            let g = read_graph(io.input.as_deref())?;
            let mode = model.resolve(&g)?;
            let body = match algorithm {
                Algorithm::Weak => to_value(&weak_decomposition_with_mode(&g, mode)?),
                Algorithm::Power { k } => to_value(&power_decomposition_with_mode(&g, k, mode)?),
                Algorithm::Strong => {
                    let mut v = to_value(&strong_decomposition_with_mode(&g, mode)?);
                    v.as_object_mut().expect("struct serializes to an object").insert("kind".into(), json!("strong"));
                    v
                }
                Algorithm::Alt { t, eps } => {
                    let defaults = AltParams::defaults(&g);
                    let eps = match eps {
                        Some(s) => parse_eps(&s).map_err(usage)?,
                        None => defaults.eps,
                    };
                    let params = AltParams::new(t.unwrap_or(defaults.t), eps).map_err(usage)?;
                    let alt = full_alt_decomposition_with_mode(&g, params, mode)?;
                    let mut v = to_value(&alt.decomposition);
                    let obj = v.as_object_mut().expect("struct serializes to an object");
                    obj.insert("t".into(), json!(params.t));
                    obj.insert("eps".into(), json!(params.eps.to_string()));
                    v
                }
            };
            emit(io.output.as_deref(), &g, body)
        }
        Command::Mis { io, model } => {
            let g = read_graph(io.input.as_deref())?;
            let mode = model.resolve(&g)?;
            emit(io.output.as_deref(), &g, to_value(&mis_with_mode(&g, mode)?))
        }
        Command::Color { io, model, lists } => {
            let g = read_graph(io.input.as_deref())?;
            let mode = model.resolve(&g)?;
            let mut body = match &lists {
                Some(path) => {
                    let text = read_text(Some(path))?;
                    let lists: Vec<Vec<u64>> =
                        serde_json::from_str(&text).with_context(|| format!("{}: malformed lists", path.display())).map_err(usage)?;
                    if lists.len() != g.node_count() {
                        return Err(usage(anyhow!("{} lists for {} nodes", lists.len(), g.node_count())));
                    }
                    let res = list_coloring_with_mode(&g, &lists, mode).map_err(usage)?;
                    let mut v = to_value(&res);
                    v.as_object_mut().expect("object").insert("lists".into(), json!(lists));
                    v
                }
                None if matches!(mode, Mode::Local) => to_value(&delta_plus_one_coloring(&g)?),
                None => {
                    let palettes: Vec<Vec<u64>> = (0..g.node_count()).map(|v| (0..=g.degree(v) as u64).collect()).collect();
                    to_value(&list_coloring_with_mode(&g, &palettes, mode)?)
                }
            };
            body.as_object_mut().expect("object").entry("lists").or_insert(Value::Null);
            emit(io.output.as_deref(), &g, body)
        }
        Command::Derand { io, model, problem, seed } => {
            let g = read_graph(io.input.as_deref())?;
            let mode = model.resolve(&g)?;
            let res = match problem {
                Problem::CutSplit => {
                    let p = cut_split_problem(&g);
                    derandomize_with(&g, &p, DerandOptions { seed, mode, ..DerandOptions::default() })?
                }
            };
            let mut body: Value = serde_json::from_str(&res.to_json()).expect("valid json");
            body.as_object_mut().expect("object").insert("problem".into(), json!("cut-split"));
            emit(io.output.as_deref(), &g, body)
        }
        Command::Ruling { io, model } => {
            let g = read_graph(io.input.as_deref())?;
            let mode = model.resolve(&g)?;
            let all: Vec<usize> = (0..g.node_count()).collect();
            let res = ruling_set_with_mode(&g, &all, mode)?;
            let body = json!({ "members": res.members, "ledger": res.ledger });
            emit(io.output.as_deref(), &g, body)
        }
        Command::Verify { kind, graph, data, output } => {
            let text = read_text(data.as_deref())?;
            let mut doc: Value = serde_json::from_str(&text).context("malformed output file").map_err(usage)?;
            let obj = doc.as_object_mut().ok_or_else(|| usage(anyhow!("output file is not a JSON object")))?;
            let g = match &graph {
                Some(path) => read_graph(Some(path))?,
                None => {
                    let embedded = obj.remove("graph").ok_or_else(|| usage(anyhow!("no --graph given and no embedded graph")))?;
                    let file: GraphFile = serde_json::from_value(embedded).context("malformed embedded graph").map_err(usage)?;
                    Graph::try_from(file).map_err(usage)?
                }
            };
            let report = verify(kind, &g, doc)?;
            write_output(output.as_deref(), &report.to_json())?;
            for c in report.failures() {
                eprintln!("check failed: {}", c.name);
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Rejected)
            }
        }
        Command::Bench { family, sizes, seed, output } => {
            let mut sizes = sizes;
            sizes.sort_unstable();
            sizes.dedup();
            let mut wtr = csv::Writer::from_writer(Vec::new());
            for n in sizes {
                let g = bench_graph(family, n, seed).map_err(usage)?;
                let dec = weak_decomposition_with_mode(&g, Mode::Local)?;
                wtr.serialize(BenchRow {
                    family: family_name(family),
                    n: g.node_count(),
                    edges: g.edge_count(),
                    colors: dec.colors,
                    rounds: dec.ledger.rounds(),
                    max_tree_radius: dec.clusters.iter().map(|c| c.tree.radius()).max().unwrap_or(0),
                    max_weak_diameter: max_weak_diameter(&g, &dec),
                })
                .context("writing csv row")?;
            }
            let bytes = wtr.into_inner().map_err(|e| anyhow!("flushing csv: {e}"))?;
            write_output(output.as_deref(), std::str::from_utf8(&bytes).expect("csv is utf-8"))
        }
    }
}

impl Model {
    fn resolve(&self, g: &Graph) -> Result<Mode, Failure> {
        match (self.mode, self.budget) {
            (ModelKind::Local, None) => Ok(Mode::Local),
            (ModelKind::Local, Some(_)) => Err(usage(anyhow!("--budget requires --mode congest"))),
            (ModelKind::Congest, None) => Ok(Mode::congest_default(g.node_count())),
            (ModelKind::Congest, Some(0)) => Err(usage(anyhow!("--budget must be positive"))),
            (ModelKind::Congest, Some(b)) => Ok(Mode::Congest { budget_bits: b }),
        }
    }
}

#[derive(Serialize)]
struct BenchRow {
    family: &'static str,
    n: usize,
    edges: usize,
    colors: usize,
    rounds: u64,
    max_tree_radius: u32,
    max_weak_diameter: u32,
}

fn family_name(f: BenchFamily) -> &'static str {
    match f {
        BenchFamily::Torus => "torus",
        BenchFamily::Random => "random",
        BenchFamily::Path => "path",
    }
}

/// Torus instances are two-dimensional with side `⌈√n⌉` (at least 3); random ones use
/// `p = min(1, 8/n)`.
fn bench_graph(family: BenchFamily, n: usize, seed: u64) -> netdecomp::Result<Graph> {
    match family {
        BenchFamily::Path => gen_path(n),
        BenchFamily::Torus => {
            let mut side = (n as f64).sqrt() as usize;
            while side * side < n {
                side += 1;
            }
            gen_torus(2, side.max(3))
        }
        BenchFamily::Random => gen_random(n, (8.0 / n.max(1) as f64).min(1.0), seed),
    }
}

fn verify(kind: VerifyKind, g: &Graph, doc: Value) -> Result<Report, Failure> {
    let n = g.node_count();
    let malformed = |e: serde_json::Error| usage(anyhow!("malformed output: {e}"));
    let report = match kind {
        VerifyKind::Weak => {
            let dec: WeakDecomposition = serde_json::from_value(doc).map_err(malformed)?;
            let bounds = match dec.kind {
                DecompositionKind::Weak | DecompositionKind::Power => WeakBounds::standard(g, dec.k),
                // Balls of one color are disjoint and each edge carries at most one tree.
                DecompositionKind::Alt => WeakBounds { congestion_bound: Some(1), ..WeakBounds::separation_only(1) },
            };
            verify_weak(g, &dec, bounds)
        }
        VerifyKind::Strong => {
            let dec: StrongDecomposition = serde_json::from_value(doc).map_err(malformed)?;
            verify_strong(g, &dec, 2 * ceil_log2(n), floor_log2(n) as usize + 1)
        }
        VerifyKind::Mis => {
            let members: Vec<usize> = field(doc, "members")?;
            check_nodes(&members, n)?;
            verify_mis(g, &members)
        }
        VerifyKind::Coloring => {
            let mut doc = doc;
            let lists: Option<Vec<Vec<u64>>> = match doc.get_mut("lists").map(Value::take) {
                None | Some(Value::Null) => None,
                Some(v) => Some(serde_json::from_value(v).map_err(malformed)?),
            };
            let colors: Vec<u64> = field(doc, "colors")?;
            if colors.len() != n || lists.as_ref().is_some_and(|l| l.len() != n) {
                return Err(usage(anyhow!("coloring does not match the graph's {n} nodes")));
            }
            verify_coloring(g, &colors, lists.as_deref())
        }
        VerifyKind::Ruling => {
            let members: Vec<usize> = field(doc, "members")?;
            check_nodes(&members, n)?;
            let all: Vec<usize> = (0..n).collect();
            verify_ruling(g, &members, &all, g.bit_length())
        }
    };
    Ok(report)
}

fn field<T: serde::de::DeserializeOwned>(mut doc: Value, name: &str) -> Result<T, Failure> {
    let v = doc.get_mut(name).map(Value::take).ok_or_else(|| usage(anyhow!("output has no \"{name}\" field")))?;
    serde_json::from_value(v).map_err(|e| usage(anyhow!("malformed \"{name}\": {e}")))
}

fn check_nodes(nodes: &[usize], n: usize) -> Result<(), Failure> {
    match nodes.iter().find(|&&v| v >= n) {
        Some(v) => Err(usage(anyhow!("node {v} is not in the graph"))),
        None => Ok(()),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialization cannot fail")
}

/// Writes `body` with the input graph embedded so the output can be verified on its own.
fn emit(path: Option<&Path>, g: &Graph, body: Value) -> Result<(), Failure> {
    let mut obj = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("graph".into(), to_value(&GraphFile::from(g)));
    write_output(path, &Value::Object(obj).to_string())
}

fn read_text(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(usage)
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading standard input").map_err(usage)?;
            Ok(s)
        }
    }
}

/// Accepts graph JSON, any output with an embedded graph, or a text edge list.
fn read_graph(path: Option<&Path>) -> Result<Graph, Failure> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let mut v: Value = serde_json::from_str(&text).context("malformed graph JSON").map_err(usage)?;
        if let Some(embedded) = v.get_mut("graph").map(Value::take) {
            v = embedded;
        }
        let file: GraphFile = serde_json::from_value(v).context("malformed graph JSON").map_err(usage)?;
        Graph::try_from(file).map_err(usage)
    } else {
        if text.trim().is_empty() {
            return Err(usage(anyhow!("empty graph input")));
        }
        Graph::from_edge_list_text(&text).map_err(usage)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
        }
        _ => {
            let mut out = io::stdout().lock();
            if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                if e.kind() != io::ErrorKind::BrokenPipe {
                    return Err(Failure::Runtime(anyhow!("writing standard output: {e}")));
                }
            }
        }
    }
    Ok(())
}
