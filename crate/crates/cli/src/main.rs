use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use svmv_core::bisim::{Bisimulation, LabelledTree};
use svmv_core::construction::{Family, NodePath, Tree};
use svmv_core::experiments::{run_root_messages, run_coloured_roots, DEFAULT_MAX_NODES};
use svmv_core::graph::{GraphBuilder, PortNumberedGraph};
use svmv_core::io::{candidate_from_json, default_state_hash, graph_from_json, graph_to_dot, graph_to_json, trace_to_csv};
use svmv_core::machine::StateMachine;
use svmv_core::pi::{check_pi, solve_pi_mv};
use svmv_core::reproduce::{reproduce, rows_to_csv, Fault, ReproduceConfig};
use svmv_core::simulate::{mv_by_sv, neighbour_count, run_simulated};
use svmv_core::walks::{self, find_critical_psw, WalkPair};
use svmv_core::Error;

#[derive(Parser)]
#[command(name = "svmv", version, about = "Set- vs multiset-reception experiments on port-numbered graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Inner {
    PiSolver,
    NeighbourCount,
}

#[derive(Subcommand)]
enum Command {
    /// Export a ball of a lower-bound tree as graph JSON and DOT.
    Build {
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        radius: usize,
        /// Centre of the ball; defaults to the root.
        #[arg(long, default_value = "∅")]
        center: String,
        /// Apply the family's port collapse (requires a ball without truncation).
        #[arg(long)]
        collapsed: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: usize,
        /// Writes JSON here and DOT next to it with a .dot extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Shortest separating walk pair in the uncoloured tree.
    Psw {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = walks::DEFAULT_MAX_PAIRS)]
        max_pairs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Bisimilarity of two nodes of one tree at a given radius.
    Bisim {
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        radius: usize,
        /// Use the collapsed numbering instead of the generalised one.
        #[arg(long)]
        collapsed: bool,
        #[arg(long, default_value_t = svmv_core::bisim::DEFAULT_MAX_PAIRS)]
        max_pairs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Messages heard by the root of the collapsed uncoloured tree.
    #[command(alias = "theorem1")]
    RootMessages {
        #[arg(long)]
        delta: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: usize,
        /// Include wall-clock timings (output is then not reproducible).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Root views and forced answers in the coloured trees.
    #[command(alias = "theorem2")]
    ColouredRoots {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: usize,
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a multiset machine directly and through the set-reception simulation.
    Simulate {
        #[arg(long, value_enum)]
        inner: Inner,
        #[arg(long)]
        graph: PathBuf,
        /// Degree bound; defaults to the graph's maximum degree.
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long, default_value_t = 16)]
        max_rounds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// json: outputs and round counts; csv: the simulated trace.
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check a candidate solution of the neighbourhood-majority problem.
    CheckPi {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every acceptance criterion and emit a CSV table.
    Reproduce {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        d_max: u32,
        #[arg(long, default_value_t = 500)]
        cases: usize,
        #[arg(long, default_value_t = 100)]
        sim_instances: usize,
        #[arg(long, default_value_t = walks::DEFAULT_MAX_PAIRS)]
        max_pairs: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        corrupt_collapse: bool,
    },
}

enum Failure {
    Usage(String),
    Criterion(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn read(p: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))
}

fn tree(family: &str, d: u32) -> std::result::Result<Tree, Failure> {
    let family: Family = family.parse()?;
    Ok(Tree::new(family, d)?)
}

fn node(tree: &Tree, text: &str) -> std::result::Result<NodePath, Failure> {
    let v: NodePath = text.parse()?;
    tree.ensure_contains(&v)?;
    Ok(v)
}

/// Both walks with every neighbour of their nodes, walk edges highlighted.
fn walk_dot(d: u32, pair: &WalkPair) -> std::result::Result<String, Failure> {
    let t = Tree::g(d)?;
    let mut nodes: BTreeSet<NodePath> = pair.walk1.iter().chain(&pair.walk2).cloned().collect();
    for v in nodes.clone() {
        nodes.extend(t.neighbours(&v).into_iter().map(|inc| inc.node));
    }
    let mut b = GraphBuilder::new();
    for v in &nodes {
        b.add_node(v.to_string(), None)?;
    }
    for v in &nodes {
        if let Some(parent) = v.parent().filter(|p| nodes.contains(p)) {
            let (p, c) = (b.node_by_name(&parent.to_string()).unwrap(), b.node_by_name(&v.to_string()).unwrap());
            b.add_edge(p, c, t.pi(&parent, v)?, t.pi(v, &parent)?)?;
        }
    }
    let g = b.build()?;
    let idx = |v: &NodePath| g.node_by_name(&v.to_string()).unwrap();
    let mut hot = BTreeSet::new();
    for walk in [&pair.walk1, &pair.walk2] {
        for w in walk.windows(2) {
            hot.insert((idx(&w[0]), idx(&w[1])));
        }
    }
    Ok(graph_to_dot(&g, &hot))
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    family: &str,
    d: u32,
    radius: usize,
    center: &str,
    collapsed: bool,
    max_nodes: usize,
    out: Option<&Path>,
    format: Format,
) -> Outcome {
    let t = tree(family, d)?;
    let c = node(&t, center)?;
    let mut g = t.build_ball(&c, radius, max_nodes)?;
    if collapsed {
        if g.has_truncation() {
            return Err(Failure::Usage("--collapsed needs the whole tree inside the ball".into()));
        }
        g = t.collapse().collapse_graph(&g)?;
    }
    let summary = format!("nodes {} edges {}\n", g.node_count(), g.edge_count());
    match out {
        Some(p) => {
            emit(Some(p), &graph_to_json(&g))?;
            emit(Some(&p.with_extension("dot")), &graph_to_dot(&g, &BTreeSet::new()))?;
            print!("{summary}");
        }
        None => {
            let text = match format {
                Format::Dot => graph_to_dot(&g, &BTreeSet::new()),
                Format::Json => graph_to_json(&g),
                Format::Csv => return Err(Failure::Usage("build supports json and dot".into())),
            };
            emit(None, &text)?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_psw(d: u32, max_pairs: usize, out: Option<&Path>, format: Format) -> Outcome {
    let c = find_critical_psw(d, max_pairs)?;
    let text = match format {
        Format::Json => {
            let mut v = serde_json::to_value(&c.pair).expect("walk pairs serialize");
            let obj = v.as_object_mut().expect("object");
            obj.insert("k".into(), json!(c.k));
            obj.insert("visited_pairs".into(), json!(c.visited_pairs));
            pretty(&v)
        }
        Format::Dot => walk_dot(d, &c.pair)?,
        Format::Csv => return Err(Failure::Usage("psw supports json and dot".into())),
    };
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bisim(
    family: &str,
    d: u32,
    a: &str,
    b: &str,
    radius: usize,
    collapsed: bool,
    max_pairs: usize,
    out: Option<&Path>,
) -> Outcome {
    let t = tree(family, d)?;
    let (x, y) = (node(&t, a)?, node(&t, b)?);
    let lt = if collapsed { LabelledTree::collapsed(t) } else { LabelledTree::generalised(t) };
    let mut bis = Bisimulation::new(&lt, &lt).with_max_pairs(max_pairs);
    let similar = bis.bisimilar(&x, &y, radius)?;
    let failing = if similar { None } else { bis.max_radius(&x, &y, radius)?.failing_radius() };
    emit(out, &pretty(&json!({ "similar": similar, "failing_radius": failing })))
}

fn output_label<S: std::fmt::Debug>(inner: Inner, s: &S) -> String {
    let text = format!("{s:?}");
    match inner {
        // Done(B) -> B
        Inner::PiSolver => text.trim_start_matches("Done(").trim_end_matches(')').to_string(),
        Inner::NeighbourCount => text,
    }
}

fn simulate_with<A: StateMachine>(
    machine: A,
    which: Inner,
    graph: &PortNumberedGraph,
    max_rounds: usize,
    format: Format,
) -> std::result::Result<(String, bool), Failure> {
    let sim = mv_by_sv(machine)?;
    let run = match run_simulated(&sim, graph, None, max_rounds) {
        Err(e @ Error::SignatureCollision { .. }) => return Err(Failure::Criterion(e.to_string())),
        other => other?,
    };
    let agree = run.outputs == run.direct;
    let text = match format {
        Format::Csv => trace_to_csv(graph, &run.trace, default_state_hash),
        Format::Json => {
            let outputs: serde_json::Map<String, Value> = graph
                .nodes()
                .map(|v| {
                    (
                        graph.name(v).to_string(),
                        json!({ "simulated": output_label(which, &run.outputs[v]), "direct": output_label(which, &run.direct[v]) }),
                    )
                })
                .collect();
            pretty(&json!({
                "delta": sim.delta(),
                "direct_rounds": run.direct_rounds,
                "simulated_rounds": run.simulated_rounds,
                "overhead": run.overhead,
                "agree": agree,
                "outputs": outputs,
            }))
        }
        Format::Dot => return Err(Failure::Usage("simulate supports json and csv".into())),
    };
    Ok((text, agree))
}

fn cmd_simulate(
    inner: Inner,
    graph: &Path,
    delta: Option<usize>,
    max_rounds: usize,
    out: Option<&Path>,
    format: Format,
) -> Outcome {
    let g = graph_from_json(&read(graph)?)?;
    let delta = delta.unwrap_or_else(|| g.max_degree()).max(1);
    let (text, agree) = match inner {
        Inner::PiSolver => simulate_with(solve_pi_mv(delta), inner, &g, max_rounds, format)?,
        Inner::NeighbourCount => simulate_with(neighbour_count(delta), inner, &g, max_rounds, format)?,
    };
    emit(out, &text)?;
    if agree {
        Ok(())
    } else {
        Err(Failure::Criterion("simulated outputs differ from the direct run".into()))
    }
}

fn cmd_check_pi(graph: &Path, candidate: &Path, out: Option<&Path>) -> Outcome {
    let g = graph_from_json(&read(graph)?)?;
    let cand = candidate_from_json(&g, &read(candidate)?)?;
    let check = check_pi(&g, None, &cand);
    emit(out, &pretty(&check))?;
    if check.ok {
        Ok(())
    } else {
        Err(Failure::Criterion("candidate is not a valid solution".into()))
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Build { family, d, radius, center, collapsed, max_nodes, out, format } => {
            cmd_build(&family, d, radius, &center, collapsed, max_nodes, out.as_deref(), format)
        }
        Command::Psw { d, max_pairs, out, format } => cmd_psw(d, max_pairs, out.as_deref(), format),
        Command::Bisim { family, d, a, b, radius, collapsed, max_pairs, out } => {
            cmd_bisim(&family, d, &a, &b, radius, collapsed, max_pairs, out.as_deref())
        }
        Command::RootMessages { delta, max_nodes, timings, out } => {
            emit(out.as_deref(), &pretty(&run_root_messages(delta, max_nodes, timings)?))
        }
        Command::ColouredRoots { d, max_nodes, timings, out } => {
            emit(out.as_deref(), &pretty(&run_coloured_roots(d, max_nodes, timings)?))
        }
        Command::Simulate { inner, graph, delta, max_rounds, out, format } => {
            cmd_simulate(inner, &graph, delta, max_rounds, out.as_deref(), format)
        }
        Command::CheckPi { graph, candidate, out } => cmd_check_pi(&graph, &candidate, out.as_deref()),
        Command::Reproduce { seed, d_max, cases, sim_instances, max_pairs, max_nodes, out, corrupt_collapse } => {
            if !(2..=5).contains(&d_max) {
                return Err(Failure::Usage(format!("--d-max must be in 2..=5, got {d_max}")));
            }
            if cases == 0 || max_pairs == 0 || max_nodes == 0 {
                return Err(Failure::Usage("caps and case counts must be positive".into()));
            }
            let cfg = ReproduceConfig {
                d_max,
                seed,
                cases,
                sim_instances,
                max_pairs,
                max_nodes,
                fault: corrupt_collapse.then_some(Fault::CorruptCollapse),
            };
            let rows = reproduce(&cfg)?;
            let mut csv = rows_to_csv(&rows);
            let header_end = csv.find('\n').expect("header") + 1;
            let config = format!("config,seed={seed} d-max={d_max} cases={cases},seed={seed} d-max={d_max} cases={cases},true\n");
            csv.insert_str(header_end, &config);
            emit(out.as_deref(), &csv)?;
            let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.criterion.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Criterion(format!("failing rows: {}", failed.join("; "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criterion(m)) => {
            eprintln!("svmv: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("svmv: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(m)) => {
            eprintln!("svmv: {m}");
            ExitCode::from(3)
        }
    }
}
