//! The reproduction pipeline: one row per acceptance criterion.

use std::fmt::Write as _;

use serde::Serialize;

use crate::audit::{self, SuiteResult};
use crate::bisim::{BisimRadius, Bisimulation, LabelledTree};
use crate::construction::{PortCollapse, Tree};
use crate::error::{Error, Result};
use crate::experiments::{run_root_messages, run_coloured_roots};
use crate::graph::{PortLabel, PortNumberedGraph};
use crate::pi::solve_pi_mv;
use crate::random::{random_instance, seeded, SeededRng};
use crate::simulate::{mv_by_sv, neighbour_count, overhead, run_simulated};
use crate::machine::StateMachine;
use crate::walks::{self, find_critical_psw, verify_psw, Reading, WalkStatus};

/// Deliberate defects for exercising the failure paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Sends generalised label 2 to port 1 in every collapse.
    CorruptCollapse,
}

#[derive(Clone, Debug)]
pub struct ReproduceConfig {
    /// Largest construction parameter for the scaling rows (2..=5).
    pub d_max: u32,
    pub seed: u64,
    /// Cases per property suite.
    pub cases: usize,
    /// Random instances for the simulation differential.
    pub sim_instances: usize,
    pub max_pairs: usize,
    pub max_nodes: usize,
    pub fault: Option<Fault>,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig {
            d_max: 4,
            seed: 1,
            cases: 500,
            sim_instances: 100,
            max_pairs: walks::DEFAULT_MAX_PAIRS,
            max_nodes: 200_000,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Row {
    pub criterion: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

fn row(criterion: impl Into<String>, expected: impl Into<String>, observed: impl Into<String>, pass: bool) -> Row {
    Row { criterion: criterion.into(), expected: expected.into(), observed: observed.into(), pass }
}

fn suite_row(id: &str, s: &SuiteResult, wanted: usize) -> Row {
    let observed = match &s.failure {
        None => format!("{}/{} passed ({} non-vacuous)", s.passed, s.cases, s.nonvacuous),
        Some(f) => format!("{}/{} passed; failure: {f}", s.passed, s.cases),
    };
    row(format!("{id} {}", s.name), format!("{wanted}/{wanted} passed"), observed, s.ok() && s.cases == wanted)
}

fn collapse_for(tree: &Tree, fault: Option<Fault>) -> PortCollapse {
    let c = tree.collapse();
    match (fault, tree.family().is_coloured()) {
        (Some(Fault::CorruptCollapse), false) => c.with_override(PortLabel::Plain(2), 1),
        (Some(Fault::CorruptCollapse), true) => c.with_override(PortLabel::Tagged(2, crate::graph::Colour::G), 1),
        (None, _) => c,
    }
}

fn collapsed_graph(tree: &Tree, cfg: &ReproduceConfig) -> Result<PortNumberedGraph> {
    let full = tree.build_full(cfg.max_nodes)?;
    collapse_for(tree, cfg.fault).collapse_graph(&full)
}

/// Runs every criterion and returns the rows in order.
///
/// Resource errors inside a criterion become failing rows; other errors abort.
pub fn reproduce(cfg: &ReproduceConfig) -> Result<Vec<Row>> {
    let d_max = cfg.d_max.clamp(2, 5);
    let mut rows = Vec::new();
    let mut rng = seeded(cfg.seed);

    let soft = |rows: &mut Vec<Row>, id: String, expected: String, r: Result<Row>| -> Result<()> {
        match r {
            Ok(x) => rows.push(x),
            Err(e) if e.is_resource() => rows.push(row(id, expected, format!("resource cap: {e}"), false)),
            Err(e) => return Err(e),
        }
        Ok(())
    };

    // 0: collapsed numberings are proper
    for tree in [Tree::g(2)?, Tree::g(3)?, Tree::g(4)?, Tree::hb(2)?, Tree::hw(2)?, Tree::hb(3)?, Tree::hw(3)?] {
        if tree.d() > d_max {
            continue;
        }
        let id = format!("0 collapse proper {}_{}", tree.family(), tree.d());
        let r = collapsed_graph(&tree, cfg).map(|g| match g.properness_violation() {
            None => row(&id, "proper", "proper", true),
            Some((v, why)) => row(&id, "proper", format!("{}: {why}", g.name(v)), false),
        });
        let r = match r {
            Err(Error::InvalidGraph(m)) => Ok(row(&id, "proper", format!("invalid: {m}"), false)),
            other => other,
        };
        soft(&mut rows, id, "proper".into(), r)?;
    }

    // 1: critical separating walk length
    for d in 2..=d_max {
        let id = format!("1 critical walk length d={d}");
        let expected = (2 * d - 3).to_string();
        let r = find_critical_psw(d, cfg.max_pairs).map(|c| {
            let audit = verify_psw(&c.pair, d, Reading::Symmetric);
            let pass = c.k == 2 * d as usize - 3 && audit == WalkStatus::Psw && c.k % 2 == 1;
            row(&id, &expected, format!("{} (witness {audit:?}, {} pairs)", c.k, c.visited_pairs), pass)
        });
        soft(&mut rows, id, expected, r)?;
    }

    // 2: the published witness
    {
        let labels: Vec<PortLabel> = [2, 2, 3, 3, 4, 4, 5].into_iter().map(PortLabel::Plain).collect();
        let status = match walks::walk_pair_from_labels(5, &labels)? {
            Some(pair) => format!("{:?}", verify_psw(&pair, 5, Reading::Strict)),
            None => "labels cannot be followed".to_string(),
        };
        rows.push(row("2 witness 2,2,3,3,4,4,5 in G_5", "Psw", &status, status == "Psw"));
    }

    // 3: bisimilarity radius of the root's first two neighbours
    for d in 2..=d_max.min(4) {
        let id = format!("3 bisim radius d={d}");
        let expected = format!("Exact({})", 2 * d - 3);
        let r = (|| {
            let t = LabelledTree::generalised(Tree::g(d)?);
            let (u, w) = walks::start_nodes();
            let got = Bisimulation::new(&t, &t).with_max_pairs(cfg.max_pairs).max_radius(&u, &w, 2 * d as usize)?;
            Ok(row(&id, &expected, format!("{got:?}"), got == BisimRadius::Exact(2 * d as usize - 3)))
        })();
        soft(&mut rows, id, expected, r)?;
    }

    // 4: root messages in the uncoloured tree
    for delta in 2..=(d_max as usize).min(4) {
        let id = format!("4 root messages G_{delta}");
        let expected = format!("equal through {}", 2 * delta - 2);
        let r = run_root_messages(delta, cfg.max_nodes, false).map(|rep| {
            let pass = rep.equal_through.is_some_and(|e| e >= 2 * delta - 2)
                && rep.adhoc.iter().all(|a| a.equal_through.is_some_and(|e| e >= 2 * delta - 2));
            let observed = format!(
                "equal through {}; first difference {}",
                rep.equal_through.map_or("-".into(), |e| e.to_string()),
                rep.first_difference.map_or("none".into(), |e| e.to_string())
            );
            row(&id, &expected, observed, pass)
        });
        soft(&mut rows, id, expected, r)?;
    }

    // 5: coloured roots: equal views, forced answers
    for d in 2..=(d_max as usize).min(3) {
        let id = format!("5 coloured roots HB_{d}/HW_{d}");
        let expected = format!("views equal through {}; forced [B] vs [W]; MV 1 round", 2 * d - 2);
        let r = run_coloured_roots(d, cfg.max_nodes, false).map(|rep| {
            let pass = rep.equal_through.is_some_and(|e| e >= 2 * d - 2)
                && rep.black.forced == [crate::graph::Colour::B]
                && rep.white.forced == [crate::graph::Colour::W]
                && rep.black.mv_rounds == 1
                && rep.white.mv_rounds == 1
                && rep.black.mv_valid
                && rep.white.mv_valid;
            let observed = format!(
                "views equal through {}; forced {:?} vs {:?}; MV {}/{} round(s)",
                rep.equal_through.map_or("-".into(), |e| e.to_string()),
                rep.black.forced,
                rep.white.forced,
                rep.black.mv_rounds,
                rep.white.mv_rounds
            );
            row(&id, &expected, observed, pass)
        });
        soft(&mut rows, id, expected, r)?;
    }

    // 6: simulation differential
    rows.push(simulation_row(&mut rng, cfg)?);

    // 7: property suites
    let cases = cfg.cases;
    rows.push(suite_row("7", &audit::degree_and_nesting(&mut rng, cases), cases));
    rows.push(suite_row("7", &audit::label_uniqueness(&mut rng, cases), cases));
    rows.push(suite_row("7", &audit::back_label_coverage(&mut rng, cases), cases));
    rows.push(suite_row("7", &audit::bisim_laws(&mut rng, cases)?, cases));
    rows.push(suite_row("7", &audit::collapse_preservation(&mut rng, cases)?, cases));
    rows.push(suite_row("7", &audit::executor_agreement(&mut rng, 50)?, 50));
    rows.push(suite_row("7", &audit::h_mapping(&mut rng, cases)?, cases));
    for d in 2..=3 {
        let s = audit::colour_drop_isomorphism(d)?;
        rows.push(suite_row(&format!("7 d={d}"), &s, 2));
    }

    // 8: scale limits
    {
        let g6 = Tree::g(6)?;
        let h6 = Tree::hb(6)?;
        let refused = g6.build_full(cfg.max_nodes).is_err_and(|e| e.is_resource());
        let observed = format!(
            "G_6 has {} nodes, H_B,6 has {} nodes; full build under cap {} refused: {refused}; criteria 1-7 substitute",
            g6.node_count(),
            h6.node_count(),
            cfg.max_nodes
        );
        rows.push(row("8 full scale (d >= 6) out of reach", "documented and refused", observed, refused));
    }
    Ok(rows)
}

fn simulation_row(rng: &mut SeededRng, cfg: &ReproduceConfig) -> Result<Row> {
    let expected = format!("{} random + 2 H instances, 2 inner machines, outputs equal, overhead 2Δ-2", cfg.sim_instances);
    let mut runs = 0usize;
    let mut failure: Option<String> = None;

    fn check<A: StateMachine>(
        inner: A,
        graph: &PortNumberedGraph,
        label: &str,
    ) -> Result<Option<String>> {
        let delta = inner.delta();
        let sim = mv_by_sv(inner)?;
        let run = match run_simulated(&sim, graph, None, 8) {
            Ok(run) => run,
            Err(e @ Error::SignatureCollision { .. }) => return Ok(Some(format!("{label}: {e}"))),
            Err(e) => return Err(e),
        };
        if run.outputs != run.direct {
            let v = run.outputs.iter().zip(&run.direct).position(|(a, b)| a != b).unwrap_or(0);
            return Ok(Some(format!("{label}: output differs at {}", graph.name(v))));
        }
        if run.overhead != overhead(delta) {
            return Ok(Some(format!("{label}: overhead {} instead of {}", run.overhead, overhead(delta))));
        }
        Ok(None)
    }

    let mut instances: Vec<(String, PortNumberedGraph, usize)> = Vec::new();
    for i in 0..cfg.sim_instances {
        let inst = random_instance(rng, 40, 5)?;
        instances.push((format!("random #{i}"), inst.graph, inst.delta));
    }
    for tree in [Tree::hb(2)?, Tree::hw(2)?] {
        instances.push((format!("{}_2", tree.family()), tree.build_full_collapsed(cfg.max_nodes)?, tree.max_degree()));
    }
    for (label, graph, delta) in &instances {
        for result in [check(solve_pi_mv(*delta), graph, label)?, check(neighbour_count(*delta), graph, label)?] {
            runs += 1;
            if failure.is_none() {
                failure = result;
            }
        }
    }
    let observed = match &failure {
        None => format!("{runs} runs agree; overhead exact; no signature collisions"),
        Some(f) => f.clone(),
    };
    Ok(row("6 simulation differential", expected, observed, failure.is_none()))
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let quote = |s: &str| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut out = String::from("criterion,expected,observed,pass\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", quote(&r.criterion), quote(&r.expected), quote(&r.observed), r.pass);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ReproduceConfig {
        ReproduceConfig { d_max: 2, cases: 10, sim_instances: 3, ..ReproduceConfig::default() }
    }

    #[test]
    fn small_run_passes() {
        let rows = reproduce(&small()).unwrap();
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
        assert!(rows.iter().any(|r| r.criterion.starts_with('8')));
    }

    #[test]
    fn corrupted_collapse_fails_properness() {
        let cfg = ReproduceConfig { fault: Some(Fault::CorruptCollapse), ..small() };
        let rows = reproduce(&cfg).unwrap();
        let bad: Vec<_> = rows.iter().filter(|r| r.criterion.starts_with("0 ")).collect();
        assert!(!bad.is_empty() && bad.iter().all(|r| !r.pass), "{bad:?}");
    }

    #[test]
    fn csv_quotes_commas() {
        let csv = rows_to_csv(&[row("a", "1,2", "x\"y", true)]);
        assert_eq!(csv, "criterion,expected,observed,pass\na,\"1,2\",\"x\"\"y\",true\n");
    }
}
