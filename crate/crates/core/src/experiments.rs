//! The two indistinguishability experiments.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::construction::{NodePath, Tree};
use crate::error::{Error, Result};
use crate::graph::{Colour, PortNumberedGraph};
use crate::machine::{execute, local_outputs, Reception, ReceptionClass, StateMachine};
use crate::pi::{allowed_outputs, check_pi, solve_pi_mv};
use crate::view::{canonical_sv, CanonicalSv, ViewId};

/// Default node cap for full-tree experiments.
pub const DEFAULT_MAX_NODES: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRow {
    pub r: usize,
    pub msg_u: String,
    pub msg_w: String,
    pub equal: bool,
}

/// Last round of the initial all-equal run, and the first unequal round.
fn summarize(rows: &[RoundRow]) -> (Option<usize>, Option<usize>) {
    let first_difference = rows.iter().find(|row| !row.equal).map(|row| row.r);
    let equal_through = rows.iter().take_while(|row| row.equal).last().map(|row| row.r);
    (equal_through, first_difference)
}

fn view_label(m: &CanonicalSv, v: ViewId) -> String {
    format!("{:016x}", m.stable_hash(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdhocKind {
    ColourCountHash,
    DepthParity,
    DegreeEcho,
}

impl AdhocKind {
    pub const ALL: [AdhocKind; 3] = [AdhocKind::ColourCountHash, AdhocKind::DepthParity, AdhocKind::DegreeEcho];
}

/// Small hand-written SV machines used as extra witnesses.
#[derive(Clone, Copy, Debug)]
pub struct Adhoc {
    pub kind: AdhocKind,
    pub delta: usize,
}

fn mix(h: u64, x: u64) -> u64 {
    (h ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(29)
}

impl StateMachine for Adhoc {
    type State = u64;
    type Message = u64;

    fn delta(&self) -> usize {
        self.delta
    }

    fn reception_class(&self) -> ReceptionClass {
        ReceptionClass::Sv
    }

    fn init(&self, degree: usize, input: Option<Colour>) -> u64 {
        match self.kind {
            AdhocKind::ColourCountHash => input.map_or(0, |c| 1 << (c as u64)),
            AdhocKind::DepthParity => 0,
            AdhocKind::DegreeEcho => degree as u64,
        }
    }

    fn emit(&self, state: &u64, port: u32) -> Option<u64> {
        Some(match self.kind {
            AdhocKind::ColourCountHash => *state,
            AdhocKind::DepthParity => *state ^ u64::from(port & 1),
            AdhocKind::DegreeEcho => mix(*state, u64::from(port)),
        })
    }

    fn is_stopping(&self, _state: &u64) -> bool {
        false
    }

    fn transition(&self, state: &u64, received: &Reception<u64>) -> u64 {
        let values: Vec<u64> = received.distinct().map(|m| m.map_or(u64::MAX, |x| x)).collect();
        match self.kind {
            AdhocKind::ColourCountHash => values.iter().fold(mix(*state, values.len() as u64), |h, &x| mix(h, x)),
            AdhocKind::DepthParity => values.iter().fold(*state, |p, &x| p ^ (x & 1)) & 1,
            AdhocKind::DegreeEcho => values.iter().fold(*state, |h, &x| mix(h, x)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdhocRow {
    pub machine: AdhocKind,
    pub equal_through: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootMessagesReport {
    pub delta: usize,
    pub nodes: usize,
    /// Messages from `(1,0)` and `(2,1)` to the root, as view hash and port.
    pub rounds: Vec<RoundRow>,
    pub equal_through: Option<usize>,
    pub first_difference: Option<usize>,
    pub adhoc: Vec<AdhocRow>,
    pub conclusion: String,
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

fn named(graph: &PortNumberedGraph, path: &str) -> Result<usize> {
    graph.node_by_name(path).ok_or_else(|| Error::UnknownNode(path.to_string()))
}

fn slot(graph: &PortNumberedGraph, at: usize, from: usize) -> Result<usize> {
    graph
        .in_port(at, from)
        .map(|p| p.number() as usize)
        .ok_or_else(|| Error::NotAdjacent(graph.name(at).into(), graph.name(from).into()))
}

/// Runs the canonical machine on the collapsed `G_Δ` and compares what the
/// root hears from `(1,0)` and `(2,1)` in rounds `1..=2Δ-1`.
pub fn run_root_messages(delta: usize, max_nodes: usize, timed: bool) -> Result<RootMessagesReport> {
    if delta < 2 {
        return Err(Error::InvalidGraph(format!("the root-message experiment needs Δ ≥ 2, got {delta}")));
    }
    let start = Instant::now();
    let tree = Tree::g(delta as u32)?;
    let graph = tree.build_full_collapsed(max_nodes)?;
    let built = start.elapsed();
    let root = named(&graph, &NodePath::root().to_string())?;
    let u = named(&graph, "(1,0)")?;
    let w = named(&graph, "(2,1)")?;
    let (su, sw) = (slot(&graph, root, u)?, slot(&graph, root, w)?);
    let horizon = 2 * delta - 1;

    let machine = canonical_sv(delta);
    let trace = execute(&machine, &graph, None, horizon)?;
    let rounds: Vec<RoundRow> = (1..=horizon)
        .map(|r| {
            let mu = *trace.message(r, root, su).expect("canonical machine never sends ε");
            let mw = *trace.message(r, root, sw).expect("canonical machine never sends ε");
            RoundRow {
                r,
                msg_u: format!("{}@{}", view_label(&machine, mu.0), mu.1),
                msg_w: format!("{}@{}", view_label(&machine, mw.0), mw.1),
                equal: mu == mw,
            }
        })
        .collect();
    let (equal_through, first_difference) = summarize(&rounds);
    let canonical_done = start.elapsed();

    let mut adhoc = Vec::new();
    for kind in AdhocKind::ALL {
        let m = Adhoc { kind, delta };
        let t = execute(&m, &graph, None, horizon)?;
        let rows: Vec<RoundRow> = (1..=horizon)
            .map(|r| {
                let (a, b) = (t.message(r, root, su), t.message(r, root, sw));
                RoundRow { r, msg_u: format!("{a:?}"), msg_w: format!("{b:?}"), equal: a == b }
            })
            .collect();
        adhoc.push(AdhocRow { machine: kind, equal_through: summarize(&rows).0 });
    }

    let bound = 2 * delta - 2;
    let holds = equal_through.is_some_and(|e| e >= bound);
    let conclusion = if holds {
        format!(
            "the root receives identical messages from (1,0) and (2,1) in rounds 1..{bound} under the canonical \
             full-information machine, hence under every set-receiving machine; first difference at round {}",
            first_difference.map_or_else(|| "none".to_string(), |r| r.to_string())
        )
    } else {
        format!("messages differ before round {bound}: equal through {equal_through:?}")
    };
    let timings_ms = timed.then(|| {
        BTreeMap::from([
            ("build".to_string(), built.as_millis() as u64),
            ("canonical".to_string(), (canonical_done - built).as_millis() as u64),
            ("total".to_string(), start.elapsed().as_millis() as u64),
        ])
    });
    Ok(RootMessagesReport {
        delta,
        nodes: graph.node_count(),
        rounds,
        equal_through,
        first_difference,
        adhoc,
        conclusion,
        timings_ms,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PiSide {
    pub nodes: usize,
    /// Root answers every valid solution must pick from.
    pub forced: Vec<Colour>,
    pub mv_output: Colour,
    pub mv_rounds: usize,
    pub mv_valid: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ColouredRootsReport {
    pub d: usize,
    pub delta: usize,
    /// Root views in the black and white trees (`msg_u` black, `msg_w` white).
    pub rounds: Vec<RoundRow>,
    pub equal_through: Option<usize>,
    pub first_difference: Option<usize>,
    pub black: PiSide,
    pub white: PiSide,
    pub forced_disjoint: bool,
    pub conclusion: String,
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

fn pi_side(graph: &PortNumberedGraph, delta: usize) -> Result<PiSide> {
    let root = named(graph, &NodePath::root().to_string())?;
    let forced = allowed_outputs(graph, graph.inputs(), root).unwrap_or_default();
    let trace = execute(&solve_pi_mv(delta), graph, None, 4)?;
    let outputs: Vec<Colour> = local_outputs(&trace)?
        .iter()
        .map(|s| s.output().expect("halted solver has an output"))
        .collect();
    Ok(PiSide {
        nodes: graph.node_count(),
        forced,
        mv_output: outputs[root],
        mv_rounds: trace.stopped_round().unwrap_or(0),
        mv_valid: check_pi(graph, None, &outputs).ok,
    })
}

/// Compares root views of the collapsed `H_{B,d}` and `H_{W,d}` and solves
/// the majority problem on both with the one-round multiset machine.
pub fn run_coloured_roots(d: usize, max_nodes: usize, timed: bool) -> Result<ColouredRootsReport> {
    if d < 2 {
        return Err(Error::InvalidGraph(format!("the coloured-root experiment needs d ≥ 2, got {d}")));
    }
    let start = Instant::now();
    let delta = 2 * d - 1;
    let hb = Tree::hb(d as u32)?.build_full_collapsed(max_nodes)?;
    let hw = Tree::hw(d as u32)?.build_full_collapsed(max_nodes)?;
    let built = start.elapsed();
    let rb = named(&hb, &NodePath::root().to_string())?;
    let rw = named(&hw, &NodePath::root().to_string())?;

    let machine = canonical_sv(delta);
    let horizon = 2 * d;
    let tb = execute(&machine, &hb, None, horizon)?;
    let tw = execute(&machine, &hw, None, horizon)?;
    let rounds: Vec<RoundRow> = (0..=horizon)
        .map(|r| {
            let (a, b) = (*tb.state(r, rb), *tw.state(r, rw));
            RoundRow { r, msg_u: view_label(&machine, a), msg_w: view_label(&machine, b), equal: a == b }
        })
        .collect();
    let (equal_through, first_difference) = summarize(&rounds);
    let views_done = start.elapsed();

    let black = pi_side(&hb, delta)?;
    let white = pi_side(&hw, delta)?;
    let forced_disjoint = !black.forced.is_empty()
        && !white.forced.is_empty()
        && black.forced.iter().all(|c| !white.forced.contains(c));

    let bound = 2 * d - 2;
    let holds = equal_through.is_some_and(|e| e >= bound) && forced_disjoint;
    let conclusion = if holds {
        format!(
            "root views agree in rounds 0..{bound}, so every set-receiving machine halting by round {bound} gives both \
             roots the same answer, while valid answers are {:?} and {:?}; the multiset machine solves both in {} round(s)",
            black.forced, white.forced, black.mv_rounds.max(white.mv_rounds)
        )
    } else {
        format!("indistinguishability not established: equal through {equal_through:?}, forced answers disjoint: {forced_disjoint}")
    };
    let timings_ms = timed.then(|| {
        BTreeMap::from([
            ("build".to_string(), built.as_millis() as u64),
            ("canonical".to_string(), (views_done - built).as_millis() as u64),
            ("total".to_string(), start.elapsed().as_millis() as u64),
        ])
    });
    Ok(ColouredRootsReport {
        d,
        delta,
        rounds,
        equal_through,
        first_difference,
        black,
        white,
        forced_disjoint,
        conclusion,
        timings_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_messages_smallest() {
        let rep = run_root_messages(2, DEFAULT_MAX_NODES, false).unwrap();
        assert_eq!(rep.nodes, 9);
        assert_eq!(rep.equal_through, Some(2));
        assert_eq!(rep.first_difference, Some(3));
        for row in &rep.adhoc {
            assert!(row.equal_through.is_some_and(|e| e >= 2), "{row:?}");
        }
        assert!(rep.timings_ms.is_none());
    }

    #[test]
    fn coloured_roots_smallest() {
        let rep = run_coloured_roots(2, DEFAULT_MAX_NODES, false).unwrap();
        assert!(rep.equal_through.is_some_and(|e| e >= 2));
        assert_eq!(rep.black.forced, vec![Colour::B]);
        assert_eq!(rep.white.forced, vec![Colour::W]);
        assert_eq!(rep.black.mv_output, Colour::B);
        assert_eq!(rep.white.mv_output, Colour::W);
        assert_eq!(rep.black.mv_rounds, 1);
        assert!(rep.black.mv_valid && rep.white.mv_valid);
    }

    #[test]
    fn node_cap_is_a_resource_error() {
        assert!(run_root_messages(4, 100, false).unwrap_err().is_resource());
    }
}
