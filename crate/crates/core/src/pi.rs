//! The colour-majority problem: every node must output a colour of maximum
//! multiplicity among its neighbours' inputs.

use serde::Serialize;

use crate::graph::{Colour, PortNumberedGraph};
use crate::machine::{Reception, ReceptionClass, StateMachine};

/// Colours of maximum multiplicity among `counts` (indexed like [`Colour::ALL`]).
fn argmax(counts: [usize; 3]) -> Vec<Colour> {
    let best = counts.iter().copied().max().unwrap_or(0);
    Colour::ALL.into_iter().zip(counts).filter(|&(_, n)| n == best).map(|(c, _)| c).collect()
}

fn colour_index(c: Colour) -> usize {
    Colour::ALL.iter().position(|&x| x == c).expect("colour listed")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PiState {
    Start(Option<Colour>),
    Done(Colour),
}

impl PiState {
    pub fn output(&self) -> Option<Colour> {
        match self {
            PiState::Done(c) => Some(*c),
            PiState::Start(_) => None,
        }
    }
}

/// One-round MV solver: broadcast the input, then output the most frequent
/// received colour, ties broken by B < W < G.
///
/// A node that hears no colour outputs its own input, or G without one.
#[derive(Clone, Copy, Debug)]
pub struct PiSolver {
    delta: usize,
}

pub fn solve_pi_mv(delta: usize) -> PiSolver {
    PiSolver { delta }
}

impl StateMachine for PiSolver {
    type State = PiState;
    type Message = Colour;

    fn delta(&self) -> usize {
        self.delta
    }

    fn reception_class(&self) -> ReceptionClass {
        ReceptionClass::Mv
    }

    fn init(&self, _degree: usize, input: Option<Colour>) -> PiState {
        PiState::Start(input)
    }

    fn emit(&self, state: &PiState, _port: u32) -> Option<Colour> {
        match state {
            PiState::Start(c) => *c,
            PiState::Done(_) => None,
        }
    }

    fn is_stopping(&self, state: &PiState) -> bool {
        matches!(state, PiState::Done(_))
    }

    fn transition(&self, state: &PiState, received: &Reception<Colour>) -> PiState {
        let PiState::Start(own) = state else { return *state };
        let mut counts = [0usize; 3];
        match received {
            Reception::Multiset(m) => {
                for (msg, n) in m {
                    if let Some(c) = msg {
                        counts[colour_index(*c)] += n;
                    }
                }
            }
            Reception::Set(s) => {
                for c in s.iter().flatten() {
                    counts[colour_index(*c)] += 1;
                }
            }
        }
        if counts.iter().all(|&n| n == 0) {
            return PiState::Done(own.unwrap_or(Colour::G));
        }
        PiState::Done(argmax(counts)[0])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiViolation {
    pub node: String,
    pub value: Colour,
    pub allowed: Vec<Colour>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiCheck {
    pub ok: bool,
    pub violation: Option<PiViolation>,
}

/// Colours a valid solution may assign to `v`; `None` when unconstrained.
pub fn allowed_outputs(graph: &PortNumberedGraph, inputs: &[Option<Colour>], v: usize) -> Option<Vec<Colour>> {
    let mut counts = [0usize; 3];
    for inc in graph.incidences(v) {
        if let Some(c) = inputs[inc.node] {
            counts[colour_index(c)] += 1;
        }
    }
    if counts.iter().all(|&n| n == 0) {
        None
    } else {
        Some(argmax(counts))
    }
}

/// Checks a candidate solution against the graph's colouring (or `inputs`).
///
/// Nodes without coloured neighbours accept any value.
pub fn check_pi(graph: &PortNumberedGraph, inputs: Option<&[Option<Colour>]>, candidate: &[Colour]) -> PiCheck {
    let inputs = inputs.unwrap_or_else(|| graph.inputs());
    for v in graph.nodes() {
        let Some(allowed) = allowed_outputs(graph, inputs, v) else { continue };
        let value = candidate[v];
        if !allowed.contains(&value) {
            return PiCheck {
                ok: false,
                violation: Some(PiViolation { node: graph.name(v).to_string(), value, allowed }),
            };
        }
    }
    PiCheck { ok: true, violation: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, PortLabel};
    use crate::machine::{execute, local_outputs};

    fn star(leaves: &[Colour]) -> PortNumberedGraph {
        let mut b = GraphBuilder::new();
        let c = b.add_node("c", Some(Colour::G)).unwrap();
        for (i, &col) in leaves.iter().enumerate() {
            let l = b.add_node(format!("l{i}"), Some(col)).unwrap();
            b.add_edge(c, l, PortLabel::Plain(i as u32 + 1), PortLabel::Plain(1)).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn tie_breaks_to_black_and_checker_accepts_either() {
        let mut leaves = vec![Colour::B; 4];
        leaves.extend([Colour::W; 4]);
        leaves.extend([Colour::G; 2]);
        let g = star(&leaves);
        let t = execute(&solve_pi_mv(10), &g, None, 5).unwrap();
        assert_eq!(t.stopped_round(), Some(1));
        let out: Vec<Colour> = local_outputs(&t).unwrap().iter().map(|s| s.output().unwrap()).collect();
        assert_eq!(out[0], Colour::B);
        assert!(check_pi(&g, None, &out).ok);
        let mut alt = out.clone();
        alt[0] = Colour::W;
        assert!(check_pi(&g, None, &alt).ok);
        alt[0] = Colour::G;
        let bad = check_pi(&g, None, &alt);
        assert!(!bad.ok);
        assert_eq!(bad.violation.unwrap().allowed, vec![Colour::B, Colour::W]);
    }

    #[test]
    fn single_edge_forces_the_other_colour() {
        let mut b = GraphBuilder::new();
        let x = b.add_node("x", Some(Colour::B)).unwrap();
        let y = b.add_node("y", Some(Colour::W)).unwrap();
        b.add_edge(x, y, PortLabel::Plain(1), PortLabel::Plain(1)).unwrap();
        let g = b.build().unwrap();
        assert!(check_pi(&g, None, &[Colour::W, Colour::B]).ok);
        assert!(!check_pi(&g, None, &[Colour::B, Colour::B]).ok);
    }

    #[test]
    fn isolated_nodes_are_unconstrained() {
        let mut b = GraphBuilder::new();
        b.add_node("x", Some(Colour::B)).unwrap();
        let g = b.build().unwrap();
        for c in Colour::ALL {
            assert!(check_pi(&g, None, &[c]).ok);
        }
        let t = execute(&solve_pi_mv(1), &g, None, 3).unwrap();
        assert_eq!(local_outputs(&t).unwrap()[0], PiState::Done(Colour::B));
    }
}
