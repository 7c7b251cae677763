//! Simulating a multiset-receiving machine with a set-receiving one.
//!
//! Phase 1 spends 2Δ-2 rounds gathering full-information views. Afterwards a
//! node's signature towards a neighbour is its view paired with the out-port
//! towards that neighbour. In phase 2 every inner message travels with the
//! sender's signature, so distinct neighbours produce distinct set elements
//! and multiplicities can be read off by counting.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{Colour, PortNumberedGraph};
use crate::machine::{execute, local_outputs, ExecutionTrace, Reception, ReceptionClass, StateMachine};
use crate::view::{CanonicalSv, ViewId};

/// Number of extra rounds the simulation spends before the inner machine starts.
pub fn overhead(delta: usize) -> usize {
    (2 * delta).saturating_sub(2)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SimState<S> {
    /// Phase 1: the view gathered so far and the untouched inner start state.
    Gather { view: ViewId, inner: S },
    /// Phase 2: the final view (the signature base) and the inner state.
    Run { view: ViewId, inner: S },
}

impl<S> SimState<S> {
    pub fn inner(&self) -> &S {
        match self {
            SimState::Gather { inner, .. } | SimState::Run { inner, .. } => inner,
        }
    }

    pub fn view(&self) -> ViewId {
        match self {
            SimState::Gather { view, .. } | SimState::Run { view, .. } => *view,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimMessage<M> {
    View(ViewId, u32),
    /// Inner message (ε allowed) tagged with the sender's signature.
    Inner(Option<M>, ViewId, u32),
}

/// SV machine simulating the MV machine `inner`.
#[derive(Debug)]
pub struct MvBySv<A> {
    inner: A,
    views: CanonicalSv,
}

pub fn mv_by_sv<A: StateMachine>(inner: A) -> Result<MvBySv<A>> {
    if inner.reception_class() != ReceptionClass::Mv {
        return Err(Error::InvalidGraph("mv_by_sv needs a multiset-receiving inner machine".into()));
    }
    let views = CanonicalSv::new(inner.delta());
    Ok(MvBySv { inner, views })
}

impl<A: StateMachine> MvBySv<A> {
    pub fn inner(&self) -> &A {
        &self.inner
    }

    pub fn views(&self) -> &CanonicalSv {
        &self.views
    }

    fn phase_one(&self) -> usize {
        overhead(self.inner.delta())
    }
}

impl<A: StateMachine> StateMachine for MvBySv<A> {
    type State = SimState<A::State>;
    type Message = SimMessage<A::Message>;

    fn delta(&self) -> usize {
        self.inner.delta()
    }

    fn reception_class(&self) -> ReceptionClass {
        ReceptionClass::Sv
    }

    fn accepts_input(&self, input: Option<Colour>) -> bool {
        self.inner.accepts_input(input)
    }

    fn init(&self, degree: usize, input: Option<Colour>) -> Self::State {
        let view = self.views.leaf(degree, input);
        let inner = self.inner.init(degree, input);
        if self.phase_one() == 0 {
            SimState::Run { view, inner }
        } else {
            SimState::Gather { view, inner }
        }
    }

    fn emit(&self, state: &Self::State, port: u32) -> Option<Self::Message> {
        match state {
            SimState::Gather { view, .. } => Some(SimMessage::View(*view, port)),
            SimState::Run { view, inner } => {
                if self.inner.is_stopping(inner) {
                    None
                } else {
                    Some(SimMessage::Inner(self.inner.emit(inner, port), *view, port))
                }
            }
        }
    }

    fn is_stopping(&self, state: &Self::State) -> bool {
        matches!(state, SimState::Run { inner, .. } if self.inner.is_stopping(inner))
    }

    fn transition(&self, state: &Self::State, received: &Reception<Self::Message>) -> Self::State {
        match state {
            SimState::Gather { view, inner } => {
                let heard: Vec<Option<(ViewId, u32)>> = received
                    .distinct()
                    .map(|m| match m {
                        Some(SimMessage::View(v, p)) => Some((*v, *p)),
                        _ => None,
                    })
                    .collect();
                let next = self.views.extend(*view, &heard);
                if self.views.view(next).round == self.phase_one() {
                    SimState::Run { view: next, inner: inner.clone() }
                } else {
                    SimState::Gather { view: next, inner: inner.clone() }
                }
            }
            SimState::Run { view, inner } => {
                if self.inner.is_stopping(inner) {
                    return state.clone();
                }
                let mut counts: BTreeMap<Option<A::Message>, usize> = BTreeMap::new();
                let mut tagged = 0;
                for m in received.distinct() {
                    if let Some(SimMessage::Inner(msg, _, _)) = m {
                        *counts.entry(msg.clone()).or_insert(0) += 1;
                        tagged += 1;
                    }
                }
                let silent = self.inner.delta().saturating_sub(tagged);
                if silent > 0 {
                    *counts.entry(None).or_insert(0) += silent;
                }
                let next = self.inner.transition(inner, &Reception::Multiset(counts));
                SimState::Run { view: *view, inner: next }
            }
        }
    }
}

/// Outcome of a simulated run next to the direct one.
#[derive(Debug)]
pub struct SimulationRun<S, M> {
    pub trace: ExecutionTrace<SimState<S>, SimMessage<M>>,
    /// Inner states at the halting round.
    pub outputs: Vec<S>,
    /// Outputs of the inner machine run directly.
    pub direct: Vec<S>,
    pub direct_rounds: usize,
    pub simulated_rounds: usize,
    /// Halting round of the simulation minus that of the direct run.
    pub overhead: usize,
}

/// Fails when two neighbours of some node carry the same signature.
pub fn check_signatures<S>(
    graph: &PortNumberedGraph,
    trace: &ExecutionTrace<SimState<S>, impl Sized>,
    rounds: usize,
) -> Result<()> {
    if trace.rounds() < rounds {
        return Ok(());
    }
    let states = trace.states_at(rounds);
    for v in graph.nodes() {
        let mut seen = HashSet::new();
        for inc in graph.incidences(v) {
            if !seen.insert((states[inc.node].view(), inc.back_port)) {
                return Err(Error::SignatureCollision { node: graph.name(v).to_string(), rounds });
            }
        }
    }
    Ok(())
}

/// Runs `machine` directly and through [`mv_by_sv`], checking signatures.
///
/// Both runs get `max_inner_rounds` rounds beyond the simulation's phase 1.
pub fn run_simulated<A: StateMachine>(
    machine: &MvBySv<A>,
    graph: &PortNumberedGraph,
    inputs: Option<&[Option<Colour>]>,
    max_inner_rounds: usize,
) -> Result<SimulationRun<A::State, A::Message>> {
    let delta = machine.delta();
    let extra = overhead(delta);
    let trace = execute(machine, graph, inputs, max_inner_rounds + extra)?;
    check_signatures(graph, &trace, extra)?;
    let outputs: Vec<A::State> = local_outputs(&trace)?.into_iter().map(|s| s.inner().clone()).collect();
    let direct = execute(machine.inner(), graph, inputs, max_inner_rounds)?;
    let direct_stop = direct.stopped_round().ok_or(Error::DidNotHalt(max_inner_rounds))?;
    let sim_stop = trace.stopped_round().expect("local_outputs succeeded");
    Ok(SimulationRun {
        direct: local_outputs(&direct)?,
        trace,
        outputs,
        overhead: sim_stop.saturating_sub(direct_stop),
        direct_rounds: direct_stop,
        simulated_rounds: sim_stop,
    })
}

/// MV machine whose output depends on exact multiplicities: each node counts
/// its black neighbours, then adds up its neighbours' counts.
#[derive(Clone, Copy, Debug)]
pub struct NeighbourCount {
    delta: usize,
}

pub fn neighbour_count(delta: usize) -> NeighbourCount {
    NeighbourCount { delta }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CountState {
    Start(Option<Colour>),
    Counted(usize),
    /// (own black count, parity of the sum of neighbours' counts)
    Done(usize, bool),
}

impl StateMachine for NeighbourCount {
    type State = CountState;
    type Message = usize;

    fn delta(&self) -> usize {
        self.delta
    }

    fn reception_class(&self) -> ReceptionClass {
        ReceptionClass::Mv
    }

    fn init(&self, _degree: usize, input: Option<Colour>) -> CountState {
        CountState::Start(input)
    }

    fn emit(&self, state: &CountState, _port: u32) -> Option<usize> {
        match state {
            CountState::Start(c) => Some(usize::from(*c == Some(Colour::B))),
            CountState::Counted(n) => Some(*n),
            CountState::Done(..) => None,
        }
    }

    fn is_stopping(&self, state: &CountState) -> bool {
        matches!(state, CountState::Done(..))
    }

    fn transition(&self, state: &CountState, received: &Reception<usize>) -> CountState {
        let total = |r: &Reception<usize>| -> usize {
            match r {
                Reception::Multiset(m) => m.iter().map(|(k, n)| k.unwrap_or(0) * n).sum(),
                Reception::Set(s) => s.iter().flatten().sum(),
            }
        };
        match state {
            CountState::Start(_) => CountState::Counted(total(received)),
            CountState::Counted(n) => CountState::Done(*n, total(received) % 2 == 1),
            CountState::Done(..) => state.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, PortLabel};
    use crate::pi::solve_pi_mv;

    #[test]
    fn rejects_set_receiving_inner() {
        assert!(mv_by_sv(crate::view::canonical_sv(2)).is_err());
    }

    #[test]
    fn single_node_degenerates() {
        let mut b = GraphBuilder::new();
        b.add_node("x", Some(Colour::W)).unwrap();
        let g = b.build().unwrap();
        let sim = mv_by_sv(solve_pi_mv(3)).unwrap();
        let run = run_simulated(&sim, &g, None, 5).unwrap();
        assert_eq!(run.overhead, 4);
        assert_eq!(run.outputs[0].output(), Some(Colour::W));
    }

    #[test]
    fn star_counts_survive_set_reception() {
        let mut b = GraphBuilder::new();
        let c = b.add_node("c", None).unwrap();
        for i in 0..3u32 {
            let l = b.add_node(format!("l{i}"), Some(Colour::B)).unwrap();
            b.add_edge(c, l, PortLabel::Plain(i + 1), PortLabel::Plain(1)).unwrap();
        }
        let g = b.build().unwrap();
        let sim = mv_by_sv(neighbour_count(3)).unwrap();
        let run = run_simulated(&sim, &g, None, 5).unwrap();
        assert_eq!(run.outputs[0], CountState::Done(3, false));
        assert_eq!(run.outputs[1], CountState::Done(0, true));
        assert_eq!(run.overhead, 4);
    }
}
