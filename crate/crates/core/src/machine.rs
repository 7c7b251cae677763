//! Distributed state machines and the synchronous executor.
//!
//! Every node runs a copy of the same [`StateMachine`]. In each round a node
//! emits one message per outgoing port, then receives the messages of its
//! neighbours as a vector indexed by input port, padded with ε up to length
//! Δ. The executor reduces that vector to a set (SV) or a multiset (MV)
//! before handing it to the machine, so a machine never observes port order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Colour, PortLabel, PortNumberedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReceptionClass {
    /// Set reception: order and multiplicities are lost.
    Sv,
    /// Multiset reception: only order is lost.
    Mv,
}

/// What a machine sees of one round's incoming vector. `None` is ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reception<M> {
    Set(BTreeSet<Option<M>>),
    Multiset(BTreeMap<Option<M>, usize>),
}

impl<M: Ord> Reception<M> {
    /// Distinct received values, ε included when present.
    pub fn distinct(&self) -> Box<dyn Iterator<Item = &Option<M>> + '_> {
        match self {
            Reception::Set(s) => Box::new(s.iter()),
            Reception::Multiset(m) => Box::new(m.keys()),
        }
    }

    pub fn contains(&self, msg: &Option<M>) -> bool {
        match self {
            Reception::Set(s) => s.contains(msg),
            Reception::Multiset(m) => m.contains_key(msg),
        }
    }
}

/// Discards order and multiplicity.
pub fn vset_reduce<M: Ord + Clone>(msgs: &[Option<M>]) -> BTreeSet<Option<M>> {
    msgs.iter().cloned().collect()
}

/// Discards order only; the counts sum to `msgs.len()`.
pub fn vmset_reduce<M: Ord + Clone>(msgs: &[Option<M>]) -> BTreeMap<Option<M>, usize> {
    let mut out = BTreeMap::new();
    for m in msgs {
        *out.entry(m.clone()).or_insert(0) += 1;
    }
    out
}

/// A deterministic distributed state machine for graphs of maximum degree Δ.
pub trait StateMachine {
    type State: Clone + Eq + Hash + Debug;
    type Message: Clone + Ord + Hash + Debug;

    /// Degree bound Δ.
    fn delta(&self) -> usize;

    fn reception_class(&self) -> ReceptionClass;

    /// Input alphabet membership. Every alphabet contains the no-input symbol.
    fn accepts_input(&self, _input: Option<Colour>) -> bool {
        true
    }

    fn init(&self, degree: usize, input: Option<Colour>) -> Self::State;

    /// Message sent on out-port `port` (1-based). `None` is ε, and stopping
    /// states must emit ε on every port.
    fn emit(&self, state: &Self::State, port: u32) -> Option<Self::Message>;

    fn is_stopping(&self, state: &Self::State) -> bool;

    /// Stopping states must be fixed points.
    fn transition(&self, state: &Self::State, received: &Reception<Self::Message>) -> Self::State;
}

impl<T: StateMachine + ?Sized> StateMachine for &T {
    type State = T::State;
    type Message = T::Message;

    fn delta(&self) -> usize {
        (**self).delta()
    }
    fn reception_class(&self) -> ReceptionClass {
        (**self).reception_class()
    }
    fn accepts_input(&self, input: Option<Colour>) -> bool {
        (**self).accepts_input(input)
    }
    fn init(&self, degree: usize, input: Option<Colour>) -> Self::State {
        (**self).init(degree, input)
    }
    fn emit(&self, state: &Self::State, port: u32) -> Option<Self::Message> {
        (**self).emit(state, port)
    }
    fn is_stopping(&self, state: &Self::State) -> bool {
        (**self).is_stopping(state)
    }
    fn transition(&self, state: &Self::State, received: &Reception<Self::Message>) -> Self::State {
        (**self).transition(state, received)
    }
}

/// States and delivered messages of one synchronous run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionTrace<S, M> {
    delta: usize,
    states: Vec<Vec<S>>,
    messages: Vec<Vec<Vec<Option<M>>>>,
    stopped_round: Option<usize>,
    stopping: Vec<Vec<bool>>,
}

impl<S, M> ExecutionTrace<S, M> {
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Highest round recorded.
    pub fn rounds(&self) -> usize {
        self.states.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.states[0].len()
    }

    pub fn state(&self, round: usize, node: usize) -> &S {
        &self.states[round][node]
    }

    pub fn states_at(&self, round: usize) -> &[S] {
        &self.states[round]
    }

    /// Whether `node`'s state at `round` is a stopping state.
    pub fn is_stopping(&self, round: usize, node: usize) -> bool {
        self.stopping[round][node]
    }

    /// The padded incoming vector of `node` in `round` (round ≥ 1), indexed
    /// by input port minus one.
    pub fn received(&self, round: usize, node: usize) -> &[Option<M>] {
        &self.messages[round - 1][node]
    }

    /// Message delivered to `node` on input port `slot` (1-based) in `round`.
    pub fn message(&self, round: usize, node: usize, slot: usize) -> Option<&M> {
        self.messages[round - 1][node][slot - 1].as_ref()
    }

    /// Running time, if every node reached a stopping state.
    pub fn stopped_round(&self) -> Option<usize> {
        self.stopped_round
    }
}

/// The local outputs x_t(v) of a halted run.
pub fn local_outputs<S: Clone, M>(trace: &ExecutionTrace<S, M>) -> Result<Vec<S>> {
    match trace.stopped_round {
        Some(t) => Ok(trace.states[t].clone()),
        None => Err(Error::DidNotHalt(trace.rounds())),
    }
}

fn check_preconditions<A: StateMachine>(
    machine: &A,
    graph: &PortNumberedGraph,
    inputs: &[Option<Colour>],
) -> Result<()> {
    if inputs.len() != graph.node_count() {
        return Err(Error::InvalidGraph(format!(
            "input has {} entries for {} nodes",
            inputs.len(),
            graph.node_count()
        )));
    }
    if let Some((v, detail)) = graph.properness_violation() {
        return Err(Error::ImproperNumbering { node: graph.name(v).to_string(), detail });
    }
    let delta = machine.delta();
    for v in graph.nodes() {
        if graph.degree(v) > delta {
            return Err(Error::DegreeExceeded {
                node: graph.name(v).to_string(),
                degree: graph.degree(v),
                delta,
            });
        }
        if !machine.accepts_input(inputs[v]) {
            return Err(Error::InputOutOfAlphabet {
                node: graph.name(v).to_string(),
                input: inputs[v].map_or_else(|| "∅".to_string(), |c| c.to_string()),
            });
        }
    }
    Ok(())
}

/// Runs `machine` on `graph` for at most `max_rounds` rounds.
///
/// `inputs` overrides the graph's own colouring when given. The graph must
/// carry a proper port numbering and maximum degree at most Δ. When the run
/// does not halt within the horizon the trace is returned with
/// `stopped_round` unset.
pub fn execute<A: StateMachine>(
    machine: &A,
    graph: &PortNumberedGraph,
    inputs: Option<&[Option<Colour>]>,
    max_rounds: usize,
) -> Result<ExecutionTrace<A::State, A::Message>> {
    let inputs = inputs.unwrap_or_else(|| graph.inputs());
    check_preconditions(machine, graph, inputs)?;
    let delta = machine.delta();
    let n = graph.node_count();

    // routing[v][slot] = (sender, sender's out-port)
    let mut routing: Vec<Vec<Option<(usize, u32)>>> = vec![vec![None; delta]; n];
    for v in graph.nodes() {
        for inc in graph.incidences(v) {
            let PortLabel::Plain(slot) = inc.in_port else {
                unreachable!("proper numbering has plain labels")
            };
            routing[v][slot as usize - 1] = Some((inc.node, inc.back_port.number()));
        }
    }

    let init: Vec<A::State> = graph.nodes().map(|v| machine.init(graph.degree(v), inputs[v])).collect();
    let init_stop: Vec<bool> = init.iter().map(|s| machine.is_stopping(s)).collect();
    let mut trace = ExecutionTrace {
        delta,
        stopped_round: init_stop.iter().all(|&b| b).then_some(0),
        states: vec![init],
        messages: Vec::new(),
        stopping: vec![init_stop],
    };

    let mut round = 0;
    while trace.stopped_round.is_none() && round < max_rounds {
        let current = &trace.states[round];
        let current_stop = &trace.stopping[round];
        let mut outbox: Vec<Vec<Option<A::Message>>> = Vec::with_capacity(n);
        for v in graph.nodes() {
            let msgs: Vec<Option<A::Message>> =
                (1..=delta as u32).map(|j| machine.emit(&current[v], j)).collect();
            if current_stop[v] && msgs.iter().any(Option::is_some) {
                return Err(Error::InternalInconsistency(format!(
                    "stopping state at {} emitted a non-ε message",
                    graph.name(v)
                )));
            }
            outbox.push(msgs);
        }

        let mut received = Vec::with_capacity(n);
        let mut next = Vec::with_capacity(n);
        let mut next_stop = Vec::with_capacity(n);
        for v in graph.nodes() {
            let vector: Vec<Option<A::Message>> = routing[v]
                .iter()
                .map(|r| r.and_then(|(u, j)| outbox[u][j as usize - 1].clone()))
                .collect();
            let reception = match machine.reception_class() {
                ReceptionClass::Sv => Reception::Set(vset_reduce(&vector)),
                ReceptionClass::Mv => Reception::Multiset(vmset_reduce(&vector)),
            };
            let s = machine.transition(&current[v], &reception);
            if current_stop[v] && s != current[v] {
                return Err(Error::InternalInconsistency(format!(
                    "stopping state at {} is not a fixed point",
                    graph.name(v)
                )));
            }
            next_stop.push(machine.is_stopping(&s));
            next.push(s);
            received.push(vector);
        }
        round += 1;
        if next_stop.iter().all(|&b| b) {
            trace.stopped_round = Some(round);
        }
        trace.states.push(next);
        trace.stopping.push(next_stop);
        trace.messages.push(received);
    }
    Ok(trace)
}
