//! Port-numbered graphs.
//!
//! A [`PortNumberedGraph`] is a finite simple undirected graph in which every
//! edge endpoint carries an outgoing port label and an incoming port label.
//! Labels are either plain integers (ordinary or collapsed numberings, and the
//! generalised numbering of the `G` trees) or integer/colour pairs (the
//! generalised numbering of the `H` trees).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node colour used both as local input and as the tag of `H`-family labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Colour {
    B,
    W,
    G,
}

impl Colour {
    pub const ALL: [Colour; 3] = [Colour::B, Colour::W, Colour::G];

    /// Swaps black and white; grey is its own complement.
    pub fn complement(self) -> Colour {
        match self {
            Colour::B => Colour::W,
            Colour::W => Colour::B,
            Colour::G => Colour::G,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Colour::B => 'B',
            Colour::W => 'W',
            Colour::G => 'G',
        }
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Colour {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "B" | "b" => Ok(Colour::B),
            "W" | "w" => Ok(Colour::W),
            "G" | "g" => Ok(Colour::G),
            other => Err(Error::Parse(format!("unknown colour {other:?}"))),
        }
    }
}

/// A port label. Proper numberings use `Plain(1..=deg)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PortLabel {
    Plain(u32),
    Tagged(u32, Colour),
}

impl PortLabel {
    pub fn number(self) -> u32 {
        match self {
            PortLabel::Plain(n) | PortLabel::Tagged(n, _) => n,
        }
    }
}

impl fmt::Display for PortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortLabel::Plain(n) => write!(f, "{n}"),
            PortLabel::Tagged(n, c) => write!(f, "({n},{c})"),
        }
    }
}

impl FromStr for PortLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("malformed port label {s:?}"));
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (num, tag) = inner.split_once(',').ok_or_else(bad)?;
            let num = num.trim().parse::<u32>().map_err(|_| bad())?;
            let tag = tag.parse::<Colour>()?;
            Ok(PortLabel::Tagged(num, tag))
        } else {
            s.parse::<u32>().map(PortLabel::Plain).map_err(|_| bad())
        }
    }
}

/// One endpoint's view of an incident edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    /// The neighbour at the other end.
    pub node: usize,
    /// Outgoing label of this node towards `node`.
    pub out_port: PortLabel,
    /// Outgoing label of `node` towards this node.
    pub back_port: PortLabel,
    /// Label of the input port at this node on which messages from `node` arrive.
    pub in_port: PortLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub port_uv: PortLabel,
    pub port_vu: PortLabel,
    /// Input label at `u` for messages from `v`.
    pub in_u: PortLabel,
    /// Input label at `v` for messages from `u`.
    pub in_v: PortLabel,
}

#[derive(Clone, Debug)]
pub struct PortNumberedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    inputs: Vec<Option<Colour>>,
    adjacency: Vec<Vec<Incidence>>,
    edges: Vec<Edge>,
    truncated: Vec<bool>,
    proper: bool,
}

impl PortNumberedGraph {
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn input(&self, v: usize) -> Option<Colour> {
        self.inputs[v]
    }

    pub fn inputs(&self) -> &[Option<Colour>] {
        &self.inputs
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn incidences(&self, v: usize) -> &[Incidence] {
        &self.adjacency[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Nodes on the boundary of a materialized ball whose true neighbourhood
    /// was cut off.
    pub fn is_truncated(&self, v: usize) -> bool {
        self.truncated[v]
    }

    pub fn has_truncation(&self) -> bool {
        self.truncated.iter().any(|&t| t)
    }

    /// Outgoing label of `u` towards its neighbour `v`.
    pub fn out_port(&self, u: usize, v: usize) -> Option<PortLabel> {
        self.adjacency[u]
            .iter()
            .find(|inc| inc.node == v)
            .map(|inc| inc.out_port)
    }

    /// Input label at `u` for messages arriving from `v`.
    pub fn in_port(&self, u: usize, v: usize) -> Option<PortLabel> {
        self.adjacency[u]
            .iter()
            .find(|inc| inc.node == v)
            .map(|inc| inc.in_port)
    }

    /// True iff every node's out-port and in-port label sets are `{1..deg}`.
    pub fn is_proper(&self) -> bool {
        self.proper
    }

    /// First node violating properness, with a description.
    pub fn properness_violation(&self) -> Option<(usize, String)> {
        self.nodes().find_map(|v| properness_at(&self.adjacency[v]).map(|e| (v, e)))
    }

    /// Returns a copy with every label (out and in) passed through `map`.
    pub fn relabel<F>(&self, mut map: F) -> Result<PortNumberedGraph>
    where
        F: FnMut(PortLabel) -> Result<PortLabel>,
    {
        let mut b = GraphBuilder::new();
        for v in self.nodes() {
            b.add_node(self.names[v].clone(), self.inputs[v])?;
            if self.truncated[v] {
                b.mark_truncated(v);
            }
        }
        for e in &self.edges {
            b.add_edge_full(e.u, e.v, map(e.port_uv)?, map(e.port_vu)?, map(e.in_u)?, map(e.in_v)?)?;
        }
        b.build()
    }

    /// Returns a copy with a different colouring.
    pub fn with_inputs(&self, inputs: Vec<Option<Colour>>) -> Result<PortNumberedGraph> {
        if inputs.len() != self.node_count() {
            return Err(Error::InvalidGraph(format!(
                "colouring has {} entries for {} nodes",
                inputs.len(),
                self.node_count()
            )));
        }
        let mut g = self.clone();
        g.inputs = inputs;
        Ok(g)
    }
}

fn properness_at(incs: &[Incidence]) -> Option<String> {
    let deg = incs.len() as u32;
    let expected: BTreeSet<PortLabel> = (1..=deg).map(PortLabel::Plain).collect();
    let outs: BTreeSet<PortLabel> = incs.iter().map(|i| i.out_port).collect();
    if outs != expected {
        return Some(format!("out-ports {} are not 1..{deg}", fmt_labels(&outs)));
    }
    let ins: BTreeSet<PortLabel> = incs.iter().map(|i| i.in_port).collect();
    if ins != expected {
        return Some(format!("in-ports {} are not 1..{deg}", fmt_labels(&ins)));
    }
    None
}

fn fmt_labels(labels: &BTreeSet<PortLabel>) -> String {
    let parts: Vec<String> = labels.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Incrementally assembles and validates a [`PortNumberedGraph`].
#[derive(Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    inputs: Vec<Option<Colour>>,
    adjacency: Vec<Vec<Incidence>>,
    edges: Vec<Edge>,
    truncated: Vec<bool>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn add_node(&mut self, name: impl Into<String>, input: Option<Colour>) -> Result<usize> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::InvalidGraph(format!("duplicate node id {name:?}")));
        }
        let id = self.names.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.inputs.push(input);
        self.adjacency.push(Vec::new());
        self.truncated.push(false);
        Ok(id)
    }

    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn mark_truncated(&mut self, v: usize) {
        self.truncated[v] = true;
    }

    /// Adds an edge whose input labels equal the output labels at each end,
    /// i.e. the port numbering is an involution on ports.
    pub fn add_edge(&mut self, u: usize, v: usize, port_uv: PortLabel, port_vu: PortLabel) -> Result<()> {
        self.add_edge_full(u, v, port_uv, port_vu, port_uv, port_vu)
    }

    pub fn add_edge_full(
        &mut self,
        u: usize,
        v: usize,
        port_uv: PortLabel,
        port_vu: PortLabel,
        in_u: PortLabel,
        in_v: PortLabel,
    ) -> Result<()> {
        let n = self.names.len();
        if u >= n || v >= n {
            return Err(Error::InvalidGraph(format!("edge ({u},{v}) references a missing node")));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at {}", self.names[u])));
        }
        if self.adjacency[u].iter().any(|i| i.node == v) {
            return Err(Error::InvalidGraph(format!(
                "parallel edge between {} and {}",
                self.names[u], self.names[v]
            )));
        }
        for (node, out, inp) in [(u, port_uv, in_u), (v, port_vu, in_v)] {
            if self.adjacency[node].iter().any(|i| i.out_port == out) {
                return Err(Error::InvalidGraph(format!(
                    "repeated out-port {out} at {}",
                    self.names[node]
                )));
            }
            if self.adjacency[node].iter().any(|i| i.in_port == inp) {
                return Err(Error::InvalidGraph(format!(
                    "repeated in-port {inp} at {}",
                    self.names[node]
                )));
            }
        }
        self.adjacency[u].push(Incidence { node: v, out_port: port_uv, back_port: port_vu, in_port: in_u });
        self.adjacency[v].push(Incidence { node: u, out_port: port_vu, back_port: port_uv, in_port: in_v });
        self.edges.push(Edge { u, v, port_uv, port_vu, in_u, in_v });
        Ok(())
    }

    pub fn build(self) -> Result<PortNumberedGraph> {
        let proper = self.adjacency.iter().all(|incs| properness_at(incs).is_none());
        Ok(PortNumberedGraph {
            names: self.names,
            index: self.index,
            inputs: self.inputs,
            adjacency: self.adjacency,
            edges: self.edges,
            truncated: self.truncated,
            proper,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path2() -> PortNumberedGraph {
        let mut b = GraphBuilder::new();
        let a = b.add_node("a", None).unwrap();
        let c = b.add_node("c", None).unwrap();
        b.add_edge(a, c, PortLabel::Plain(1), PortLabel::Plain(1)).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn two_node_path_is_proper() {
        let g = path2();
        assert!(g.is_proper());
        assert_eq!(g.out_port(0, 1), Some(PortLabel::Plain(1)));
        assert_eq!(g.in_port(1, 0), Some(PortLabel::Plain(1)));
        assert_eq!(g.max_degree(), 1);
    }

    #[test]
    fn rejects_self_loops_and_parallel_edges() {
        let mut b = GraphBuilder::new();
        let a = b.add_node("a", None).unwrap();
        let c = b.add_node("c", None).unwrap();
        assert!(b.add_edge(a, a, PortLabel::Plain(1), PortLabel::Plain(2)).is_err());
        b.add_edge(a, c, PortLabel::Plain(1), PortLabel::Plain(1)).unwrap();
        assert!(b.add_edge(c, a, PortLabel::Plain(2), PortLabel::Plain(2)).is_err());
        assert!(b.add_node("a", None).is_err());
    }

    #[test]
    fn rejects_repeated_out_port() {
        let mut b = GraphBuilder::new();
        let a = b.add_node("a", None).unwrap();
        let c = b.add_node("c", None).unwrap();
        let e = b.add_node("e", None).unwrap();
        b.add_edge(a, c, PortLabel::Plain(1), PortLabel::Plain(1)).unwrap();
        assert!(b.add_edge(a, e, PortLabel::Plain(1), PortLabel::Plain(1)).is_err());
    }

    #[test]
    fn generalised_numbering_is_not_proper() {
        let mut b = GraphBuilder::new();
        let a = b.add_node("a", None).unwrap();
        let c = b.add_node("c", None).unwrap();
        b.add_edge(a, c, PortLabel::Plain(1), PortLabel::Plain(0)).unwrap();
        let g = b.build().unwrap();
        assert!(!g.is_proper());
        let (node, _) = g.properness_violation().unwrap();
        assert_eq!(node, 1);
    }

    #[test]
    fn label_text_round_trip() {
        for s in ["0", "17", "(3,B)", "(0,G)"] {
            assert_eq!(s.parse::<PortLabel>().unwrap().to_string(), s);
        }
        assert!("(3,X)".parse::<PortLabel>().is_err());
        assert!("-1".parse::<PortLabel>().is_err());
        assert!("(3 B)".parse::<PortLabel>().is_err());
    }
}
