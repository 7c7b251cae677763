use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Colour, GraphBuilder, PortLabel, PortNumberedGraph};

/// A map from generalised port labels to positive integers, turning a
/// generalised numbering into an ordinary one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortCollapse {
    table: BTreeMap<PortLabel, u32>,
}

impl PortCollapse {
    pub fn from_table(table: BTreeMap<PortLabel, u32>) -> PortCollapse {
        PortCollapse { table }
    }

    /// `0 ↦ 1`, `i ↦ i` on `{0,…,d}`.
    pub fn for_g(d: u32) -> PortCollapse {
        let mut table = BTreeMap::new();
        table.insert(PortLabel::Plain(0), 1);
        for i in 1..=d {
            table.insert(PortLabel::Plain(i), i);
        }
        PortCollapse { table }
    }

    /// `(1,B),(1,W) ↦ 1`, `(i,B) ↦ 2i−1`, `(i,W) ↦ 2i−2` for `i ≥ 2`,
    /// `(0,G) ↦ 1`, `(i,G) ↦ i`.
    pub fn for_h(d: u32) -> PortCollapse {
        let mut table = BTreeMap::new();
        table.insert(PortLabel::Tagged(1, Colour::B), 1);
        table.insert(PortLabel::Tagged(1, Colour::W), 1);
        for i in 2..=d {
            table.insert(PortLabel::Tagged(i, Colour::B), 2 * i - 1);
            table.insert(PortLabel::Tagged(i, Colour::W), 2 * i - 2);
        }
        table.insert(PortLabel::Tagged(0, Colour::G), 1);
        for i in 1..=d {
            table.insert(PortLabel::Tagged(i, Colour::G), i);
        }
        PortCollapse { table }
    }

    /// Replaces one entry; used to inject faults in audits.
    pub fn with_override(mut self, label: PortLabel, value: u32) -> PortCollapse {
        self.table.insert(label, value);
        self
    }

    pub fn table(&self) -> &BTreeMap<PortLabel, u32> {
        &self.table
    }

    pub fn apply(&self, label: PortLabel) -> Result<u32> {
        self.table
            .get(&label)
            .copied()
            .ok_or_else(|| Error::CollapseUndefined(label.to_string()))
    }

    pub fn apply_label(&self, label: PortLabel) -> Result<PortLabel> {
        self.apply(label).map(PortLabel::Plain)
    }

    /// Whether the collapse keeps a node's labels distinct.
    pub fn injective_on<I: IntoIterator<Item = PortLabel>>(&self, labels: I) -> Result<bool> {
        let mut seen = BTreeSet::new();
        for l in labels {
            if !seen.insert(self.apply(l)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Collapsed label of a port at a node of the given degree.
    ///
    /// A leaf's only port becomes 1 whatever its generalised label.
    pub fn apply_at(&self, label: PortLabel, degree: usize) -> Result<PortLabel> {
        let n = self.apply(label)?;
        Ok(PortLabel::Plain(if degree == 1 { 1 } else { n }))
    }

    /// Relabels every port of `graph`.
    pub fn collapse_graph(&self, graph: &PortNumberedGraph) -> Result<PortNumberedGraph> {
        let mut b = GraphBuilder::new();
        for v in graph.nodes() {
            b.add_node(graph.name(v), graph.input(v))?;
            if graph.is_truncated(v) {
                b.mark_truncated(v);
            }
        }
        for e in graph.edges() {
            let (du, dv) = (graph.degree(e.u), graph.degree(e.v));
            b.add_edge_full(
                e.u,
                e.v,
                self.apply_at(e.port_uv, du)?,
                self.apply_at(e.port_vu, dv)?,
                self.apply_at(e.in_u, du)?,
                self.apply_at(e.in_v, dv)?,
            )?;
        }
        b.build()
    }
}
