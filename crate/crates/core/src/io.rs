//! Graph JSON, DOT and trace CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Colour, GraphBuilder, PortLabel, PortNumberedGraph};
use crate::machine::ExecutionTrace;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    colour: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    truncated: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeJson {
    u: String,
    v: String,
    port_uv: String,
    port_vu: String,
    /// In-port at `u`; omitted when it equals `port_uv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_u: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_v: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
    proper: bool,
}

pub fn graph_to_json(graph: &PortNumberedGraph) -> String {
    let doc = GraphJson {
        nodes: graph
            .nodes()
            .map(|v| NodeJson {
                id: graph.name(v).to_string(),
                colour: graph.input(v).map(|c| c.to_string()),
                truncated: graph.is_truncated(v),
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|e| EdgeJson {
                u: graph.name(e.u).to_string(),
                v: graph.name(e.v).to_string(),
                port_uv: e.port_uv.to_string(),
                port_vu: e.port_vu.to_string(),
                in_u: (e.in_u != e.port_uv).then(|| e.in_u.to_string()),
                in_v: (e.in_v != e.port_vu).then(|| e.in_v.to_string()),
            })
            .collect(),
        proper: graph.is_proper(),
    };
    serde_json::to_string_pretty(&doc).expect("graph documents serialize") + "\n"
}

/// Parses a graph document. A document claiming `"proper": true` must be proper.
pub fn graph_from_json(text: &str) -> Result<PortNumberedGraph> {
    let doc: GraphJson = serde_json::from_str(text)?;
    let mut b = GraphBuilder::new();
    for n in &doc.nodes {
        let colour = n.colour.as_deref().map(str::parse::<Colour>).transpose()?;
        let v = b.add_node(n.id.clone(), colour)?;
        if n.truncated {
            b.mark_truncated(v);
        }
    }
    let lookup = |b: &GraphBuilder, id: &str| b.node_by_name(id).ok_or_else(|| Error::UnknownNode(id.to_string()));
    for e in &doc.edges {
        let (u, v) = (lookup(&b, &e.u)?, lookup(&b, &e.v)?);
        let puv: PortLabel = e.port_uv.parse()?;
        let pvu: PortLabel = e.port_vu.parse()?;
        let in_u = e.in_u.as_deref().map(str::parse).transpose()?.unwrap_or(puv);
        let in_v = e.in_v.as_deref().map(str::parse).transpose()?.unwrap_or(pvu);
        b.add_edge_full(u, v, puv, pvu, in_u, in_v)?;
    }
    let g = b.build()?;
    if doc.proper {
        if let Some((v, detail)) = g.properness_violation() {
            return Err(Error::ImproperNumbering { node: g.name(v).to_string(), detail });
        }
    }
    Ok(g)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT export. Edges in `highlight` (as node index pairs, either order) are drawn bold red.
pub fn graph_to_dot(graph: &PortNumberedGraph, highlight: &BTreeSet<(usize, usize)>) -> String {
    let mut out = String::from("graph G {\n  node [style=filled, fillcolor=\"#f0f0f0\"];\n");
    for v in graph.nodes() {
        let fill = match graph.input(v) {
            Some(Colour::B) => ", fillcolor=black, fontcolor=white",
            Some(Colour::W) => ", fillcolor=white",
            Some(Colour::G) => ", fillcolor=gray70",
            None => "",
        };
        let shape = if graph.is_truncated(v) { ", shape=box" } else { "" };
        let _ = writeln!(out, "  n{v} [label=\"{}\"{fill}{shape}];", dot_escape(graph.name(v)));
    }
    for e in graph.edges() {
        let hot = highlight.contains(&(e.u, e.v)) || highlight.contains(&(e.v, e.u));
        let style = if hot { ", color=red, penwidth=2.5" } else { "" };
        let _ = writeln!(out, "  n{} -- n{} [label=\"{}/{}\"{style}];", e.u, e.v, e.port_uv, e.port_vu);
    }
    out.push_str("}\n");
    out
}

/// Hash of a state through the standard hasher; stable for a given build.
pub fn default_state_hash<S: Hash>(s: &S) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

/// Trace CSV with columns `round,node,state_hash,halted`.
pub fn trace_to_csv<S, M>(
    graph: &PortNumberedGraph,
    trace: &ExecutionTrace<S, M>,
    state_hash: impl Fn(&S) -> u64,
) -> String {
    let mut out = String::from("round,node,state_hash,halted\n");
    for r in 0..=trace.rounds() {
        for v in graph.nodes() {
            let name = graph.name(v);
            let name = if name.contains([',', '"']) { format!("\"{}\"", name.replace('"', "\"\"")) } else { name.to_string() };
            let _ = writeln!(out, "{r},{name},{:016x},{}", state_hash(trace.state(r, v)), trace.is_stopping(r, v));
        }
    }
    out
}

/// Parses a candidate solution `{"node id": "B", ...}` that must cover every node.
pub fn candidate_from_json(graph: &PortNumberedGraph, text: &str) -> Result<Vec<Colour>> {
    let map: BTreeMap<String, String> = serde_json::from_str(text)?;
    let mut out: Vec<Option<Colour>> = vec![None; graph.node_count()];
    for (id, c) in &map {
        let v = graph.node_by_name(id).ok_or_else(|| Error::UnknownNode(id.clone()))?;
        out[v] = Some(c.parse()?);
    }
    out.into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::Parse(format!("candidate has no value for node {}", graph.name(v)))))
        .collect()
}

pub fn candidate_to_json(graph: &PortNumberedGraph, values: &[Colour]) -> String {
    let map: BTreeMap<&str, String> = graph.nodes().map(|v| (graph.name(v), values[v].to_string())).collect();
    serde_json::to_string_pretty(&map).expect("candidate maps serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{NodePath, Tree};

    #[test]
    fn tree_ball_round_trips() {
        let t = Tree::hb(2).unwrap();
        let g = t.build_ball(&NodePath::root(), 2, 1000).unwrap();
        let text = graph_to_json(&g);
        let back = graph_from_json(&text).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.inputs(), g.inputs());
        assert_eq!(graph_to_json(&back), text);
        assert!(text.contains("\"(1,B)\""));
    }

    #[test]
    fn explicit_in_ports_round_trip() {
        let text = r#"{"nodes":[{"id":"a"},{"id":"b"},{"id":"c"}],
            "edges":[{"u":"a","v":"b","port_uv":"1","port_vu":"1","in_u":"2"},
                     {"u":"a","v":"c","port_uv":"2","port_vu":"1","in_u":"1"}],
            "proper":true}"#;
        let g = graph_from_json(text).unwrap();
        assert_eq!(g.in_port(0, 1), Some(PortLabel::Plain(2)));
        assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap().edges(), g.edges());
    }

    #[test]
    fn false_properness_claim_is_rejected() {
        let text = r#"{"nodes":[{"id":"a"},{"id":"b"}],"edges":[{"u":"a","v":"b","port_uv":"2","port_vu":"1"}],"proper":true}"#;
        assert!(matches!(graph_from_json(text), Err(Error::ImproperNumbering { .. })));
        assert!(graph_from_json(&text.replace("true", "false")).is_ok());
    }

    #[test]
    fn malformed_documents_are_errors() {
        for bad in [
            "",
            "{}",
            r#"{"nodes":[{"id":"a","colour":"R"}],"edges":[],"proper":false}"#,
            r#"{"nodes":[{"id":"a"}],"edges":[{"u":"a","v":"z","port_uv":"1","port_vu":"1"}],"proper":false}"#,
            r#"{"nodes":[{"id":"a"},{"id":"a"}],"edges":[],"proper":false}"#,
        ] {
            assert!(graph_from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn dot_labels_both_directions() {
        let t = Tree::g(2).unwrap();
        let g = t.build_ball(&NodePath::root(), 1, 100).unwrap();
        let dot = graph_to_dot(&g, &BTreeSet::from([(0, 1)]));
        assert!(dot.contains("[label=\"1/0\", color=red"));
        assert!(dot.contains("label=\"2/1\""));
    }

    #[test]
    fn candidates_must_be_total() {
        let t = Tree::g(2).unwrap();
        let g = t.build_ball(&NodePath::root(), 1, 100).unwrap();
        let full = candidate_to_json(&g, &[Colour::B, Colour::W, Colour::G]);
        assert_eq!(candidate_from_json(&g, &full).unwrap(), vec![Colour::B, Colour::W, Colour::G]);
        assert!(candidate_from_json(&g, r#"{"∅":"B"}"#).is_err());
        assert!(candidate_from_json(&g, r#"{"x":"B"}"#).is_err());
    }
}
