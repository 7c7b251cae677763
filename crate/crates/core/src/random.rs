//! Seeded random instances: graphs, proper port numberings, colourings.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construction::{NodePath, Tree};
use crate::error::Result;
use crate::graph::{Colour, GraphBuilder, PortLabel, PortNumberedGraph};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random coloured graph with a proper numbering and its degree bound.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub graph: PortNumberedGraph,
    pub delta: usize,
}

pub fn random_colour(rng: &mut SeededRng) -> Colour {
    Colour::ALL[rng.gen_range(0..3)]
}

/// Proper numbering for `edges` on `n` nodes: each node's out-ports and
/// in-ports are independent uniform orderings of its incident edges.
fn numbered(
    rng: &mut SeededRng,
    names: &[String],
    inputs: &[Option<Colour>],
    edges: &[(usize, usize)],
) -> Result<PortNumberedGraph> {
    let n = names.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(i);
        incident[v].push(i);
    }
    // out[v][edge] and inn[v][edge]: port numbers at v
    let mut out = vec![std::collections::HashMap::new(); n];
    let mut inn = vec![std::collections::HashMap::new(); n];
    for v in 0..n {
        let mut order = incident[v].clone();
        order.shuffle(rng);
        for (p, e) in order.iter().enumerate() {
            out[v].insert(*e, p as u32 + 1);
        }
        order.shuffle(rng);
        for (p, e) in order.iter().enumerate() {
            inn[v].insert(*e, p as u32 + 1);
        }
    }
    let mut b = GraphBuilder::new();
    for (name, input) in names.iter().zip(inputs) {
        b.add_node(name.clone(), *input)?;
    }
    for (i, &(u, v)) in edges.iter().enumerate() {
        b.add_edge_full(
            u,
            v,
            PortLabel::Plain(out[u][&i]),
            PortLabel::Plain(out[v][&i]),
            PortLabel::Plain(inn[u][&i]),
            PortLabel::Plain(inn[v][&i]),
        )?;
    }
    b.build()
}

/// A random simple graph on 1..=`n_max` nodes with maximum degree at most a
/// random Δ in 1..=`delta_max`, uniformly coloured, properly numbered.
pub fn random_instance(rng: &mut SeededRng, n_max: usize, delta_max: usize) -> Result<RandomInstance> {
    let n = rng.gen_range(1..=n_max.max(1));
    let delta = rng.gen_range(1..=delta_max.max(1));
    let mut degree = vec![0usize; n];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut present = std::collections::HashSet::new();
    let density = rng.gen_range(0.3..1.0);
    let attempts = ((n * delta) as f64 * density) as usize;
    for _ in 0..attempts {
        if n < 2 {
            break;
        }
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let key = (u.min(v), u.max(v));
        if u == v || degree[u] >= delta || degree[v] >= delta || !present.insert(key) {
            continue;
        }
        degree[u] += 1;
        degree[v] += 1;
        edges.push(key);
    }
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let inputs: Vec<Option<Colour>> = (0..n).map(|_| Some(random_colour(rng))).collect();
    let graph = numbered(rng, &names, &inputs, &edges)?;
    Ok(RandomInstance { graph, delta })
}

/// The same graph with fresh independent uniform out- and in-port orders.
pub fn renumber(rng: &mut SeededRng, graph: &PortNumberedGraph) -> Result<PortNumberedGraph> {
    let names: Vec<String> = graph.nodes().map(|v| graph.name(v).to_string()).collect();
    let edges: Vec<(usize, usize)> = graph.edges().iter().map(|e| (e.u, e.v)).collect();
    numbered(rng, &names, graph.inputs(), &edges)
}

/// The same graph with only the in-port orders reshuffled.
pub fn shuffle_in_ports(rng: &mut SeededRng, graph: &PortNumberedGraph) -> Result<PortNumberedGraph> {
    let mut b = GraphBuilder::new();
    for v in graph.nodes() {
        b.add_node(graph.name(v), graph.input(v))?;
    }
    let mut slots: Vec<Vec<u32>> = graph.nodes().map(|v| (1..=graph.degree(v) as u32).collect()).collect();
    for s in &mut slots {
        s.shuffle(rng);
    }
    let mut next = vec![0usize; graph.node_count()];
    let mut take = |v: usize| {
        let p = slots[v][next[v]];
        next[v] += 1;
        PortLabel::Plain(p)
    };
    for e in graph.edges() {
        let (iu, iv) = (take(e.u), take(e.v));
        b.add_edge_full(e.u, e.v, e.port_uv, e.port_vu, iu, iv)?;
    }
    b.build()
}

/// A random node of `tree`, reached by a uniform child choice per level and
/// a uniform stopping depth.
pub fn random_node(rng: &mut SeededRng, tree: &Tree) -> NodePath {
    let depth = rng.gen_range(0..=tree.height());
    let mut v = NodePath::root();
    for _ in 0..depth {
        let kids = tree.children(&v);
        match kids.choose(rng) {
            Some(k) => v = k.clone(),
            None => break,
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_proper_and_bounded() {
        let mut rng = seeded(7);
        for _ in 0..200 {
            let inst = random_instance(&mut rng, 40, 5).unwrap();
            assert!(inst.graph.is_proper());
            assert!(inst.graph.max_degree() <= inst.delta);
            assert!(inst.graph.node_count() <= 40);
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let a = random_instance(&mut seeded(3), 30, 4).unwrap();
        let b = random_instance(&mut seeded(3), 30, 4).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.graph.inputs(), b.graph.inputs());
    }

    #[test]
    fn in_port_shuffle_keeps_out_ports() {
        let mut rng = seeded(11);
        let inst = random_instance(&mut rng, 20, 4).unwrap();
        let g = shuffle_in_ports(&mut rng, &inst.graph).unwrap();
        assert!(g.is_proper());
        for (a, b) in inst.graph.edges().iter().zip(g.edges()) {
            assert_eq!((a.port_uv, a.port_vu), (b.port_uv, b.port_vu));
        }
    }
}
