//! The lower-bound trees.
//!
//! `G_d` is a rooted tree of depth `2d` whose nodes are sequences of integer
//! pairs; each pair doubles as the generalised port numbers of the edge to
//! the parent. `H_{B,d}` and `H_{W,d}` extend it with colours: every grey
//! node additionally carries a branch of the complementary colour, and the
//! root carries `d-1` complementary children.
//!
//! Trees are never materialized as a whole. Nodes exist as [`NodePath`]s and
//! neighbourhoods are computed on demand; [`Tree::build_ball`] materializes a
//! finite ball when an explicit graph is needed.

mod collapse;
mod path;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use collapse::PortCollapse;
pub use path::{NodePath, Step};

use crate::error::{Error, Result};
use crate::graph::{Colour, GraphBuilder, PortLabel, PortNumberedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    G,
    HB,
    HW,
}

impl Family {
    /// Colour of the root's majority branch, for the `H` families.
    pub fn base_colour(self) -> Option<Colour> {
        match self {
            Family::G => None,
            Family::HB => Some(Colour::B),
            Family::HW => Some(Colour::W),
        }
    }

    pub fn is_coloured(self) -> bool {
        self != Family::G
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::G => "G",
            Family::HB => "HB",
            Family::HW => "HW",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Ok(Family::G),
            "hb" | "h_b" | "h-b" => Ok(Family::HB),
            "hw" | "h_w" | "h-w" => Ok(Family::HW),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// A neighbour of a tree node together with the labels of the edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeIncidence {
    pub node: NodePath,
    /// π(v, node) for the queried node v.
    pub out_port: PortLabel,
    /// π(node, v).
    pub back_port: PortLabel,
}

/// One member of a lower-bound family, for a fixed parameter `d ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    family: Family,
    d: u32,
}

/// `k` smallest members of `range` not in `excluded`, ascending.
fn smallest_excluding(range: std::ops::RangeInclusive<u32>, excluded: u32, k: usize) -> impl Iterator<Item = u32> {
    range.filter(move |&x| x != excluded).take(k)
}

impl Tree {
    pub fn new(family: Family, d: u32) -> Result<Tree> {
        if d < 2 {
            return Err(Error::InvalidGraph(format!("construction parameter d must be ≥ 2, got {d}")));
        }
        if d > 64 {
            return Err(Error::ResourceCap { what: format!("construction parameter d={d}"), limit: 64 });
        }
        Ok(Tree { family, d })
    }

    pub fn g(d: u32) -> Result<Tree> {
        Tree::new(Family::G, d)
    }

    pub fn hb(d: u32) -> Result<Tree> {
        Tree::new(Family::HB, d)
    }

    pub fn hw(d: u32) -> Result<Tree> {
        Tree::new(Family::HW, d)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Depth of the leaves.
    pub fn height(&self) -> usize {
        2 * self.d as usize
    }

    /// Maximum degree: `d` for `G_d`, `2d-1` for the `H` trees.
    pub fn max_degree(&self) -> usize {
        match self.family {
            Family::G => self.d as usize,
            _ => 2 * self.d as usize - 1,
        }
    }

    /// Step sequence of the children of `v`, in construction order.
    ///
    /// `v` is assumed to be a member of the tree.
    pub fn child_steps(&self, v: &NodePath) -> Vec<Step> {
        let d = self.d;
        let k = d as usize - 1;
        let depth = v.depth();
        if depth >= self.height() {
            return Vec::new();
        }
        match self.family.base_colour() {
            None => {
                let Some(last) = v.last() else {
                    return (1..=d).map(|j| Step::plain(j, j - 1)).collect();
                };
                odd_or_even_children(d, k, depth, last).map(|(c1, c2)| Step::plain(c1, c2)).collect()
            }
            Some(base) => {
                let Some(last) = v.last() else {
                    let same = (1..=d).map(|j| Step::coloured(j, j - 1, base));
                    let other = (2..=d).map(|j| Step::coloured(j, j - 1, base.complement()));
                    return same.chain(other).collect();
                };
                if depth % 2 == 1 {
                    odd_or_even_children(d, k, depth, last)
                        .map(|(c1, c2)| Step::coloured(c1, c2, Colour::G))
                        .collect()
                } else {
                    // the parent of an even node is coloured
                    let steps = v.steps();
                    let colour = steps[depth - 2].colour.unwrap_or(base);
                    let same = odd_or_even_children(d, k, depth, last).map(|(c1, c2)| Step::coloured(c1, c2, colour));
                    let other = (1..d).map(|j| Step::coloured(j + 1, j, colour.complement()));
                    same.chain(other).collect()
                }
            }
        }
    }

    pub fn children(&self, v: &NodePath) -> Vec<NodePath> {
        self.child_steps(v).into_iter().map(|s| v.child(s)).collect()
    }

    /// Membership check by regenerating every step from its parent.
    pub fn contains(&self, v: &NodePath) -> bool {
        if v.depth() > self.height() {
            return false;
        }
        let mut prefix = NodePath::root();
        for step in v.steps() {
            if !self.child_steps(&prefix).contains(step) {
                return false;
            }
            prefix = prefix.child(*step);
        }
        true
    }

    pub fn ensure_contains(&self, v: &NodePath) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(format!("{v} in {}_{}", self.family, self.d)))
        }
    }

    pub fn degree(&self, v: &NodePath) -> usize {
        self.child_steps(v).len() + usize::from(!v.is_root())
    }

    /// Local input of `v`: `None` in `G_d`, the step colour in `H` (root grey).
    pub fn colour(&self, v: &NodePath) -> Option<Colour> {
        if !self.family.is_coloured() {
            return None;
        }
        Some(v.last().and_then(|s| s.colour).unwrap_or(Colour::G))
    }

    /// Label on the edge from `parent` down to its child whose last step is `step`.
    fn down_label(&self, step: &Step) -> PortLabel {
        match step.colour {
            None => PortLabel::Plain(step.b1),
            Some(c) => PortLabel::Tagged(step.b1, c),
        }
    }

    /// Label on the edge from a child (last step `step`) up to `parent`.
    fn up_label(&self, parent: &NodePath, step: &Step) -> PortLabel {
        match step.colour {
            None => PortLabel::Plain(step.b2),
            Some(_) => PortLabel::Tagged(step.b2, self.colour(parent).unwrap_or(Colour::G)),
        }
    }

    /// Generalised outgoing label π(u, v) of `u` towards its neighbour `v`.
    pub fn pi(&self, u: &NodePath, v: &NodePath) -> Result<PortLabel> {
        if u.is_parent_of(v) && self.contains(v) {
            Ok(self.down_label(v.last().expect("child has a step")))
        } else if v.is_parent_of(u) && self.contains(u) {
            Ok(self.up_label(v, u.last().expect("child has a step")))
        } else {
            Err(Error::NotAdjacent(u.to_string(), v.to_string()))
        }
    }

    /// All neighbours of `v`: the parent first, then children in construction order.
    pub fn neighbours(&self, v: &NodePath) -> Vec<TreeIncidence> {
        let mut out = Vec::with_capacity(self.max_degree());
        if let (Some(parent), Some(step)) = (v.parent(), v.last()) {
            out.push(TreeIncidence {
                out_port: self.up_label(&parent, step),
                back_port: self.down_label(step),
                node: parent,
            });
        }
        for step in self.child_steps(v) {
            out.push(TreeIncidence {
                out_port: self.down_label(&step),
                back_port: self.up_label(v, &step),
                node: v.child(step),
            });
        }
        out
    }

    /// The unique neighbour `u` of `v` with π(u, v) = `label`, if any.
    pub fn successor(&self, v: &NodePath, label: PortLabel) -> Option<NodePath> {
        if let (Some(parent), Some(step)) = (v.parent(), v.last()) {
            if self.down_label(step) == label {
                return Some(parent);
            }
        }
        self.child_steps(v)
            .into_iter()
            .find(|s| self.up_label(v, s) == label)
            .map(|s| v.child(s))
    }

    /// Number of nodes of the whole tree, by level sizes.
    pub fn node_count(&self) -> u128 {
        let mut total: u128 = 0;
        // branching is uniform within a level
        let mut representative = NodePath::root();
        let mut width: u128 = 1;
        for depth in 0..=self.height() {
            total += width;
            if depth == self.height() {
                break;
            }
            let children = self.children(&representative);
            width *= children.len() as u128;
            representative = children.into_iter().next().expect("inner level has children");
        }
        total
    }

    /// The generalised-to-proper collapse for this family.
    pub fn collapse(&self) -> PortCollapse {
        match self.family {
            Family::G => PortCollapse::for_g(self.d),
            _ => PortCollapse::for_h(self.d),
        }
    }

    /// Materializes the ball of `radius` around `center` with generalised
    /// labels and, for the `H` families, the colouring.
    ///
    /// Boundary nodes whose neighbourhood extends past the ball are marked
    /// truncated. Nodes are emitted in canonical order.
    pub fn build_ball(&self, center: &NodePath, radius: usize, max_nodes: usize) -> Result<PortNumberedGraph> {
        self.ensure_contains(center)?;
        let cap_error = || Error::ResourceCap {
            what: format!("ball of {}_{} with radius {radius}", self.family, self.d),
            limit: max_nodes,
        };
        let mut seen: HashSet<NodePath> = HashSet::from([center.clone()]);
        let mut boundary: BTreeSet<NodePath> = BTreeSet::new();
        let mut queue = VecDeque::from([(center.clone(), 0usize)]);
        while let Some((v, dist)) = queue.pop_front() {
            if dist == radius {
                if self.degree(&v) > 0 {
                    boundary.insert(v);
                }
                continue;
            }
            for inc in self.neighbours(&v) {
                if seen.insert(inc.node.clone()) {
                    if seen.len() > max_nodes {
                        return Err(cap_error());
                    }
                    queue.push_back((inc.node, dist + 1));
                }
            }
        }
        let mut nodes: Vec<NodePath> = seen.into_iter().collect();
        nodes.sort();

        let mut b = GraphBuilder::new();
        for v in &nodes {
            b.add_node(v.to_string(), self.colour(v))?;
        }
        for (i, v) in nodes.iter().enumerate() {
            let truncated = boundary.contains(v) && self.neighbours(v).iter().any(|inc| b.node_by_name(&inc.node.to_string()).is_none());
            if truncated {
                b.mark_truncated(i);
            }
            if let Some(parent) = v.parent() {
                if let Some(p) = b.node_by_name(&parent.to_string()) {
                    let step = v.last().expect("non-root");
                    b.add_edge(p, i, self.down_label(step), self.up_label(&parent, step))?;
                }
            }
        }
        b.build()
    }

    /// The whole tree as an explicit graph.
    pub fn build_full(&self, max_nodes: usize) -> Result<PortNumberedGraph> {
        if self.node_count() > max_nodes as u128 {
            return Err(Error::ResourceCap {
                what: format!("full {}_{} ({} nodes)", self.family, self.d, self.node_count()),
                limit: max_nodes,
            });
        }
        self.build_ball(&NodePath::root(), self.height(), max_nodes)
    }

    /// The whole tree with the collapsed, proper port numbering.
    pub fn build_full_collapsed(&self, max_nodes: usize) -> Result<PortNumberedGraph> {
        self.collapse().collapse_graph(&self.build_full(max_nodes)?)
    }
}

/// Child types of an odd node (first rule) or an even non-root node
/// (second rule), as `(c1, c2)` pairs in construction order.
fn odd_or_even_children(d: u32, k: usize, depth: usize, last: &Step) -> impl Iterator<Item = (u32, u32)> {
    let (b1, b2) = last.kind();
    let (c1s, c2s): (Vec<u32>, Vec<u32>) = if depth % 2 == 1 {
        let b2_plus = if b2 == 0 { 1 } else { b2 };
        (
            smallest_excluding(1..=d, b2_plus, k).collect(),
            smallest_excluding(1..=d, b1, k).collect(),
        )
    } else {
        (
            smallest_excluding(1..=d, b2, k).collect(),
            smallest_excluding(0..=d - 1, b1, k).collect(),
        )
    };
    c1s.into_iter().zip(c2s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NodePath {
        s.parse().unwrap()
    }

    fn kinds(steps: &[Step]) -> Vec<(u32, u32)> {
        steps.iter().map(Step::kind).collect()
    }

    #[test]
    fn root_children_of_g5() {
        let t = Tree::g(5).unwrap();
        assert_eq!(kinds(&t.child_steps(&NodePath::root())), vec![(1, 0), (2, 1), (3, 2), (4, 3), (5, 4)]);
    }

    #[test]
    fn odd_children_of_g5() {
        let t = Tree::g(5).unwrap();
        assert_eq!(kinds(&t.child_steps(&p("(1,0)"))), vec![(2, 2), (3, 3), (4, 4), (5, 5)]);
        assert_eq!(kinds(&t.child_steps(&p("(2,1)"))), vec![(2, 1), (3, 3), (4, 4), (5, 5)]);
    }

    #[test]
    fn h_root_children() {
        let t = Tree::hb(4).unwrap();
        let steps = t.child_steps(&NodePath::root());
        let black: Vec<_> = steps.iter().filter(|s| s.colour == Some(Colour::B)).map(Step::kind).collect();
        let white: Vec<_> = steps.iter().filter(|s| s.colour == Some(Colour::W)).map(Step::kind).collect();
        assert_eq!(black, vec![(1, 0), (2, 1), (3, 2), (4, 3)]);
        assert_eq!(white, vec![(2, 1), (3, 2), (4, 3)]);
    }

    #[test]
    fn h_even_grey_complement_children() {
        let t = Tree::hb(4).unwrap();
        let grey = t.children(&p("(1,0,B)"))[0].clone();
        assert_eq!(t.colour(&grey), Some(Colour::G));
        let other: Vec<_> = t
            .child_steps(&grey)
            .into_iter()
            .filter(|s| s.colour == Some(Colour::W))
            .map(|s| s.kind())
            .collect();
        assert_eq!(other, vec![(2, 1), (3, 2), (4, 3)]);
    }

    #[test]
    fn pi_on_root_edges() {
        let t = Tree::g(5).unwrap();
        let root = NodePath::root();
        assert_eq!(t.pi(&root, &p("(1,0)")).unwrap(), PortLabel::Plain(1));
        assert_eq!(t.pi(&p("(1,0)"), &root).unwrap(), PortLabel::Plain(0));
        assert_eq!(t.pi(&root, &p("(2,1)")).unwrap(), PortLabel::Plain(2));
        assert_eq!(t.pi(&p("(2,1)"), &root).unwrap(), PortLabel::Plain(1));
        assert!(t.pi(&p("(1,0)"), &p("(2,1)")).is_err());
        assert!(t.pi(&root, &p("(9,9)")).is_err());
    }

    #[test]
    fn pi_in_h_tags_receiver_colour() {
        let t = Tree::hb(3).unwrap();
        let v = p("(1,0,B)");
        let u = t.children(&v)[0].clone();
        let s = *u.last().unwrap();
        assert_eq!(t.pi(&v, &u).unwrap(), PortLabel::Tagged(s.b1, Colour::G));
        assert_eq!(t.pi(&u, &v).unwrap(), PortLabel::Tagged(s.b2, Colour::B));
        assert_eq!(t.pi(&v, &NodePath::root()).unwrap(), PortLabel::Tagged(0, Colour::G));
        assert_eq!(t.pi(&NodePath::root(), &v).unwrap(), PortLabel::Tagged(1, Colour::B));
    }

    #[test]
    fn successor_follows_back_labels() {
        let t = Tree::g(5).unwrap();
        assert_eq!(t.successor(&p("(1,0)"), PortLabel::Plain(2)), Some(p("(1,0)/(2,2)")));
        assert_eq!(t.successor(&p("(2,1)"), PortLabel::Plain(2)), Some(NodePath::root()));
        let mut leaf = NodePath::root();
        while let Some(first) = t.children(&leaf).into_iter().next() {
            leaf = first;
        }
        assert_eq!(leaf.depth(), 10);
        assert!(t.contains(&leaf));
        assert_eq!(t.degree(&leaf), 1);
        let back = t.neighbours(&leaf)[0].back_port;
        assert_eq!(t.successor(&leaf, PortLabel::Plain(9)), None);
        assert_eq!(t.successor(&leaf, back), leaf.parent());
    }

    #[test]
    fn membership_rejects_foreign_steps() {
        let t = Tree::g(3).unwrap();
        assert!(t.contains(&p("(1,0)/(2,2)")));
        assert!(!t.contains(&p("(1,0)/(1,1)")));
        assert!(!t.contains(&p("(4,3)")));
        assert!(Tree::g(4).unwrap().contains(&p("(4,3)")));
    }

    #[test]
    fn full_g2_has_nine_nodes() {
        let t = Tree::g(2).unwrap();
        assert_eq!(t.node_count(), 9);
        let g = t.build_full(100).unwrap();
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.edge_count(), 8);
        assert!(!g.has_truncation());
        assert!(!g.is_proper());
        assert!(t.build_full_collapsed(100).unwrap().is_proper());
    }

    #[test]
    fn radius_zero_ball_is_a_single_truncated_node() {
        let t = Tree::g(4).unwrap();
        let g = t.build_ball(&NodePath::root(), 0, 10).unwrap();
        assert_eq!(g.node_count(), 1);
        assert!(g.is_truncated(0));
        assert_eq!(t.degree(&NodePath::root()), 4);
    }

    #[test]
    fn ball_cap_names_parameters() {
        let t = Tree::g(5).unwrap();
        let err = t.build_ball(&NodePath::root(), 4, 50).unwrap_err();
        let msg = err.to_string();
        assert!(err.is_resource());
        assert!(msg.contains("G_5") && msg.contains("radius 4"), "{msg}");
    }

    #[test]
    fn degree_audit_h() {
        let t = Tree::hb(3).unwrap();
        let g = t.build_full(10_000).unwrap();
        for v in g.nodes() {
            let path: NodePath = g.name(v).parse().unwrap();
            let deg = g.degree(v);
            let expected = match (path.depth(), t.colour(&path)) {
                (0, _) => 5,
                (6, _) => 1,
                (_, Some(Colour::G)) => 5,
                _ => 3,
            };
            assert_eq!(deg, expected, "{path}");
        }
        assert_eq!(g.max_degree(), 5);
    }

    #[test]
    fn full_collapses_are_proper() {
        for t in [Tree::g(3), Tree::g(4), Tree::hb(2), Tree::hw(2), Tree::hb(3), Tree::hw(3)] {
            let t = t.unwrap();
            let g = t.build_full_collapsed(100_000).unwrap();
            assert!(g.is_proper(), "{}_{}: {:?}", t.family(), t.d(), g.properness_violation());
        }
    }
}
