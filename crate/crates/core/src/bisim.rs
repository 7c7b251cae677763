//! Bounded bisimilarity for set-reception algorithms.
//!
//! Two pointed instances are 0-bisimilar when the points have equal degree
//! and equal local input. They are r-bisimilar when, in addition, every
//! neighbour `w` of one point is matched by a neighbour `w'` of the other
//! point with the same outgoing label towards its point, such that `w` and
//! `w'` are (r-1)-bisimilar; and symmetrically.
//!
//! The checker works on anything implementing [`PortStructure`]: explicit
//! graphs (possibly truncated balls) and lazily generated trees. A query
//! that would need the neighbourhood of a truncated boundary node fails with
//! [`Error::TruncatedBall`] instead of answering.

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use crate::construction::{NodePath, PortCollapse, Tree};
use crate::error::{Error, Result};
use crate::graph::{Colour, PortLabel, PortNumberedGraph};

/// Default cap on the number of node pairs a single query may visit.
pub const DEFAULT_MAX_PAIRS: usize = 50_000_000;

/// Local structure needed to decide bisimilarity.
pub trait PortStructure {
    type Node: Clone + Eq + Hash + Debug;

    fn degree(&self, v: &Self::Node) -> Result<usize>;

    fn input(&self, v: &Self::Node) -> Option<Colour>;

    /// Every neighbour `w` of `v` paired with π(w, v).
    fn arrivals(&self, v: &Self::Node) -> Result<Vec<(Self::Node, PortLabel)>>;
}

impl PortStructure for PortNumberedGraph {
    type Node = usize;

    fn degree(&self, v: &usize) -> Result<usize> {
        if self.is_truncated(*v) {
            return Err(Error::TruncatedBall { node: self.name(*v).to_string() });
        }
        Ok(PortNumberedGraph::degree(self, *v))
    }

    fn input(&self, v: &usize) -> Option<Colour> {
        PortNumberedGraph::input(self, *v)
    }

    fn arrivals(&self, v: &usize) -> Result<Vec<(usize, PortLabel)>> {
        if self.is_truncated(*v) {
            return Err(Error::TruncatedBall { node: self.name(*v).to_string() });
        }
        Ok(self.incidences(*v).iter().map(|inc| (inc.node, inc.back_port)).collect())
    }
}

/// A lazily generated tree, optionally seen through a port collapse.
#[derive(Clone, Debug)]
pub struct LabelledTree {
    tree: Tree,
    collapse: Option<PortCollapse>,
}

impl LabelledTree {
    /// The tree with its generalised numbering.
    pub fn generalised(tree: Tree) -> LabelledTree {
        LabelledTree { tree, collapse: None }
    }

    /// The tree with its family's collapse applied to every label.
    pub fn collapsed(tree: Tree) -> LabelledTree {
        LabelledTree { collapse: Some(tree.collapse()), tree }
    }

    pub fn with_collapse(tree: Tree, collapse: PortCollapse) -> LabelledTree {
        LabelledTree { tree, collapse: Some(collapse) }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    /// Label of a port at `owner`, collapsed if requested.
    fn label(&self, owner: &NodePath, l: PortLabel) -> Result<PortLabel> {
        match &self.collapse {
            None => Ok(l),
            Some(c) => c.apply_at(l, self.tree.degree(owner)),
        }
    }
}

impl PortStructure for LabelledTree {
    type Node = NodePath;

    fn degree(&self, v: &NodePath) -> Result<usize> {
        Ok(self.tree.degree(v))
    }

    fn input(&self, v: &NodePath) -> Option<Colour> {
        self.tree.colour(v)
    }

    fn arrivals(&self, v: &NodePath) -> Result<Vec<(NodePath, PortLabel)>> {
        self.tree
            .neighbours(v)
            .into_iter()
            .map(|inc| {
                let label = self.label(&inc.node, inc.back_port)?;
                Ok((inc.node, label))
            })
            .collect()
    }
}

/// A graph together with a distinguished node.
#[derive(Clone, Debug)]
pub struct PointedInstance<'a, S: PortStructure> {
    pub structure: &'a S,
    pub point: S::Node,
}

impl<'a, S: PortStructure> PointedInstance<'a, S> {
    pub fn new(structure: &'a S, point: S::Node) -> Self {
        PointedInstance { structure, point }
    }
}

/// Largest bisimilarity radius found by [`Bisimulation::max_radius`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BisimRadius {
    /// Not even 0-bisimilar.
    None,
    /// Bisimilar at this radius and not at the next.
    Exact(usize),
    /// Bisimilar at the cap; the true radius may be larger.
    AtLeast(usize),
}

impl BisimRadius {
    /// Smallest radius at which bisimilarity fails, if one was found.
    pub fn failing_radius(self) -> Option<usize> {
        match self {
            BisimRadius::None => Some(0),
            BisimRadius::Exact(r) => Some(r + 1),
            BisimRadius::AtLeast(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Memo {
    similar_up_to: Option<usize>,
    dissimilar_from: Option<usize>,
}

impl Memo {
    fn lookup(&self, r: usize) -> Option<bool> {
        if self.similar_up_to.is_some_and(|s| s >= r) {
            Some(true)
        } else if self.dissimilar_from.is_some_and(|f| f <= r) {
            Some(false)
        } else {
            None
        }
    }

    fn record(&mut self, r: usize, similar: bool) {
        if similar {
            self.similar_up_to = Some(self.similar_up_to.map_or(r, |s| s.max(r)));
        } else {
            self.dissimilar_from = Some(self.dissimilar_from.map_or(r, |f| f.min(r)));
        }
    }
}

/// Bisimilarity checker between two structures, with a memo shared across
/// queries.
pub struct Bisimulation<'a, A: PortStructure, B: PortStructure> {
    left: &'a A,
    right: &'a B,
    memo: HashMap<(A::Node, B::Node), Memo>,
    max_pairs: usize,
}

impl<'a, A: PortStructure, B: PortStructure> Bisimulation<'a, A, B> {
    pub fn new(left: &'a A, right: &'a B) -> Self {
        Bisimulation { left, right, memo: HashMap::new(), max_pairs: DEFAULT_MAX_PAIRS }
    }

    pub fn with_max_pairs(mut self, max_pairs: usize) -> Self {
        self.max_pairs = max_pairs;
        self
    }

    /// Number of memoized pairs.
    pub fn cache_size(&self) -> usize {
        self.memo.len()
    }

    fn base(&self, x: &A::Node, y: &B::Node) -> Result<bool> {
        Ok(self.left.input(x) == self.right.input(y) && self.left.degree(x)? == self.right.degree(y)?)
    }

    /// Decides r-bisimilarity of `x` (left) and `y` (right).
    pub fn bisimilar(&mut self, x: &A::Node, y: &B::Node, r: usize) -> Result<bool> {
        let start = (x.clone(), y.clone());
        if let Some(v) = self.memo.get(&start).and_then(|m| m.lookup(r)) {
            return Ok(v);
        }

        // levels[k] holds the pairs that must be decided at radius r-k
        let mut levels: Vec<Vec<(A::Node, B::Node)>> = vec![vec![start]];
        let mut visited = 1usize;
        for k in 0..r {
            let radius = r - k;
            let mut next = Vec::new();
            let mut seen = HashSet::new();
            for (p, q) in &levels[k] {
                if self.memo.get(&(p.clone(), q.clone())).and_then(|m| m.lookup(radius)).is_some() {
                    continue;
                }
                if !self.base(p, q)? {
                    continue;
                }
                let right_arrivals = self.right.arrivals(q)?;
                for (w, a) in self.left.arrivals(p)? {
                    for (w2, b) in &right_arrivals {
                        if a == *b {
                            let pair = (w.clone(), w2.clone());
                            if seen.insert(pair.clone()) {
                                next.push(pair);
                            }
                        }
                    }
                }
            }
            visited += next.len();
            if visited > self.max_pairs {
                return Err(Error::ResourceCap { what: "bisimulation pair exploration".into(), limit: self.max_pairs });
            }
            levels.push(next);
        }

        for k in (0..=r).rev() {
            let radius = r - k;
            for (p, q) in &levels[k] {
                let key = (p.clone(), q.clone());
                if self.memo.get(&key).and_then(|m| m.lookup(radius)).is_some() {
                    continue;
                }
                let similar = self.base(p, q)? && (radius == 0 || self.neighbours_match(p, q, radius - 1)?);
                self.memo.entry(key).or_default().record(radius, similar);
            }
        }
        Ok(self.memo[&(x.clone(), y.clone())].lookup(r).expect("decided above"))
    }

    /// Both back-and-forth conditions, using already decided (r-1) results.
    fn neighbours_match(&self, p: &A::Node, q: &B::Node, inner: usize) -> Result<bool> {
        let left = self.left.arrivals(p)?;
        let right = self.right.arrivals(q)?;
        let similar = |w: &A::Node, w2: &B::Node| {
            self.memo
                .get(&(w.clone(), w2.clone()))
                .and_then(|m| m.lookup(inner))
                .unwrap_or(false)
        };
        let forth = left
            .iter()
            .all(|(w, a)| right.iter().any(|(w2, b)| a == b && similar(w, w2)));
        let back = right
            .iter()
            .all(|(w2, b)| left.iter().any(|(w, a)| a == b && similar(w, w2)));
        Ok(forth && back)
    }

    /// Largest r ≤ `cap` with `x` and `y` r-bisimilar.
    pub fn max_radius(&mut self, x: &A::Node, y: &B::Node, cap: usize) -> Result<BisimRadius> {
        if self.bisimilar(x, y, cap)? {
            return Ok(BisimRadius::AtLeast(cap));
        }
        let mut best = BisimRadius::None;
        for r in 0..cap {
            if self.bisimilar(x, y, r)? {
                best = BisimRadius::Exact(r);
            } else {
                break;
            }
        }
        Ok(best)
    }
}

/// One-shot r-bisimilarity of two pointed instances.
pub fn bisimilar<A: PortStructure, B: PortStructure>(
    a: &PointedInstance<'_, A>,
    b: &PointedInstance<'_, B>,
    r: usize,
) -> Result<bool> {
    Bisimulation::new(a.structure, b.structure).bisimilar(&a.point, &b.point, r)
}

/// One-shot maximal bisimilarity radius, capped.
pub fn max_bisim_radius<A: PortStructure, B: PortStructure>(
    a: &PointedInstance<'_, A>,
    b: &PointedInstance<'_, B>,
    cap: usize,
) -> Result<BisimRadius> {
    Bisimulation::new(a.structure, b.structure).max_radius(&a.point, &b.point, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn p(s: &str) -> NodePath {
        s.parse().unwrap()
    }

    #[test]
    fn reflexive_on_trees() {
        let t = LabelledTree::generalised(Tree::g(3).unwrap());
        let mut b = Bisimulation::new(&t, &t);
        for node in ["∅", "(1,0)", "(2,1)/(1,1)"] {
            assert!(b.bisimilar(&p(node), &p(node), 7).unwrap());
            assert_eq!(b.max_radius(&p(node), &p(node), 7).unwrap(), BisimRadius::AtLeast(7));
        }
    }

    #[test]
    fn root_neighbours_of_g_trees() {
        for d in 2..=4u32 {
            let t = LabelledTree::generalised(Tree::g(d).unwrap());
            let mut b = Bisimulation::new(&t, &t);
            let k = 2 * d as usize - 3;
            assert!(b.bisimilar(&p("(1,0)"), &p("(2,1)"), k).unwrap());
            assert!(!b.bisimilar(&p("(1,0)"), &p("(2,1)"), k + 1).unwrap());
        }
    }

    #[test]
    fn degree_or_input_mismatch_is_not_zero_bisimilar() {
        let mut gb = GraphBuilder::new();
        let a = gb.add_node("a", Some(Colour::B)).unwrap();
        let c = gb.add_node("c", Some(Colour::W)).unwrap();
        gb.add_edge(a, c, PortLabel::Plain(1), PortLabel::Plain(1)).unwrap();
        let g = gb.build().unwrap();
        let mut b = Bisimulation::new(&g, &g);
        assert!(!b.bisimilar(&a, &c, 0).unwrap());
        assert_eq!(b.max_radius(&a, &c, 3).unwrap(), BisimRadius::None);
        assert_eq!(BisimRadius::None.failing_radius(), Some(0));
    }

    #[test]
    fn truncated_ball_refuses_deep_queries() {
        let tree = Tree::g(3).unwrap();
        let ball = tree.build_ball(&NodePath::root(), 2, 1000).unwrap();
        let u = ball.node_by_name("(1,0)").unwrap();
        let w = ball.node_by_name("(2,1)").unwrap();
        let mut b = Bisimulation::new(&ball, &ball);
        assert!(b.bisimilar(&u, &w, 0).unwrap());
        assert!(matches!(b.bisimilar(&u, &w, 3), Err(Error::TruncatedBall { .. })));
    }

    #[test]
    fn pair_cap_is_enforced() {
        let t = LabelledTree::generalised(Tree::g(4).unwrap());
        let mut b = Bisimulation::new(&t, &t).with_max_pairs(3);
        assert!(matches!(b.bisimilar(&p("(1,0)"), &p("(2,1)"), 5), Err(Error::ResourceCap { .. })));
    }
}
