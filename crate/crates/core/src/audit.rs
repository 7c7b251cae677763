//! Seeded structural and semantic audits of the lower-bound trees.
//!
//! Each suite draws its cases from one seeded generator and stops at the
//! first failing case, reporting it.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::bisim::{BisimRadius, Bisimulation, LabelledTree};
use crate::construction::{Family, NodePath, Tree};
use crate::error::Result;
use crate::graph::{Colour, PortLabel, PortNumberedGraph};
use crate::machine::execute;
use crate::random::{random_node, SeededRng};
use crate::view::{canonical_sv, CanonicalSv, ViewId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    /// Cases whose premise held, for implication-shaped properties.
    pub nonvacuous: usize,
    pub failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &str) -> SuiteResult {
        SuiteResult { name: name.to_string(), cases: 0, passed: 0, nonvacuous: 0, failure: None }
    }

    pub fn ok(&self) -> bool {
        self.failure.is_none() && self.passed == self.cases
    }

    fn record(&mut self, outcome: std::result::Result<bool, String>) -> bool {
        self.cases += 1;
        match outcome {
            Ok(premise) => {
                self.passed += 1;
                self.nonvacuous += usize::from(premise);
                true
            }
            Err(msg) => {
                self.failure = Some(msg);
                false
            }
        }
    }
}

/// A node at exactly `depth` (or the deepest reachable), by uniform child choices.
pub fn random_node_at_depth(rng: &mut SeededRng, tree: &Tree, depth: usize) -> NodePath {
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

fn random_tree(rng: &mut SeededRng, g_max: u32, h_max: u32) -> Tree {
    let family = [Family::G, Family::HB, Family::HW][rng.gen_range(0..3)];
    let d = match family {
        Family::G => rng.gen_range(2..=g_max),
        _ => rng.gen_range(2..=h_max),
    };
    Tree::new(family, d).expect("d in range")
}

/// Degree law of the trees and nesting of `G_d` inside `G_{d+1}`.
pub fn degree_and_nesting(rng: &mut SeededRng, cases: usize) -> SuiteResult {
    let mut s = SuiteResult::new("degree law and nesting");
    for _ in 0..cases {
        let t = random_tree(rng, 5, 4);
        let v = random_node(rng, &t);
        let d = t.d() as usize;
        let deg = t.degree(&v);
        let outcome = (|| {
            let expected: &[usize] = match (t.family(), v.depth()) {
                (_, x) if x == t.height() => &[1],
                (Family::G, _) => &[d],
                (_, 0) => &[2 * d - 1],
                _ if t.colour(&v) == Some(Colour::G) => &[2 * d - 1],
                _ => &[d],
            };
            if !expected.contains(&deg) {
                return Err(format!("{}_{} {v}: degree {deg}, expected {expected:?}", t.family(), d));
            }
            if t.family() == Family::G {
                let bigger = Tree::g(t.d() + 1).expect("d+1 in range");
                if !bigger.contains(&v) {
                    return Err(format!("{v} of G_{d} missing from G_{}", d + 1));
                }
                for inc in t.neighbours(&v) {
                    if bigger.pi(&v, &inc.node).ok() != Some(inc.out_port) {
                        return Err(format!("label of {v}->{} changes in G_{}", inc.node, d + 1));
                    }
                }
            }
            Ok(true)
        })();
        if !s.record(outcome) {
            break;
        }
    }
    s
}

/// No two neighbours of a node of `G_d` share a back-label. (The `H` roots
/// deliberately have repeats: both colours' `(j,j-1)` children answer `(j-1,G)`.)
pub fn label_uniqueness(rng: &mut SeededRng, cases: usize) -> SuiteResult {
    let mut s = SuiteResult::new("per-label neighbour uniqueness");
    for _ in 0..cases {
        let t = Tree::g(rng.gen_range(2..=5)).expect("d in range");
        let v = random_node(rng, &t);
        let labels: Vec<PortLabel> = t.neighbours(&v).into_iter().map(|i| i.back_port).collect();
        let distinct: BTreeSet<PortLabel> = labels.iter().copied().collect();
        let outcome = if distinct.len() == labels.len() {
            Ok(true)
        } else {
            Err(format!("{}_{} {v}: repeated back-label in {labels:?}", t.family(), t.d()))
        };
        if !s.record(outcome) {
            break;
        }
    }
    s
}

/// Back-label sets of internal nodes of `G_d`.
pub fn back_label_coverage(rng: &mut SeededRng, cases: usize) -> SuiteResult {
    let mut s = SuiteResult::new("back-label coverage");
    for _ in 0..cases {
        let d = rng.gen_range(2..=5u32);
        let t = Tree::g(d).expect("d in range");
        let depth = rng.gen_range(0..t.height());
        let v = random_node_at_depth(rng, &t, depth);
        let incs = t.neighbours(&v);
        let labels: BTreeSet<u32> = incs.iter().map(|i| i.back_port.number()).collect();
        let odd: BTreeSet<u32> = (1..=d).collect();
        let even_a: BTreeSet<u32> = (0..d).collect();
        let even_b: BTreeSet<u32> = (0..d - 1).chain([d]).collect();
        let outcome = if depth % 2 == 1 {
            if labels == odd {
                Ok(true)
            } else {
                Err(format!("G_{d} odd {v}: back-labels {labels:?}"))
            }
        } else if labels != even_a && labels != even_b {
            Err(format!("G_{d} even {v}: back-labels {labels:?}"))
        } else {
            match incs.iter().find(|i| i.back_port.number() == d) {
                Some(i) if Some(&i.node) != v.parent().as_ref() => {
                    Err(format!("G_{d} even {v}: label {d} comes from a child"))
                }
                _ => Ok(true),
            }
        };
        if !s.record(outcome) {
            break;
        }
    }
    s
}

fn same_depth_triple(rng: &mut SeededRng, t: &Tree) -> [NodePath; 3] {
    let depth = rng.gen_range(0..=t.height());
    [(); 3].map(|_| random_node_at_depth(rng, t, depth))
}

/// Monotonicity, symmetry and transitivity of bisimilarity on same-depth triples.
pub fn bisim_laws(rng: &mut SeededRng, cases: usize) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("bisimilarity monotonicity, symmetry, transitivity");
    let mut structures: HashMap<Tree, LabelledTree> = HashMap::new();
    for _ in 0..cases {
        let t = random_tree(rng, 4, 3);
        let lt = structures.entry(t).or_insert_with(|| LabelledTree::generalised(t));
        let [x, y, z] = same_depth_triple(rng, &t);
        let cap = 2 * t.d() as usize;
        let r = rng.gen_range(0..=cap);
        let mut b = Bisimulation::new(&*lt, &*lt);
        let outcome = (|| -> Result<std::result::Result<bool, String>> {
            let xy = b.bisimilar(&x, &y, r)?;
            let yx = Bisimulation::new(&*lt, &*lt).bisimilar(&y, &x, r)?;
            if xy != yx {
                return Ok(Err(format!("{x} vs {y} at {r}: asymmetric")));
            }
            let radius = Bisimulation::new(&*lt, &*lt).max_radius(&x, &y, cap)?;
            for t_ in 0..=cap {
                let expect = match radius {
                    BisimRadius::None => false,
                    BisimRadius::Exact(k) => t_ <= k,
                    BisimRadius::AtLeast(_) => true,
                };
                if Bisimulation::new(&*lt, &*lt).bisimilar(&x, &y, t_)? != expect {
                    return Ok(Err(format!("{x} vs {y}: not monotone at radius {t_} ({radius:?})")));
                }
            }
            let yz = b.bisimilar(&y, &z, r)?;
            if xy && yz && !b.bisimilar(&x, &z, r)? {
                return Ok(Err(format!("{x} ~ {y} ~ {z} at {r} but not {x} ~ {z}")));
            }
            Ok(Ok(xy && yz))
        })()?;
        if !s.record(outcome) {
            break;
        }
    }
    Ok(s)
}

/// Bisimilarity under generalised labels survives the collapse, on `G_d`,
/// `H_{C,d}`, and across `H_{B,d}` / `H_{W,d}`, for d in {2,3}.
pub fn collapse_preservation(rng: &mut SeededRng, cases: usize) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("collapse preservation");
    for _ in 0..cases {
        let d = rng.gen_range(2..=3u32);
        let (ta, tb) = match rng.gen_range(0..4) {
            0 => (Tree::g(d)?, Tree::g(d)?),
            1 => (Tree::hb(d)?, Tree::hb(d)?),
            2 => (Tree::hw(d)?, Tree::hw(d)?),
            _ => (Tree::hb(d)?, Tree::hw(d)?),
        };
        let depth = rng.gen_range(0..=ta.height());
        let x = random_node_at_depth(rng, &ta, depth);
        let y = random_node_at_depth(rng, &tb, depth);
        let r = rng.gen_range(0..=2 * d as usize);
        let (ga, gb) = (LabelledTree::generalised(ta), LabelledTree::generalised(tb));
        let (ca, cb) = (LabelledTree::collapsed(ta), LabelledTree::collapsed(tb));
        let before = Bisimulation::new(&ga, &gb).bisimilar(&x, &y, r)?;
        let after = Bisimulation::new(&ca, &cb).bisimilar(&x, &y, r)?;
        let outcome = if before && !after {
            Err(format!("{}_{d} {x} vs {}_{d} {y}: bisimilar at {r} before collapse only", ta.family(), tb.family()))
        } else {
            Ok(before)
        };
        if !s.record(outcome) {
            break;
        }
    }
    Ok(s)
}

struct Executed {
    graph: PortNumberedGraph,
    states: Vec<Vec<ViewId>>,
}

fn run_views(machine: &CanonicalSv, tree: &Tree, rounds: usize) -> Result<Executed> {
    let graph = tree.build_full_collapsed(usize::MAX)?;
    let trace = execute(machine, &graph, None, rounds)?;
    let states = (0..=rounds).map(|r| trace.states_at(r).to_vec()).collect();
    Ok(Executed { graph, states })
}

/// Canonical views agree exactly up to the maximal bisimilarity radius.
///
/// Samples until `pairs` distinct pairs bisimilar at radius ≥ 1 are found
/// (or `20 * pairs` draws pass). A pair counts as passing when views agree
/// at every round up to the radius and differ at the next one.
pub fn executor_agreement(rng: &mut SeededRng, pairs: usize) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("executor agreement");
    let settings: Vec<(Tree, Tree)> = vec![
        (Tree::g(2)?, Tree::g(2)?),
        (Tree::g(3)?, Tree::g(3)?),
        (Tree::hb(2)?, Tree::hw(2)?),
        (Tree::hb(3)?, Tree::hb(3)?),
        (Tree::hb(3)?, Tree::hw(3)?),
    ];
    let mut runs = Vec::new();
    for (ta, tb) in &settings {
        let rounds = 2 * ta.d() as usize + 1;
        let machine = canonical_sv(ta.max_degree());
        let ea = run_views(&machine, ta, rounds)?;
        let eb = run_views(&machine, tb, rounds)?;
        runs.push((ta, tb, rounds, ea, eb));
    }
    let mut draws = 0;
    while s.cases < pairs && draws < 20 * pairs {
        draws += 1;
        let (ta, tb, rounds, ea, eb) = &runs[rng.gen_range(0..runs.len())];
        let depth = rng.gen_range(0..ta.height());
        let x = random_node_at_depth(rng, ta, depth);
        let y = random_node_at_depth(rng, tb, depth);
        let (la, lb) = (LabelledTree::collapsed(**ta), LabelledTree::collapsed(**tb));
        let radius = Bisimulation::new(&la, &lb).max_radius(&x, &y, *rounds)?;
        let agree_through = match radius {
            BisimRadius::Exact(k) if k >= 1 => k,
            BisimRadius::AtLeast(k) => k,
            _ => continue,
        };
        let xi = ea.graph.node_by_name(&x.to_string()).expect("full tree holds every node");
        let yi = eb.graph.node_by_name(&y.to_string()).expect("full tree holds every node");
        let mut outcome = Ok(true);
        for r in 0..=*rounds {
            let equal = ea.states[r][xi] == eb.states[r][yi];
            if equal != (r <= agree_through) {
                outcome = Err(format!(
                    "{}_{} {x} vs {}_{} {y}: radius {radius:?} but views {} at round {r}",
                    ta.family(),
                    ta.d(),
                    tb.family(),
                    tb.d(),
                    if equal { "agree" } else { "differ" }
                ));
                break;
            }
        }
        if !s.record(outcome) {
            break;
        }
    }
    if s.cases < pairs && s.failure.is_none() {
        s.failure = Some(format!("only {} bisimilar pairs found in {draws} draws", s.cases));
    }
    Ok(s)
}

/// Paths of `H_{B,d}` starting with a step of first label ≥ 2, and the root,
/// are bisimilar to the same path in `H_{W,d}` up to radius 2d-2.
pub fn h_mapping(rng: &mut SeededRng, cases: usize) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("black-to-white mapping radius");
    let mut checkers = HashMap::new();
    for _ in 0..cases {
        let d = rng.gen_range(2..=3u32);
        let (hb, hw) = checkers
            .entry(d)
            .or_insert_with(|| (LabelledTree::collapsed(Tree::hb(d).unwrap()), LabelledTree::collapsed(Tree::hw(d).unwrap())));
        let tb = *hb.tree();
        let v = loop {
            let v = random_node(rng, &tb);
            if v.steps().first().is_none_or(|st| st.b1 >= 2) {
                break v;
            }
        };
        let cap = 2 * d as usize - 2;
        let outcome = if !hw.tree().contains(&v) {
            Err(format!("{v} has no image in HW_{d}"))
        } else {
            match Bisimulation::new(&*hb, &*hw).max_radius(&v, &v, cap)? {
                BisimRadius::AtLeast(_) => Ok(true),
                other => Err(format!("d={d} {v}: radius {other:?}, expected at least {cap}")),
            }
        };
        if !s.record(outcome) {
            break;
        }
    }
    Ok(s)
}

/// Dropping colours maps the single-colour-plus-grey part of `H_{C,d}` onto `G_d`.
pub fn colour_drop_isomorphism(d: u32) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("colour-drop isomorphism");
    let g = Tree::g(d)?;
    let g_nodes: BTreeSet<NodePath> = collect(&g, |_| true);
    for h in [Tree::hb(d)?, Tree::hw(d)?] {
        let c = h.family().base_colour().expect("coloured family");
        let keep = |v: &NodePath| v.steps().iter().all(|st| matches!(st.colour, Some(x) if x == c || x == Colour::G));
        let sub = collect(&h, keep);
        let image: BTreeSet<NodePath> = sub.iter().map(NodePath::uncoloured).collect();
        let mut outcome = if image == g_nodes && image.len() == sub.len() {
            Ok(true)
        } else {
            Err(format!("{}_{d}: {} nodes map onto {} of {} in G_{d}", h.family(), sub.len(), image.len(), g_nodes.len()))
        };
        if outcome.is_ok() {
            for v in sub.iter().filter(|v| !v.is_root()) {
                let p = v.parent().expect("non-root");
                let (hl, gl) = (h.pi(&p, v)?, g.pi(&p.uncoloured(), &v.uncoloured())?);
                let (hu, gu) = (h.pi(v, &p)?, g.pi(&v.uncoloured(), &p.uncoloured())?);
                if hl.number() != gl.number() || hu.number() != gu.number() {
                    outcome = Err(format!("{}_{d} edge {p} - {v}: labels {hl}/{hu} vs {gl}/{gu}", h.family()));
                    break;
                }
            }
        }
        s.record(outcome);
    }
    Ok(s)
}

fn collect(t: &Tree, keep: impl Fn(&NodePath) -> bool) -> BTreeSet<NodePath> {
    let mut out = BTreeSet::new();
    let mut stack = vec![NodePath::root()];
    while let Some(v) = stack.pop() {
        if !keep(&v) {
            continue;
        }
        stack.extend(t.children(&v));
        out.insert(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;

    #[test]
    fn structural_suites_pass_briefly() {
        let mut rng = seeded(1);
        assert!(degree_and_nesting(&mut rng, 50).ok());
        let u = label_uniqueness(&mut rng, 50);
        assert!(u.ok(), "{u:?}");
        assert!(back_label_coverage(&mut rng, 50).ok());
        assert!(colour_drop_isomorphism(2).unwrap().ok());
    }

    #[test]
    fn semantic_suites_pass_briefly() {
        let mut rng = seeded(2);
        let laws = bisim_laws(&mut rng, 20).unwrap();
        assert!(laws.ok(), "{laws:?}");
        let agree = executor_agreement(&mut rng, 10).unwrap();
        assert!(agree.ok(), "{agree:?}");
        assert!(h_mapping(&mut rng, 10).unwrap().ok());
    }
}
