//! Compatible and separating walk pairs in `G_d`.
//!
//! Both walks start at the root's neighbours `((1,0))` and `((2,1))` and
//! step in lockstep so that every step arrives along the same back-label
//! π(v_j, v_{j-1}) on both sides. A pair separates when the last node of one
//! walk has a neighbour whose back-label the other walk's last node cannot
//! match. Since a back-label determines the successor uniquely, the search
//! is a breadth-first search over node pairs.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::construction::{NodePath, Step, Tree};
use crate::error::{Error, Result};
use crate::graph::PortLabel;

/// Default cap on visited pair states.
pub const DEFAULT_MAX_PAIRS: usize = 50_000_000;

/// The two start nodes, `((1,0))` and `((2,1))`.
pub fn start_nodes() -> (NodePath, NodePath) {
    (
        NodePath::from_steps(vec![Step::plain(1, 0)]),
        NodePath::from_steps(vec![Step::plain(2, 1)]),
    )
}

/// The unmatched neighbour that makes a pair separating.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Separation {
    /// Neighbour of the last node of the separating side.
    #[serde(serialize_with = "ser_display")]
    pub extra: NodePath,
    /// Its back-label, absent on the other side.
    #[serde(serialize_with = "ser_display")]
    pub label: PortLabel,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_display_vec<T: std::fmt::Display, S: serde::Serializer>(v: &[T], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalkPair {
    #[serde(serialize_with = "ser_display_vec")]
    pub walk1: Vec<NodePath>,
    #[serde(serialize_with = "ser_display_vec")]
    pub walk2: Vec<NodePath>,
    /// Shared back-labels π(v_j, v_{j-1}), j = 1..k.
    #[serde(serialize_with = "ser_display_vec")]
    pub labels: Vec<PortLabel>,
    /// Set when the unmatched neighbour sits on `walk2`'s side.
    pub mirrored: bool,
    pub separation: Option<Separation>,
}

impl WalkPair {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Drops the last `steps` steps of both walks and any separation witness.
    pub fn truncated(&self, steps: usize) -> WalkPair {
        let k = self.len().saturating_sub(steps);
        WalkPair {
            walk1: self.walk1[..=k].to_vec(),
            walk2: self.walk2[..=k].to_vec(),
            labels: self.labels[..k].to_vec(),
            mirrored: false,
            separation: None,
        }
    }

    /// The same pair with the roles of the two walks exchanged.
    pub fn swapped(&self) -> WalkPair {
        WalkPair {
            walk1: self.walk2.clone(),
            walk2: self.walk1.clone(),
            labels: self.labels.clone(),
            mirrored: !self.mirrored,
            separation: self.separation.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkStatus {
    /// Compatible but not separating.
    Pcw,
    /// Separating.
    Psw,
    Invalid(String),
}

/// How strictly [`verify_psw`] reads the start and separation conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reading {
    /// `walk1` starts at `((1,0))` and owns the unmatched neighbour.
    Strict,
    /// Either walk may start at either node and own the unmatched neighbour.
    Symmetric,
}

/// Labels present at `x` but not at `y`, each with the neighbour carrying it.
fn unmatched(tree: &Tree, x: &NodePath, y: &NodePath) -> Vec<Separation> {
    let at_y: BTreeSet<PortLabel> = tree.neighbours(y).into_iter().map(|i| i.back_port).collect();
    let mut out: Vec<Separation> = tree
        .neighbours(x)
        .into_iter()
        .filter(|i| !at_y.contains(&i.back_port))
        .map(|i| Separation { extra: i.node, label: i.back_port })
        .collect();
    out.sort_by_key(|s| s.label);
    out
}

/// Result of the critical-walk search.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalPsw {
    pub k: usize,
    pub pair: WalkPair,
    pub visited_pairs: usize,
}

/// Breadth-first search for a shortest separating pair in `G_d`.
///
/// Searches up to depth `2d-1`; finding nothing by then contradicts the
/// construction and is reported as an internal inconsistency.
pub fn find_critical_psw(d: u32, max_pairs: usize) -> Result<CriticalPsw> {
    let tree = Tree::g(d)?;
    let horizon = 2 * d as usize - 1;
    let (s1, s2) = start_nodes();

    type Pair = (NodePath, NodePath);
    let mut parent: HashMap<Pair, Option<(Pair, PortLabel)>> = HashMap::new();
    parent.insert((s1.clone(), s2.clone()), None);
    let mut frontier: VecDeque<Pair> = VecDeque::from([(s1, s2)]);

    for depth in 0..=horizon {
        for (x, y) in &frontier {
            let forward = unmatched(&tree, x, y);
            let (mirrored, sep) = match forward.into_iter().next() {
                Some(s) => (false, s),
                None => match unmatched(&tree, y, x).into_iter().next() {
                    Some(s) => (true, s),
                    None => continue,
                },
            };
            let mut pair = reconstruct(&parent, (x.clone(), y.clone()));
            pair.mirrored = mirrored;
            pair.separation = Some(sep);
            debug_assert_eq!(pair.len(), depth);
            return Ok(CriticalPsw { k: depth, pair, visited_pairs: parent.len() });
        }
        if depth == horizon {
            break;
        }
        let mut next = VecDeque::new();
        for (x, y) in frontier {
            let mut arrivals: Vec<(PortLabel, NodePath)> =
                tree.neighbours(&x).into_iter().map(|i| (i.back_port, i.node)).collect();
            arrivals.sort_by_key(|(l, _)| *l);
            for (label, nx) in arrivals {
                let Some(ny) = tree.successor(&y, label) else { continue };
                let key = (nx, ny);
                if !parent.contains_key(&key) {
                    parent.insert(key.clone(), Some(((x.clone(), y.clone()), label)));
                    if parent.len() > max_pairs {
                        return Err(Error::ResourceCap { what: format!("walk-pair search in G_{d}"), limit: max_pairs });
                    }
                    next.push_back(key);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Err(Error::InternalInconsistency(format!(
        "no separating walk pair in G_{d} within {horizon} steps"
    )))
}

type PairKey = (NodePath, NodePath);

fn reconstruct(
    parent: &HashMap<PairKey, Option<(PairKey, PortLabel)>>,
    end: (NodePath, NodePath),
) -> WalkPair {
    let mut walk1 = vec![end.0.clone()];
    let mut walk2 = vec![end.1.clone()];
    let mut labels = Vec::new();
    let mut cur = end;
    while let Some(Some((prev, label))) = parent.get(&cur) {
        walk1.push(prev.0.clone());
        walk2.push(prev.1.clone());
        labels.push(*label);
        cur = prev.clone();
    }
    walk1.reverse();
    walk2.reverse();
    labels.reverse();
    WalkPair { walk1, walk2, labels, mirrored: false, separation: None }
}

/// Follows `labels` from the start nodes, if both walks can.
///
/// The returned pair carries a separation witness when its end separates.
pub fn walk_pair_from_labels(d: u32, labels: &[PortLabel]) -> Result<Option<WalkPair>> {
    let tree = Tree::g(d)?;
    let (mut x, mut y) = start_nodes();
    let mut walk1 = vec![x.clone()];
    let mut walk2 = vec![y.clone()];
    for &label in labels {
        match (tree.successor(&x, label), tree.successor(&y, label)) {
            (Some(nx), Some(ny)) => {
                x = nx;
                y = ny;
            }
            _ => return Ok(None),
        }
        walk1.push(x.clone());
        walk2.push(y.clone());
    }
    let (mirrored, separation) = match unmatched(&tree, &x, &y).into_iter().next() {
        Some(s) => (false, Some(s)),
        None => {
            let back = unmatched(&tree, &y, &x).into_iter().next();
            (back.is_some(), back)
        }
    };
    Ok(Some(WalkPair { walk1, walk2, labels: labels.to_vec(), mirrored, separation }))
}

/// Re-validates a walk pair against the construction rules of `G_d`.
pub fn verify_psw(pair: &WalkPair, d: u32, reading: Reading) -> WalkStatus {
    let tree = match Tree::g(d) {
        Ok(t) => t,
        Err(e) => return WalkStatus::Invalid(e.to_string()),
    };
    let k = pair.labels.len();
    if pair.walk1.len() != k + 1 || pair.walk2.len() != k + 1 {
        return WalkStatus::Invalid(format!(
            "walk lengths {} and {} do not match {k} labels",
            pair.walk1.len(),
            pair.walk2.len()
        ));
    }
    let (s1, s2) = start_nodes();
    let starts_ok = match reading {
        Reading::Strict => pair.walk1[0] == s1 && pair.walk2[0] == s2,
        Reading::Symmetric => {
            (pair.walk1[0] == s1 && pair.walk2[0] == s2) || (pair.walk1[0] == s2 && pair.walk2[0] == s1)
        }
    };
    if !starts_ok {
        return WalkStatus::Invalid("(W1): walks do not start at ((1,0)) and ((2,1))".into());
    }
    for (side, walk) in [(1, &pair.walk1), (2, &pair.walk2)] {
        if let Some(v) = walk.iter().find(|v| !tree.contains(v)) {
            return WalkStatus::Invalid(format!("walk {side}: {v} is not a node of G_{d}"));
        }
        for j in 1..=k {
            match tree.pi(&walk[j], &walk[j - 1]) {
                Ok(l) if l == pair.labels[j - 1] => {}
                Ok(l) => {
                    return WalkStatus::Invalid(format!(
                        "(W2): walk {side} step {j} has back-label {l}, expected {}",
                        pair.labels[j - 1]
                    ))
                }
                Err(_) => return WalkStatus::Invalid(format!("walk {side}: step {j} is not an edge")),
            }
        }
    }
    if k + 3 > 2 * d as usize {
        return WalkStatus::Invalid(format!("length {k} exceeds 2d-3 = {}", 2 * d as usize - 3));
    }
    let (end1, end2) = (&pair.walk1[k], &pair.walk2[k]);
    let forward = unmatched(&tree, end1, end2);
    let separating = match reading {
        Reading::Strict => !forward.is_empty(),
        Reading::Symmetric => !forward.is_empty() || !unmatched(&tree, end2, end1).is_empty(),
    };
    if let Some(sep) = &pair.separation {
        let (owner, other) = if pair.mirrored { (end2, end1) } else { (end1, end2) };
        let genuine = unmatched(&tree, owner, other).iter().any(|s| s == sep);
        if !genuine && separating {
            return WalkStatus::Invalid(format!("recorded witness {} via {} does not separate", sep.extra, sep.label));
        }
    }
    if separating {
        WalkStatus::Psw
    } else {
        WalkStatus::Pcw
    }
}
