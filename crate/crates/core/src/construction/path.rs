use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Colour;

/// One step of a tree path: the pair of generalised port numbers of the edge
/// to the parent (its *type*) and, for the `H` families, the node's colour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub b1: u32,
    pub b2: u32,
    pub colour: Option<Colour>,
}

impl Step {
    pub fn plain(b1: u32, b2: u32) -> Step {
        Step { b1, b2, colour: None }
    }

    pub fn coloured(b1: u32, b2: u32, colour: Colour) -> Step {
        Step { b1, b2, colour: Some(colour) }
    }

    pub fn kind(&self) -> (u32, u32) {
        (self.b1, self.b2)
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.colour {
            None => write!(f, "({},{})", self.b1, self.b2),
            Some(c) => write!(f, "({},{},{})", self.b1, self.b2, c),
        }
    }
}

/// A node of a lower-bound tree, named by its path from the root.
///
/// The empty path is the root. Textual form: `(1,0)/(2,2)` for the `G`
/// family, `(2,1,W)/(3,3,G)` for the `H` families, `∅` for the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NodePath {
    steps: Vec<Step>,
}

impl NodePath {
    pub fn root() -> NodePath {
        NodePath::default()
    }

    pub fn from_steps(steps: Vec<Step>) -> NodePath {
        NodePath { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn is_root(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&Step> {
        self.steps.last()
    }

    pub fn parent(&self) -> Option<NodePath> {
        if self.steps.is_empty() {
            None
        } else {
            Some(NodePath { steps: self.steps[..self.steps.len() - 1].to_vec() })
        }
    }

    pub fn child(&self, step: Step) -> NodePath {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push(step);
        NodePath { steps }
    }

    /// True iff `other` is a child of `self`.
    pub fn is_parent_of(&self, other: &NodePath) -> bool {
        other.steps.len() == self.steps.len() + 1 && other.steps[..self.steps.len()] == self.steps[..]
    }

    /// Same path with colours dropped.
    pub fn uncoloured(&self) -> NodePath {
        NodePath { steps: self.steps.iter().map(|s| Step::plain(s.b1, s.b2)).collect() }
    }
}

/// Canonical serialization order: by depth, then lexicographically by steps.
impl Ord for NodePath {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.steps
            .len()
            .cmp(&other.steps.len())
            .then_with(|| self.steps.cmp(&other.steps))
    }
}

impl PartialOrd for NodePath {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "∅");
        }
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

const MAX_PARSED_STEPS: usize = 4096;

fn parse_step(text: &str) -> Result<Step> {
    let bad = || Error::Parse(format!("malformed path step {text:?}"));
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(bad)?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<u32>().map_err(|_| bad());
    match parts.as_slice() {
        [b1, b2] => Ok(Step::plain(num(b1)?, num(b2)?)),
        [b1, b2, c] => Ok(Step::coloured(num(b1)?, num(b2)?, c.parse()?)),
        _ => Err(bad()),
    }
}

impl FromStr for NodePath {
    type Err = Error;

    /// Parses the textual syntax. Only the syntax is checked here; membership
    /// in a particular tree is checked by [`super::Tree::contains`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" || s == "root" {
            return Ok(NodePath::root());
        }
        let steps = s
            .split('/')
            .take(MAX_PARSED_STEPS + 1)
            .map(parse_step)
            .collect::<Result<Vec<_>>>()?;
        if steps.len() > MAX_PARSED_STEPS {
            return Err(Error::Parse(format!("path longer than {MAX_PARSED_STEPS} steps")));
        }
        let coloured = steps[0].colour.is_some();
        if steps.iter().any(|st| st.colour.is_some() != coloured) {
            return Err(Error::Parse("path mixes coloured and uncoloured steps".into()));
        }
        Ok(NodePath { steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_syntaxes() {
        let p: NodePath = "(1,0)/(2,2)".parse().unwrap();
        assert_eq!(p.steps(), &[Step::plain(1, 0), Step::plain(2, 2)]);
        assert_eq!(p.to_string(), "(1,0)/(2,2)");

        let p: NodePath = "(2,1,W)/(3,3,G)".parse().unwrap();
        assert_eq!(p.steps(), &[Step::coloured(2, 1, Colour::W), Step::coloured(3, 3, Colour::G)]);
        assert_eq!(p.to_string(), "(2,1,W)/(3,3,G)");

        for root in ["", "∅", "root", "  "] {
            assert!(root.parse::<NodePath>().unwrap().is_root());
        }
        assert_eq!(NodePath::root().to_string(), "∅");
    }

    #[test]
    fn rejects_malformed_paths() {
        for bad in ["(1,0", "1,0", "(1)", "(1,0)/", "(1,0)//(2,2)", "(1,0,B)/(2,2)", "(a,b)", "(1,2,3,4)"] {
            assert!(bad.parse::<NodePath>().is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn canonical_order_is_depth_first_then_lexicographic() {
        let mut v: Vec<NodePath> = ["(2,1)/(3,3)", "(2,1)", "∅", "(1,0)/(5,5)", "(1,0)"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        v.sort();
        let text: Vec<String> = v.iter().map(ToString::to_string).collect();
        assert_eq!(text, ["∅", "(1,0)", "(2,1)", "(1,0)/(5,5)", "(2,1)/(3,3)"]);
    }
}
