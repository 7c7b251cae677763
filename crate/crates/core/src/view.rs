//! The canonical full-information SV machine.
//!
//! A node's state after `r` rounds is its view: degree, input, and the set of
//! (sender out-port, sender view) pairs it has received. Views are
//! hash-consed, so two views are equal exactly when their ids are equal.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use crate::graph::Colour;
use crate::machine::{Reception, ReceptionClass, StateMachine};

/// Handle to an interned view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ViewId(u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ViewTree {
    pub degree: usize,
    pub input: Option<Colour>,
    pub round: usize,
    /// Whether ε was among the received values.
    pub heard_silence: bool,
    pub children: BTreeSet<(u32, ViewId)>,
}

#[derive(Debug, Default)]
struct Interner {
    views: Vec<ViewTree>,
    hashes: Vec<u64>,
    index: HashMap<ViewTree, ViewId>,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(mut h: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

impl Interner {
    fn intern(&mut self, view: ViewTree) -> ViewId {
        if let Some(&id) = self.index.get(&view) {
            return id;
        }
        let mut h = fnv(FNV_OFFSET, &(view.degree as u64).to_le_bytes());
        h = fnv(h, &[view.input.map_or(b'-', |c| c.as_char() as u8), u8::from(view.heard_silence)]);
        h = fnv(h, &(view.round as u64).to_le_bytes());
        let mut kids: Vec<(u32, u64)> = view.children.iter().map(|&(p, c)| (p, self.hashes[c.0 as usize])).collect();
        kids.sort_unstable();
        for (p, ch) in kids {
            h = fnv(h, &p.to_le_bytes());
            h = fnv(h, &ch.to_le_bytes());
        }
        let id = ViewId(u32::try_from(self.views.len()).expect("fewer than 2^32 views"));
        self.views.push(view.clone());
        self.hashes.push(h);
        self.index.insert(view, id);
        id
    }
}

/// Full-information SV machine. Emits `(view, port)` on every port and
/// never stops; callers choose the horizon.
///
/// One machine value may be shared across runs; ids are then comparable
/// between those runs.
#[derive(Debug)]
pub struct CanonicalSv {
    delta: usize,
    interner: RefCell<Interner>,
}

pub fn canonical_sv(delta: usize) -> CanonicalSv {
    CanonicalSv::new(delta)
}

impl CanonicalSv {
    pub fn new(delta: usize) -> CanonicalSv {
        CanonicalSv { delta, interner: RefCell::new(Interner::default()) }
    }

    pub fn view(&self, id: ViewId) -> ViewTree {
        self.interner.borrow().views[id.0 as usize].clone()
    }

    /// Structural hash, stable across runs and processes.
    pub fn stable_hash(&self, id: ViewId) -> u64 {
        self.interner.borrow().hashes[id.0 as usize]
    }

    pub fn interned(&self) -> usize {
        self.interner.borrow().views.len()
    }

    pub(crate) fn leaf(&self, degree: usize, input: Option<Colour>) -> ViewId {
        self.interner.borrow_mut().intern(ViewTree {
            degree,
            input,
            round: 0,
            heard_silence: false,
            children: BTreeSet::new(),
        })
    }

    pub(crate) fn extend<'a, I>(&self, state: ViewId, received: I) -> ViewId
    where
        I: IntoIterator<Item = &'a Option<(ViewId, u32)>>,
    {
        let prev = self.view(state);
        let mut heard_silence = false;
        let mut children = BTreeSet::new();
        for m in received {
            match m {
                Some((v, port)) => {
                    children.insert((*port, *v));
                }
                None => heard_silence = true,
            }
        }
        self.interner.borrow_mut().intern(ViewTree {
            degree: prev.degree,
            input: prev.input,
            round: prev.round + 1,
            heard_silence,
            children,
        })
    }
}

impl StateMachine for CanonicalSv {
    type State = ViewId;
    type Message = (ViewId, u32);

    fn delta(&self) -> usize {
        self.delta
    }

    fn reception_class(&self) -> ReceptionClass {
        ReceptionClass::Sv
    }

    fn init(&self, degree: usize, input: Option<Colour>) -> ViewId {
        self.leaf(degree, input)
    }

    fn emit(&self, state: &ViewId, port: u32) -> Option<(ViewId, u32)> {
        Some((*state, port))
    }

    fn is_stopping(&self, _state: &ViewId) -> bool {
        false
    }

    fn transition(&self, state: &ViewId, received: &Reception<(ViewId, u32)>) -> ViewId {
        self.extend(*state, received.distinct())
    }
}
