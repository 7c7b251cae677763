//! Property tests for the executor, the constructions and the walk search.

use std::collections::BTreeSet;

use proptest::prelude::*;
use svmv_core::audit;
use svmv_core::construction::Tree;
use svmv_core::graph::{Colour, GraphBuilder, PortLabel};
use svmv_core::machine::{execute, vmset_reduce, vset_reduce, StateMachine};
use svmv_core::pi::solve_pi_mv;
use svmv_core::random::{random_instance, renumber, seeded, shuffle_in_ports};
use svmv_core::simulate::{mv_by_sv, neighbour_count, run_simulated};
use svmv_core::view::canonical_sv;
use svmv_core::walks::{find_critical_psw, verify_psw, walk_pair_from_labels, Reading, WalkStatus, DEFAULT_MAX_PAIRS};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let inst = random_instance(&mut seeded(seed), 25, 4).unwrap();
        let (m1, m2) = (canonical_sv(inst.delta), canonical_sv(inst.delta));
        let a = execute(&m1, &inst.graph, None, 4).unwrap();
        let b = execute(&m2, &inst.graph, None, 4).unwrap();
        for r in 0..=4 {
            for v in inst.graph.nodes() {
                prop_assert_eq!(m1.stable_hash(*a.state(r, v)), m2.stable_hash(*b.state(r, v)));
            }
        }
        let pi = solve_pi_mv(inst.delta);
        prop_assert_eq!(execute(&pi, &inst.graph, None, 3).unwrap(), execute(&pi, &inst.graph, None, 3).unwrap());
    }

    #[test]
    fn in_port_order_is_invisible(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let inst = random_instance(&mut rng, 25, 5).unwrap();
        let shuffled = shuffle_in_ports(&mut rng, &inst.graph).unwrap();
        let sv = canonical_sv(inst.delta);
        let a = execute(&sv, &inst.graph, None, 3).unwrap();
        let b = execute(&sv, &shuffled, None, 3).unwrap();
        prop_assert_eq!(a.states_at(3), b.states_at(3));
        let mv = neighbour_count(inst.delta);
        let a = execute(&mv, &inst.graph, None, 3).unwrap();
        let b = execute(&mv, &shuffled, None, 3).unwrap();
        prop_assert_eq!(a.states_at(a.rounds()), b.states_at(b.rounds()));
    }

    #[test]
    fn reductions_forget_what_they_should(v in prop::collection::vec(prop::option::of(0u8..4), 0..8), extra in 0usize..8) {
        let mut doubled = v.clone();
        if !v.is_empty() {
            doubled.push(v[extra % v.len()]);
        }
        doubled.reverse();
        prop_assert_eq!(vset_reduce(&v), vset_reduce(&doubled));
        let counts = vmset_reduce(&v);
        prop_assert_eq!(counts.values().sum::<usize>(), v.len());
        let mut reversed = v.clone();
        reversed.reverse();
        prop_assert_eq!(counts, vmset_reduce(&reversed));
    }

    #[test]
    fn set_reception_ignores_multiplicity(leaves in prop::collection::vec(0usize..3, 2..6), pick in any::<prop::sample::Index>()) {
        // star centre: same set of leaf colours, different multiplicities
        let colours: Vec<Colour> = leaves.iter().map(|&i| Colour::ALL[i]).collect();
        let present: Vec<Colour> = colours.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut other = colours.clone();
        let i = pick.index(other.len());
        other[i] = present[pick.index(present.len())];
        if other.iter().copied().collect::<BTreeSet<_>>().len() != present.len() {
            return Ok(());
        }
        let star = |cs: &[Colour]| {
            let mut b = GraphBuilder::new();
            let c = b.add_node("c", None).unwrap();
            for (j, col) in cs.iter().enumerate() {
                let l = b.add_node(format!("l{j}"), Some(*col)).unwrap();
                b.add_edge(c, l, PortLabel::Plain(j as u32 + 1), PortLabel::Plain(1)).unwrap();
            }
            b.build().unwrap()
        };
        let sv = canonical_sv(colours.len());
        let a = execute(&sv, &star(&colours), None, 1).unwrap();
        let b = execute(&sv, &star(&other), None, 1).unwrap();
        prop_assert_eq!(a.state(1, 0), b.state(1, 0));
    }

    #[test]
    fn stopping_states_absorb(seed in any::<u64>()) {
        let inst = random_instance(&mut seeded(seed), 30, 5).unwrap();
        let m = neighbour_count(inst.delta);
        let t = execute(&m, &inst.graph, None, 6).unwrap();
        for v in inst.graph.nodes() {
            if let Some(r) = (0..=t.rounds()).find(|&r| t.is_stopping(r, v)) {
                for later in r..=t.rounds() {
                    prop_assert_eq!(t.state(later, v), t.state(r, v));
                    prop_assert!(m.is_stopping(t.state(later, v)));
                }
            }
        }
    }

    #[test]
    fn simulation_never_collides_and_matches(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let inst = random_instance(&mut rng, 30, 5).unwrap();
        let graph = renumber(&mut rng, &inst.graph).unwrap();
        let sim = mv_by_sv(neighbour_count(inst.delta)).unwrap();
        let run = run_simulated(&sim, &graph, None, 4).unwrap();
        prop_assert_eq!(&run.outputs, &run.direct);
        prop_assert_eq!(run.overhead, 2 * inst.delta - 2);
    }

    #[test]
    fn bisimilarity_laws(seed in any::<u64>()) {
        let s = audit::bisim_laws(&mut seeded(seed), 8).unwrap();
        prop_assert!(s.ok(), "{:?}", s.failure);
    }

    #[test]
    fn collapses_preserve_bisimilarity(seed in any::<u64>()) {
        let s = audit::collapse_preservation(&mut seeded(seed), 8).unwrap();
        prop_assert!(s.ok(), "{:?}", s.failure);
    }

    #[test]
    fn black_to_white_mapping(seed in any::<u64>()) {
        let s = audit::h_mapping(&mut seeded(seed), 8).unwrap();
        prop_assert!(s.ok(), "{:?}", s.failure);
    }

    #[test]
    fn tree_structure(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        for s in [
            audit::degree_and_nesting(&mut rng, 16),
            audit::label_uniqueness(&mut rng, 16),
            audit::back_label_coverage(&mut rng, 16),
        ] {
            prop_assert!(s.ok(), "{}: {:?}", s.name, s.failure);
        }
    }
}

#[test]
fn colour_drop_gives_the_uncoloured_tree() {
    for d in 2..=3 {
        let s = audit::colour_drop_isomorphism(d).unwrap();
        assert!(s.ok(), "{:?}", s.failure);
    }
}

#[test]
fn signatures_distinct_on_lower_bound_trees() {
    for d in 2..=3u32 {
        let g = Tree::g(d).unwrap().build_full_collapsed(100_000).unwrap();
        let sim = mv_by_sv(neighbour_count(d as usize)).unwrap();
        let run = run_simulated(&sim, &g, None, 4).unwrap();
        assert_eq!(run.outputs, run.direct);
    }
}

#[test]
fn critical_lengths_are_odd_and_grow_by_two() {
    let ks: Vec<usize> = (2..=5).map(|d| find_critical_psw(d, DEFAULT_MAX_PAIRS).unwrap().k).collect();
    for w in ks.windows(2) {
        assert!(w[1] <= w[0] + 2, "{ks:?}");
    }
    assert!(ks.iter().all(|k| k % 2 == 1), "{ks:?}");
}

#[test]
fn trimmed_witness_separates_one_level_down() {
    for d in 3..=5u32 {
        let c = find_critical_psw(d, DEFAULT_MAX_PAIRS).unwrap();
        let labels = &c.pair.labels[..c.k - 2];
        let pair = walk_pair_from_labels(d - 1, labels).unwrap().expect("trimmed labels can be followed");
        assert_eq!(verify_psw(&pair, d - 1, Reading::Symmetric), WalkStatus::Psw, "d={d}");
    }
}

/// Exhaustive rescan: no label sequence shorter than the critical length separates.
#[test]
fn nothing_shorter_separates() {
    fn dfs(d: u32, prefix: &mut Vec<PortLabel>, limit: usize, seen: &mut usize) {
        if !prefix.is_empty() {
            match walk_pair_from_labels(d, prefix).unwrap() {
                None => return,
                Some(pair) => {
                    *seen += 1;
                    assert_ne!(verify_psw(&pair, d, Reading::Symmetric), WalkStatus::Psw, "d={d} {prefix:?}");
                }
            }
        }
        if prefix.len() == limit {
            return;
        }
        for l in 0..=d {
            prefix.push(PortLabel::Plain(l));
            dfs(d, prefix, limit, seen);
            prefix.pop();
        }
    }
    for d in 2..=5u32 {
        let k = find_critical_psw(d, DEFAULT_MAX_PAIRS).unwrap().k;
        let mut seen = 0;
        dfs(d, &mut Vec::new(), k - 1, &mut seen);
        assert!(d == 2 || seen > 0);
    }
}

#[test]
fn walk_length_matches_bisimilarity_radius() {
    use svmv_core::bisim::{max_bisim_radius, BisimRadius, LabelledTree, PointedInstance};
    for d in 2..=3u32 {
        let k = find_critical_psw(d, DEFAULT_MAX_PAIRS).unwrap().k;
        let t = LabelledTree::generalised(Tree::g(d).unwrap());
        let (u, w) = svmv_core::walks::start_nodes();
        let r = max_bisim_radius(&PointedInstance::new(&t, u), &PointedInstance::new(&t, w), 2 * d as usize).unwrap();
        assert_eq!(r, BisimRadius::Exact(k));
    }
}
