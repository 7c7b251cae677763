//! Replays the checked-in fuzz corpus through the same checks as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use svmv_core::construction::{NodePath, Tree};
use svmv_core::graph::PortLabel;
use svmv_core::io::{candidate_from_json, graph_from_json, graph_to_json};
use svmv_core::pi::check_pi;

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn graph_json_seeds() {
    let mut parsed = 0;
    for (name, text) in corpus("graph_json") {
        if let Ok(g) = graph_from_json(&text) {
            parsed += 1;
            let again = graph_from_json(&graph_to_json(&g)).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(again.edges(), g.edges(), "{name}");
        }
    }
    assert!(parsed >= 3);
}

#[test]
fn node_path_seeds() {
    for (name, text) in corpus("node_path") {
        if let Ok(p) = text.parse::<NodePath>() {
            assert_eq!(p.to_string().parse::<NodePath>().unwrap(), p, "{name}");
            for t in [Tree::g(3).unwrap(), Tree::hb(3).unwrap()] {
                if t.contains(&p) {
                    let _ = t.neighbours(&p);
                }
            }
        }
    }
    assert!("(1,0)/(2,1,B)".parse::<NodePath>().is_err());
}

#[test]
fn port_label_seeds() {
    for (name, text) in corpus("port_label") {
        if let Ok(l) = text.parse::<PortLabel>() {
            assert_eq!(l.to_string().parse::<PortLabel>().unwrap(), l, "{name}");
        }
    }
}

#[test]
fn candidate_json_seeds() {
    let g = Tree::hb(2).unwrap().build_ball(&NodePath::root(), 1, 100).unwrap();
    let mut accepted = 0;
    for (_, text) in corpus("candidate_json") {
        if let Ok(c) = candidate_from_json(&g, &text) {
            accepted += 1;
            let _ = check_pi(&g, None, &c);
        }
    }
    assert_eq!(accepted, 1);
}
