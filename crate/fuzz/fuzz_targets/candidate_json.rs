#![no_main]

use libfuzzer_sys::fuzz_target;
use svmv_core::construction::{NodePath, Tree};
use svmv_core::io::candidate_from_json;
use svmv_core::pi::check_pi;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let g = Tree::hb(2).unwrap().build_ball(&NodePath::root(), 1, 100).unwrap();
    if let Ok(c) = candidate_from_json(&g, text) {
        let _ = check_pi(&g, None, &c);
    }
});
