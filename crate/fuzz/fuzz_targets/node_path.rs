#![no_main]

use libfuzzer_sys::fuzz_target;
use svmv_core::construction::{NodePath, Tree};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<NodePath>() {
        assert_eq!(p.to_string().parse::<NodePath>().unwrap(), p);
        for t in [Tree::g(3).unwrap(), Tree::hb(3).unwrap()] {
            if t.contains(&p) {
                let _ = t.neighbours(&p);
            }
        }
    }
});
