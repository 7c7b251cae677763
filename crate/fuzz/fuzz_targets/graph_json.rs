#![no_main]

use libfuzzer_sys::fuzz_target;
use svmv_core::io::{graph_from_json, graph_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = graph_from_json(text) {
        let again = graph_from_json(&graph_to_json(&g)).expect("exported graphs parse");
        assert_eq!(again.edges(), g.edges());
        assert_eq!(again.inputs(), g.inputs());
    }
});
