#![no_main]

use libfuzzer_sys::fuzz_target;
use svmv_core::graph::PortLabel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(l) = text.parse::<PortLabel>() {
        assert_eq!(l.to_string().parse::<PortLabel>().unwrap(), l);
    }
});
