#![no_main]

use gbse::reference::parse_reference;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_reference(text) {
        assert!(r.cells.iter().all(|c| c.value.is_finite() && (1..=4).contains(&c.table)));
    }
});
