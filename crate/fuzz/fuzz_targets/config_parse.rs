#![no_main]

use gbse::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(text) {
        // Anything accepted must survive its own canonical form.
        let again = RunConfig::parse(&cfg.to_text()).expect("canonical text parses");
        assert_eq!(again.fingerprint(), cfg.fingerprint());
    }
});
