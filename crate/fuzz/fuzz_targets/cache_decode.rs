#![no_main]

use gbse::cache::decode;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(entry) = decode(data) {
        assert_eq!(entry.payload.len(), entry.header.payload_len);
        let bytes = entry.encode();
        assert_eq!(decode(&bytes).expect("re-encoded entry decodes").payload.len(), entry.payload.len());
    }
});
