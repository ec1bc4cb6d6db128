#![no_main]
use libfuzzer_sys::fuzz_target;
use qns_core::decoder::parse_pairing_dump;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pairs) = parse_pairing_dump(text) {
            for (_, _, w) in pairs {
                assert!(w.is_finite() && w >= 0.0);
            }
        }
    }
});
