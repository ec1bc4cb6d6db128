#![no_main]
use libfuzzer_sys::fuzz_target;
use qns_core::protocol::parse_event_dump;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_event_dump(text);
    }
});
