#![no_main]
use libfuzzer_sys::fuzz_target;
use qns_core::decoder::Decoder;
use qns_core::noise::EffectiveRates;
use qns_core::protocol::{events_from_records, parse_event_dump};
use qns_core::topology::{build_torus_block, dual_sector};

// Events on a distance-3 torus with three rounds.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_event_dump(text) else {
        return;
    };
    let rates = EffectiveRates::new(0.02, 0.02, 0.0).unwrap();
    let lattice = build_torus_block(3).unwrap();
    for layout in dual_sector(&lattice) {
        let Ok(events) = events_from_records(&layout, 3, &records) else {
            continue;
        };
        let decoder = Decoder::new(layout, &rates, 3);
        let decoded = decoder.decode(&events).expect("any event set decodes");
        let _ = decoded.correction_mask;
    }
});
