#![no_main]
use libfuzzer_sys::fuzz_target;
use qns_core::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse(text) else {
        return;
    };
    let _ = cfg.trial_config();
    let _ = cfg.threshold_options();
    let _ = cfg.ratio_list();
    if let Ok(again) = cfg.to_toml() {
        assert!(RunConfig::parse(&again).is_ok());
    }
});
