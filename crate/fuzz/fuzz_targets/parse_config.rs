#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = segrr::harness::parse_config(text) {
            let again = segrr::harness::parse_config(&cfg.to_json()).expect("re-parse");
            assert_eq!(again, cfg);
        }
    }
});
