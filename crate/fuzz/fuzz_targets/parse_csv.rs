#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rec) = segrr::harness::parse_csv(text) {
            let again =
                segrr::harness::parse_csv(&segrr::harness::to_csv_string(&rec)).expect("re-parse");
            assert_eq!(again.rows.len(), rec.rows.len());
        }
    }
});
