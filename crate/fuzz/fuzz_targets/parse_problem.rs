#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = segrr::FiniteSumProblem::from_json(text) {
            let again = segrr::FiniteSumProblem::from_json(&p.to_json()).expect("re-parse");
            assert_eq!(again.components(), p.components());
        }
    }
});
