#![no_main]
use libfuzzer_sys::fuzz_target;

use carpenter::{classify, DiagonalSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = DiagonalSpec::from_json(s) {
        let _ = classify(&spec);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(DiagonalSpec::from_json(&text).unwrap(), spec);
    }
});
