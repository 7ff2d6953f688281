#![no_main]
use libfuzzer_sys::fuzz_target;

use carpenter::ProjectionRep;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = ProjectionRep::from_json(s) {
        let n = p.max_index().min(64);
        let _ = p.diagonal(n);
        let _ = p.gram_error();
    }
});
