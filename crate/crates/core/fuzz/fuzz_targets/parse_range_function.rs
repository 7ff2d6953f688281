#![no_main]
use libfuzzer_sys::fuzz_target;

use carpenter::sispectral::{extract_spectral, RangeFunctionFile};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = RangeFunctionFile::from_json(s) {
        if r.window.len() <= 256 {
            let _ = extract_spectral(&r);
        }
    }
});
