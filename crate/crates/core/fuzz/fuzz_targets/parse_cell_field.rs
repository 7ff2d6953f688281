#![no_main]
use libfuzzer_sys::fuzz_target;

use carpenter::{branch_partition, CellField};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(field) = CellField::from_json(s) {
        let _ = branch_partition(&field);
    }
});
