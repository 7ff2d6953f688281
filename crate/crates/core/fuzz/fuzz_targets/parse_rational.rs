#![no_main]
use libfuzzer_sys::fuzz_target;

use carpenter::rational::parse_rational;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(x) = parse_rational(s) {
            // canonical "p/q" text parses back to the same value
            assert_eq!(parse_rational(&x.to_string()).unwrap(), x);
        }
    }
});
