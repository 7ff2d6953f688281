#![no_main]
use libfuzzer_sys::fuzz_target;

use carpenter::sispectral::{check_spectral, SpectralSamples};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(samples) = SpectralSamples::from_json(s) {
        let c = check_spectral(&samples);
        assert_eq!(c.fibers.len(), samples.fibers.len());
    }
});
