#![no_main]

use libfuzzer_sys::fuzz_target;

use idgeom::perturb::{transform, HomoglyphMap, PerturbKind};
use idgeom::RngSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(map) = HomoglyphMap::parse(text) {
            // An accepted map must drive the transforms without panicking
            // and keep p = 0 an identity.
            let sample = "Sample text, twice sample!";
            let untouched =
                transform(sample, PerturbKind::Type1, 0.0, RngSpec::new(1), Some(&map)).unwrap();
            assert_eq!(untouched, sample);
            let _ = transform(sample, PerturbKind::Type2, 1.0, RngSpec::new(1), Some(&map));
        }
    }
});
