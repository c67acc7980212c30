#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Strict and lenient paths must both hold: whatever strict accepts,
        // lenient must accept line for line.
        let strict = idgeom::io::corpus::parse_jsonl(text);
        let (docs, failures) = idgeom::io::corpus::parse_jsonl_lenient(text);
        for (_, doc) in &docs {
            assert!(doc.validate().is_ok());
        }
        if let Ok(all) = strict {
            assert_eq!(all.len(), docs.len());
            assert!(failures.is_empty());
        }
    }
});
