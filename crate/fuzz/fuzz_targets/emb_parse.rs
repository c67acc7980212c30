#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Must reject malformed containers cleanly; on success the parsed
    // matrices must honor the claimed shapes.
    if let Ok(records) = idgeom::io::emb::parse_records(data) {
        for record in &records {
            let (rows, cols) = record.data.dim();
            assert!(rows > 0 && cols > 0);
        }
        // Valid parses round-trip bit-exactly. f32 NaN payloads may not
        // survive the widen/narrow cycle, so those are skipped.
        let clean = records.iter().all(|r| {
            r.dtype == idgeom::io::emb::Dtype::F64 || r.data.iter().all(|v| !v.is_nan())
        });
        if clean {
            let mut buf = Vec::new();
            for record in &records {
                idgeom::io::emb::write_record(&mut buf, &record.data, record.dtype).unwrap();
            }
            assert_eq!(buf.as_slice(), data);
        }
    }
});
