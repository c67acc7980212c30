#![no_main]

use libfuzzer_sys::fuzz_target;

use idgeom::io::report::Report;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = Report::from_json(text) {
            // Accepted reports satisfy the column invariant and survive a
            // serialize/parse cycle.
            report.validate().unwrap();
            let again = Report::from_json(&report.to_json()).unwrap();
            assert_eq!(again, report);
            let _ = report.to_csv();
        }
    }
});
