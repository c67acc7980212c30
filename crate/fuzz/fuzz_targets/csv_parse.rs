#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(matrix) = idgeom::io::csvmat::parse_csv_matrix(text) {
            let (rows, cols) = matrix.dim();
            assert!(rows > 0 && cols > 0, "parsed matrix must be non-empty");
        }
    }
});
