#![no_main]

use grs_core::theta::ThetaTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = ThetaTable::from_csv_str(s);
    }
});
