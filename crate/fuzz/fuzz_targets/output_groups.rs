#![no_main]

use grs_core::export::OutputGroup;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = OutputGroup::parse_list(s);
    }
});
