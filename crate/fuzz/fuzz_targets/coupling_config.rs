#![no_main]

use grs_core::config::CouplingConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = CouplingConfig::from_json_str(s) {
            let _ = cfg.spec();
        }
    }
});
