#![no_main]

use grs_core::config::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = ScenarioConfig::from_json_str(s) {
            let _ = cfg.build();
        }
    }
});
