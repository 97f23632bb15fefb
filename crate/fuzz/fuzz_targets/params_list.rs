#![no_main]

use grs_core::config::parse_params;
use grs_core::{Family, ScenarioParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(values) = parse_params(s) {
            for family in Family::CATALOG {
                let _ = ScenarioParams { values: values.clone(), ..ScenarioParams::new(family) }.build();
            }
        }
    }
});
