//! Replays the checked-in fuzz seeds through the parsers.

use std::fs;
use std::path::PathBuf;

use grs_core::config::{parse_params, CouplingConfig, ScenarioConfig};
use grs_core::export::OutputGroup;
use grs_core::theta::ThetaTable;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn scenario_seeds() {
    for (name, text) in seeds("scenario_config") {
        let parsed = ScenarioConfig::from_json_str(&text);
        assert_eq!(parsed.is_err(), name.starts_with("bad"), "{name}: {parsed:?}");
        if let Ok(cfg) = parsed {
            cfg.build().unwrap();
        }
    }
}

#[test]
fn coupling_seeds() {
    for (name, text) in seeds("coupling_config") {
        CouplingConfig::from_json_str(&text).and_then(|c| c.spec()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn theta_table_seeds() {
    for (name, text) in seeds("theta_table") {
        assert_eq!(ThetaTable::from_csv_str(&text).is_err(), name == "short_row.csv", "{name}");
    }
}

#[test]
fn list_seeds() {
    for (name, text) in seeds("params_list") {
        assert_eq!(parse_params(&text).is_err(), name == "duplicate.txt", "{name}");
    }
    for (name, text) in seeds("output_groups") {
        OutputGroup::parse_list(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
