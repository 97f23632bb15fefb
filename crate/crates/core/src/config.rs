//! JSON configuration files and the `k=v,...` parameter list.
//!
//! Scenario file:
//!
//! ```json
//! { "family": "case1", "params": { "omega0": 1.0 },
//!   "window": { "t_max": 50.0, "samples": 5000 }, "split_fraction": 0.5 }
//! ```
//!
//! Coupling file:
//!
//! ```json
//! { "delta": 0.0,
//!   "coupling": { "family": "sech", "params": { "k_re": 1.0, "k_im": 0.0 } },
//!   "window": { "t_max": 6.0, "samples": 600 },
//!   "initial": { "a": [1.0, 0.0], "b": [0.0, 0.0] } }
//! ```

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Family, FieldTable, Scenario, ScenarioParams, Window};
use crate::modes::{CouplingSpec, CouplingTable, ModeState};
use crate::C64;

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path.is_empty() || path == "." { "<root>".to_string() } else { path };
        Error::schema(path, e.inner().to_string())
    })
}

fn check_window(window: &Option<Window>) -> Result<()> {
    if let Some(w) = window {
        w.validate().map_err(|e| match e {
            Error::Argument { name, reason } => Error::schema(format!("window.{name}"), reason),
            other => other,
        })?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub split_fraction: Option<f64>,
    #[serde(default)]
    pub table: Option<FieldTable>,
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = from_json(text)?;
        check_window(&cfg.window)?;
        if let Some(t) = &cfg.table {
            t.validate()?;
        }
        Ok(cfg)
    }

    pub fn params(&self) -> ScenarioParams {
        ScenarioParams {
            family: self.family,
            values: self.params.clone(),
            split_fraction: self.split_fraction,
            table: self.table.clone(),
        }
    }

    pub fn build(&self) -> Result<Scenario> {
        self.params().build()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingFamily {
    Constant,
    Sech,
    CustomTable,
}

impl CouplingFamily {
    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            CouplingFamily::Constant => &["k_re", "k_im"],
            CouplingFamily::Sech => &["k_re", "k_im", "width"],
            CouplingFamily::CustomTable => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub family: CouplingFamily,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub table: Option<CouplingTable>,
}

/// Initial amplitudes as `[re, im]` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialAmplitudes {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Default for InitialAmplitudes {
    fn default() -> Self {
        Self { a: [1.0, 0.0], b: [0.0, 0.0] }
    }
}

impl InitialAmplitudes {
    pub fn state(&self) -> ModeState {
        ModeState::new(C64::new(self.a[0], self.a[1]), C64::new(self.b[0], self.b[1]))
    }
}

fn default_normalize() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub delta: f64,
    pub coupling: CouplingEntry,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub initial: InitialAmplitudes,
    #[serde(default = "default_normalize")]
    pub normalize: bool,
}

impl CouplingConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = from_json(text)?;
        check_window(&cfg.window)?;
        let c = &cfg.coupling;
        let allowed = c.family.allowed_params();
        if let Some(bad) = c.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::schema(format!("coupling.params.{bad}"), format!("unknown parameter; expected one of [{}]", allowed.join(", "))));
        }
        match (c.family, &c.table) {
            (CouplingFamily::CustomTable, None) => return Err(Error::schema("coupling.table", "custom_table needs a table")),
            (CouplingFamily::CustomTable, Some(t)) => t.validate()?,
            (_, Some(_)) => return Err(Error::schema("coupling.table", "only custom_table takes a table")),
            _ => {}
        }
        if !cfg.initial.a.iter().chain(&cfg.initial.b).all(|v| v.is_finite()) {
            return Err(Error::schema("initial", "amplitudes must be finite"));
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<CouplingSpec> {
        let c = &self.coupling;
        let get = |name: &str, default: f64| c.params.get(name).copied().unwrap_or(default);
        let k0 = C64::new(get("k_re", 1.0), get("k_im", 0.0));
        match c.family {
            CouplingFamily::Constant => CouplingSpec::constant(k0, self.delta),
            CouplingFamily::Sech => CouplingSpec::sech(k0, get("width", k0.norm()), self.delta),
            CouplingFamily::CustomTable => {
                let table = c.table.clone().ok_or_else(|| Error::schema("coupling.table", "missing"))?;
                CouplingSpec::from_table("custom_table", table, self.delta)
            }
        }
    }
}

/// Parses `name=value,name=value`. Whitespace around items is ignored; an empty string gives no parameters.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::argument("params", format!("`{item}` is not of the form name=value")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::argument("params", format!("`{item}` has an empty name")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::argument(name, format!("`{}` is not a number", value.trim())))?;
        if !value.is_finite() {
            return Err(Error::argument(name, "must be finite"));
        }
        if out.insert(name.to_string(), value).is_some() {
            return Err(Error::argument(name, "given more than once"));
        }
    }
    Ok(out)
}
