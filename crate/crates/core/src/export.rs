//! CSV and JSON serialization of trajectories.
//!
//! Floats are written with 17 significant digits so identical inputs give
//! byte-identical files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::modes::ModeTrajectory;
use crate::propagator::{Sample, Trajectory};

/// Optional column groups; `t` and `x` are always written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputGroup {
    Fields,
    Detuning,
    Entries,
    Probabilities,
    Expectations,
}

impl OutputGroup {
    pub const ALL: [OutputGroup; 5] = [
        OutputGroup::Fields,
        OutputGroup::Detuning,
        OutputGroup::Entries,
        OutputGroup::Probabilities,
        OutputGroup::Expectations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutputGroup::Fields => "fields",
            OutputGroup::Detuning => "detuning",
            OutputGroup::Entries => "entries",
            OutputGroup::Probabilities => "probabilities",
            OutputGroup::Expectations => "expectations",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            OutputGroup::Fields => &["omega_z", "omega_mag", "phi"],
            OutputGroup::Detuning => &["detuning"],
            OutputGroup::Entries => &["re_a", "im_a", "re_b", "im_b"],
            OutputGroup::Probabilities => &["p_flip", "p_stay"],
            OutputGroup::Expectations => &["sigma_x", "sigma_y", "sigma_z"],
        }
    }

    fn values(self, s: &Sample) -> Vec<f64> {
        let e = &s.entries;
        match self {
            OutputGroup::Fields => vec![s.omega_z, s.omega_mag, s.phi],
            OutputGroup::Detuning => vec![s.detuning],
            OutputGroup::Entries => vec![e.a.re, e.a.im, e.b.re, e.b.im],
            OutputGroup::Probabilities => vec![s.p_flip, s.p_stay],
            OutputGroup::Expectations => s.sigma.to_vec(),
        }
    }

    /// Parses a comma-separated list; `all` selects every group.
    pub fn parse_list(text: &str) -> Result<Vec<OutputGroup>> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item == "all" {
                out.extend(Self::ALL);
            } else {
                out.push(item.parse()?);
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::argument("outputs", "no output group selected"));
        }
        Ok(out)
    }
}

impl fmt::Display for OutputGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutputGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|g| g.name()).collect();
            Error::argument("outputs", format!("unknown group `{s}`; expected one of {}, all", names.join(", ")))
        })
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn sorted(groups: &[OutputGroup]) -> Vec<OutputGroup> {
    let mut g = groups.to_vec();
    g.sort();
    g.dedup();
    g
}

pub fn trajectory_header(groups: &[OutputGroup]) -> Vec<&'static str> {
    let mut cols = vec!["t", "x"];
    for g in sorted(groups) {
        cols.extend_from_slice(g.columns());
    }
    cols
}

fn csv_error(e: impl fmt::Display) -> Error {
    Error::Numeric(format!("csv output failed: {e}"))
}

fn write_rows<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| format_float(v))).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

fn row(s: &Sample, groups: &[OutputGroup]) -> Vec<f64> {
    let mut r = vec![s.t, s.x];
    for g in groups {
        r.extend(g.values(s));
    }
    r
}

pub fn trajectory_csv(traj: &Trajectory, groups: &[OutputGroup]) -> Result<String> {
    let groups = sorted(groups);
    write_rows(&trajectory_header(&groups), traj.samples.iter().map(|s| row(s, &groups)))
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// JSON array of sample records with the same keys as the CSV header; non-finite values become `null`.
pub fn trajectory_json(traj: &Trajectory, groups: &[OutputGroup]) -> Result<String> {
    let groups = sorted(groups);
    let header = trajectory_header(&groups);
    let records: Vec<Value> = traj
        .samples
        .iter()
        .map(|s| {
            let map: Map<String, Value> = header.iter().zip(row(s, &groups)).map(|(k, v)| (k.to_string(), number(v))).collect();
            Value::Object(map)
        })
        .collect();
    serde_json::to_string_pretty(&records).map_err(|e| Error::Numeric(e.to_string()))
}

pub const MODE_HEADER: [&str; 8] = ["z", "re_A", "im_A", "re_B", "im_B", "powerA", "powerB", "total"];

fn mode_rows(traj: &ModeTrajectory) -> impl Iterator<Item = Vec<f64>> + '_ {
    traj.samples
        .iter()
        .map(|s| vec![s.z, s.amp_a.re, s.amp_a.im, s.amp_b.re, s.amp_b.im, s.power_a, s.power_b, s.total])
}

pub fn modes_csv(traj: &ModeTrajectory) -> Result<String> {
    write_rows(&MODE_HEADER, mode_rows(traj))
}

pub fn modes_json(traj: &ModeTrajectory) -> Result<String> {
    let records: Vec<Value> = mode_rows(traj)
        .map(|r| Value::Object(MODE_HEADER.iter().zip(r).map(|(k, v)| (k.to_string(), number(v))).collect()))
        .collect();
    let doc = serde_json::json!({ "label": traj.label, "delta": traj.delta, "power_scale": traj.power_scale, "samples": records });
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Numeric(e.to_string()))
}
