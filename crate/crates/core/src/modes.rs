//! Two co-propagating guided modes
//!
//! ```text
//! dA/dz = k_ab(z) e^{−iΔz} B,   dB/dz = k_ba(z) e^{iΔz} A
//! ```
//!
//! mapped onto the su(2) problem. With `k_ab = −k_ba* = k` the tilded
//! amplitudes `Ã = A e^{iΔz/2}`, `B̃ = B e^{−iΔz/2}` obey `i dṼ/dz = H Ṽ` with
//! `Ω = −Δ/2` and off-diagonal entry `γ = ik`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{lerp_table, FieldProfile, UnwrappedPhase, Window, DEFAULT_UNWRAP_POINTS};
use crate::propagator::{propagate_entries, PropagatorConfig};
use crate::C64;

/// A complex function of the propagation coordinate.
pub type ComplexFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Relative tolerance on `k_ba + k_ab*` for the power-conserving check.
pub const CONSERVATION_TOL: f64 = 1e-12;

/// Sampled `k(z)`, linearly interpolated in real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingTable {
    pub z: Vec<f64>,
    pub k_re: Vec<f64>,
    pub k_im: Vec<f64>,
    /// Optional `k_ba`; when present it must equal `−k_ab*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_ba_re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_ba_im: Option<Vec<f64>>,
}

impl CouplingTable {
    pub fn validate(&self) -> Result<()> {
        let n = self.z.len();
        if n < 2 {
            return Err(Error::schema("table.z", "needs at least two samples"));
        }
        let mut cols = vec![("k_re", &self.k_re), ("k_im", &self.k_im)];
        match (&self.k_ba_re, &self.k_ba_im) {
            (Some(r), Some(i)) => cols.extend([("k_ba_re", r), ("k_ba_im", i)]),
            (None, None) => {}
            _ => return Err(Error::schema("table.k_ba_re", "k_ba_re and k_ba_im must be given together")),
        }
        for (name, col) in cols {
            if col.len() != n {
                return Err(Error::schema(format!("table.{name}"), format!("length {} != {n}", col.len())));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::schema(format!("table.{name}[{i}]"), "not finite"));
            }
        }
        if self.z[0] != 0.0 {
            return Err(Error::schema("table.z[0]", "must be 0"));
        }
        if let Some(i) = self.z.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::schema(format!("table.z[{}]", i + 1), "must be finite and strictly increasing"));
        }
        Ok(())
    }
}

/// Coupling coefficients and the phase mismatch `Δ`.
#[derive(Clone)]
pub struct CouplingSpec {
    pub label: String,
    pub k_ab: ComplexFn,
    /// `None` means the power-conserving `−k_ab*`.
    pub k_ba: Option<ComplexFn>,
    pub delta: f64,
    /// Constant `arg k` when known; avoids numerical unwrapping.
    fixed_arg: Option<f64>,
}

impl fmt::Debug for CouplingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingSpec")
            .field("label", &self.label)
            .field("delta", &self.delta)
            .finish_non_exhaustive()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() {
        return Err(Error::argument("delta", "must be finite"));
    }
    Ok(())
}

impl CouplingSpec {
    pub fn custom<F>(label: impl Into<String>, k: F, delta: f64) -> Result<Self>
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        check_delta(delta)?;
        Ok(Self { label: label.into(), k_ab: Arc::new(k), k_ba: None, delta, fixed_arg: None })
    }

    /// `k(z) = k0`.
    pub fn constant(k0: C64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(k0.re.is_finite() && k0.im.is_finite()) {
            return Err(Error::argument("k0", "must be finite"));
        }
        Ok(Self {
            label: "constant".into(),
            k_ab: Arc::new(move |_| k0),
            k_ba: None,
            delta,
            fixed_arg: Some(k0.arg()),
        })
    }

    /// `k(z) = k0 sech(width z)`.
    pub fn sech(k0: C64, width: f64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::argument("width", "must be finite and > 0"));
        }
        if !(k0.re.is_finite() && k0.im.is_finite()) {
            return Err(Error::argument("k0", "must be finite"));
        }
        Ok(Self {
            label: "sech".into(),
            k_ab: Arc::new(move |z| k0 / (width * z).cosh()),
            k_ba: None,
            delta,
            fixed_arg: Some(k0.arg()),
        })
    }

    pub fn from_table(label: impl Into<String>, table: CouplingTable, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        table.validate()?;
        let table = Arc::new(table);
        let t = table.clone();
        let k_ab: ComplexFn = Arc::new(move |z| C64::new(lerp_table(&t.z, &t.k_re, z), lerp_table(&t.z, &t.k_im, z)));
        let k_ba: Option<ComplexFn> = match (&table.k_ba_re, &table.k_ba_im) {
            (Some(_), Some(_)) => {
                let t = table.clone();
                Some(Arc::new(move |z| {
                    let (re, im) = (t.k_ba_re.as_deref().unwrap_or(&[]), t.k_ba_im.as_deref().unwrap_or(&[]));
                    C64::new(lerp_table(&t.z, re, z), lerp_table(&t.z, im, z))
                }))
            }
            _ => None,
        };
        Ok(Self { label: label.into(), k_ab, k_ba, delta, fixed_arg: None })
    }

    /// Supplies an explicit `k_ba`, making the spec possibly non-conservative.
    pub fn with_k_ba<F>(mut self, k_ba: F) -> Self
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        self.k_ba = Some(Arc::new(k_ba));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Largest relative `|k_ba + k_ab*|` over `points` samples of `[0, z_max]`.
    pub fn conservation_defect(&self, z_max: f64, points: usize) -> f64 {
        let Some(k_ba) = &self.k_ba else { return 0.0 };
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let z = z_max * i as f64 / (points - 1) as f64;
                let k = (self.k_ab)(z);
                (k_ba(z) + k.conj()).norm() / k.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Mode amplitudes at position `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeState {
    pub z: f64,
    pub amp_a: C64,
    pub amp_b: C64,
}

impl ModeState {
    pub fn new(amp_a: C64, amp_b: C64) -> Self {
        Self { z: 0.0, amp_a, amp_b }
    }

    pub fn power_a(&self) -> f64 {
        self.amp_a.norm_sqr()
    }

    pub fn power_b(&self) -> f64 {
        self.amp_b.norm_sqr()
    }

    pub fn total_power(&self) -> f64 {
        self.power_a() + self.power_b()
    }
}

/// `(Ã, B̃) = (A e^{iΔz/2}, B e^{−iΔz/2})`.
pub fn tilde(state: &ModeState, delta: f64) -> [C64; 2] {
    let p = C64::from_polar(1.0, 0.5 * delta * state.z);
    [state.amp_a * p, state.amp_b * p.conj()]
}

/// `A = Ã e^{−iΔz/2}`, `B = B̃ e^{iΔz/2}`.
pub fn detilde(v: [C64; 2], z: f64, delta: f64) -> ModeState {
    let p = C64::from_polar(1.0, -0.5 * delta * z);
    ModeState { z, amp_a: v[0] * p, amp_b: v[1] * p.conj() }
}

/// The su(2) profile in `z`: `Ω = −Δ/2`, `|ω| = |k|`, `φ = arg k + π/2` (unwrapped on `[0, z_max]`).
pub fn to_su2_profile(spec: &CouplingSpec, z_max: f64) -> Result<FieldProfile> {
    if !(z_max.is_finite() && z_max > 0.0) {
        return Err(Error::argument("z_max", "must be finite and > 0"));
    }
    let defect = spec.conservation_defect(z_max, 1025);
    if !(defect <= CONSERVATION_TOL) {
        return Err(Error::argument(
            "k_ba",
            format!("coupling is not power conserving (|k_ba + k_ab*| up to {defect:.3e}); only k_ba = -conj(k_ab) is supported"),
        ));
    }
    let omega_z = -0.5 * spec.delta;
    let (k1, k2) = (spec.k_ab.clone(), spec.k_ab.clone());
    let profile = match spec.fixed_arg {
        Some(arg) => {
            FieldProfile::new(spec.label.clone(), move |_| omega_z, move |z| k1(z).norm(), move |_| arg + FRAC_PI_2)
                .with_phase_rate(|_| 0.0)
        }
        None => {
            let raw = move |z: f64| {
                let k = k2(z);
                (k.norm() > 0.0).then(|| k.arg() + FRAC_PI_2)
            };
            let unwrap = UnwrappedPhase::build(&raw, z_max, DEFAULT_UNWRAP_POINTS);
            FieldProfile::new(spec.label.clone(), move |_| omega_z, move |z| k1(z).norm(), move |z| unwrap.eval(raw(z), z))
        }
    };
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOptions {
    pub propagator: PropagatorConfig,
    /// Rescale the initial state to unit total power.
    pub normalize: bool,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self { propagator: PropagatorConfig::default(), normalize: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSample {
    pub z: f64,
    pub amp_a: C64,
    pub amp_b: C64,
    pub power_a: f64,
    pub power_b: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTrajectory {
    pub label: String,
    pub delta: f64,
    /// Initial total power the amplitudes were divided by (1 when not normalized).
    pub power_scale: f64,
    pub samples: Vec<ModeSample>,
}

impl ModeTrajectory {
    /// Largest `|total(z) − total(0)|`.
    pub fn max_power_drift(&self) -> f64 {
        let p0 = self.samples.first().map_or(0.0, |s| s.total);
        self.samples.iter().map(|s| (s.total - p0).abs()).fold(0.0, f64::max)
    }
}

/// Propagates `initial` (taken at `z = 0`) across the window `[0, window.t_max]` in `z`.
pub fn propagate_modes(spec: &CouplingSpec, initial: ModeState, window: &Window, opts: &ModeOptions) -> Result<ModeTrajectory> {
    window.validate()?;
    let p0 = initial.total_power();
    if !(p0.is_finite() && p0 > 0.0) {
        return Err(Error::argument("initial", "total power must be finite and > 0"));
    }
    let (scale, start) = if opts.normalize {
        let r = p0.sqrt();
        (p0, ModeState { z: 0.0, amp_a: initial.amp_a / r, amp_b: initial.amp_b / r })
    } else {
        (1.0, ModeState { z: 0.0, ..initial })
    };
    let profile = to_su2_profile(spec, window.t_max)?;
    let entries = propagate_entries(&profile, &opts.propagator, window)?;
    let v0 = tilde(&start, spec.delta);
    let samples = entries
        .iter()
        .map(|e| {
            let v = [e.a * v0[0] + e.b * v0[1], -e.b.conj() * v0[0] + e.a.conj() * v0[1]];
            let s = detilde(v, e.t, spec.delta);
            ModeSample {
                z: s.z,
                amp_a: s.amp_a,
                amp_b: s.amp_b,
                power_a: s.power_a(),
                power_b: s.power_b(),
                total: s.total_power(),
            }
        })
        .collect();
    Ok(ModeTrajectory { label: spec.label.clone(), delta: spec.delta, power_scale: scale, samples })
}
