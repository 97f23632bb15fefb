//! Numerical oracle: integrates `i dU/dt = H(t) U`, `U(0) = 1`, from the
//! Hamiltonian parameters alone.
//!
//! Every step multiplies by the exact exponential of a traceless Hermitian
//! 2×2 matrix, so each step factor lies in SU(2) up to rounding. Nothing in
//! this module consults the ansatz machinery or the closed forms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::closed_forms::EvolutionEntries;
use crate::error::{Error, Result};
use crate::field::{FieldProfile, Window};
use crate::observables::{self, InitialState};
use crate::C64;

/// Largest admissible `step · max(|Ω| + |ω|, |φ̇_ω|)`.
pub const RESOLUTION_LIMIT: f64 = 0.1;

const RESOLUTION_PROBES: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exponential of the midpoint Hamiltonian; second order.
    #[default]
    MidpointExponential,
    /// Two exponentials at the Gauss–Legendre nodes; fourth order.
    CommutatorFree4,
}

impl Scheme {
    pub fn nominal_order(self) -> f64 {
        match self {
            Scheme::MidpointExponential => 2.0,
            Scheme::CommutatorFree4 => 4.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::MidpointExponential => "midpoint",
            Scheme::CommutatorFree4 => "cf4",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midpoint" | "midpoint_exponential" => Ok(Scheme::MidpointExponential),
            "cf4" | "commutator_free_4th" => Ok(Scheme::CommutatorFree4),
            other => Err(Error::argument("scheme", format!("unknown scheme `{other}`; expected midpoint or cf4"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub scheme: Scheme,
    /// Upper bound on the integration step; sample intervals are split evenly.
    pub step: f64,
    pub max_unitarity_drift: f64,
    pub check_resolution: bool,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { scheme: Scheme::default(), step: 5e-4, max_unitarity_drift: 1e-10, check_resolution: true }
    }
}

impl PropagatorConfig {
    pub fn new(scheme: Scheme, step: f64) -> Self {
        Self { scheme, step, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::argument("step", "must be finite and > 0"));
        }
        if !(self.max_unitarity_drift >= 0.0) {
            return Err(Error::argument("max_unitarity_drift", "must be >= 0"));
        }
        Ok(())
    }
}

/// An SU(2) element stored as its first row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Su2 {
    pub a: C64,
    pub b: C64,
}

impl Su2 {
    pub(crate) const IDENTITY: Su2 = Su2 { a: C64 { re: 1.0, im: 0.0 }, b: C64 { re: 0.0, im: 0.0 } };

    /// `exp(−i h H)` for `H = [[Ω, ω], [ω*, −Ω]]`.
    pub(crate) fn exp_step(h: f64, omega_z: f64, coupling: C64) -> Su2 {
        let n = (omega_z * omega_z + coupling.norm_sqr()).sqrt();
        let (s, c) = (h * n).sin_cos();
        let sinc = if n > 0.0 { s / n } else { h };
        Su2 { a: C64::new(c, -sinc * omega_z), b: C64::new(0.0, -sinc) * coupling }
    }

    /// `self · rhs`.
    pub(crate) fn then_apply_to(self, rhs: Su2) -> Su2 {
        Su2 { a: self.a * rhs.a - self.b * rhs.b.conj(), b: self.a * rhs.b + self.b * rhs.a.conj() }
    }

    /// `|a|² + |b|²`, the determinant of the full matrix.
    pub(crate) fn det(self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
}

fn hamiltonian(profile: &FieldProfile, t: f64) -> (f64, C64) {
    (profile.omega_z(t), profile.coupling(t))
}

// Gauss–Legendre nodes and weights for the two-exponential fourth-order scheme.
const SQRT3_6: f64 = 0.288_675_134_594_812_9;
const CF4_C1: f64 = 0.5 - SQRT3_6;
const CF4_C2: f64 = 0.5 + SQRT3_6;
const CF4_A1: f64 = 0.25 + SQRT3_6;
const CF4_A2: f64 = 0.25 - SQRT3_6;

fn step_factor(profile: &FieldProfile, scheme: Scheme, t: f64, h: f64) -> Su2 {
    match scheme {
        Scheme::MidpointExponential => {
            let (z, w) = hamiltonian(profile, t + 0.5 * h);
            Su2::exp_step(h, z, w)
        }
        Scheme::CommutatorFree4 => {
            let (z1, w1) = hamiltonian(profile, t + CF4_C1 * h);
            let (z2, w2) = hamiltonian(profile, t + CF4_C2 * h);
            let first = Su2::exp_step(h, CF4_A1 * z1 + CF4_A2 * z2, w1 * CF4_A1 + w2 * CF4_A2);
            let second = Su2::exp_step(h, CF4_A2 * z1 + CF4_A1 * z2, w1 * CF4_A2 + w2 * CF4_A1);
            second.then_apply_to(first)
        }
    }
}

fn suggest_step(scale: f64) -> f64 {
    let x = RESOLUTION_LIMIT / scale;
    let p = 10f64.powf(x.log10().floor());
    (x / p).floor() * p
}

/// Fails with [`Error::Resolution`] when `step · max(|Ω|+|ω|, |φ̇_ω|) > 0.1` on the window.
pub fn check_resolution(profile: &FieldProfile, config: &PropagatorConfig, window: &Window) -> Result<()> {
    let mut scale: f64 = 0.0;
    for i in 0..RESOLUTION_PROBES {
        let t = window.t_max * i as f64 / (RESOLUTION_PROBES - 1) as f64;
        let energy = profile.omega_z(t).abs() + profile.omega_mag(t);
        let rate = profile.phase_rate(t).map(f64::abs).unwrap_or(0.0);
        scale = scale.max(energy).max(rate);
    }
    if !scale.is_finite() {
        return Err(Error::Numeric(format!("profile `{}` is not finite on the window", profile.label())));
    }
    if config.step * scale > RESOLUTION_LIMIT {
        return Err(Error::Resolution { step: config.step, scale, suggested: suggest_step(scale) });
    }
    Ok(())
}

/// Oracle entries at every window sample.
pub fn propagate_entries(profile: &FieldProfile, config: &PropagatorConfig, window: &Window) -> Result<Vec<EvolutionEntries>> {
    config.validate()?;
    window.validate()?;
    if config.check_resolution {
        check_resolution(profile, config, window)?;
    }
    let mut u = Su2::IDENTITY;
    let mut out = Vec::with_capacity(window.samples);
    out.push(EvolutionEntries::identity(0.0));
    let mut t_prev = 0.0;
    for i in 1..window.samples {
        let t_next = window.time(i);
        let span = t_next - t_prev;
        let n = ((span / config.step) - 1e-9).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for k in 0..n {
            let t = t_prev + k as f64 * h;
            u = step_factor(profile, config.scheme, t, h).then_apply_to(u);
        }
        let drift = (u.det() - 1.0).abs();
        if !(drift <= config.max_unitarity_drift) {
            return Err(Error::Numeric(format!(
                "unitarity drift {drift:.3e} at t = {t_next:.6e} exceeds {:.1e}",
                config.max_unitarity_drift
            )));
        }
        out.push(EvolutionEntries { t: t_next, a: u.a, b: u.b });
        t_prev = t_next;
    }
    Ok(out)
}

/// One row of a trajectory; expectations are for the initial state `|+⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Dimensionless abscissa of the family (e.g. `|ω₀|t` or `γt`).
    pub x: f64,
    pub omega_z: f64,
    pub omega_mag: f64,
    pub phi: f64,
    pub detuning: f64,
    pub entries: EvolutionEntries,
    pub p_flip: f64,
    pub p_stay: f64,
    pub sigma: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub label: String,
    pub samples: Vec<Sample>,
}

/// Maximum pointwise differences between two trajectories on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub max_dp: f64,
    pub max_da: f64,
    pub max_db: f64,
}

impl Trajectory {
    pub fn from_entries(profile: &FieldProfile, entries: Vec<EvolutionEntries>, abscissa_scale: f64) -> Self {
        let samples = entries
            .into_iter()
            .map(|e| {
                let t = e.t;
                Sample {
                    t,
                    x: abscissa_scale * t,
                    omega_z: profile.omega_z(t),
                    omega_mag: profile.omega_mag(t),
                    phi: profile.phi(t),
                    detuning: profile.detuning(t).unwrap_or(f64::NAN),
                    entries: e,
                    p_flip: observables::transition_probability(&e),
                    p_stay: observables::survival_probability(&e),
                    sigma: observables::bloch_vector(&e, InitialState::Plus),
                }
            })
            .collect();
        Self { label: profile.label().to_string(), samples }
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.entries.unitarity_defect()).fold(0.0, f64::max)
    }

    pub fn deviation(&self, other: &Trajectory) -> Deviation {
        let mut d = Deviation { max_dp: 0.0, max_da: 0.0, max_db: 0.0 };
        for (x, y) in self.samples.iter().zip(&other.samples) {
            d.max_dp = d.max_dp.max((x.p_flip - y.p_flip).abs());
            d.max_da = d.max_da.max((x.entries.a - y.entries.a).norm());
            d.max_db = d.max_db.max((x.entries.b - y.entries.b).norm());
        }
        d
    }
}

/// Oracle trajectory with fields, detuning, probabilities and expectations.
pub fn propagate(profile: &FieldProfile, config: &PropagatorConfig, window: &Window) -> Result<Trajectory> {
    Ok(Trajectory::from_entries(profile, propagate_entries(profile, config, window)?, 1.0))
}

/// Self-convergence of the oracle at steps `h`, `h/2`, `h/4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub nominal_order: f64,
    pub steps: [f64; 3],
    /// `max_t |U_h − U_{h/2}|` and `max_t |U_{h/2} − U_{h/4}|`.
    pub differences: [f64; 2],
    /// `log2(d₁/d₂)`; `None` when both differences are at round-off.
    pub observed_order: Option<f64>,
    /// Every resolution agreed to round-off (the scheme is exact for this profile).
    pub exact: bool,
    pub within_tolerance: bool,
    pub error: Option<String>,
}

/// Differences below this are treated as round-off.
pub const ROUND_OFF: f64 = 1e-13;

pub fn richardson_check(profile: &FieldProfile, config: &PropagatorConfig, window: &Window) -> ConvergenceReport {
    let steps = [config.step, config.step / 2.0, config.step / 4.0];
    let mut report = ConvergenceReport {
        scheme: config.scheme,
        nominal_order: config.scheme.nominal_order(),
        steps,
        differences: [f64::NAN; 2],
        observed_order: None,
        exact: false,
        within_tolerance: false,
        error: None,
    };
    let mut runs = Vec::with_capacity(3);
    for h in steps {
        let cfg = PropagatorConfig { step: h, ..*config };
        match propagate_entries(profile, &cfg, window) {
            Ok(e) => runs.push(e),
            Err(e) => {
                report.error = Some(e.to_string());
                return report;
            }
        }
    }
    let diff = |x: &[EvolutionEntries], y: &[EvolutionEntries]| {
        x.iter().zip(y).map(|(p, q)| p.distance(q)).fold(0.0, f64::max)
    };
    let d1 = diff(&runs[0], &runs[1]);
    let d2 = diff(&runs[1], &runs[2]);
    report.differences = [d1, d2];
    if d1 < ROUND_OFF && d2 < ROUND_OFF {
        report.exact = true;
        report.within_tolerance = true;
        return report;
    }
    let order = (d1 / d2).log2();
    report.observed_order = Some(order);
    report.within_tolerance = (order - report.nominal_order).abs() <= 0.3;
    report
}
