//! Θ-ansatz machinery.
//!
//! Fixing a function `Θ(τ)` with `Θ(0) = 0` fixes the detuning
//!
//! ```text
//! Δ(t) = ½ Θ̇(t) + |ω(t)| sin Θ cot[2 ∫₀ᵗ |ω| cos Θ dt']
//! ```
//!
//! for which the evolution entries are known in terms of the cosine integral
//! `s = ∫|ω| cos Θ` and the phase integral
//! `R = ∫ |ω| sin Θ / sin(2 s) dt'`. Because Θ is given as a function of the
//! pulse area `τ = ∫₀ᵗ |ω|`, both integrals reduce to integrals over `τ` and
//! do not depend on the envelope `|ω(t)|`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cases::Case;
use crate::closed_forms::{closed_form_entries, EvolutionEntries};
use crate::error::{Error, Result};
use crate::field::{lerp_table, FieldProfile, Scenario, ScenarioKind, TimeFn, Window};
use crate::propagator::{propagate_entries, PropagatorConfig, Scheme};
use crate::quad::{try_integrate, Tolerance};
use crate::C64;

/// Sampled `Θ(τ)`, linearly interpolated (and extrapolated past the last row).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable {
    tau: Vec<f64>,
    theta: Vec<f64>,
}

impl ThetaTable {
    pub fn new(tau: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let t = Self { tau, theta };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if self.tau.len() != self.theta.len() {
            return Err(Error::schema("theta", "column lengths differ"));
        }
        if self.tau.len() < 2 {
            return Err(Error::schema("rows", "need at least two rows"));
        }
        for (i, (&x, &y)) in self.tau.iter().zip(&self.theta).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::schema(format!("row {}", i + 1), "values must be finite"));
            }
        }
        if self.tau[0] != 0.0 || self.theta[0] != 0.0 {
            return Err(Error::schema("row 1", "table must start at tau = 0 with Theta = 0"));
        }
        if let Some(i) = self.tau.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::schema(format!("row {}", i + 2), "tau must be strictly increasing"));
        }
        Ok(())
    }

    /// Parses `tau,theta` rows. A non-numeric first row is taken as a header;
    /// `#` starts a comment line.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let (mut tau, mut theta) = (Vec::new(), Vec::new());
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::schema(format!("row {}", i + 1), e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::schema(format!("row {}", i + 1), format!("expected 2 columns, found {}", record.len())));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => {
                    tau.push(x);
                    theta.push(y);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::schema(format!("row {}", i + 1), "expected two numbers")),
            }
        }
        Self::new(tau, theta)
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    fn value(&self, x: f64) -> f64 {
        lerp_table(&self.tau, &self.theta, x)
    }

    fn slope(&self, x: f64) -> f64 {
        let n = self.tau.len();
        let i = self.tau.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        (self.theta[i + 1] - self.theta[i]) / (self.tau[i + 1] - self.tau[i])
    }
}

#[derive(Clone)]
enum Shape {
    Zero,
    Case(Case),
    Table(Arc<ThetaTable>),
    Custom { theta: TimeFn, rate: Option<TimeFn> },
}

/// A parameter function `Θ(τ)` with `Θ(0) = 0`.
#[derive(Clone)]
pub struct ThetaAnsatz {
    shape: Shape,
    label: String,
}

impl fmt::Debug for ThetaAnsatz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThetaAnsatz").field("label", &self.label).finish_non_exhaustive()
    }
}

const RATE_STEP: f64 = 1e-5;

impl ThetaAnsatz {
    /// `Θ ≡ 0`: generalized resonance.
    pub fn zero() -> Self {
        Self { shape: Shape::Zero, label: "zero".into() }
    }

    pub fn case1() -> Self {
        Self { shape: Shape::Case(Case::One), label: "case1".into() }
    }

    pub fn case2() -> Self {
        Self { shape: Shape::Case(Case::Two), label: "case2".into() }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "case1" => Ok(Self::case1()),
            "case2" => Ok(Self::case2()),
            other => Err(Error::argument("ansatz", format!("unknown ansatz `{other}`; expected zero, case1, case2"))),
        }
    }

    pub fn from_table(label: impl Into<String>, table: ThetaTable) -> Self {
        Self { shape: Shape::Table(Arc::new(table)), label: label.into() }
    }

    /// A user-supplied `Θ(τ)`; without `rate`, `dΘ/dτ` is taken numerically.
    pub fn custom<F>(label: impl Into<String>, theta: F, rate: Option<TimeFn>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if theta(0.0) != 0.0 {
            return Err(Error::argument("theta", "Theta(0) must be exactly 0"));
        }
        Ok(Self { shape: Shape::Custom { theta: Arc::new(theta), rate }, label: label.into() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The cataloged case this ansatz reproduces, if any.
    pub fn case(&self) -> Option<Case> {
        match self.shape {
            Shape::Case(c) => Some(c),
            _ => None,
        }
    }

    pub fn theta(&self, tau: f64) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Case(c) => c.theta(tau),
            Shape::Table(t) => t.value(tau),
            Shape::Custom { theta, .. } => theta(tau),
        }
    }

    /// `dΘ/dτ`.
    pub fn theta_rate(&self, tau: f64) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Case(c) => c.theta_rate(tau),
            Shape::Table(t) => t.slope(tau),
            Shape::Custom { rate: Some(r), .. } => r(tau),
            Shape::Custom { theta, rate: None } => {
                let h = RATE_STEP;
                if tau < 2.0 * h {
                    (-3.0 * theta(tau) + 4.0 * theta(tau + h) - theta(tau + 2.0 * h)) / (2.0 * h)
                } else {
                    (theta(tau - 2.0 * h) - 8.0 * theta(tau - h) + 8.0 * theta(tau + h) - theta(tau + 2.0 * h))
                        / (12.0 * h)
                }
            }
        }
    }
}

/// `s = ∫₀ᵗ |ω| cos Θ` and `R(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseIntegrals {
    pub phi_int: f64,
    pub r_int: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Absolute quadrature tolerance in τ units.
    pub quad_tol: f64,
    /// Below this τ the ratio `sin Θ / sin 2s` is replaced by `Θ / 2τ`.
    pub epsilon: f64,
    pub consistency_check: bool,
    pub consistency_tol: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self { quad_tol: 1e-10, epsilon: 1e-6, consistency_check: true, consistency_tol: 1e-8 }
    }
}

impl PhaseOptions {
    fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0) {
            return Err(Error::argument("quad_tol", "must be > 0"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::argument("epsilon", "must be > 0"));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance::absolute(self.quad_tol)
    }
}

/// Incremental evaluation of the phase integrals along increasing τ, so a
/// trajectory costs one pass instead of one integral from zero per sample.
///
/// Owned by a single evaluation; not shared between threads.
pub struct PhaseSession<'a> {
    ansatz: &'a ThetaAnsatz,
    opts: PhaseOptions,
    track_r: bool,
    tau: f64,
    s: f64,
    r: f64,
}

impl<'a> PhaseSession<'a> {
    pub fn new(ansatz: &'a ThetaAnsatz, opts: PhaseOptions) -> Result<Self> {
        opts.validate()?;
        Ok(Self { ansatz, opts, track_r: true, tau: 0.0, s: 0.0, r: 0.0 })
    }

    /// A session that only accumulates the cosine integral.
    fn cos_only(ansatz: &'a ThetaAnsatz, opts: PhaseOptions) -> Result<Self> {
        let mut s = Self::new(ansatz, opts)?;
        s.track_r = false;
        Ok(s)
    }

    fn cos_integral(&self, a: f64, b: f64) -> Result<f64> {
        if matches!(self.ansatz.shape, Shape::Zero) {
            return Ok(b - a);
        }
        Ok(try_integrate(|x| Ok(self.ansatz.theta(x).cos()), a, b, self.opts.tolerance())?.value)
    }

    /// `sin Θ / sin 2s` at `tau` given `s(tau)`.
    fn ratio(&self, tau: f64, s: f64) -> Result<f64> {
        let theta = self.ansatz.theta(tau);
        if tau < self.opts.epsilon {
            return Ok(if tau > 0.0 { theta / (2.0 * tau) } else { 0.5 * self.ansatz.theta_rate(0.0) });
        }
        let num = theta.sin();
        if num == 0.0 {
            return Ok(0.0);
        }
        if !(s > 0.0 && 2.0 * s < std::f64::consts::PI) {
            return Err(Error::SingularAnsatz {
                tau,
                reason: format!("2 * cos-integral = {:.6e} leaves (0, pi) where sin(Theta) != 0", 2.0 * s),
            });
        }
        Ok(num / (2.0 * s).sin())
    }

    /// `[a, …, b]` split at the small-τ cutoff and at table nodes, where the integrands have kinks.
    fn pieces(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        let eps = self.opts.epsilon;
        if a < eps && eps < b {
            pts.push(eps);
        }
        if let Shape::Table(t) = &self.ansatz.shape {
            pts.extend(t.tau.iter().copied().filter(|&x| x > a && x < b));
        }
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `R` over one kink-free piece starting at `p` where the cosine integral is `s_p`.
    fn r_piece(&self, p: f64, q: f64, s_p: f64) -> Result<f64> {
        let tol = self.opts.tolerance();
        if q <= self.opts.epsilon {
            return Ok(try_integrate(|x| self.ratio(x, 0.0), p, q, tol)?.value);
        }
        let inner = Tolerance::absolute(0.1 * self.opts.quad_tol);
        Ok(try_integrate(
            |x| {
                let s = s_p + try_integrate(|y| Ok(self.ansatz.theta(y).cos()), p, x, inner)?.value;
                self.ratio(x, s)
            },
            p,
            q,
            tol,
        )?
        .value)
    }

    /// Advances to `tau` (restarting from zero if `tau` is behind the cursor).
    pub fn advance(&mut self, tau: f64) -> Result<PhaseIntegrals> {
        if !tau.is_finite() {
            return Err(Error::Numeric(format!("pulse area {tau} is not finite")));
        }
        if tau < self.tau {
            self.tau = 0.0;
            self.s = 0.0;
            self.r = 0.0;
        }
        if tau > self.tau {
            let pts = self.pieces(self.tau, tau);
            for w in pts.windows(2) {
                if self.track_r && !matches!(self.ansatz.shape, Shape::Zero) {
                    self.r += self.r_piece(w[0], w[1], self.s)?;
                }
                self.s += self.cos_integral(w[0], w[1])?;
            }
            self.tau = tau;
        }
        Ok(PhaseIntegrals { phi_int: self.s, r_int: self.r })
    }
}

/// `Δ/|ω|` induced by the ansatz at pulse area `tau`, given `s(tau)`.
fn induced_ratio(ansatz: &ThetaAnsatz, tau: f64, s: f64, eps: f64) -> Result<f64> {
    let theta = ansatz.theta(tau);
    let half_rate = 0.5 * ansatz.theta_rate(tau);
    if tau < eps {
        let limit = if tau > 0.0 { theta / (2.0 * tau) } else { 0.5 * ansatz.theta_rate(0.0) };
        return Ok(half_rate + limit);
    }
    let num = theta.sin();
    if num == 0.0 {
        return Ok(half_rate);
    }
    let (sin2, cos2) = (2.0 * s).sin_cos();
    if sin2.abs() <= 1e-12 {
        return Err(Error::SingularAnsatz {
            tau,
            reason: format!("cot argument 2s = {:.6e} is a multiple of pi", 2.0 * s),
        });
    }
    Ok(half_rate + num * cos2 / sin2)
}

/// The detuning `Ω + φ̇_ω/2` that makes the ansatz exact, at time `t`.
pub fn induced_detuning(ansatz: &ThetaAnsatz, profile: &FieldProfile, t: f64) -> Result<f64> {
    induced_detuning_with(ansatz, profile, t, &PhaseOptions::default())
}

pub fn induced_detuning_with(ansatz: &ThetaAnsatz, profile: &FieldProfile, t: f64, opts: &PhaseOptions) -> Result<f64> {
    let tau = profile.pulse_area(t)?;
    let mut session = PhaseSession::cos_only(ansatz, *opts)?;
    let s = session.advance(tau)?.phi_int;
    Ok(profile.omega_mag(t) * induced_ratio(ansatz, tau, s, opts.epsilon)?)
}

/// Both phase integrals at time `t`.
pub fn phase_integrals(ansatz: &ThetaAnsatz, profile: &FieldProfile, t: f64, quad_tol: f64) -> Result<PhaseIntegrals> {
    let opts = PhaseOptions { quad_tol, ..PhaseOptions::default() };
    let tau = profile.pulse_area(t)?;
    PhaseSession::new(ansatz, opts)?.advance(tau)
}

/// Largest `|Δ_profile − Δ_induced|` over `times` (which must be increasing).
fn scan_residual(ansatz: &ThetaAnsatz, profile: &FieldProfile, times: &[f64], opts: &PhaseOptions) -> Result<(f64, f64)> {
    let mut session = PhaseSession::cos_only(ansatz, *opts)?;
    let mut worst = (0.0, 0.0);
    for &t in times {
        let tau = profile.pulse_area(t)?;
        let s = session.advance(tau)?.phi_int;
        let induced = profile.omega_mag(t) * induced_ratio(ansatz, tau, s, opts.epsilon)?;
        let d = (profile.detuning(t)? - induced).abs();
        if !(d <= worst.1) {
            worst = (t, d);
        }
    }
    Ok(worst)
}

fn grid(t_end: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| if i + 1 == points { t_end } else { t_end * i as f64 / (points - 1) as f64 }).collect()
}

fn check_consistency(ansatz: &ThetaAnsatz, profile: &FieldProfile, times: &[f64], opts: &PhaseOptions) -> Result<()> {
    if !opts.consistency_check {
        return Ok(());
    }
    let (t, mismatch) = scan_residual(ansatz, profile, times, opts)?;
    if mismatch > opts.consistency_tol {
        return Err(Error::InconsistentProfile { t, mismatch, tol: opts.consistency_tol });
    }
    Ok(())
}

fn entries_from(ansatz: &ThetaAnsatz, profile: &FieldProfile, t: f64, tau: f64, p: PhaseIntegrals) -> EvolutionEntries {
    let (pt, p0) = (profile.phi(t), profile.phi(0.0));
    let half_theta = 0.5 * ansatz.theta(tau);
    let s = p.phi_int;
    EvolutionEntries {
        t,
        a: C64::from_polar(1.0, 0.5 * (pt - p0) - half_theta - p.r_int) * s.cos(),
        b: C64::from_polar(1.0, 0.5 * (pt + p0) - half_theta + p.r_int - FRAC_PI_2) * s.sin(),
    }
}

/// Entries from the Θ representation at time `t`.
pub fn general_entries(ansatz: &ThetaAnsatz, profile: &FieldProfile, t: f64, opts: &PhaseOptions) -> Result<EvolutionEntries> {
    check_consistency(ansatz, profile, &grid(t, 65), opts)?;
    let tau = profile.pulse_area(t)?;
    let p = PhaseSession::new(ansatz, *opts)?.advance(tau)?;
    Ok(entries_from(ansatz, profile, t, tau, p))
}

/// Entries from the Θ representation at every window sample.
pub fn general_trajectory(ansatz: &ThetaAnsatz, profile: &FieldProfile, window: &Window, opts: &PhaseOptions) -> Result<Vec<EvolutionEntries>> {
    window.validate()?;
    let times: Vec<f64> = window.times().collect();
    check_consistency(ansatz, profile, &times, opts)?;
    let mut session = PhaseSession::new(ansatz, *opts)?;
    times
        .iter()
        .map(|&t| {
            let tau = profile.pulse_area(t)?;
            let p = session.advance(tau)?;
            Ok(entries_from(ansatz, profile, t, tau, p))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub residual_tol: f64,
    pub oracle_tol: f64,
    pub oracle: PropagatorConfig,
    pub phase: PhaseOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-9,
            oracle_tol: 1e-6,
            oracle: PropagatorConfig::new(Scheme::CommutatorFree4, 2e-3),
            phase: PhaseOptions::default(),
        }
    }
}

/// Outcome of checking an ansatz against a profile; failures are recorded, not raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub ansatz: String,
    pub profile: String,
    /// `max |Δ_induced − Δ_profile|` over the window.
    pub max_residual: f64,
    pub residual_at: f64,
    /// `max |entries − oracle|` over the window.
    pub oracle_deviation: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
}

pub fn verify_ansatz(ansatz: &ThetaAnsatz, profile: &FieldProfile, window: &Window, opts: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport {
        ansatz: ansatz.label().to_string(),
        profile: profile.label().to_string(),
        max_residual: f64::NAN,
        residual_at: f64::NAN,
        oracle_deviation: None,
        passed: false,
        error: None,
    };
    if let Err(e) = window.validate() {
        report.error = Some(e.to_string());
        return report;
    }
    let times: Vec<f64> = grid(window.t_max, window.samples.max(257));
    match scan_residual(ansatz, profile, &times, &opts.phase) {
        Ok((at, r)) => {
            report.max_residual = r;
            report.residual_at = at;
        }
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    }
    let unchecked = PhaseOptions { consistency_check: false, ..opts.phase };
    let deviation = general_trajectory(ansatz, profile, window, &unchecked).and_then(|entries| {
        let oracle = propagate_entries(profile, &opts.oracle, window)?;
        Ok(entries.iter().zip(&oracle).map(|(x, y)| x.distance(y)).fold(0.0, f64::max))
    });
    match deviation {
        Ok(d) => report.oracle_deviation = Some(d),
        Err(e) => report.error = Some(e.to_string()),
    }
    report.passed = report.error.is_none()
        && report.max_residual <= opts.residual_tol
        && report.oracle_deviation.is_some_and(|d| d <= opts.oracle_tol);
    report
}

/// The ansatz a cataloged scenario realizes, or `None` for constant-ratio detunings.
pub fn natural_ansatz(scenario: &Scenario) -> Option<ThetaAnsatz> {
    match scenario.kind {
        ScenarioKind::OutOfResonance { case: Case::One, .. } => Some(ThetaAnsatz::case1()),
        ScenarioKind::OutOfResonance { case: Case::Two, .. } => Some(ThetaAnsatz::case2()),
        ScenarioKind::ConstantBeta0 { .. } => None,
        ScenarioKind::Rabi { big_omega0, phidot0, .. } if big_omega0 + 0.5 * phidot0 != 0.0 => None,
        _ => Some(ThetaAnsatz::zero()),
    }
}

/// Checks a scenario against its own solvability condition and the oracle.
///
/// Θ-families go through [`verify_ansatz`]; constant-ratio families compare
/// `Δ` with `β|ω|` and the closed form with the oracle.
pub fn verify_scenario(scenario: &Scenario, window: &Window, opts: &VerifyOptions) -> VerifyReport {
    if let Some(ansatz) = natural_ansatz(scenario) {
        return verify_ansatz(&ansatz, &scenario.profile, window, opts);
    }
    let profile = &scenario.profile;
    let beta = match scenario.kind {
        ScenarioKind::ConstantBeta0 { beta0, .. } => beta0,
        ScenarioKind::Rabi { omega0, big_omega0, phidot0 } => (big_omega0 + 0.5 * phidot0) / omega0,
        _ => f64::NAN,
    };
    let mut report = VerifyReport {
        ansatz: "constant_ratio".into(),
        profile: profile.label().to_string(),
        max_residual: f64::NAN,
        residual_at: f64::NAN,
        oracle_deviation: None,
        passed: false,
        error: None,
    };
    let outcome = window.validate().and_then(|_| {
        let mut worst = (0.0, 0.0);
        for t in grid(window.t_max, window.samples.max(257)) {
            let d = (profile.detuning(t)? - beta * profile.omega_mag(t)).abs();
            if !(d <= worst.1) {
                worst = (t, d);
            }
        }
        report.residual_at = worst.0;
        report.max_residual = worst.1;
        let closed = closed_form_entries(scenario, window)?;
        let oracle = propagate_entries(profile, &opts.oracle, window)?;
        Ok(closed.iter().zip(&oracle).map(|(x, y)| x.distance(y)).fold(0.0, f64::max))
    });
    match outcome {
        Ok(d) => report.oracle_deviation = Some(d),
        Err(e) => report.error = Some(e.to_string()),
    }
    report.passed = report.error.is_none()
        && report.max_residual <= opts.residual_tol
        && report.oracle_deviation.is_some_and(|d| d <= opts.oracle_tol);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{elliptic_phase, resonance_entries};
    use crate::field::{Family, ScenarioParams};

    fn unit_profile() -> FieldProfile {
        ScenarioParams::new(Family::Case1).build().unwrap().profile
    }

    #[test]
    fn zero_ansatz_is_resonance() {
        let p = ScenarioParams::new(Family::SechResonant).build().unwrap().profile;
        let z = ThetaAnsatz::zero();
        for t in [0.0, 0.5, 2.0, 6.0] {
            assert_eq!(induced_detuning(&z, &p, t).unwrap(), 0.0);
            let pi = phase_integrals(&z, &p, t, 1e-10).unwrap();
            assert!((pi.phi_int - p.pulse_area(t).unwrap()).abs() < 1e-12);
            assert_eq!(pi.r_int, 0.0);
            let g = general_entries(&z, &p, t, &PhaseOptions::default()).unwrap();
            let r = resonance_entries(&p, t).unwrap();
            assert!(g.distance(&r) < 1e-12);
        }
    }

    #[test]
    fn zero_ansatz_past_half_pi() {
        let p = ScenarioParams::new(Family::Rabi).with("phidot0", 2.0).build().unwrap().profile;
        let g = general_entries(&ThetaAnsatz::zero(), &p, 5.0, &PhaseOptions::default()).unwrap();
        assert!(g.distance(&resonance_entries(&p, 5.0).unwrap()) < 1e-12);
    }

    #[test]
    fn frozen_induced_detuning() {
        let p = unit_profile();
        assert!((induced_detuning(&ThetaAnsatz::case1(), &p, 0.0).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let d = induced_detuning(&ThetaAnsatz::case2(), &p, 1.0).unwrap();
        assert!((d - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn case_integrals_match_closed_values() {
        let p = unit_profile();
        for tau in [0.5, 1.0, 2.0, 5.0] {
            let one = phase_integrals(&ThetaAnsatz::case1(), &p, tau, 1e-10).unwrap();
            assert!((one.phi_int - 0.5 * (2.0 * tau).atan()).abs() < 1e-10);
            assert!((one.r_int + elliptic_phase(tau)).abs() < 1e-9, "{tau}");
            let two = phase_integrals(&ThetaAnsatz::case2(), &p, tau, 1e-10).unwrap();
            assert!((two.phi_int - tau.atan()).abs() < 1e-10);
            assert!((two.r_int - crate::cases::case2_r_integral(tau)).abs() < 1e-9);
        }
    }

    #[test]
    fn general_entries_frozen_probabilities() {
        let c1 = ScenarioParams::new(Family::Case1).build().unwrap().profile;
        let e = general_entries(&ThetaAnsatz::case1(), &c1, 3f64.sqrt() / 2.0, &PhaseOptions::default()).unwrap();
        assert!((e.b.norm_sqr() - 0.25).abs() < 1e-12);
        let c2 = ScenarioParams::new(Family::Case2).build().unwrap().profile;
        let e = general_entries(&ThetaAnsatz::case2(), &c2, 1.0, &PhaseOptions::default()).unwrap();
        assert!((e.b.norm_sqr() - 0.5).abs() < 1e-12);
        let e0 = general_entries(&ThetaAnsatz::case2(), &c2, 0.0, &PhaseOptions::default()).unwrap();
        assert_eq!((e0.a, e0.b.norm()), (C64::new(1.0, 0.0), 0.0));
    }

    #[test]
    fn mismatched_profile_is_rejected() {
        let c1 = ScenarioParams::new(Family::Case1).build().unwrap().profile;
        let err = general_entries(&ThetaAnsatz::case2(), &c1, 2.0, &PhaseOptions::default());
        assert!(matches!(err, Err(Error::InconsistentProfile { .. })));
    }

    #[test]
    fn epsilon_insensitivity() {
        for ansatz in [ThetaAnsatz::case1(), ThetaAnsatz::case2()] {
            let r = |eps: f64| {
                let opts = PhaseOptions { epsilon: eps, ..PhaseOptions::default() };
                PhaseSession::new(&ansatz, opts).unwrap().advance(1.5).unwrap().r_int
            };
            assert!((r(1e-6) - r(1e-5)).abs() < 1e-9);
            assert!((r(1e-6) - r(1e-7)).abs() < 1e-9);
        }
    }

    #[test]
    fn session_is_path_independent() {
        let a = ThetaAnsatz::case1();
        let mut stepped = PhaseSession::new(&a, PhaseOptions::default()).unwrap();
        for i in 1..=40 {
            stepped.advance(i as f64 * 0.1).unwrap();
        }
        let direct = PhaseSession::new(&a, PhaseOptions::default()).unwrap().advance(4.0).unwrap();
        let got = stepped.advance(4.0).unwrap();
        assert!((got.phi_int - direct.phi_int).abs() < 1e-10 && (got.r_int - direct.r_int).abs() < 1e-9);
        // moving backwards restarts
        let back = stepped.advance(1.0).unwrap();
        assert!((back.phi_int - 0.5 * 2f64.atan()).abs() < 1e-10);
    }

    #[test]
    fn singular_ansatz_is_flagged() {
        // Θ = τ/10: the cosine integral reaches π/2 near τ ≈ 1.58 with sin Θ ≠ 0
        let bad = ThetaAnsatz::custom("slow", |x| 0.1 * x, None).unwrap();
        let p = unit_profile();
        let err = phase_integrals(&bad, &p, 3.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::SingularAnsatz { .. }), "{err:?}");
    }

    #[test]
    fn custom_theta_must_vanish_at_origin() {
        assert!(ThetaAnsatz::custom("shifted", |x| x + 0.1, None).is_err());
    }

    #[test]
    fn numerical_rate_of_custom_theta() {
        let a = ThetaAnsatz::custom("case2-copy", |x| Case::Two.theta(x), None).unwrap();
        for tau in [0.0, 1e-6, 0.3, 4.0] {
            assert!((a.theta_rate(tau) - Case::Two.theta_rate(tau)).abs() < 1e-8, "{tau}");
        }
    }

    #[test]
    fn table_parsing() {
        let t = ThetaTable::from_csv_str("tau,theta\n0,0\n# comment\n1, 0.5\n2,0.7\n").unwrap();
        assert_eq!(t.len(), 3);
        let a = ThetaAnsatz::from_table("tab", t);
        assert!((a.theta(1.5) - 0.6).abs() < 1e-15);
        assert!((a.theta_rate(0.5) - 0.5).abs() < 1e-15);
        for bad in ["0,0\n1\n", "0,0.1\n1,1\n", "0,0\n1,1\n0.5,2\n", "0,0\n", "0,0\n1,x\n", "0,0\n1,nan\n"] {
            assert!(matches!(ThetaTable::from_csv_str(bad), Err(Error::Schema { .. })), "{bad:?}");
        }
    }

    #[test]
    fn tabulated_case2_tracks_closed_form() {
        let n = 4001;
        let tau: Vec<f64> = (0..n).map(|i| 4.0 * i as f64 / (n - 1) as f64).collect();
        let theta: Vec<f64> = tau.iter().map(|&x| Case::Two.theta(x)).collect();
        let a = ThetaAnsatz::from_table("tab2", ThetaTable::new(tau, theta).unwrap());
        let p = unit_profile();
        let pi = phase_integrals(&a, &p, 3.0, 1e-10).unwrap();
        assert!((pi.phi_int - 3f64.atan()).abs() < 1e-6);
        assert!((pi.r_int - crate::cases::case2_r_integral(3.0)).abs() < 1e-5);
    }

    #[test]
    fn verify_reports() {
        let w = Window::new(10.0, 201).unwrap();
        let c1 = ScenarioParams::new(Family::Case1).build().unwrap().profile;
        let rep = verify_ansatz(&ThetaAnsatz::case1(), &c1, &w, &VerifyOptions::default());
        assert!(rep.passed, "{rep:?}");
        assert!(rep.max_residual <= 1e-9 && rep.oracle_deviation.unwrap() <= 1e-6);

        let b = ScenarioParams::new(Family::ConstantBeta0).with("beta0", 1.0).build().unwrap().profile;
        let rep = verify_ansatz(&ThetaAnsatz::zero(), &b, &w, &VerifyOptions::default());
        assert!(!rep.passed);
        assert!((rep.max_residual - 1.0).abs() < 1e-12);

        let c2 = ScenarioParams::new(Family::Case2).build().unwrap().profile;
        let rep = verify_ansatz(&ThetaAnsatz::case2(), &c2, &w, &VerifyOptions::default());
        assert!(rep.passed && rep.max_residual <= 1e-9, "{rep:?}");
    }

    #[test]
    fn every_cataloged_scenario_verifies() {
        for family in Family::CATALOG {
            let s = ScenarioParams::new(family).build().unwrap();
            let w = Window::new(s.default_t_max(), 501).unwrap();
            let rep = verify_scenario(&s, &w, &VerifyOptions::default());
            assert!(rep.passed, "{family}: {rep:?}");
        }
        let detuned = ScenarioParams::new(Family::Rabi).with("Omega0", 1.0).with("phidot0", 0.0).build().unwrap();
        let rep = verify_scenario(&detuned, &Window::new(6.0, 101).unwrap(), &VerifyOptions::default());
        assert!(rep.passed && rep.ansatz == "constant_ratio", "{rep:?}");
    }
}
