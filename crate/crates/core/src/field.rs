//! Hamiltonian parameters `Ω(t)`, `|ω(t)|`, `φ_ω(t)`, the detuning
//! `Δ(t) = Ω(t) + φ̇_ω(t)/2`, the laboratory-field conversion and the
//! catalog of built-in field families.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cases::Case;
use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};

/// A real function of time.
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default step of the five-point central difference used for `φ̇_ω`.
pub const DEFAULT_DIFF_STEP: f64 = 1e-4;

/// Grid points used to unwrap phases sampled from `atan2`.
pub const DEFAULT_UNWRAP_POINTS: usize = 16_384;

/// How `φ̇_ω(t)` is obtained.
#[derive(Clone)]
pub enum PhaseRate {
    Analytic(TimeFn),
    /// Five-point central difference of `φ_ω` with the given step.
    CentralDifference { step: f64 },
    /// No derivative available; detuning evaluation fails.
    Disabled,
}

/// The su(2) Hamiltonian `H(t) = [[Ω, ω], [ω*, −Ω]]` with `ω = |ω| e^{iφ_ω}`.
///
/// Immutable after construction and cheap to clone.
#[derive(Clone)]
pub struct FieldProfile {
    label: String,
    omega_z: TimeFn,
    omega_mag: TimeFn,
    phi: TimeFn,
    phase_rate: PhaseRate,
    pulse_area: Option<TimeFn>,
}

impl fmt::Debug for FieldProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldProfile").field("label", &self.label).finish_non_exhaustive()
    }
}

impl FieldProfile {
    /// A profile whose phase derivative is taken numerically.
    pub fn new<Z, M, P>(label: impl Into<String>, omega_z: Z, omega_mag: M, phi: P) -> Self
    where
        Z: Fn(f64) -> f64 + Send + Sync + 'static,
        M: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            omega_z: Arc::new(omega_z),
            omega_mag: Arc::new(omega_mag),
            phi: Arc::new(phi),
            phase_rate: PhaseRate::CentralDifference { step: DEFAULT_DIFF_STEP },
            pulse_area: None,
        }
    }

    pub fn with_phase_rate<F>(mut self, rate: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.phase_rate = PhaseRate::Analytic(Arc::new(rate));
        self
    }

    pub fn with_numerical_phase_rate(mut self, step: f64) -> Self {
        self.phase_rate = PhaseRate::CentralDifference { step };
        self
    }

    pub fn without_phase_rate(mut self) -> Self {
        self.phase_rate = PhaseRate::Disabled;
        self
    }

    /// Supplies `∫₀ᵗ |ω(t')| dt'` analytically instead of by quadrature.
    pub fn with_pulse_area<F>(mut self, area: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.pulse_area = Some(Arc::new(area));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn omega_z(&self, t: f64) -> f64 {
        (self.omega_z)(t)
    }

    pub fn omega_mag(&self, t: f64) -> f64 {
        (self.omega_mag)(t)
    }

    pub fn phi(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    /// Off-diagonal entry `ω(t) = |ω| e^{iφ_ω}`.
    pub fn coupling(&self, t: f64) -> crate::C64 {
        crate::C64::from_polar(self.omega_mag(t), self.phi(t))
    }

    pub fn phase_rate_kind(&self) -> &PhaseRate {
        &self.phase_rate
    }

    pub fn phase_rate(&self, t: f64) -> Result<f64> {
        match &self.phase_rate {
            PhaseRate::Analytic(f) => Ok(f(t)),
            PhaseRate::CentralDifference { step } => {
                let h = *step;
                let p = |x: f64| self.phi(x);
                Ok((p(t - 2.0 * h) - 8.0 * p(t - h) + 8.0 * p(t + h) - p(t + 2.0 * h)) / (12.0 * h))
            }
            PhaseRate::Disabled => Err(Error::Config(format!(
                "profile `{}` has no phase derivative and numerical differentiation is disabled",
                self.label
            ))),
        }
    }

    /// `Δ(t) = Ω(t) + φ̇_ω(t)/2`.
    pub fn detuning(&self, t: f64) -> Result<f64> {
        Ok(self.omega_z(t) + 0.5 * self.phase_rate(t)?)
    }

    /// `τ(t) = ∫₀ᵗ |ω(t')| dt'`.
    pub fn pulse_area(&self, t: f64) -> Result<f64> {
        if let Some(area) = &self.pulse_area {
            return Ok(area(t));
        }
        Ok(integrate(|x| self.omega_mag(x), 0.0, t, Tolerance::absolute(1e-12))?.value)
    }

    pub fn has_analytic_pulse_area(&self) -> bool {
        self.pulse_area.is_some()
    }

    /// The profile that undoes the evolution over `[0, t_end]`: `H'(s) = −H(t_end − s)`.
    pub fn time_reversed(&self, t_end: f64) -> FieldProfile {
        let (z, m, p) = (self.omega_z.clone(), self.omega_mag.clone(), self.phi.clone());
        let mut out = FieldProfile {
            label: format!("{} (reversed)", self.label),
            omega_z: Arc::new(move |s| -z(t_end - s)),
            omega_mag: Arc::new(move |s| m(t_end - s)),
            phi: Arc::new(move |s| p(t_end - s) + PI),
            phase_rate: match &self.phase_rate {
                PhaseRate::Analytic(f) => {
                    let f = f.clone();
                    PhaseRate::Analytic(Arc::new(move |s| -f(t_end - s)))
                }
                other => other.clone(),
            },
            pulse_area: None,
        };
        if let Some(area) = &self.pulse_area {
            let area = area.clone();
            let total = area(t_end);
            out.pulse_area = Some(Arc::new(move |s| total - area(t_end - s)));
        }
        out
    }
}

/// `Δ(t)` of a profile.
pub fn detuning(profile: &FieldProfile, t: f64) -> Result<f64> {
    profile.detuning(t)
}

/// Uniform sampling `t_i = i · t_max / (samples − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub t_max: f64,
    pub samples: usize,
}

impl Window {
    pub fn new(t_max: f64, samples: usize) -> Result<Self> {
        let w = Self { t_max, samples };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::argument("t_max", format!("must be finite and > 0, got {}", self.t_max)));
        }
        if self.samples < 2 {
            return Err(Error::argument("samples", format!("must be >= 2, got {}", self.samples)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / (self.samples - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            self.t_max
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(move |i| self.time(i))
    }
}

/// True iff `sup |Δ(t)| <= tol` over the window samples.
pub fn is_generalized_resonant(profile: &FieldProfile, window: &Window, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::argument("tol", "must be > 0"));
    }
    window.validate()?;
    for t in window.times() {
        if profile.detuning(t)?.abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `|Δ_profile(t) − expected(t)|` over `points` uniform samples of `[0, t_end]`.
///
/// Returns `(t_at_max, max)`.
pub(crate) fn max_detuning_mismatch<F>(
    profile: &FieldProfile,
    mut expected: F,
    t_end: f64,
    points: usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let points = points.max(2);
    let mut worst = (0.0, 0.0);
    for i in 0..points {
        let t = if i + 1 == points { t_end } else { t_end * i as f64 / (points - 1) as f64 };
        let d = (profile.detuning(t)? - expected(t)?).abs();
        if !(d <= worst.1) {
            worst = (t, d);
        }
    }
    Ok(worst)
}

/// Continuous phase reconstruction for angles only known modulo 2π.
#[derive(Clone)]
pub(crate) struct UnwrappedPhase {
    dt: f64,
    grid: Vec<f64>,
}

impl UnwrappedPhase {
    /// `raw` returns `None` where the phase is undefined; the last value is held there.
    pub(crate) fn build(raw: &dyn Fn(f64) -> Option<f64>, t_max: f64, points: usize) -> Self {
        let points = points.max(2);
        let dt = t_max / (points - 1) as f64;
        let mut grid = Vec::with_capacity(points);
        let mut prev: Option<f64> = None;
        for i in 0..points {
            let t = i as f64 * dt;
            let v = match (raw(t), prev) {
                (Some(r), Some(p)) => r + TAU * ((p - r) / TAU).round(),
                (Some(r), None) => r,
                (None, Some(p)) => p,
                (None, None) => 0.0,
            };
            prev = Some(v);
            grid.push(v);
        }
        Self { dt, grid }
    }

    fn reference(&self, t: f64) -> f64 {
        let n = self.grid.len();
        let x = (t / self.dt).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let w = x - i as f64;
        self.grid[i] * (1.0 - w) + self.grid[i + 1] * w
    }

    pub(crate) fn eval(&self, raw: Option<f64>, t: f64) -> f64 {
        let r0 = self.reference(t);
        match raw {
            Some(r) => r + TAU * ((r0 - r) / TAU).round(),
            None => r0,
        }
    }
}

/// Laboratory-frame magnetic field and the moment scale `μ₀g`.
#[derive(Clone)]
pub struct PhysicalField {
    pub label: String,
    pub b_x: TimeFn,
    pub b_y: TimeFn,
    pub b_z: TimeFn,
    pub mu0_g: f64,
}

impl fmt::Debug for PhysicalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhysicalField")
            .field("label", &self.label)
            .field("mu0_g", &self.mu0_g)
            .finish_non_exhaustive()
    }
}

impl PhysicalField {
    pub fn new<X, Y, Z>(label: impl Into<String>, b_x: X, b_y: Y, b_z: Z, mu0_g: f64) -> Result<Self>
    where
        X: Fn(f64) -> f64 + Send + Sync + 'static,
        Y: Fn(f64) -> f64 + Send + Sync + 'static,
        Z: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(mu0_g.is_finite() && mu0_g > 0.0) {
            return Err(Error::argument("mu0_g", "must be finite and > 0"));
        }
        Ok(Self {
            label: label.into(),
            b_x: Arc::new(b_x),
            b_y: Arc::new(b_y),
            b_z: Arc::new(b_z),
            mu0_g,
        })
    }

    pub fn b(&self, t: f64) -> [f64; 3] {
        [(self.b_x)(t), (self.b_y)(t), (self.b_z)(t)]
    }
}

/// `Ω = (μ₀g/2) B_z`, `|ω| = (μ₀g/2) √(B_x² + B_y²)`, `φ_ω = atan2(−B_y, B_x)` unwrapped
/// on `[0, window.t_max]`.
pub fn to_profile(field: &PhysicalField, window: &Window) -> Result<FieldProfile> {
    window.validate()?;
    let scale = 0.5 * field.mu0_g;
    let (bx, by, bz) = (field.b_x.clone(), field.b_y.clone(), field.b_z.clone());
    let raw = {
        let (bx, by) = (bx.clone(), by.clone());
        move |t: f64| {
            let (x, y) = (bx(t), by(t));
            (x != 0.0 || y != 0.0).then(|| (-y).atan2(x))
        }
    };
    let unwrap = UnwrappedPhase::build(&raw, window.t_max, DEFAULT_UNWRAP_POINTS.max(window.samples));
    let (bx2, by2) = (bx.clone(), by.clone());
    Ok(FieldProfile::new(
        field.label.clone(),
        move |t| scale * bz(t),
        move |t| scale * bx2(t).hypot(by2(t)),
        move |t| unwrap.eval(raw(t), t),
    ))
}

/// Inverse of [`to_profile`]: `B_x = 2|ω| cos φ / μ₀g`, `B_y = −2|ω| sin φ / μ₀g`, `B_z = 2Ω / μ₀g`.
pub fn from_profile(profile: &FieldProfile, mu0_g: f64) -> Result<PhysicalField> {
    let inv = 2.0 / mu0_g;
    let (p1, p2, p3) = (profile.clone(), profile.clone(), profile.clone());
    PhysicalField::new(
        profile.label().to_string(),
        move |t| inv * p1.omega_mag(t) * p1.phi(t).cos(),
        move |t| -inv * p2.omega_mag(t) * p2.phi(t).sin(),
        move |t| inv * p3.omega_z(t),
        mu0_g,
    )
}

/// Built-in field families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Rabi,
    SechResonant,
    ExpResonant,
    ModulatedResonant,
    ConstantBeta0,
    Case1,
    Case2,
    Custom,
}

impl Family {
    /// Every family with a closed form, in catalog order.
    pub const CATALOG: [Family; 7] = [
        Family::Rabi,
        Family::SechResonant,
        Family::ExpResonant,
        Family::ModulatedResonant,
        Family::ConstantBeta0,
        Family::Case1,
        Family::Case2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Rabi => "rabi",
            Family::SechResonant => "sech_resonant",
            Family::ExpResonant => "exp_resonant",
            Family::ModulatedResonant => "modulated_resonant",
            Family::ConstantBeta0 => "constant_beta0",
            Family::Case1 => "case1",
            Family::Case2 => "case2",
            Family::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Family::Rabi => "constant Omega0, |omega0|, phidot0 (static Rabi problem)",
            Family::SechResonant => "|omega| = omega0 sech(omega0 t) at generalized resonance, P = tanh^2",
            Family::ExpResonant => "|omega| = omega0 exp(-gamma t) at generalized resonance",
            Family::ModulatedResonant => "|omega| = C phidot0 (1 + k cos(n phidot0 t)) at generalized resonance",
            Family::ConstantBeta0 => "Delta = beta0 |omega| with constant |omega|",
            Family::Case1 => "Theta-ansatz case 1, P -> 1/2",
            Family::Case2 => "Theta-ansatz case 2, Landau-Zener-like P -> 1",
            Family::Custom => "tabulated Omega, |omega|, phi",
        }
    }

    pub fn allowed_params(self) -> &'static [&'static str] {
        match self {
            Family::Rabi => &["omega0", "Omega0", "phidot0"],
            Family::SechResonant => &["omega0", "phidot0"],
            Family::ExpResonant => &["omega0", "gamma", "alpha", "phidot0"],
            Family::ModulatedResonant => &["C", "k", "n", "phidot0"],
            Family::ConstantBeta0 => &["omega0", "beta0", "phidot0"],
            Family::Case1 | Family::Case2 => &["omega0", "phidot0"],
            Family::Custom => &["diff_step"],
        }
    }

    pub fn accepts_split(self) -> bool {
        matches!(self, Family::ConstantBeta0 | Family::Case1 | Family::Case2)
    }

    pub fn all_names() -> Vec<&'static str> {
        Self::CATALOG.iter().map(|f| f.name()).chain(std::iter::once("custom")).collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::CATALOG
            .iter()
            .copied()
            .chain(std::iter::once(Family::Custom))
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::argument("family", format!("unknown scenario `{s}`; expected one of {}", Self::all_names().join(", ")))
            })
    }
}

/// Tabulated custom profile, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTable {
    pub t: Vec<f64>,
    pub omega_z: Vec<f64>,
    pub omega_mag: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FieldTable {
    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 {
            return Err(Error::schema("table.t", "needs at least two samples"));
        }
        for (name, col) in [("omega_z", &self.omega_z), ("omega_mag", &self.omega_mag), ("phi", &self.phi)] {
            if col.len() != n {
                return Err(Error::schema(format!("table.{name}"), format!("length {} != {n}", col.len())));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::schema(format!("table.{name}[{i}]"), "not finite"));
            }
        }
        if self.t[0] != 0.0 {
            return Err(Error::schema("table.t[0]", "must be 0"));
        }
        if let Some(i) = self.t.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::schema(format!("table.t[{}]", i + 1), "must be finite and strictly increasing"));
        }
        if let Some(i) = self.omega_mag.iter().position(|&v| v < 0.0) {
            return Err(Error::schema(format!("table.omega_mag[{i}]"), "must be >= 0"));
        }
        Ok(())
    }
}

/// Piecewise-linear interpolation with linear extrapolation off both ends.
pub(crate) fn lerp_table(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let i = match xs.partition_point(|&v| v <= x) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Exact integral from `xs[0]` to `x` of the interpolant used by [`lerp_table`].
fn lerp_integral(xs: &[f64], ys: &[f64], cumulative: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    let y = lerp_table(xs, ys, x);
    cumulative[i] + 0.5 * (ys[i] + y) * (x - xs[i])
}

/// Parameters selecting and configuring a field family.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub family: Family,
    pub values: BTreeMap<String, f64>,
    /// Fraction of `Δ(t)` carried by `φ̇_ω/2` (the rest goes into `Ω`).
    pub split_fraction: Option<f64>,
    pub table: Option<FieldTable>,
}

impl ScenarioParams {
    pub fn new(family: Family) -> Self {
        Self { family, values: BTreeMap::new(), split_fraction: None, table: None }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn with_split(mut self, fraction: f64) -> Self {
        self.split_fraction = Some(fraction);
        self
    }

    pub fn with_table(mut self, table: FieldTable) -> Self {
        self.table = Some(table);
        self
    }

    fn get(&self, name: &str, default: f64) -> f64 {
        self.values.get(name).copied().unwrap_or(default)
    }

    pub fn build(&self) -> Result<Scenario> {
        build_scenario(self)
    }
}

/// Resolved parameters of a built scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    Rabi { omega0: f64, big_omega0: f64, phidot0: f64 },
    SechResonant { omega0: f64, phidot0: f64 },
    ExpResonant { omega0: f64, gamma: f64, phidot0: f64 },
    ModulatedResonant { c: f64, k: f64, n: u32, phidot0: f64 },
    ConstantBeta0 { omega0: f64, beta0: f64, phidot0: f64, split: f64 },
    OutOfResonance { case: Case, omega0: f64, phidot0: f64, split: f64 },
    Custom { t_end: f64 },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub profile: FieldProfile,
}

impl Scenario {
    pub fn family(&self) -> Family {
        match self.kind {
            ScenarioKind::Rabi { .. } => Family::Rabi,
            ScenarioKind::SechResonant { .. } => Family::SechResonant,
            ScenarioKind::ExpResonant { .. } => Family::ExpResonant,
            ScenarioKind::ModulatedResonant { .. } => Family::ModulatedResonant,
            ScenarioKind::ConstantBeta0 { .. } => Family::ConstantBeta0,
            ScenarioKind::OutOfResonance { case: Case::One, .. } => Family::Case1,
            ScenarioKind::OutOfResonance { case: Case::Two, .. } => Family::Case2,
            ScenarioKind::Custom { .. } => Family::Custom,
        }
    }

    /// Window length used when none is requested, in reference time units.
    pub fn default_t_max(&self) -> f64 {
        match self.kind {
            ScenarioKind::Rabi { .. } => 2.0 * PI,
            ScenarioKind::SechResonant { omega0, .. } => 6.0 / omega0,
            ScenarioKind::ExpResonant { gamma, .. } => 20.0 / gamma,
            ScenarioKind::ModulatedResonant { phidot0, .. } => 4.0 * PI / phidot0,
            ScenarioKind::ConstantBeta0 { omega0, .. } => 10.0 / omega0,
            ScenarioKind::OutOfResonance { case: Case::One, omega0, .. } => 50.0 / omega0,
            ScenarioKind::OutOfResonance { case: Case::Two, omega0, .. } => 20.0 / omega0,
            ScenarioKind::Custom { t_end } => t_end,
        }
    }

    /// Factor turning `t` into the family's natural dimensionless abscissa
    /// (`|ω₀|t`, `γt` or `φ̇₀t`).
    pub fn abscissa_scale(&self) -> f64 {
        match self.kind {
            ScenarioKind::Rabi { omega0, .. }
            | ScenarioKind::SechResonant { omega0, .. }
            | ScenarioKind::ConstantBeta0 { omega0, .. }
            | ScenarioKind::OutOfResonance { omega0, .. } => {
                if omega0 > 0.0 {
                    omega0
                } else {
                    1.0
                }
            }
            ScenarioKind::ExpResonant { gamma, .. } => gamma,
            ScenarioKind::ModulatedResonant { phidot0, .. } => phidot0,
            ScenarioKind::Custom { .. } => 1.0,
        }
    }
}

/// Builds the profile of the named family.
pub fn make_scenario(params: &ScenarioParams) -> Result<FieldProfile> {
    Ok(build_scenario(params)?.profile)
}

fn require(name: &str, value: f64, ok: bool, what: &str) -> Result<f64> {
    if value.is_finite() && ok {
        Ok(value)
    } else {
        Err(Error::argument(name, format!("{what}, got {value}")))
    }
}

fn build_scenario(params: &ScenarioParams) -> Result<Scenario> {
    let family = params.family;
    let allowed = family.allowed_params();
    if let Some(bad) = params.values.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::argument(
            bad.clone(),
            format!("not a parameter of `{family}`; expected one of {}", allowed.join(", ")),
        ));
    }
    if params.split_fraction.is_some() && !family.accepts_split() {
        return Err(Error::argument("split_fraction", format!("not supported by `{family}`")));
    }
    if params.table.is_some() && family != Family::Custom {
        return Err(Error::argument("table", format!("only the custom family takes a table, not `{family}`")));
    }
    let split = params.split_fraction.unwrap_or(0.0);
    require("split_fraction", split, true, "must be finite")?;
    let label = family.name();

    let scenario = match family {
        Family::Rabi => {
            let omega0 = params.get("omega0", 1.0);
            require("omega0", omega0, omega0 >= 0.0, "must be >= 0")?;
            let phidot0 = require("phidot0", params.get("phidot0", 10.0), true, "must be finite")?;
            let big = require("Omega0", params.get("Omega0", -0.5 * phidot0), true, "must be finite")?;
            Scenario {
                kind: ScenarioKind::Rabi { omega0, big_omega0: big, phidot0 },
                profile: FieldProfile::new(label, move |_| big, move |_| omega0, move |t| phidot0 * t)
                    .with_phase_rate(move |_| phidot0)
                    .with_pulse_area(move |t| omega0 * t),
            }
        }
        Family::SechResonant => {
            let omega0 = params.get("omega0", 1.0);
            require("omega0", omega0, omega0 > 0.0, "must be > 0")?;
            let phidot0 = require("phidot0", params.get("phidot0", 10.0), true, "must be finite")?;
            Scenario {
                kind: ScenarioKind::SechResonant { omega0, phidot0 },
                profile: FieldProfile::new(
                    label,
                    move |_| -0.5 * phidot0,
                    move |t| omega0 / (omega0 * t).cosh(),
                    move |t| phidot0 * t,
                )
                .with_phase_rate(move |_| phidot0)
                .with_pulse_area(move |t| (omega0 * t).sinh().atan()),
            }
        }
        Family::ExpResonant => {
            let omega0 = params.get("omega0", 1.0);
            require("omega0", omega0, omega0 > 0.0, "must be > 0")?;
            let gamma = match (params.values.get("gamma"), params.values.get("alpha")) {
                (Some(_), Some(_)) => {
                    return Err(Error::argument("alpha", "give either gamma or alpha, not both"));
                }
                (Some(&g), None) => require("gamma", g, g > 0.0, "must be > 0")?,
                (None, alpha) => {
                    let a = alpha.copied().unwrap_or(4.5 * PI);
                    omega0 / require("alpha", a, a > 0.0, "must be > 0")?
                }
            };
            let phidot0 = require("phidot0", params.get("phidot0", 10.0 * gamma), true, "must be finite")?;
            Scenario {
                kind: ScenarioKind::ExpResonant { omega0, gamma, phidot0 },
                profile: FieldProfile::new(
                    label,
                    move |_| -0.5 * phidot0,
                    move |t| omega0 * (-gamma * t).exp(),
                    move |t| phidot0 * t,
                )
                .with_phase_rate(move |_| phidot0)
                .with_pulse_area(move |t| -(omega0 / gamma) * (-gamma * t).exp_m1()),
            }
        }
        Family::ModulatedResonant => {
            let c = params.get("C", 1.0);
            require("C", c, c >= 0.0, "must be >= 0")?;
            let k = params.get("k", 1.0);
            // |ω| = C φ̇₀ (1 + k cos) stays non-negative only for k <= 1
            require("k", k, (0.0..=1.0).contains(&k), "must lie in [0, 1]")?;
            let n_raw = params.get("n", 10.0);
            require("n", n_raw, n_raw >= 1.0 && n_raw.fract() == 0.0 && n_raw <= u32::MAX as f64, "must be a positive integer")?;
            let n = n_raw as u32;
            let phidot0 = params.get("phidot0", 1.0);
            require("phidot0", phidot0, phidot0 > 0.0, "must be > 0")?;
            let nf = n as f64;
            Scenario {
                kind: ScenarioKind::ModulatedResonant { c, k, n, phidot0 },
                profile: FieldProfile::new(
                    label,
                    move |_| -0.5 * phidot0,
                    move |t| c * phidot0 * (1.0 + k * (nf * phidot0 * t).cos()),
                    move |t| phidot0 * t,
                )
                .with_phase_rate(move |_| phidot0)
                .with_pulse_area(move |t| {
                    let x = phidot0 * t;
                    c * (x + k / nf * (nf * x).sin())
                }),
            }
        }
        Family::ConstantBeta0 => {
            let omega0 = params.get("omega0", 1.0);
            require("omega0", omega0, omega0 > 0.0, "must be > 0")?;
            let beta0 = params.get("beta0", 1.0);
            require("beta0", beta0, beta0 >= 0.0, "must be >= 0")?;
            let phidot0 = require("phidot0", params.get("phidot0", 0.0), true, "must be finite")?;
            let delta = beta0 * omega0;
            Scenario {
                kind: ScenarioKind::ConstantBeta0 { omega0, beta0, phidot0, split },
                profile: FieldProfile::new(
                    label,
                    move |_| -0.5 * phidot0 + (1.0 - split) * delta,
                    move |_| omega0,
                    move |t| (phidot0 + 2.0 * split * delta) * t,
                )
                .with_phase_rate(move |_| phidot0 + 2.0 * split * delta)
                .with_pulse_area(move |t| omega0 * t),
            }
        }
        Family::Case1 | Family::Case2 => {
            let case = if family == Family::Case1 { Case::One } else { Case::Two };
            let omega0 = params.get("omega0", 1.0);
            require("omega0", omega0, omega0 > 0.0, "must be > 0")?;
            let phidot0 = require("phidot0", params.get("phidot0", 0.0), true, "must be finite")?;
            Scenario {
                kind: ScenarioKind::OutOfResonance { case, omega0, phidot0, split },
                profile: FieldProfile::new(
                    label,
                    move |t| -0.5 * phidot0 + (1.0 - split) * omega0 * case.detuning_ratio(omega0 * t),
                    move |_| omega0,
                    move |t| phidot0 * t + 2.0 * split * case.detuning_integral(omega0 * t),
                )
                .with_phase_rate(move |t| phidot0 + 2.0 * split * omega0 * case.detuning_ratio(omega0 * t))
                .with_pulse_area(move |t| omega0 * t),
            }
        }
        Family::Custom => {
            let table = params
                .table
                .clone()
                .ok_or_else(|| Error::argument("table", "the custom family requires a table"))?;
            table.validate()?;
            let step = params.get("diff_step", DEFAULT_DIFF_STEP);
            require("diff_step", step, step > 0.0, "must be > 0")?;
            let t_end = *table.t.last().expect("validated");
            let mut cumulative = vec![0.0];
            for i in 1..table.t.len() {
                let seg = 0.5 * (table.omega_mag[i] + table.omega_mag[i - 1]) * (table.t[i] - table.t[i - 1]);
                cumulative.push(cumulative[i - 1] + seg);
            }
            let tab = Arc::new(table);
            let (t1, t2, t3, t4) = (tab.clone(), tab.clone(), tab.clone(), tab.clone());
            let profile = FieldProfile::new(
                label,
                move |t| lerp_table(&t1.t, &t1.omega_z, t),
                move |t| lerp_table(&t2.t, &t2.omega_mag, t).max(0.0),
                move |t| lerp_table(&t3.t, &t3.phi, t),
            )
            .with_numerical_phase_rate(step)
            .with_pulse_area(move |t| lerp_integral(&t4.t, &t4.omega_mag, &cumulative, t));
            Scenario { kind: ScenarioKind::Custom { t_end }, profile }
        }
    };
    Ok(scenario)
}
