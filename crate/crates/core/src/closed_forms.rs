//! Closed-form evolution entries for every exactly solvable family.
//!
//! All entries follow the convention `U = [[a, b], [−b*, a*]]` with
//! `U(0) = 1`. A nonzero `φ_ω(0)` is carried through the frame factors
//! `e^{i(φ(t) ∓ φ(0))/2}` so that profiles built from laboratory fields need
//! not be re-phased.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::cases::{case2_r_integral, Case};
use crate::error::{Error, Result};
use crate::field::{max_detuning_mismatch, FieldProfile, Scenario, ScenarioKind, Window};
use crate::quad::{integrate, Tolerance};
use crate::C64;

/// Tolerance on `|Δ(t) − Δ_required(t)|` for the resonance and constant-ratio families.
pub const RESONANCE_TOL: f64 = 1e-10;

/// Tolerance on the detuning match for Θ-ansatz families.
pub const ANSATZ_TOL: f64 = 1e-8;

const CHECK_POINTS: usize = 257;

/// First row `(a, b)` of the evolution operator at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionEntries {
    pub t: f64,
    pub a: C64,
    pub b: C64,
}

impl EvolutionEntries {
    pub fn identity(t: f64) -> Self {
        Self { t, a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0) }
    }

    /// `|(|a|² + |b|²) − 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }

    /// `max(|a − a'|, |b − b'|)`.
    pub fn distance(&self, other: &EvolutionEntries) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }

    pub fn phase_a(&self) -> f64 {
        self.a.arg()
    }

    pub fn phase_b(&self) -> f64 {
        self.b.arg()
    }
}

fn frame(profile: &FieldProfile, t: f64, rot_a: C64, rot_b: C64) -> EvolutionEntries {
    let (pt, p0) = (profile.phi(t), profile.phi(0.0));
    EvolutionEntries {
        t,
        a: rot_a * C64::from_polar(1.0, 0.5 * (pt - p0)),
        b: rot_b * C64::from_polar(1.0, 0.5 * (pt + p0)),
    }
}

fn check(profile: &FieldProfile, t_end: f64, points: usize, tol: f64, what: &str, expected: impl FnMut(f64) -> Result<f64>) -> Result<()> {
    let (at, worst) = max_detuning_mismatch(profile, expected, t_end, points)?;
    if worst <= tol {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "profile `{}` does not satisfy {what}: |mismatch| = {worst:.3e} at t = {at:.6e} (tol {tol:.0e})",
            profile.label()
        )))
    }
}

/// Entries at generalized resonance, `Ω(t) + φ̇_ω(t)/2 = 0`.
pub fn resonance_entries(profile: &FieldProfile, t: f64) -> Result<EvolutionEntries> {
    check(profile, t, CHECK_POINTS, RESONANCE_TOL, "generalized resonance", |_| Ok(0.0))?;
    resonance_entries_unchecked(profile, t)
}

fn resonance_entries_unchecked(profile: &FieldProfile, t: f64) -> Result<EvolutionEntries> {
    let s = profile.pulse_area(t)?;
    Ok(frame(profile, t, C64::new(s.cos(), 0.0), C64::new(0.0, -s.sin())))
}

/// Long-time flip probability of the exponentially decaying resonant pulse.
pub fn resonance_asymptote(alpha: f64) -> f64 {
    alpha.sin().powi(2)
}

/// Flip probability of the cosine-modulated resonant family in the scaled time `τ̃ = φ̇₀ t`.
pub fn modulated_probability(c: f64, k: f64, n: u32, tau_tilde: f64) -> f64 {
    let n = n as f64;
    (c * (tau_tilde + k / n * (n * tau_tilde).sin())).sin().powi(2)
}

pub fn sech_probability(omega0: f64, t: f64) -> f64 {
    (omega0 * t).tanh().powi(2)
}

/// `sin²[α(1 − e^{−γt})]`.
pub fn exp_probability(alpha: f64, gamma: f64, t: f64) -> f64 {
    (-alpha * (-gamma * t).exp_m1()).sin().powi(2)
}

/// `sin²[√(1+β₀²) τ] / (1 + β₀²)` for pulse area `τ`.
pub fn beta0_probability(beta0: f64, area: f64) -> f64 {
    let q2 = 1.0 + beta0 * beta0;
    (q2.sqrt() * area).sin().powi(2) / q2
}

/// Entries when `Δ(t) = β₀ |ω(t)|`.
///
/// With `q = √(1+β₀²)` and `Φ = q ∫|ω|`, the rotating-frame entries are
/// `cos Φ − i(β₀/q) sin Φ` and `−i sin Φ / q`; the first equals
/// `√((β₀² + cos²Φ)/(1+β₀²)) · exp(−i atan[(β₀/q) tan Φ])` on the branch that
/// stays continuous through `Φ = π/2`.
pub fn beta0_entries(profile: &FieldProfile, beta0: f64, t: f64) -> Result<EvolutionEntries> {
    if !(beta0.is_finite() && beta0 >= 0.0) {
        return Err(Error::argument("beta0", "must be finite and >= 0"));
    }
    check(profile, t, CHECK_POINTS, RESONANCE_TOL, "Delta = beta0 |omega|", |x| Ok(beta0 * profile.omega_mag(x)))?;
    beta_entries_unchecked(profile, beta0, t)
}

fn beta_entries_unchecked(profile: &FieldProfile, beta: f64, t: f64) -> Result<EvolutionEntries> {
    let q = (1.0 + beta * beta).sqrt();
    let phi = q * profile.pulse_area(t)?;
    let (s, c) = phi.sin_cos();
    Ok(frame(profile, t, C64::new(c, -beta / q * s), C64::new(0.0, -s / q)))
}

/// Entries for constant `Δ` and constant `|ω|` (static Rabi problem, any detuning sign).
fn rabi_entries_unchecked(profile: &FieldProfile, delta: f64, omega0: f64, t: f64) -> EvolutionEntries {
    let w = delta.hypot(omega0);
    let (s, c) = (w * t).sin_cos();
    let sinc = if w > 0.0 { s / w } else { t };
    frame(profile, t, C64::new(c, -delta * sinc), C64::new(0.0, -omega0 * sinc))
}

/// `(i/√2) E(i sinh⁻¹(2τ) | 1/2) = −(1/√2) ∫₀^{sinh⁻¹ 2τ} √(1 + ½ sinh²u) du`.
///
/// Evaluated by real adaptive quadrature after the substitution `θ = iu`.
pub fn elliptic_phase(tau: f64) -> f64 {
    let upper = (2.0 * tau).asinh();
    let tol = Tolerance { abs: 1e-13, rel: 1e-13, max_intervals: 4000 };
    let f = |u: f64| (1.0 + 0.5 * u.sinh().powi(2)).sqrt();
    let value = match integrate(f, 0.0, upper, tol) {
        Ok(est) => est.value,
        Err(Error::Quadrature { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    };
    -value / SQRT_2
}

fn case_moduli(case: Case, tau: f64) -> (f64, f64) {
    match case {
        Case::One => {
            let q = (1.0 + 4.0 * tau * tau).sqrt();
            // (q - 1) rewritten to avoid cancellation at small tau
            let b2 = 4.0 * tau * tau / ((q + 1.0) * 2.0 * q);
            (((q + 1.0) / (2.0 * q)).sqrt(), b2.sqrt())
        }
        Case::Two => {
            let r = (1.0 + tau * tau).sqrt();
            (1.0 / r, tau / r)
        }
    }
}

/// `R(τ)` in closed form: minus the elliptic phase for case 1, algebraic for case 2.
pub fn case_r_integral(case: Case, tau: f64) -> f64 {
    match case {
        Case::One => -elliptic_phase(tau),
        Case::Two => case2_r_integral(tau),
    }
}

fn case_entries_unchecked(profile: &FieldProfile, case: Case, t: f64) -> Result<EvolutionEntries> {
    let tau = profile.pulse_area(t)?;
    let (ma, mb) = case_moduli(case, tau);
    let half_theta = 0.5 * case.theta(tau);
    let r = case_r_integral(case, tau);
    Ok(frame(
        profile,
        t,
        C64::from_polar(ma, -half_theta - r),
        C64::from_polar(mb, -half_theta + r - FRAC_PI_2),
    ))
}

fn check_case(profile: &FieldProfile, case: Case, t_end: f64, points: usize) -> Result<()> {
    check(profile, t_end, points, ANSATZ_TOL, "the ansatz detuning", |x| {
        Ok(case.detuning_ratio(profile.pulse_area(x)?) * profile.omega_mag(x))
    })
}

/// Case-1 entries: `|b|² = (√(1+4τ²) − 1) / (2√(1+4τ²))`, phases carry the elliptic term.
pub fn case1_entries(profile: &FieldProfile, t: f64) -> Result<EvolutionEntries> {
    check_case(profile, Case::One, t, CHECK_POINTS)?;
    case_entries_unchecked(profile, Case::One, t)
}

/// Case-2 entries: `|b|² = τ² / (1 + τ²)`.
pub fn case2_entries(profile: &FieldProfile, t: f64) -> Result<EvolutionEntries> {
    check_case(profile, Case::Two, t, CHECK_POINTS)?;
    case_entries_unchecked(profile, Case::Two, t)
}

/// Closed-form entries of a cataloged scenario at every window sample.
///
/// The family's precondition is checked once over the whole window.
pub fn closed_form_entries(scenario: &Scenario, window: &Window) -> Result<Vec<EvolutionEntries>> {
    window.validate()?;
    let profile = &scenario.profile;
    let points = window.samples.max(CHECK_POINTS);
    let t_end = window.t_max;
    let times = window.times();
    match scenario.kind {
        ScenarioKind::SechResonant { .. } | ScenarioKind::ExpResonant { .. } | ScenarioKind::ModulatedResonant { .. } => {
            check(profile, t_end, points, RESONANCE_TOL, "generalized resonance", |_| Ok(0.0))?;
            times.map(|t| resonance_entries_unchecked(profile, t)).collect()
        }
        ScenarioKind::Rabi { omega0, big_omega0, phidot0 } => {
            let delta = big_omega0 + 0.5 * phidot0;
            Ok(times.map(|t| rabi_entries_unchecked(profile, delta, omega0, t)).collect())
        }
        ScenarioKind::ConstantBeta0 { beta0, .. } => {
            check(profile, t_end, points, RESONANCE_TOL, "Delta = beta0 |omega|", |x| Ok(beta0 * profile.omega_mag(x)))?;
            times.map(|t| beta_entries_unchecked(profile, beta0, t)).collect()
        }
        ScenarioKind::OutOfResonance { case, .. } => {
            check_case(profile, case, t_end, points)?;
            times.map(|t| case_entries_unchecked(profile, case, t)).collect()
        }
        ScenarioKind::Custom { .. } => Err(Error::Precondition(
            "the closed-form engine requires a cataloged family; `custom` has none".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Family, ScenarioParams};
    use std::f64::consts::PI;

    fn scenario(p: ScenarioParams) -> Scenario {
        p.build().unwrap()
    }

    #[test]
    fn rabi_resonance_probability() {
        let s = scenario(ScenarioParams::new(Family::Rabi).with("omega0", 1.0).with("phidot0", 4.0));
        for t in [0.0, 0.3, PI / 2.0, 2.9] {
            let e = resonance_entries(&s.profile, t).unwrap();
            assert!((e.b.norm_sqr() - t.sin().powi(2)).abs() < 1e-15);
        }
        let e = resonance_entries(&s.profile, PI / 2.0).unwrap();
        assert!((e.b.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sech_and_exp_probabilities() {
        let s = scenario(ScenarioParams::new(Family::SechResonant));
        for t in [0.1, 1.0, 4.0] {
            let e = resonance_entries(&s.profile, t).unwrap();
            assert!((e.b.norm_sqr() - sech_probability(1.0, t)).abs() < 1e-14);
        }
        let alpha = 3.7;
        let s = scenario(ScenarioParams::new(Family::ExpResonant).with("alpha", alpha));
        let gamma = 1.0 / alpha;
        for t in [0.1, 5.0, 40.0] {
            let e = resonance_entries(&s.profile, t).unwrap();
            assert!((e.b.norm_sqr() - exp_probability(alpha, gamma, t)).abs() < 1e-13);
        }
    }

    #[test]
    fn resonance_rejects_detuned_profile() {
        let s = scenario(ScenarioParams::new(Family::ConstantBeta0).with("beta0", 0.2));
        assert!(matches!(resonance_entries(&s.profile, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn asymptote_branches() {
        for n in 1..5 {
            assert!(resonance_asymptote(n as f64 * PI) < 1e-28);
            assert!((resonance_asymptote((2 * n + 1) as f64 * PI / 2.0) - 1.0).abs() < 1e-15);
        }
        assert!((resonance_asymptote(4.5 * PI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modulated_probability_values() {
        assert_eq!(modulated_probability(1.0, 1.0, 10, 0.0), 0.0);
        assert!(modulated_probability(1.0, 1.0, 10, 2.0 * PI) < 1e-28);
        assert!((modulated_probability(1.0, 1.0, 10, PI / 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modulated_profile_matches_formula() {
        let s = scenario(ScenarioParams::new(Family::ModulatedResonant));
        for x in [0.2, 1.3, 6.0, 11.0] {
            let e = resonance_entries(&s.profile, x).unwrap();
            assert!((e.b.norm_sqr() - modulated_probability(1.0, 1.0, 10, x)).abs() < 1e-13);
        }
    }

    #[test]
    fn beta0_zero_is_resonance() {
        let s = scenario(ScenarioParams::new(Family::ConstantBeta0).with("beta0", 0.0).with("phidot0", 1.5));
        for t in [0.0, 0.8, 3.3] {
            let a = beta0_entries(&s.profile, 0.0, t).unwrap();
            let b = resonance_entries(&s.profile, t).unwrap();
            assert!(a.distance(&b) < 1e-12);
        }
    }

    #[test]
    fn beta0_amplitude_and_frequency() {
        let s = scenario(ScenarioParams::new(Family::ConstantBeta0).with("beta0", 1.0));
        let t_peak = PI / (2.0 * 2f64.sqrt());
        let e = beta0_entries(&s.profile, 1.0, t_peak).unwrap();
        assert!((e.b.norm_sqr() - 0.5).abs() < 1e-15);
        for t in [0.4, 1.9] {
            let e = beta0_entries(&s.profile, 1.0, t).unwrap();
            assert!((e.b.norm_sqr() - 0.5 * (2f64.sqrt() * t).sin().powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn beta0_matches_modulus_phase_form() {
        let beta: f64 = 0.7;
        let s = scenario(ScenarioParams::new(Family::ConstantBeta0).with("beta0", beta).with_split(0.3));
        let q = (1.0 + beta * beta).sqrt();
        for t in [0.2, 0.9] {
            let e = beta0_entries(&s.profile, beta, t).unwrap();
            let phi = q * t;
            assert!(phi.cos() > 0.0);
            let modulus = ((beta * beta + phi.cos().powi(2)) / (1.0 + beta * beta)).sqrt();
            let arg = 0.5 * s.profile.phi(t) - (beta / q * phi.tan()).atan();
            let a = C64::from_polar(modulus, arg);
            let b = C64::from_polar(phi.sin() / q, 0.5 * s.profile.phi(t) - FRAC_PI_2);
            assert!((e.a - a).norm() < 1e-14 && (e.b - b).norm() < 1e-14);
        }
    }

    #[test]
    fn beta0_rejects_wrong_ratio() {
        let s = scenario(ScenarioParams::new(Family::ConstantBeta0).with("beta0", 1.0));
        assert!(matches!(beta0_entries(&s.profile, 0.5, 1.0), Err(Error::Precondition(_))));
        assert!(beta0_entries(&s.profile, -1.0, 1.0).is_err());
    }

    #[test]
    fn rabi_closed_form_agrees_with_beta_family() {
        let s = scenario(ScenarioParams::new(Family::Rabi).with("Omega0", 0.4).with("phidot0", 0.6));
        let entries = closed_form_entries(&s, &Window::new(5.0, 11).unwrap()).unwrap();
        for e in entries {
            let other = beta_entries_unchecked(&s.profile, 0.7, e.t).unwrap();
            assert!(e.distance(&other) < 1e-14);
        }
    }

    #[test]
    fn case1_values() {
        let s = scenario(ScenarioParams::new(Family::Case1));
        let e0 = case1_entries(&s.profile, 0.0).unwrap();
        assert_eq!(e0.a, C64::new(1.0, 0.0));
        assert_eq!(e0.b.norm(), 0.0);
        let e = case1_entries(&s.profile, 3f64.sqrt() / 2.0).unwrap();
        assert!((e.b.norm_sqr() - 0.25).abs() < 1e-15);
        let e = case1_entries(&s.profile, 1e4).unwrap();
        assert!((e.a.norm_sqr() - 0.5).abs() < 1e-4 && (e.b.norm_sqr() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn case2_values() {
        let s = scenario(ScenarioParams::new(Family::Case2));
        let e = case2_entries(&s.profile, 1.0).unwrap();
        assert!((e.b.norm_sqr() - 0.5).abs() < 1e-15);
        let e = case2_entries(&s.profile, 1e3).unwrap();
        assert!(e.b.norm_sqr() > 1.0 - 1e-6 && e.a.norm_sqr() < 1e-6);
    }

    #[test]
    fn case_entries_reject_other_profiles() {
        let s = scenario(ScenarioParams::new(Family::Case1));
        assert!(matches!(case2_entries(&s.profile, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn elliptic_phase_values() {
        assert_eq!(elliptic_phase(0.0), 0.0);
        // small tau: integrand ~ 1, upper limit ~ 2 tau
        assert!((elliptic_phase(1e-6) + 2e-6 / SQRT_2).abs() < 1e-16);
        // trapezoid with many points as an independent oracle
        let upper = 2f64.asinh();
        let n = 200_000;
        let h = upper / n as f64;
        let f = |u: f64| (1.0 + 0.5 * u.sinh().powi(2)).sqrt();
        let mut sum = 0.5 * (f(0.0) + f(upper));
        for i in 1..n {
            sum += f(i as f64 * h);
        }
        let oracle = -sum * h / SQRT_2;
        assert!((elliptic_phase(1.0) - oracle).abs() < 1e-9);
    }

    #[test]
    fn unitarity_of_all_families() {
        for family in Family::CATALOG {
            let s = scenario(ScenarioParams::new(family));
            let w = Window::new(s.default_t_max(), 2001).unwrap();
            for e in closed_form_entries(&s, &w).unwrap() {
                assert!(e.unitarity_defect() <= 1e-12, "{family}: {}", e.unitarity_defect());
            }
        }
    }

    #[test]
    fn custom_has_no_closed_form() {
        let table = crate::field::FieldTable {
            t: vec![0.0, 1.0],
            omega_z: vec![0.0, 0.0],
            omega_mag: vec![1.0, 1.0],
            phi: vec![0.0, 0.0],
        };
        let s = scenario(ScenarioParams::new(Family::Custom).with_table(table));
        assert!(closed_form_entries(&s, &Window::new(1.0, 3).unwrap()).is_err());
    }
}
