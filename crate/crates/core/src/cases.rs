//! Analytic ingredients of the two cataloged out-of-resonance Θ-ansätze.
//!
//! Everything here is a function of the rescaled time `τ = ∫₀ᵗ |ω|`, so the
//! same expressions serve any coupling envelope `|ω(t)|`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `Θ = 2 atan(2τ / √(2 + 4τ²))`; the flip probability saturates at 1/2.
    One,
    /// `Θ = 2 atan(τ / √(2 + τ²))`; Landau-Zener-like full inversion.
    Two,
}

impl Case {
    pub fn theta(self, tau: f64) -> f64 {
        match self {
            Case::One => 2.0 * (2.0 * tau / (2.0 + 4.0 * tau * tau).sqrt()).atan(),
            Case::Two => 2.0 * (tau / (2.0 + tau * tau).sqrt()).atan(),
        }
    }

    /// dΘ/dτ.
    pub fn theta_rate(self, tau: f64) -> f64 {
        let t2 = tau * tau;
        match self {
            Case::One => 4.0 / ((1.0 + 4.0 * t2) * (2.0 + 4.0 * t2).sqrt()),
            Case::Two => 2.0 / ((1.0 + t2) * (2.0 + t2).sqrt()),
        }
    }

    /// `∫₀^τ cos Θ dτ'`.
    pub fn cos_integral(self, tau: f64) -> f64 {
        match self {
            Case::One => 0.5 * (2.0 * tau).atan(),
            Case::Two => tau.atan(),
        }
    }

    /// Detuning per unit coupling, `Δ(t) / |ω(t)|`, as a function of τ.
    pub fn detuning_ratio(self, tau: f64) -> f64 {
        let t2 = tau * tau;
        match self {
            Case::One => 4.0 * (1.0 + t2) / ((1.0 + 4.0 * t2) * (2.0 + 4.0 * t2).sqrt()),
            Case::Two => (2.0 + (1.0 - t2) * (2.0 + t2)) / (2.0 * (1.0 + t2) * (2.0 + t2).sqrt()),
        }
    }

    /// `∫₀^τ (Δ/|ω|) dτ'`, the accumulated detuning phase.
    pub fn detuning_integral(self, tau: f64) -> f64 {
        match self {
            Case::One => 0.75 * self.theta(tau) + 0.5 * (std::f64::consts::SQRT_2 * tau).asinh(),
            Case::Two => {
                self.theta(tau) + (tau / std::f64::consts::SQRT_2).asinh() - case2_r_integral(tau)
            }
        }
    }

    /// Large-τ behaviour of the flip probability.
    pub fn asymptotic_probability(self) -> f64 {
        match self {
            Case::One => 0.5,
            Case::Two => 1.0,
        }
    }
}

/// `R(τ) = ∫₀^τ √(2 + τ'²) / 2 dτ'` for the second ansatz.
pub fn case2_r_integral(tau: f64) -> f64 {
    0.5 * (0.5 * tau * (2.0 + tau * tau).sqrt() + (tau / std::f64::consts::SQRT_2).asinh())
}
