//! Transition probabilities and Pauli expectations from evolution entries.
//!
//! For the initial state `|+⟩` the evolved state is the first column of `U`,
//! `(a, −b*)`; for `|−⟩` it is `(b, a*)`. The expectations below follow
//! from `⟨ψ|σ|ψ⟩` on those columns. In particular `⟨σ^y⟩` carries
//! `sin(φ_a + φ_b)`, not the cosine that appears for `⟨σ^x⟩`.

use serde::{Deserialize, Serialize};

use crate::closed_forms::EvolutionEntries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    Plus,
    Minus,
}

impl InitialState {
    fn sign(self) -> f64 {
        match self {
            InitialState::Plus => 1.0,
            InitialState::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// `P₊⁻ = |b|²`.
pub fn transition_probability(e: &EvolutionEntries) -> f64 {
    e.b.norm_sqr()
}

/// `P₊⁺ = 1 − P₊⁻`.
pub fn survival_probability(e: &EvolutionEntries) -> f64 {
    1.0 - transition_probability(e)
}

/// `±(|a|² − |b|²)`.
pub fn sigma_z_expectation(e: &EvolutionEntries, initial: InitialState) -> f64 {
    initial.sign() * (e.a.norm_sqr() - e.b.norm_sqr())
}

/// `∓2|a||b| cos(φ_a + φ_b)` on x and `±2|a||b| sin(φ_a + φ_b)` on y.
pub fn sigma_xy_expectation(e: &EvolutionEntries, axis: Axis, initial: InitialState) -> f64 {
    let ab = e.a * e.b;
    let s = initial.sign();
    match axis {
        Axis::X => -2.0 * s * ab.re,
        Axis::Y => 2.0 * s * ab.im,
    }
}

/// `(⟨σ^x⟩, ⟨σ^y⟩, ⟨σ^z⟩)`.
pub fn bloch_vector(e: &EvolutionEntries, initial: InitialState) -> [f64; 3] {
    [
        sigma_xy_expectation(e, Axis::X, initial),
        sigma_xy_expectation(e, Axis::Y, initial),
        sigma_z_expectation(e, initial),
    ]
}
