//! Exactly solvable time-dependent spin-1/2 (su(2)) dynamics.
//!
//! The crate houses three layers that are deliberately kept apart:
//!
//! * analytic solutions: generalized-resonance entries, the constant
//!   detuning-to-coupling ratio family, and the two Θ-ansatz cases
//!   ([`closed_forms`], [`theta`]);
//! * an independent numerical oracle that integrates `i dU/dt = H U` with
//!   exactly unitary steps and never looks at the analytic layer
//!   ([`propagator`]);
//! * front-ends: field catalogs, coupled waveguide modes, config parsing and
//!   CSV/JSON export ([`field`], [`modes`], [`config`], [`export`]).
//!
//! Units: ħ = 1, energies in units of a reference coupling |ω₀|, times in
//! units of 1/|ω₀|.

pub mod cases;
pub mod closed_forms;
pub mod config;
pub mod error;
pub mod export;
pub mod field;
pub mod modes;
pub mod observables;
pub mod propagator;
pub mod quad;
pub mod theta;

pub use closed_forms::EvolutionEntries;
pub use error::{Error, Result};
pub use field::{FieldProfile, Family, PhysicalField, Scenario, ScenarioParams, Window};
pub use modes::{CouplingSpec, ModeState};
pub use propagator::{PropagatorConfig, Scheme, Trajectory};
pub use theta::ThetaAnsatz;

pub use num_complex::Complex64 as C64;
