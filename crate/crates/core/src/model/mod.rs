//! Three-level Λ-system physics: pulse envelopes, Hamiltonians, the adiabatic
//! eigenbasis and the couplings between adiabatic states.

mod detuning;
mod drive;
mod frame;
mod hamiltonian;

pub use detuning::{Detuning, DetuningProfile, SampledDetuning};
pub use drive::{custom_drive, gaussian_drive, DriveSample, PulseParameters};
pub use frame::{adiabatic_couplings, adiabatic_transform, mixing_angles, AdiabaticFrame, MixingAngles};
pub use hamiltonian::{bare_hamiltonian, dissipative_hamiltonian, generator, RabiConvention};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid pulse parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("adiabatic frame undefined at t = {t}: both pulses and the detuning vanish")]
    DegenerateFrame { t: f64 },
    #[error("sampled detuning needs matching, strictly increasing times with at least 2 points")]
    BadSamples,
}
