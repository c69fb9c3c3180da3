//! Time evolution of the three-level system under the non-Hermitian
//! Hamiltonian or a Lindblad master equation, with population observables.

mod lindblad;
mod schrodinger;
mod shutdown;
mod state;

pub use lindblad::{propagate_lindblad, DissipationRates, DissipatorSign, GroundDephasing};
pub use schrodinger::propagate_schrodinger;
pub use shutdown::{optimum_shutdown_time, ShutdownCriteria};
pub use state::{initial_state, observables, DensityMatrix, Observables, PopulationSource, StateVector, Trajectory, TrajectoryStates};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::RabiConvention;
use crate::numerics::{IntegrationError, IvpOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagateError {
    #[error("initial-state deviation ε = {0} outside [-1/√2, 1/√2]")]
    EpsilonOutOfRange(f64),
    #[error("relative populations undefined: total population is zero at t = {t}")]
    ZeroNorm { t: f64 },
    #[error("initial density matrix invalid: {0}")]
    InvalidState(String),
    #[error("trace drifted by {drift:e} at t = {t} under a trace-preserving dissipator")]
    TraceDrift { t: f64, drift: f64 },
    #[error("dissipation rate {name} = {value} must be finite and non-negative")]
    InvalidRate { name: &'static str, value: f64 },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// Generator normalisation and integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub convention: RabiConvention,
    pub ivp: IvpOptions,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { convention: RabiConvention::Full, ivp: IvpOptions::with_tol(1e-10) }
    }
}

/// Which equation of motion a scenario uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    #[default]
    Schrodinger,
    Lindblad,
}
