use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PropagateError;

/// Bare-basis amplitudes `(c₁, c₂, c₃)`; the norm is not required to be 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub amplitudes: [Complex64; 3],
    pub t: f64,
}

impl StateVector {
    pub fn new(amplitudes: [Complex64; 3], t: f64) -> Self {
        Self { amplitudes, t }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn at(self, t: f64) -> Self {
        Self { t, ..self }
    }
}

/// `(√(1-2ε²), -ε, ε)`: the initial state with a small admixture of the
/// excited and target levels.
pub fn initial_state(epsilon: f64) -> Result<StateVector, PropagateError> {
    let rest = 1.0 - 2.0 * epsilon * epsilon;
    if !epsilon.is_finite() || rest < -4.0 * f64::EPSILON {
        return Err(PropagateError::EpsilonOutOfRange(epsilon));
    }
    let rest = rest.max(0.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(StateVector::new([c(rest.sqrt()), c(-epsilon), c(epsilon)], 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub rho: Matrix3<Complex64>,
    pub t: f64,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let c = &psi.amplitudes;
        Self { rho: Matrix3::from_fn(|i, j| c[i] * c[j].conj()), t: psi.t }
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Largest entry of `|ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn to_vec9(self) -> [Complex64; 9] {
        std::array::from_fn(|k| self.rho[(k / 3, k % 3)])
    }

    pub(crate) fn from_vec9(v: &[Complex64; 9], t: f64) -> Self {
        Self { rho: Matrix3::from_fn(|i, j| v[3 * i + j]), t }
    }
}

/// Anything with bare-state populations `P_i`.
pub trait PopulationSource {
    fn populations(&self) -> [f64; 3];
    fn time(&self) -> f64;
}

impl PopulationSource for StateVector {
    fn populations(&self) -> [f64; 3] {
        self.amplitudes.map(|c| c.norm_sqr())
    }
    fn time(&self) -> f64 {
        self.t
    }
}

impl PopulationSource for DensityMatrix {
    fn populations(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.rho[(i, i)].norm())
    }
    fn time(&self) -> f64 {
        self.t
    }
}

/// Populations, their sum and the relative populations `P_i / ΣP`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub norm: f64,
    pub p1r: f64,
    pub p2r: f64,
    pub p3r: f64,
}

impl Observables {
    pub fn populations(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    pub fn relative(&self) -> [f64; 3] {
        [self.p1r, self.p2r, self.p3r]
    }
}

pub fn observables<S: PopulationSource + ?Sized>(state: &S) -> Result<Observables, PropagateError> {
    let [p1, p2, p3] = state.populations();
    let norm = p1 + p2 + p3;
    if !norm.is_finite() || norm <= 0.0 {
        return Err(PropagateError::ZeroNorm { t: state.time() });
    }
    Ok(Observables { p1, p2, p3, norm, p1r: p1 / norm, p2r: p2 / norm, p3r: p3 / norm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryStates {
    Pure(Vec<StateVector>),
    Mixed(Vec<DensityMatrix>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: TrajectoryStates,
    pub observables: Vec<Observables>,
}

impl Trajectory {
    pub(crate) fn from_states<S: PopulationSource>(
        times: Vec<f64>,
        states: Vec<S>,
        wrap: impl FnOnce(Vec<S>) -> TrajectoryStates,
    ) -> Result<Self, PropagateError> {
        let observables = states.iter().map(|s| observables(s)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { times, states: wrap(states), observables })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_observables(&self) -> Option<&Observables> {
        self.observables.last()
    }

    /// `(t, f(observables))` pairs.
    pub fn series(&self, f: impl Fn(&Observables) -> f64) -> Vec<(f64, f64)> {
        self.times.iter().zip(&self.observables).map(|(&t, o)| (t, f(o))).collect()
    }

    pub fn max_p2(&self) -> f64 {
        self.observables.iter().fold(0.0, |m, o| m.max(o.p2))
    }

    pub fn pure_states(&self) -> Option<&[StateVector]> {
        match &self.states {
            TrajectoryStates::Pure(v) => Some(v),
            TrajectoryStates::Mixed(_) => None,
        }
    }

    pub fn mixed_states(&self) -> Option<&[DensityMatrix]> {
        match &self.states {
            TrajectoryStates::Mixed(v) => Some(v),
            TrajectoryStates::Pure(_) => None,
        }
    }
}
