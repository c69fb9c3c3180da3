use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DriveSample;

/// `½·[[0, Ωp, 0], [Ωp, 2Δ, Ωs], [0, Ωs, 0]]`.
pub fn bare_hamiltonian(d: &DriveSample) -> Matrix3<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let z = c(0.0);
    Matrix3::new(
        z,
        c(0.5 * d.omega_p),
        z,
        c(0.5 * d.omega_p),
        c(d.delta),
        c(0.5 * d.omega_s),
        z,
        c(0.5 * d.omega_s),
        z,
    )
}

/// Bare Hamiltonian plus the ground-state dephasing term `diag(-iΓ/2, 0, iΓ/2)`.
pub fn dissipative_hamiltonian(d: &DriveSample) -> Matrix3<Complex64> {
    let mut h = bare_hamiltonian(d);
    h[(0, 0)] += Complex64::new(0.0, -0.5 * d.gamma_rate);
    h[(2, 2)] += Complex64::new(0.0, 0.5 * d.gamma_rate);
    h
}

/// Normalisation of the propagation generator.
///
/// `Half` integrates `i ċ = H_Γ c` with the ½-normalised Hamiltonian above.
/// `Full` integrates `i ċ = 2·H_Γ c`, i.e. couplings `Ωp`, `Ωs`, diagonal
/// `(-iΓ, 2Δ, iΓ)`. The published transfer efficiencies and robustness tables
/// are reproduced by `Full`, which is the default for propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RabiConvention {
    Half,
    #[default]
    Full,
}

impl RabiConvention {
    pub fn factor(self) -> f64 {
        match self {
            RabiConvention::Half => 1.0,
            RabiConvention::Full => 2.0,
        }
    }
}

/// The matrix `G` of `i ċ = G c` for the given convention.
pub fn generator(d: &DriveSample, convention: RabiConvention) -> Matrix3<Complex64> {
    dissipative_hamiltonian(d) * Complex64::new(convention.factor(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(op: f64, os: f64, delta: f64, gamma: f64) -> DriveSample {
        DriveSample { omega_p: op, omega_s: os, delta, gamma_rate: gamma, ..Default::default() }
    }

    #[test]
    fn zero_drive_is_zero() {
        assert_eq!(bare_hamiltonian(&DriveSample::default()), Matrix3::zeros());
    }

    #[test]
    fn resonant_unit_pulses() {
        let h = bare_hamiltonian(&drive(1.0, 1.0, 0.0, 0.0));
        assert_eq!(h[(0, 1)].re, 0.5);
        assert_eq!(h[(1, 2)].re, 0.5);
        assert!((0..3).all(|i| h[(i, i)] == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn dephasing_only() {
        let h = dissipative_hamiltonian(&drive(0.0, 0.0, 0.0, 1.0));
        assert_eq!(h[(0, 0)], Complex64::new(0.0, -0.5));
        assert_eq!(h[(2, 2)], Complex64::new(0.0, 0.5));
        let d = drive(0.3, 0.7, 1.2, 0.0);
        assert_eq!(dissipative_hamiltonian(&d), bare_hamiltonian(&d));
    }

    #[test]
    fn traces_equal_detuning() {
        let d = drive(0.3, 0.7, 1.2, 0.9);
        assert!((bare_hamiltonian(&d).trace() - Complex64::new(1.2, 0.0)).norm() < 1e-15);
        assert!((dissipative_hamiltonian(&d).trace() - Complex64::new(1.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn full_convention_doubles() {
        let d = drive(0.3, 0.7, 1.2, 0.9);
        let g = generator(&d, RabiConvention::Full);
        assert_eq!(g[(0, 1)].re, 0.3);
        assert_eq!(g[(1, 1)].re, 2.4);
        assert_eq!(g[(0, 0)].im, -0.9);
        assert_eq!(generator(&d, RabiConvention::Half), dissipative_hamiltonian(&d));
    }
}
