use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, PropagateError, PropagationOptions, Trajectory, TrajectoryStates};
use crate::model::{bare_hamiltonian, DriveSample};
use crate::numerics::{integrate_ivp_projected, TimeGrid};

/// Overall sign of the dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DissipatorSign {
    /// `+ (LρL† - ½{L†L, ρ})`, trace preserving and completely positive.
    #[default]
    Standard,
    /// The negated dissipator as printed in the source model.
    Paper,
}

/// How ground-state dephasing `Γ` enters the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundDephasing {
    /// Jump operator `L₃ = √Γ(|1⟩⟨1| - |3⟩⟨3|)`.
    #[default]
    Jump,
    /// The anti-Hermitian term `∓iΓ/2` of the non-Hermitian Hamiltonian,
    /// `ρ' = -i(Hρ - ρH†)`; the trace then follows the norm of the
    /// non-Hermitian dynamics.
    Effective,
}

/// Rates of the master equation: `Γ` (ground dephasing), `Γ₁` (excited-state
/// damping into both ground states, `L₁ = √Γ₁(|1⟩⟨2| + |3⟩⟨2|)`), `Γ₂`
/// (excited-state dephasing, `L₂ = √Γ₂|2⟩⟨2|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationRates {
    pub gamma_ground: f64,
    pub gamma_damp: f64,
    pub gamma_dephase: f64,
    #[serde(default)]
    pub sign: DissipatorSign,
    #[serde(default)]
    pub ground: GroundDephasing,
}

impl Default for DissipationRates {
    fn default() -> Self {
        Self { gamma_ground: 0.0, gamma_damp: 0.0, gamma_dephase: 0.0, sign: DissipatorSign::Standard, ground: GroundDephasing::Jump }
    }
}

impl DissipationRates {
    pub fn validate(&self) -> Result<(), PropagateError> {
        for (name, value) in [("gamma_ground", self.gamma_ground), ("gamma_damp", self.gamma_damp), ("gamma_dephase", self.gamma_dephase)] {
            if !value.is_finite() || value < 0.0 {
                return Err(PropagateError::InvalidRate { name, value });
            }
        }
        Ok(())
    }

    fn trace_preserving(&self) -> bool {
        self.ground == GroundDephasing::Jump || self.gamma_ground == 0.0
    }
}

fn jump_operators(rates: &DissipationRates) -> Vec<Matrix3<Complex64>> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let z = c(0.0);
    let mut ls = Vec::with_capacity(3);
    if rates.gamma_damp > 0.0 {
        let a = c(rates.gamma_damp.sqrt());
        ls.push(Matrix3::new(z, a, z, z, z, z, z, a, z));
    }
    if rates.gamma_dephase > 0.0 {
        let a = c(rates.gamma_dephase.sqrt());
        ls.push(Matrix3::new(z, z, z, z, a, z, z, z, z));
    }
    if rates.ground == GroundDephasing::Jump && rates.gamma_ground > 0.0 {
        let a = rates.gamma_ground.sqrt();
        ls.push(Matrix3::new(c(a), z, z, z, z, z, z, z, c(-a)));
    }
    ls
}

/// Integrates the master equation with Hamiltonian `k·H₀` (`k` the
/// convention factor, `H₀` the bare Hamiltonian including the detuning) and
/// the jump operators of `rates`. The drive's own `gamma_rate` is ignored;
/// ground dephasing comes from `rates.gamma_ground`. `rho0` is placed at
/// `grid.t_start`; the state is re-Hermitised after every step.
pub fn propagate_lindblad<F>(
    drive: F,
    rates: &DissipationRates,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &PropagationOptions,
) -> Result<Trajectory, PropagateError>
where
    F: Fn(f64) -> DriveSample,
{
    rates.validate()?;
    let herm = rho0.hermiticity_error();
    let tr = rho0.trace();
    if herm > 1e-10 || (tr - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(PropagateError::InvalidState(format!("hermiticity error {herm:e}, trace {tr}")));
    }

    let k = opts.convention.factor();
    let ls = jump_operators(rates);
    let lds: Vec<_> = ls.iter().map(|l| l.adjoint()).collect();
    let ldl: Matrix3<Complex64> = ls.iter().zip(&lds).map(|(l, ld)| ld * l).sum();
    let s = Complex64::new(
        match rates.sign {
            DissipatorSign::Standard => 1.0,
            DissipatorSign::Paper => -1.0,
        },
        0.0,
    );
    let effective = rates.ground == GroundDephasing::Effective;
    let half_gamma = 0.5 * k * rates.gamma_ground;
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);

    let rhs = |t: f64, v: &[Complex64; 9]| -> [Complex64; 9] {
        let rho = DensityMatrix::from_vec9(v, t).rho;
        let mut h = bare_hamiltonian(&drive(t)) * Complex64::new(k, 0.0);
        let mut d = if effective {
            h[(0, 0)] += Complex64::new(0.0, -half_gamma);
            h[(2, 2)] += Complex64::new(0.0, half_gamma);
            (h * rho - rho * h.adjoint()) * minus_i
        } else {
            (h * rho - rho * h) * minus_i
        };
        if !ls.is_empty() {
            let mut diss = -(ldl * rho + rho * ldl) * half;
            for (l, ld) in ls.iter().zip(&lds) {
                diss += l * rho * ld;
            }
            d += diss * s;
        }
        std::array::from_fn(|i| d[(i / 3, i % 3)])
    };
    let hermitize = |v: &mut [Complex64; 9]| {
        for i in 0..3 {
            v[4 * i].im = 0.0;
            for j in i + 1..3 {
                let a = 0.5 * (v[3 * i + j] + v[3 * j + i].conj());
                v[3 * i + j] = a;
                v[3 * j + i] = a.conj();
            }
        }
    };

    let ys = integrate_ivp_projected(rhs, rho0.to_vec9(), grid, &opts.ivp, hermitize)?;
    let times = grid.times();
    let states: Vec<DensityMatrix> = times.iter().zip(&ys).map(|(&t, v)| DensityMatrix::from_vec9(v, t)).collect();
    if rates.trace_preserving() {
        for st in &states {
            let drift = (st.trace() - Complex64::new(1.0, 0.0)).norm();
            if drift > 1e-6 {
                return Err(PropagateError::TraceDrift { t: st.t, drift });
            }
        }
    }
    Trajectory::from_states(times, states, TrajectoryStates::Mixed)
}
