use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DriveSample, ModelError};

/// Mixing angles of the adiabatic basis, their rates and the non-zero
/// eigenvalues of the bare Hamiltonian (the dark state has eigenvalue 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingAngles {
    pub theta: f64,
    pub phi: f64,
    pub d_theta: f64,
    pub d_phi: f64,
    pub omega_0: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

/// `tanθ = Ωp/Ωs`, `tan 2φ = Ω0/Δ`, `λ± = (Δ ± √(Δ²+Ω0²))/2`.
pub fn mixing_angles(d: &DriveSample) -> Result<MixingAngles, ModelError> {
    let o0 = d.omega_0();
    if o0 == 0.0 && d.delta == 0.0 {
        return Err(ModelError::DegenerateFrame { t: d.t });
    }
    let theta = d.omega_p.atan2(d.omega_s);
    let phi = 0.5 * o0.atan2(d.delta);
    let r2 = d.delta * d.delta + o0 * o0;
    let r = r2.sqrt();
    let (d_theta, d_o0) = if o0 == 0.0 {
        (0.0, 0.0)
    } else {
        ((d.d_omega_p * d.omega_s - d.omega_p * d.d_omega_s) / (o0 * o0), d.d_omega_0())
    };
    let d_phi = (d_o0 * d.delta - o0 * d.d_delta) / (2.0 * r2);
    // Avoid cancellation in whichever root has opposite sign to Δ.
    let (lambda_plus, lambda_minus) = if d.delta >= 0.0 {
        let lp = 0.5 * (d.delta + r);
        (lp, -o0 * o0 / (4.0 * lp))
    } else {
        let lm = 0.5 * (d.delta - r);
        (-o0 * o0 / (4.0 * lm), lm)
    };
    Ok(MixingAngles { theta, phi, d_theta, d_phi, omega_0: o0, lambda_plus, lambda_minus })
}

/// Columns are the adiabatic states `(a₊, a₀, a₋)` in the bare basis.
pub fn adiabatic_transform(theta: f64, phi: f64) -> Matrix3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Matrix3::new(st * sp, ct, st * cp, cp, 0.0, -sp, ct * sp, -st, ct * cp)
}

/// Generator of the adiabatic-frame amplitudes, `Rᵀ H_Γ R - i Rᵀ Ṙ`, with
/// rows and columns ordered `(+, 0, -)`.
pub fn adiabatic_couplings(angles: &MixingAngles, gamma_rate: f64) -> Matrix3<Complex64> {
    let MixingAngles { theta, phi, d_theta: th, d_phi: ph, lambda_plus, lambda_minus, .. } = *angles;
    let g = gamma_rate;
    let (sp, cp) = phi.sin_cos();
    let c2t = (2.0 * theta).cos();
    let s2t = (2.0 * theta).sin();
    let s2p = (2.0 * phi).sin();
    let c = |re: f64, im: f64| Complex64::new(re, im);

    let pp = c(lambda_plus, 0.5 * g * c2t * sp * sp);
    let p0 = c(0.0, th * sp - 0.5 * g * s2t * sp);
    let pm = c(0.0, ph + 0.25 * g * c2t * s2p);
    let zp = c(0.0, -th * sp - 0.5 * g * s2t * sp);
    let zz = c(0.0, -0.5 * g * c2t);
    let zm = c(0.0, -th * cp - 0.5 * g * s2t * cp);
    let mp = c(0.0, -ph + 0.25 * g * c2t * s2p);
    let m0 = c(0.0, th * cp - 0.5 * g * s2t * cp);
    let mm = c(lambda_minus, 0.5 * g * c2t * cp * cp);
    Matrix3::new(pp, p0, pm, zp, zz, zm, mp, m0, mm)
}

/// Full adiabatic description of one drive sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticFrame {
    pub angles: MixingAngles,
    pub rotation: Matrix3<f64>,
    pub couplings: Matrix3<Complex64>,
}

impl AdiabaticFrame {
    pub fn new(d: &DriveSample) -> Result<Self, ModelError> {
        let angles = mixing_angles(d)?;
        Ok(Self {
            angles,
            rotation: adiabatic_transform(angles.theta, angles.phi),
            couplings: adiabatic_couplings(&angles, d.gamma_rate),
        })
    }

    /// The dark state `a₀ = (cosθ, 0, -sinθ)`.
    pub fn dark_state(&self) -> [f64; 3] {
        let c = self.rotation.column(1);
        [c[0], c[1], c[2]]
    }
}
