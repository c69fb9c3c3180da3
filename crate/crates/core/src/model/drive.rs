use serde::{Deserialize, Serialize};

use super::{Detuning, ModelError};

/// Gaussian pump/Stokes pair with a dephasing rate, in units of the pulse
/// width `T`: peak `Ω/T`, delay `τ0 = τ·T`, rate `Γ = γ/T`.
///
/// The pump is `C·α·Ω/T·exp(-[(t-τ0/2)/T]²)` and the Stokes pulse is
/// `α·Ω/T·exp(-[(t+τ0/2)/T]²)`, so `Ωp/Ωs = C·exp(τ0·t/T²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParameters {
    pub omega_peak: f64,
    pub pulse_width: f64,
    pub tau: f64,
    pub gamma: f64,
    #[serde(default = "one")]
    pub scale_c: f64,
    #[serde(default = "one")]
    pub scale_alpha: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PulseParameters {
    fn default() -> Self {
        Self { omega_peak: 1.0, pulse_width: 1.0, tau: 0.5, gamma: 1.0, scale_c: 1.0, scale_alpha: 1.0 }
    }
}

impl PulseParameters {
    /// Unit-width pulses with the delay tied to the dephasing rate, `τ = γ/2`.
    pub fn matched(omega_peak: f64, gamma: f64) -> Self {
        Self { omega_peak, pulse_width: 1.0, tau: gamma / 2.0, gamma, scale_c: 1.0, scale_alpha: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |name, value, reason| Err(ModelError::InvalidParameter { name, value, reason });
        let fields = [
            ("omega_peak", self.omega_peak),
            ("pulse_width", self.pulse_width),
            ("tau", self.tau),
            ("gamma", self.gamma),
            ("scale_c", self.scale_c),
            ("scale_alpha", self.scale_alpha),
        ];
        if let Some((name, value)) = fields.iter().find(|f| !f.1.is_finite()) {
            return bad(name, *value, "must be finite");
        }
        if self.omega_peak <= 0.0 {
            return bad("omega_peak", self.omega_peak, "must be positive");
        }
        if self.pulse_width <= 0.0 {
            return bad("pulse_width", self.pulse_width, "must be positive");
        }
        if self.tau < 0.0 {
            return bad("tau", self.tau, "must be non-negative");
        }
        if self.gamma < 0.0 {
            return bad("gamma", self.gamma, "must be non-negative");
        }
        if self.scale_c == 0.0 {
            return bad("scale_c", self.scale_c, "must be non-zero");
        }
        if self.scale_alpha == 0.0 {
            return bad("scale_alpha", self.scale_alpha, "must be non-zero");
        }
        Ok(())
    }

    /// Delay `τ0` in absolute time units.
    pub fn delay(&self) -> f64 {
        self.tau * self.pulse_width
    }

    /// Dephasing rate `Γ = γ/T`.
    pub fn dephasing_rate(&self) -> f64 {
        self.gamma / self.pulse_width
    }

    /// `τ0 = Γ·T²/2`, the delay for which `tanθ = e^{Γt}`.
    pub fn is_matched(&self) -> bool {
        (self.tau - self.gamma / 2.0).abs() <= 1e-12 * self.gamma.max(1.0) && self.scale_c == 1.0
    }
}

/// Instantaneous control fields and their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveSample {
    pub t: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    pub delta: f64,
    pub gamma_rate: f64,
    pub d_omega_p: f64,
    pub d_omega_s: f64,
    pub d_delta: f64,
}

impl DriveSample {
    pub fn omega_0(&self) -> f64 {
        self.omega_p.hypot(self.omega_s)
    }

    pub fn d_omega_0(&self) -> f64 {
        let o0 = self.omega_0();
        if o0 == 0.0 {
            0.0
        } else {
            (self.omega_p * self.d_omega_p + self.omega_s * self.d_omega_s) / o0
        }
    }
}

pub fn gaussian_drive<D: Detuning + ?Sized>(params: &PulseParameters, detuning: &D, t: f64) -> DriveSample {
    let w = params.pulse_width;
    let half = 0.5 * params.delay();
    let amp = params.scale_alpha * params.omega_peak / w;
    let up = (t - half) / w;
    let us = (t + half) / w;
    let omega_p = params.scale_c * amp * (-up * up).exp();
    let omega_s = amp * (-us * us).exp();
    DriveSample {
        t,
        omega_p,
        omega_s,
        delta: detuning.value(t),
        gamma_rate: params.dephasing_rate(),
        d_omega_p: -2.0 * up / w * omega_p,
        d_omega_s: -2.0 * us / w * omega_s,
        d_delta: detuning.derivative(t),
    }
}

/// Drive from arbitrary envelopes; derivatives by central differences with
/// step `1e-6·width`.
pub fn custom_drive<P, S, D>(omega_p: P, omega_s: S, detuning: &D, gamma_rate: f64, width: f64, t: f64) -> DriveSample
where
    P: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
    D: Detuning + ?Sized,
{
    let h = 1e-6 * width;
    let fd = |f: &dyn Fn(f64) -> f64| (f(t + h) - f(t - h)) / (2.0 * h);
    DriveSample {
        t,
        omega_p: omega_p(t),
        omega_s: omega_s(t),
        delta: detuning.value(t),
        gamma_rate,
        d_omega_p: fd(&omega_p),
        d_omega_s: fd(&omega_s),
        d_delta: detuning.derivative(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DetuningProfile;

    #[test]
    fn pump_peaks_at_half_delay() {
        let p = PulseParameters::matched(1.0, 1.0);
        assert_eq!(p.tau, 0.5);
        let d = gaussian_drive(&p, &DetuningProfile::Zero, 0.25);
        assert!((d.omega_p - 1.0).abs() < 1e-15);
        assert!((d.omega_s - (-0.25f64).exp()).abs() < 1e-15);
        assert_eq!(d.gamma_rate, 1.0);
    }

    #[test]
    fn coincident_pulses_without_dephasing() {
        let p = PulseParameters::matched(1.0, 0.0);
        for k in 0..41 {
            let t = -2.0 + 0.1 * k as f64;
            let d = gaussian_drive(&p, &DetuningProfile::Zero, t);
            assert_eq!(d.omega_p, d.omega_s);
        }
    }

    #[test]
    fn pulse_ratio_is_exponential() {
        for gamma in [0.5, 1.0, 2.0] {
            let p = PulseParameters::matched(1.0, gamma);
            for k in 0..=400 {
                let t = -2.0 + 0.01 * k as f64;
                let d = gaussian_drive(&p, &DetuningProfile::Zero, t);
                let ratio = d.omega_p / d.omega_s;
                assert!((ratio / (gamma * t).exp() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let p = PulseParameters { omega_peak: 1.7, pulse_width: 1.3, tau: 0.8, gamma: 0.4, scale_c: 1.1, scale_alpha: 0.9 };
        let dz = DetuningProfile::Zero;
        for t in [-1.2, -0.1, 0.0, 0.7, 1.9] {
            let d = gaussian_drive(&p, &dz, t);
            let fd = custom_drive(
                |t| gaussian_drive(&p, &dz, t).omega_p,
                |t| gaussian_drive(&p, &dz, t).omega_s,
                &dz,
                d.gamma_rate,
                p.pulse_width,
                t,
            );
            assert!((d.d_omega_p - fd.d_omega_p).abs() < 1e-8);
            assert!((d.d_omega_s - fd.d_omega_s).abs() < 1e-8);
        }
    }

    #[test]
    fn validation() {
        assert!(PulseParameters::default().validate().is_ok());
        let bad = PulseParameters { omega_peak: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PulseParameters { scale_c: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PulseParameters { gamma: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
