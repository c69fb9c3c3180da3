//! Pulse delay matched to the dephasing rate, the decoupling detuning and its
//! compact fitted forms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    adiabatic_couplings, gaussian_drive, mixing_angles, Detuning, DetuningProfile, ModelError, PulseParameters,
    SampledDetuning,
};
use crate::numerics::{fit_least_squares, integrate_ivp, FitError, FitFamily, FitResult, IntegrationError, IvpOptions, TimeGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("detuning design needs the matched delay τ = γ/2 with C = 1 (got τ = {tau}, γ = {gamma}, C = {scale_c})")]
    UnmatchedDelay { tau: f64, gamma: f64, scale_c: f64 },
    #[error("detuning design needs a window symmetric about 0 (got [{t_start}, {t_end}])")]
    AsymmetricWindow { t_start: f64, t_end: f64 },
    #[error("detuning integration failed: {0}")]
    Integration(#[from] IntegrationError),
    #[error("detuning fit failed: {0}")]
    Fit(#[from] FitError),
}

/// Delay `τ0 = γ·T/2` that makes `tanθ = exp(Γt)`, in absolute time units
/// (equal to the dimensionless `τ` when `T = 1`).
pub fn matched_delay(gamma: f64, pulse_width: f64) -> f64 {
    0.5 * gamma * pulse_width
}

/// Which detuning equation is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecouplingForm {
    /// `Δ' = (Ω0'/Ω0)Δ + Γcos2θ`, the published design equation.
    #[default]
    Printed,
    /// `Δ' = (Ω0'/Ω0)Δ + Γcos2θ·√(Δ²+Ω0²)/2`, which zeroes the targeted
    /// coupling of [`adiabatic_couplings`] exactly.
    Exact,
}

/// The member of the `(+,-)` coupling pair the design removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CancelledCoupling {
    #[default]
    PlusMinus,
    MinusPlus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub form: DecouplingForm,
    pub cancel: CancelledCoupling,
    pub ivp: IvpOptions,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { form: DecouplingForm::Printed, cancel: CancelledCoupling::PlusMinus, ivp: IvpOptions::with_tol(1e-11) }
    }
}

/// Samples of the designed detuning on the window grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningSolution {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `dΔ/dt` from the ODE right-hand side at each sample.
    pub slopes: Vec<f64>,
    /// `Δ(t_f)`.
    pub terminal: f64,
    /// `max |Δ|` over the window.
    pub peak: f64,
    /// Set when `|Δ(t_f)| > 5%` of the peak.
    pub boundary_warning: Option<String>,
}

impl DetuningSolution {
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.times.iter().copied().zip(self.values.iter().copied()).collect()
    }

    /// Hermite interpolant through the samples.
    pub fn profile(&self) -> DetuningProfile {
        let table = SampledDetuning::new(self.times.clone(), self.values.clone(), self.slopes.clone())
            .expect("solution grid is strictly increasing");
        DetuningProfile::Sampled(table)
    }

    /// Time of the peak `|Δ|`.
    pub fn peak_time(&self) -> f64 {
        let i = (0..self.values.len()).max_by(|&a, &b| self.values[a].abs().total_cmp(&self.values[b].abs())).unwrap_or(0);
        self.times[i]
    }
}

fn check_design_inputs(params: &PulseParameters, window: &TimeGrid) -> Result<(), DesignError> {
    params.validate()?;
    if !params.is_matched() {
        return Err(DesignError::UnmatchedDelay { tau: params.tau, gamma: params.gamma, scale_c: params.scale_c });
    }
    if !window.is_symmetric() {
        return Err(DesignError::AsymmetricWindow { t_start: window.t_start, t_end: window.t_end });
    }
    Ok(())
}

/// Integrates the published detuning equation forward from `Δ(t_i) = 0`.
pub fn solve_detuning(params: &PulseParameters, window: &TimeGrid) -> Result<DetuningSolution, DesignError> {
    solve_detuning_with(params, window, &DesignOptions::default())
}

pub fn solve_detuning_with(
    params: &PulseParameters,
    window: &TimeGrid,
    opts: &DesignOptions,
) -> Result<DetuningSolution, DesignError> {
    check_design_inputs(params, window)?;
    let sign = match opts.cancel {
        CancelledCoupling::PlusMinus => 1.0,
        CancelledCoupling::MinusPlus => -1.0,
    };
    let form = opts.form;
    let zero = DetuningProfile::Zero;
    let slope = move |t: f64, delta: f64| -> f64 {
        let d = gaussian_drive(params, &zero, t);
        let o0sq = d.omega_p * d.omega_p + d.omega_s * d.omega_s;
        let cos2t = (d.omega_s * d.omega_s - d.omega_p * d.omega_p) / o0sq;
        let log_rate = (d.omega_p * d.d_omega_p + d.omega_s * d.d_omega_s) / o0sq;
        let forcing = match form {
            DecouplingForm::Printed => 1.0,
            DecouplingForm::Exact => 0.5 * (delta * delta + o0sq).sqrt(),
        };
        log_rate * delta + sign * d.gamma_rate * cos2t * forcing
    };

    let ys = integrate_ivp(
        |t, y: &[Complex64; 1]| [Complex64::new(slope(t, y[0].re), 0.0)],
        [Complex64::new(0.0, 0.0)],
        window,
        &opts.ivp,
    )?;
    let times = window.times();
    let values: Vec<f64> = ys.iter().map(|y| y[0].re).collect();
    let slopes: Vec<f64> = times.iter().zip(&values).map(|(&t, &v)| slope(t, v)).collect();
    let terminal = *values.last().expect("grid has samples");
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary_warning = (terminal.abs() > 0.05 * peak).then(|| {
        format!("designed detuning does not return to zero: |Δ(t_f)| = {:.4e} exceeds 5% of the peak {:.4e}", terminal.abs(), peak)
    });
    Ok(DetuningSolution { times, values, slopes, terminal, peak, boundary_warning })
}

/// A fitted compact detuning over its design window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningFit {
    pub family: FitFamily,
    pub fit: FitResult,
    pub window: TimeGrid,
}

impl DetuningFit {
    pub fn profile(&self) -> DetuningProfile {
        DetuningProfile::from_fit(&self.fit)
    }

    /// Residual relative to the peak of the samples; accepted designs stay
    /// below 0.05.
    pub fn relative_residual(&self, samples: &[(f64, f64)]) -> f64 {
        let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
        if peak == 0.0 {
            0.0
        } else {
            self.fit.residual_rms / peak
        }
    }
}

/// Least-squares fit of designed detuning samples. For the Gaussian family
/// both a single centred term and a pair of terms are tried and the lower
/// residual wins.
pub fn fit_detuning(samples: &[(f64, f64)], family: FitFamily) -> Result<DetuningFit, DesignError> {
    let window = TimeGrid::new(
        samples.first().map_or(0.0, |s| s.0),
        samples.last().map_or(0.0, |s| s.0),
        samples.len(),
    )
    .map_err(|_| FitError::TooFewSamples { family, needed: 2 * family.n_params(), got: samples.len() })?;
    let fit = match family {
        FitFamily::Fourier => fit_least_squares(samples, family, &[0.0; 3])?,
        FitFamily::GaussianSum => {
            let pair = fit_least_squares(samples, family, &[0.0; 6]);
            let single = fit_least_squares(samples, family, &single_gaussian_guess(samples));
            match (pair, single) {
                (Ok(a), Ok(b)) => {
                    if b.residual_rms <= a.residual_rms * (1.0 + 1e-9) {
                        b
                    } else {
                        a
                    }
                }
                (Ok(a), Err(_)) | (Err(_), Ok(a)) => a,
                (Err(e), Err(_)) => return Err(e.into()),
            }
        }
    };
    Ok(DetuningFit { family, fit, window })
}

fn single_gaussian_guess(samples: &[(f64, f64)]) -> [f64; 6] {
    let (ipk, &(tp, vp)) = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.abs().total_cmp(&b.1 .1.abs()))
        .expect("non-empty samples");
    let half = 0.5 * vp.abs();
    let t0 = samples[0].0;
    let t1 = samples[samples.len() - 1].0;
    let left = samples[..=ipk].iter().rev().find(|s| s.1.abs() < half).map_or(t0, |s| s.0);
    let right = samples[ipk..].iter().find(|s| s.1.abs() < half).map_or(t1, |s| s.0);
    let nu = (0.5 * (right - left)).max((t1 - t0) * 1e-3) / std::f64::consts::LN_2.sqrt();
    [vp, tp, nu, 0.0, 0.0, 0.0]
}

/// Peak magnitudes of the four couplings the design targets, in 1/T.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecouplingResiduals {
    pub plus_zero: f64,
    pub minus_zero: f64,
    pub plus_minus: f64,
    pub minus_plus: f64,
}

/// Evaluates the adiabatic-frame couplings on the window grid and returns the
/// maxima of `|Ω₊₀|`, `|Ω₋₀|`, `|Ω₊₋|` and `|Ω₋₊|`.
pub fn decoupling_residuals<D: Detuning + ?Sized>(
    params: &PulseParameters,
    detuning: &D,
    window: &TimeGrid,
) -> Result<DecouplingResiduals, DesignError> {
    params.validate()?;
    let mut out = DecouplingResiduals::default();
    for t in window.times() {
        let d = gaussian_drive(params, detuning, t);
        let m = adiabatic_couplings(&mixing_angles(&d)?, d.gamma_rate);
        out.plus_zero = out.plus_zero.max(m[(0, 1)].norm());
        out.minus_zero = out.minus_zero.max(m[(2, 1)].norm());
        out.plus_minus = out.plus_minus.max(m[(0, 2)].norm());
        out.minus_plus = out.minus_plus.max(m[(2, 0)].norm());
    }
    Ok(out)
}

/// Designed detuning, its optional fit and the coupling residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub solution: DetuningSolution,
    pub fit: Option<DetuningFit>,
    pub residuals: DecouplingResiduals,
}

pub fn design_detuning(
    params: &PulseParameters,
    window: &TimeGrid,
    opts: &DesignOptions,
    family: Option<FitFamily>,
) -> Result<DesignReport, DesignError> {
    let solution = solve_detuning_with(params, window, opts)?;
    let residuals = decoupling_residuals(params, &solution.profile(), window)?;
    let fit = family.map(|f| fit_detuning(&solution.samples(), f)).transpose()?;
    Ok(DesignReport { solution, fit, residuals })
}
