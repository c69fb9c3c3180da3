use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::numerics::{FitFamily, FitResult};

const FD_STEP: f64 = 1e-6;

/// A single-photon detuning profile `Δ(t)`.
pub trait Detuning {
    fn value(&self, t: f64) -> f64;

    /// `dΔ/dt`; central difference unless the profile knows better.
    fn derivative(&self, t: f64) -> f64 {
        (self.value(t + FD_STEP) - self.value(t - FD_STEP)) / (2.0 * FD_STEP)
    }
}

impl<F: Fn(f64) -> f64> Detuning for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Tabulated profile with cubic Hermite interpolation. Outside the table the
/// end values are held. `amplitude` and `time_scale` implement the relative
/// deviations: `Δ(t) = amplitude·h(time_scale·t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDetuning {
    times: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    amplitude: f64,
    time_scale: f64,
}

impl SampledDetuning {
    pub fn new(times: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self, ModelError> {
        if times.len() < 2
            || values.len() != times.len()
            || slopes.len() != times.len()
            || times.windows(2).any(|w| w[1] <= w[0])
            || values.iter().chain(&slopes).any(|v| !v.is_finite())
        {
            return Err(ModelError::BadSamples);
        }
        Ok(Self { times, values, slopes, amplitude: 1.0, time_scale: 1.0 })
    }

    /// Slopes estimated by finite differences of the table.
    pub fn from_values(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        let n = times.len();
        if n < 2 || values.len() != n {
            return Err(ModelError::BadSamples);
        }
        let slopes = (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (values[b] - values[a]) / (times[b] - times[a])
            })
            .collect();
        Self::new(times, values, slopes)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn base(&self, s: f64) -> (f64, f64) {
        let n = self.times.len();
        if s < self.times[0] {
            return (self.values[0], 0.0);
        }
        if s > self.times[n - 1] {
            return (self.values[n - 1], 0.0);
        }
        let i = (self.times.partition_point(|&x| x <= s) - 1).min(n - 2);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let u = (s - t0) / h;
        let (y0, y1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1;
        let dv = (6.0 * u2 - 6.0 * u) * y0 + (3.0 * u2 - 4.0 * u + 1.0) * m0 + (-6.0 * u2 + 6.0 * u) * y1 + (3.0 * u2 - 2.0 * u) * m1;
        (v, dv / h)
    }
}

impl Detuning for SampledDetuning {
    fn value(&self, t: f64) -> f64 {
        self.amplitude * self.base(self.time_scale * t).0
    }

    fn derivative(&self, t: f64) -> f64 {
        self.amplitude * self.time_scale * self.base(self.time_scale * t).1
    }
}

/// The detuning shapes used by scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DetuningProfile {
    Zero,
    /// `Δ0 + Δ1·cos(ω t)`.
    Fourier { delta0: f64, delta1: f64, omega: f64 },
    /// Two Gaussian terms `(A0, μ0, ν0, A1, μ1, ν1)`; `ν = 0` drops a term.
    #[serde(rename = "gaussian")]
    GaussianSum { params: [f64; 6] },
    Sampled(SampledDetuning),
}

impl DetuningProfile {
    pub fn from_fit(fit: &FitResult) -> Self {
        let p = &fit.parameters;
        match fit.family {
            FitFamily::Fourier => DetuningProfile::Fourier { delta0: p[0], delta1: p[1], omega: p[2] },
            FitFamily::GaussianSum => DetuningProfile::GaussianSum { params: [p[0], p[1], p[2], p[3], p[4], p[5]] },
        }
    }

    /// Applies relative deviations: the amplitude scales by `1 + rel_amplitude`
    /// and the time argument by `1 + rel_frequency` (for the Fourier form this
    /// is exactly `ω → ω(1 + δ)`).
    pub fn deviated(&self, rel_amplitude: f64, rel_frequency: f64) -> Self {
        let a = 1.0 + rel_amplitude;
        let s = 1.0 + rel_frequency;
        match self {
            DetuningProfile::Zero => DetuningProfile::Zero,
            DetuningProfile::Fourier { delta0, delta1, omega } => {
                DetuningProfile::Fourier { delta0: delta0 * a, delta1: delta1 * a, omega: omega * s }
            }
            DetuningProfile::GaussianSum { params } => {
                let mut q = *params;
                for g in q.chunks_exact_mut(3) {
                    g[0] *= a;
                    g[1] /= s;
                    g[2] /= s;
                }
                DetuningProfile::GaussianSum { params: q }
            }
            DetuningProfile::Sampled(d) => {
                let mut d = d.clone();
                d.amplitude *= a;
                d.time_scale *= s;
                DetuningProfile::Sampled(d)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, DetuningProfile::Zero)
    }
}

impl Detuning for DetuningProfile {
    fn value(&self, t: f64) -> f64 {
        match self {
            DetuningProfile::Zero => 0.0,
            DetuningProfile::Fourier { delta0, delta1, omega } => delta0 + delta1 * (omega * t).cos(),
            DetuningProfile::GaussianSum { params } => FitFamily::GaussianSum.eval(params, t),
            DetuningProfile::Sampled(d) => d.value(t),
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match self {
            DetuningProfile::Zero => 0.0,
            DetuningProfile::Fourier { delta1, omega, .. } => -delta1 * omega * (omega * t).sin(),
            DetuningProfile::GaussianSum { params } => FitFamily::GaussianSum.eval_derivative(params, t),
            DetuningProfile::Sampled(d) => d.derivative(t),
        }
    }
}
