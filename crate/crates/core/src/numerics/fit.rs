//! Levenberg-Marquardt least squares for the two detuning families.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FIT_MAX_ITERATIONS: usize = 200;
const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitFamily {
    /// `Δ0 + Δ1·cos(ω t)`, parameters `(Δ0, Δ1, ω)`.
    Fourier,
    /// `Σ_k A_k exp(-[(t-μ_k)/ν_k]²)` over two terms, parameters
    /// `(A0, μ0, ν0, A1, μ1, ν1)`. A term with `ν = 0` is absent.
    #[serde(rename = "gaussian")]
    GaussianSum,
}

impl FitFamily {
    pub fn n_params(self) -> usize {
        match self {
            FitFamily::Fourier => 3,
            FitFamily::GaussianSum => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FitFamily::Fourier => "fourier",
            FitFamily::GaussianSum => "gaussian",
        }
    }

    pub fn eval(self, p: &[f64], t: f64) -> f64 {
        match self {
            FitFamily::Fourier => p[0] + p[1] * (p[2] * t).cos(),
            FitFamily::GaussianSum => p.chunks_exact(3).map(|g| gaussian(g[0], g[1], g[2], t)).sum(),
        }
    }

    /// d/dt of the model.
    pub fn eval_derivative(self, p: &[f64], t: f64) -> f64 {
        match self {
            FitFamily::Fourier => -p[1] * p[2] * (p[2] * t).sin(),
            FitFamily::GaussianSum => p
                .chunks_exact(3)
                .map(|g| {
                    if g[2] == 0.0 {
                        0.0
                    } else {
                        let u = (t - g[1]) / g[2];
                        -2.0 * u / g[2] * gaussian(g[0], g[1], g[2], t)
                    }
                })
                .sum(),
        }
    }

    fn gradient(self, p: &[f64], t: f64, out: &mut [f64]) {
        match self {
            FitFamily::Fourier => {
                let (s, c) = (p[2] * t).sin_cos();
                out[0] = 1.0;
                out[1] = c;
                out[2] = -p[1] * t * s;
            }
            FitFamily::GaussianSum => {
                for (g, o) in p.chunks_exact(3).zip(out.chunks_exact_mut(3)) {
                    if g[2] == 0.0 {
                        o.fill(0.0);
                        continue;
                    }
                    let u = (t - g[1]) / g[2];
                    let e = (-u * u).exp();
                    o[0] = e;
                    o[1] = g[0] * e * 2.0 * u / g[2];
                    o[2] = g[0] * e * 2.0 * u * u / g[2];
                }
            }
        }
    }

    /// Starting point from the peak height and location of the samples.
    fn heuristic_init(self, samples: &[(f64, f64)]) -> Vec<f64> {
        let (ipk, &(tp, vp)) = samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.abs().total_cmp(&b.1 .1.abs()))
            .expect("non-empty samples");
        let t0 = samples[0].0;
        let t1 = samples[samples.len() - 1].0;
        match self {
            FitFamily::Fourier => {
                let vmin = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
                let vmax = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
                let reach = (t1 - tp).abs().max((tp - t0).abs()).max(f64::EPSILON);
                let amp = 0.5 * (vmax - vmin);
                let sign = if vp >= 0.0 { 1.0 } else { -1.0 };
                vec![0.5 * (vmax + vmin), sign * amp, std::f64::consts::PI / reach]
            }
            FitFamily::GaussianSum => {
                let half = 0.5 * vp.abs();
                let left = samples[..=ipk].iter().rev().find(|s| s.1.abs() < half).map(|s| s.0).unwrap_or(t0);
                let right = samples[ipk..].iter().find(|s| s.1.abs() < half).map(|s| s.0).unwrap_or(t1);
                let hw = (0.5 * (right - left)).max((t1 - t0) * 1e-3);
                let nu = hw / std::f64::consts::LN_2.sqrt();
                vec![0.6 * vp, tp - 0.5 * nu, 0.8 * nu, 0.6 * vp, tp + 0.5 * nu, 0.8 * nu]
            }
        }
    }

    /// Sorts Gaussian terms by center (absent terms last) and makes widths
    /// non-negative; the model is invariant under both.
    fn canonicalize(self, p: &mut [f64]) {
        if self == FitFamily::GaussianSum {
            for g in p.chunks_exact_mut(3) {
                g[2] = g[2].abs();
            }
            let absent = |g: &[f64]| g[2] == 0.0;
            if (absent(&p[..3]) && !absent(&p[3..])) || (!absent(&p[..3]) && !absent(&p[3..]) && p[4] < p[1]) {
                let (a, b) = p.split_at_mut(3);
                a.swap_with_slice(b);
            }
        }
    }
}

fn gaussian(a: f64, mu: f64, nu: f64, t: f64) -> f64 {
    if nu == 0.0 {
        0.0
    } else {
        let u = (t - mu) / nu;
        a * (-u * u).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: FitFamily,
    pub parameters: Vec<f64>,
    pub residual_rms: f64,
    #[serde(default)]
    pub iterations: usize,
}

impl FitResult {
    pub fn eval(&self, t: f64) -> f64 {
        self.family.eval(&self.parameters, t)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("{family:?} fit needs at least {needed} samples (got {got})")]
    TooFewSamples { family: FitFamily, needed: usize, got: usize },
    #[error("initial guess has {got} parameters, {family:?} needs {needed}")]
    WrongParameterCount { family: FitFamily, needed: usize, got: usize },
    #[error("samples or initial guess contain non-finite values")]
    NonFinite,
    #[error("no convergence after {iterations} iterations (residual rms {})", best.residual_rms)]
    NotConverged { best: FitResult, iterations: usize },
}

/// Least-squares fit of `family` to `(t, value)` samples. An all-zero
/// `init` requests the built-in peak heuristics.
pub fn fit_least_squares(samples: &[(f64, f64)], family: FitFamily, init: &[f64]) -> Result<FitResult, FitError> {
    let n = family.n_params();
    if samples.len() < 2 * n {
        return Err(FitError::TooFewSamples { family, needed: 2 * n, got: samples.len() });
    }
    if init.len() != n {
        return Err(FitError::WrongParameterCount { family, needed: n, got: init.len() });
    }
    if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite()) || init.iter().any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }

    let mut p = if init.iter().all(|&v| v == 0.0) { family.heuristic_init(samples) } else { init.to_vec() };
    let m = samples.len();
    let cost = |p: &[f64]| -> f64 { samples.iter().map(|&(t, v)| (family.eval(p, t) - v).powi(2)).sum() };

    let mut c = cost(&p);
    let mut lambda = 1e-3;
    let mut jac = DMatrix::<f64>::zeros(m, n);
    let mut res = DVector::<f64>::zeros(m);
    let mut row = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        for (i, &(t, v)) in samples.iter().enumerate() {
            family.gradient(&p, t, &mut row);
            for j in 0..n {
                jac[(i, j)] = row[j];
            }
            res[i] = family.eval(&p, t) - v;
        }
        let jtj = jac.tr_mul(&jac);
        let g = jac.tr_mul(&res);
        let dmax = (0..n).map(|j| jtj[(j, j)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

        // Inner loop: raise the damping until the step lowers the cost.
        loop {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12 * dmax);
            }
            let step = match a.cholesky() {
                Some(ch) => -ch.solve(&g),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        break;
                    }
                    continue;
                }
            };
            let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let small = step.norm() < STEP_TOL * p_norm.max(1.0);
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let ct = cost(&trial);
            if ct.is_finite() && ct <= c {
                p = trial;
                c = ct;
                lambda = (lambda / 3.0).max(1e-15);
                converged = small;
                break;
            }
            if small {
                converged = true;
                break;
            }
            lambda *= 4.0;
            if lambda > 1e20 {
                break;
            }
        }
        if converged || lambda > 1e20 {
            break;
        }
    }

    family.canonicalize(&mut p);
    let result = FitResult { family, residual_rms: (c / m as f64).sqrt(), parameters: p, iterations };
    if converged {
        Ok(result)
    } else {
        Err(FitError::NotConverged { best: result, iterations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(family: FitFamily, p: &[f64], a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let t = a + (b - a) * k as f64 / (n - 1) as f64;
                (t, family.eval(p, t))
            })
            .collect()
    }

    #[test]
    fn recovers_exact_fourier() {
        let s = sample(FitFamily::Fourier, &[1.0, 0.5, 2.0], -1.5, 1.5, 200);
        let fit = fit_least_squares(&s, FitFamily::Fourier, &[0.9, 0.6, 1.8]).unwrap();
        for (got, want) in fit.parameters.iter().zip([1.0, 0.5, 2.0]) {
            assert!((got - want).abs() < 1e-8, "{:?}", fit.parameters);
        }
        assert!(fit.residual_rms < 1e-8 * 1.5);
    }

    #[test]
    fn recovers_fourier_from_heuristic_start() {
        let s = sample(FitFamily::Fourier, &[1.12, 1.12, 1.92], -1.5, 1.5, 300);
        let fit = fit_least_squares(&s, FitFamily::Fourier, &[0.0; 3]).unwrap();
        for (got, want) in fit.parameters.iter().zip([1.12, 1.12, 1.92]) {
            assert!((got - want).abs() < 1e-8, "{:?}", fit.parameters);
        }
    }

    #[test]
    fn recovers_double_gaussian() {
        let truth = [28.85, -0.6, 0.9, 28.85, 0.6, 0.9];
        let s = sample(FitFamily::GaussianSum, &truth, -1.5, 1.5, 400);
        let fit = fit_least_squares(&s, FitFamily::GaussianSum, &[0.0; 6]).unwrap();
        for (got, want) in fit.parameters.iter().zip(truth) {
            assert!((got - want).abs() < 1e-6, "{:?}", fit.parameters);
        }
    }

    #[test]
    fn absent_term_has_zero_width() {
        let p = [8.94, 0.0, 1.92, 0.0, 0.0, 0.0];
        assert!((FitFamily::GaussianSum.eval(&p, 0.0) - 8.94).abs() < 1e-15);
        let d = FitFamily::GaussianSum.eval_derivative(&p, 0.3);
        let fd = (FitFamily::GaussianSum.eval(&p, 0.3 + 1e-6) - FitFamily::GaussianSum.eval(&p, 0.3 - 1e-6)) / 2e-6;
        assert!((d - fd).abs() < 1e-6);
    }

    #[test]
    fn argument_errors() {
        let s = sample(FitFamily::Fourier, &[1.0, 0.5, 2.0], 0.0, 1.0, 5);
        assert!(matches!(fit_least_squares(&s, FitFamily::Fourier, &[0.0; 3]), Err(FitError::TooFewSamples { .. })));
        let s = sample(FitFamily::Fourier, &[1.0, 0.5, 2.0], 0.0, 1.0, 50);
        assert!(matches!(
            fit_least_squares(&s, FitFamily::Fourier, &[0.0; 2]),
            Err(FitError::WrongParameterCount { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let s: Vec<(f64, f64)> = (0..100).map(|k| (k as f64 * 0.03 - 1.5, (k as f64 * 0.7).sin())).collect();
        let a = fit_least_squares(&s, FitFamily::Fourier, &[0.0; 3]);
        let b = fit_least_squares(&s, FitFamily::Fourier, &[0.0; 3]);
        assert_eq!(a, b);
    }
}
