use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("time grid needs t_end > t_start (got [{t_start}, {t_end}])")]
    EmptyInterval { t_start: f64, t_end: f64 },
    #[error("time grid needs at least 2 samples (got {0})")]
    TooFewSamples(usize),
    #[error("time grid bounds must be finite")]
    NonFinite,
}

/// Uniform sampling of `[t_start, t_end]` with `n_steps` samples, both
/// endpoints included. Times are in units of the pulse width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self, GridError> {
        let grid = Self { t_start, t_end, n_steps };
        grid.validate()?;
        Ok(grid)
    }

    /// Window `[-t_final, t_final]`.
    pub fn symmetric(t_final: f64, n_steps: usize) -> Result<Self, GridError> {
        Self::new(-t_final, t_final, n_steps)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(GridError::NonFinite);
        }
        if self.t_end <= self.t_start {
            return Err(GridError::EmptyInterval { t_start: self.t_start, t_end: self.t_end });
        }
        if self.n_steps < 2 {
            return Err(GridError::TooFewSamples(self.n_steps));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_steps - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_steps).map(|k| self.time(k)).collect()
    }

    /// Same interval with a different sample count.
    pub fn with_samples(&self, n_steps: usize) -> Self {
        Self { n_steps, ..*self }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.t_start + self.t_end).abs() <= 1e-12 * self.t_end.abs().max(1.0)
    }
}
