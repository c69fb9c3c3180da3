//! Scenario configuration and the flat `key = value` file format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::presets;
use crate::design::{CancelledCoupling, DecouplingForm};
use crate::model::{PulseParameters, RabiConvention};
use crate::numerics::{FitFamily, TimeGrid};
use crate::propagate::{DissipationRates, DissipatorSign, Dynamics, GroundDephasing, ShutdownCriteria};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key `{0}` given twice")]
    DuplicateKey(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl ConfigError {
    fn invalid(key: &str, value: &str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidValue { key: key.to_string(), value: value.to_string(), reason: reason.into() }
    }
}

/// Ordered `key → value` pairs read from a config file and `--set` overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Parses lines of `key = value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = ConfigMap::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, message: format!("expected `key = value`, got `{line}`") })?;
            let k = k.trim();
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax { line: i + 1, message: format!("bad key `{k}`") });
            }
            if map.entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(ConfigError::DuplicateKey(k.to_string()));
            }
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Applies a `KEY=VALUE` override, replacing any existing value.
    pub fn set_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: 0, message: format!("override `{assignment}` is not KEY=VALUE") })?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|e| ConfigError::invalid(key, v, e.to_string())))
            .transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }
}

pub(crate) fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::invalid(key, v, "not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::invalid(key, v, "must be finite"))
    }
}

pub(crate) fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_f64(key, s)).collect()
}

/// Where the detuning of a scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum DetuningSource {
    /// `Δ ≡ 0`.
    None,
    /// The designed detuning, integrated on the scenario window.
    Ode,
    /// A compact fitted form: given parameters, or designed and fitted on
    /// the scenario window when `params` is absent.
    Fitted { family: FitFamily, params: Option<Vec<f64>> },
}

impl DetuningSource {
    pub fn parse(v: &str) -> Option<Self> {
        match v {
            "none" => Some(DetuningSource::None),
            "ode" => Some(DetuningSource::Ode),
            "fitted:fourier" => Some(DetuningSource::Fitted { family: FitFamily::Fourier, params: None }),
            "fitted:gaussian" => Some(DetuningSource::Fitted { family: FitFamily::GaussianSum, params: None }),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DetuningSource::None => "none".into(),
            DetuningSource::Ode => "ode".into(),
            DetuningSource::Fitted { family, .. } => format!("fitted:{}", family.name()),
        }
    }
}

/// How a relative delay deviation acts on the pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayCoupling {
    /// `τ` and `γ` scale together, keeping `τ = γ/2`.
    #[default]
    Matched,
    /// Only the delay changes.
    DelayOnly,
}

/// Relative deviations of the control parameters, each in `[-0.5, 0.5]`:
/// peak Rabi frequency, delay, detuning amplitude and detuning frequency.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeviationSpec {
    pub rel_omega: f64,
    pub rel_tau: f64,
    pub rel_delta0: f64,
    pub rel_omega_fit: f64,
}

impl DeviationSpec {
    pub fn new(rel_omega: f64, rel_tau: f64, rel_delta0: f64, rel_omega_fit: f64) -> Self {
        Self { rel_omega, rel_tau, rel_delta0, rel_omega_fit }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("dev.omega", self.rel_omega),
            ("dev.tau", self.rel_tau),
            ("dev.delta0", self.rel_delta0),
            ("dev.omega_fit", self.rel_omega_fit),
        ] {
            if !(-0.5..=0.5).contains(&v) {
                return Err(ConfigError::invalid(key, &v.to_string(), "relative deviation must lie in [-0.5, 0.5]"));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        *self == DeviationSpec::default()
    }

    /// Sum of the four deviations.
    pub fn aggregate(&self) -> f64 {
        self.rel_omega + self.rel_tau + self.rel_delta0 + self.rel_omega_fit
    }
}

/// Everything needed to run one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub pulse: PulseParameters,
    pub window: TimeGrid,
    pub epsilon: f64,
    pub detuning: DetuningSource,
    pub dynamics: Dynamics,
    /// Master-equation rates; `gamma_ground` is replaced by the pulse
    /// dephasing rate when `ground_follows_pulse` is set.
    pub rates: DissipationRates,
    pub ground_follows_pulse: bool,
    pub deviations: DeviationSpec,
    pub delay_coupling: DelayCoupling,
    pub convention: RabiConvention,
    pub design_form: DecouplingForm,
    pub design_cancel: CancelledCoupling,
    pub shutdown: ShutdownCriteria,
    pub tol: f64,
}

pub const DEFAULT_SAMPLES: usize = 3000;

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            pulse: PulseParameters::matched(1.0, 1.0),
            window: TimeGrid { t_start: -1.5, t_end: 1.5, n_steps: DEFAULT_SAMPLES },
            epsilon: 0.0,
            detuning: DetuningSource::None,
            dynamics: Dynamics::Schrodinger,
            rates: DissipationRates::default(),
            ground_follows_pulse: true,
            deviations: DeviationSpec::default(),
            delay_coupling: DelayCoupling::Matched,
            convention: RabiConvention::Full,
            design_form: DecouplingForm::Printed,
            design_cancel: CancelledCoupling::PlusMinus,
            shutdown: ShutdownCriteria::default(),
            tol: 1e-11,
        }
    }
}

/// Prefixes owned by other readers of the same file.
const FOREIGN_PREFIXES: [&str; 3] = ["scan.", "fit.", "check."];

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pulse.validate().map_err(|e| ConfigError::invalid("pulse", "", e.to_string()))?;
        self.window.validate().map_err(|e| ConfigError::invalid("window", "", e.to_string()))?;
        self.deviations.validate()?;
        self.rates.validate().map_err(|e| ConfigError::invalid("rates", "", e.to_string()))?;
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(ConfigError::invalid("tol", &self.tol.to_string(), "must be positive"));
        }
        if !self.epsilon.is_finite() || 2.0 * self.epsilon * self.epsilon > 1.0 + 1e-15 {
            return Err(ConfigError::invalid("epsilon", &self.epsilon.to_string(), "need |ε| ≤ 1/√2"));
        }
        if let DetuningSource::Fitted { family, params: Some(p) } = &self.detuning {
            if p.len() != family.n_params() {
                return Err(ConfigError::invalid(
                    "detuning.params",
                    &format!("{p:?}"),
                    format!("{} family takes {} parameters", family.name(), family.n_params()),
                ));
            }
        }
        Ok(())
    }

    /// Builds a configuration from a parsed map. A `preset` key selects the
    /// starting point; every other scenario key overrides it.
    pub fn from_map(map: &ConfigMap) -> Result<Self, ConfigError> {
        let mut cfg = match map.get("preset") {
            Some(name) => presets::scenario(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?,
            None => ScenarioConfig::default(),
        };
        let mut t_final = None;
        let mut params = None;
        for key in map.keys() {
            if FOREIGN_PREFIXES.iter().any(|p| key.starts_with(p)) || key == "preset" {
                continue;
            }
            let v = map.get(key).unwrap_or_default();
            let num = || parse_f64(key, v);
            match key {
                "pulse.omega" => cfg.pulse.omega_peak = num()?,
                "pulse.width" => cfg.pulse.pulse_width = num()?,
                "pulse.tau" => cfg.pulse.tau = num()?,
                "pulse.gamma" => cfg.pulse.gamma = num()?,
                "pulse.scale_c" => cfg.pulse.scale_c = num()?,
                "pulse.scale_alpha" => cfg.pulse.scale_alpha = num()?,
                "window.t_final" => t_final = Some(num()?),
                "window.t_start" => cfg.window.t_start = num()?,
                "window.t_end" => cfg.window.t_end = num()?,
                "window.samples" => cfg.window.n_steps = map.usize(key)?.unwrap_or_default(),
                "epsilon" => cfg.epsilon = num()?,
                "detuning.source" => {
                    cfg.detuning = DetuningSource::parse(v)
                        .ok_or_else(|| ConfigError::invalid(key, v, "expected none|ode|fitted:fourier|fitted:gaussian"))?
                }
                "detuning.params" => params = Some(parse_list(key, v)?),
                "detuning.form" => {
                    cfg.design_form = match v {
                        "printed" => DecouplingForm::Printed,
                        "exact" => DecouplingForm::Exact,
                        _ => return Err(ConfigError::invalid(key, v, "expected printed|exact")),
                    }
                }
                "detuning.cancel" => {
                    cfg.design_cancel = match v {
                        "plus_minus" => CancelledCoupling::PlusMinus,
                        "minus_plus" => CancelledCoupling::MinusPlus,
                        _ => return Err(ConfigError::invalid(key, v, "expected plus_minus|minus_plus")),
                    }
                }
                "dynamics" => {
                    cfg.dynamics = match v {
                        "schrodinger" => Dynamics::Schrodinger,
                        "lindblad" => Dynamics::Lindblad,
                        _ => return Err(ConfigError::invalid(key, v, "expected schrodinger|lindblad")),
                    }
                }
                "rates.gamma1" => cfg.rates.gamma_damp = num()?,
                "rates.gamma2" => cfg.rates.gamma_dephase = num()?,
                "rates.gamma_ground" => {
                    cfg.rates.gamma_ground = num()?;
                    cfg.ground_follows_pulse = false;
                }
                "rates.sign" => cfg.rates.sign = parse_sign(v).ok_or_else(|| ConfigError::invalid(key, v, "expected standard|paper"))?,
                "rates.ground" => {
                    cfg.rates.ground = match v {
                        "jump" => GroundDephasing::Jump,
                        "effective" => GroundDephasing::Effective,
                        _ => return Err(ConfigError::invalid(key, v, "expected jump|effective")),
                    }
                }
                "dev.omega" => cfg.deviations.rel_omega = num()?,
                "dev.tau" => cfg.deviations.rel_tau = num()?,
                "dev.delta0" => cfg.deviations.rel_delta0 = num()?,
                "dev.omega_fit" => cfg.deviations.rel_omega_fit = num()?,
                "dev.delay_coupling" => {
                    cfg.delay_coupling = match v {
                        "matched" => DelayCoupling::Matched,
                        "delay_only" => DelayCoupling::DelayOnly,
                        _ => return Err(ConfigError::invalid(key, v, "expected matched|delay_only")),
                    }
                }
                "convention" => {
                    cfg.convention = match v {
                        "full" => RabiConvention::Full,
                        "half" => RabiConvention::Half,
                        _ => return Err(ConfigError::invalid(key, v, "expected full|half")),
                    }
                }
                "shutdown.p3_tol" => cfg.shutdown.p3_tol = num()?,
                "shutdown.pr_threshold" => cfg.shutdown.pr_threshold = num()?,
                "tol" => cfg.tol = num()?,
                _ => return Err(ConfigError::UnknownKey(key.to_string())),
            }
        }
        if let Some(tf) = t_final {
            cfg.window.t_start = -tf;
            cfg.window.t_end = tf;
        }
        if let Some(p) = params {
            match &mut cfg.detuning {
                DetuningSource::Fitted { params, .. } => *params = Some(p),
                _ => return Err(ConfigError::invalid("detuning.params", "", "only valid with detuning.source = fitted:*")),
            }
        } else if map.get("detuning.source").is_some() {
            // An explicit source without parameters asks for a fresh design.
            if let DetuningSource::Fitted { params, .. } = &mut cfg.detuning {
                *params = None;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_sign(v: &str) -> Option<DissipatorSign> {
    match v {
        "standard" => Some(DissipatorSign::Standard),
        "paper" => Some(DissipatorSign::Paper),
        _ => None,
    }
}
