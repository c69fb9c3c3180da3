//! Named scenarios and the reference detuning fits.

use super::config::{DetuningSource, ScenarioConfig, DEFAULT_SAMPLES};
use crate::model::{DetuningProfile, PulseParameters};
use crate::numerics::{FitFamily, TimeGrid};
use crate::propagate::{Dynamics, GroundDephasing};

/// A detuning design case: dephasing strength, half-window and the compact
/// form reported for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignCase {
    pub label: &'static str,
    pub gamma: f64,
    pub t_final: f64,
    pub family: FitFamily,
    pub params: &'static [f64],
}

impl DesignCase {
    pub fn pulse(&self) -> PulseParameters {
        PulseParameters::matched(1.0, self.gamma)
    }

    pub fn window(&self) -> TimeGrid {
        TimeGrid { t_start: -self.t_final, t_end: self.t_final, n_steps: DEFAULT_SAMPLES }
    }

    pub fn profile(&self) -> DetuningProfile {
        let p = self.params;
        match self.family {
            FitFamily::Fourier => DetuningProfile::Fourier { delta0: p[0], delta1: p[1], omega: p[2] },
            FitFamily::GaussianSum => DetuningProfile::GaussianSum { params: [p[0], p[1], p[2], p[3], p[4], p[5]] },
        }
    }

    pub fn source(&self) -> DetuningSource {
        DetuningSource::Fitted { family: self.family, params: Some(self.params.to_vec()) }
    }
}

/// Reference compact detunings for γ ∈ {1, 2} and half-windows 1.5, 2, 2.5.
pub const DESIGN_CASES: [DesignCase; 6] = [
    DesignCase { label: "a", gamma: 1.0, t_final: 1.5, family: FitFamily::Fourier, params: &[1.12, 1.12, 1.92] },
    DesignCase { label: "b", gamma: 1.0, t_final: 2.0, family: FitFamily::GaussianSum, params: &[8.94, 0.0, 1.92, 0.0, 0.0, 0.0] },
    DesignCase { label: "c", gamma: 1.0, t_final: 2.5, family: FitFamily::GaussianSum, params: &[51.83, 0.0, 0.88, 0.0, 0.0, 0.0] },
    DesignCase { label: "d", gamma: 2.0, t_final: 1.5, family: FitFamily::Fourier, params: &[1.43, 2.09, 1.57] },
    DesignCase { label: "e", gamma: 2.0, t_final: 2.0, family: FitFamily::Fourier, params: &[4.49, 4.49, 1.39] },
    DesignCase { label: "f", gamma: 2.0, t_final: 2.5, family: FitFamily::GaussianSum, params: &[28.85, -0.6, 0.9, 28.85, 0.6, 0.9] },
];

pub fn design_case(label: &str) -> Option<&'static DesignCase> {
    DESIGN_CASES.iter().find(|c| c.label == label)
}

pub const SCENARIO_PRESETS: [&str; 8] = [
    "baseline_transfer",
    "traditional_stirap",
    "traditional_stirap_long_delay",
    "dephasing_without_detuning",
    "dephasing_without_detuning_offset",
    "weak_dephasing_designed",
    "strong_dephasing_shutdown",
    "excited_state_dissipation",
];

fn designed(case: &DesignCase, epsilon: f64) -> ScenarioConfig {
    ScenarioConfig {
        pulse: case.pulse(),
        window: case.window(),
        epsilon,
        detuning: case.source(),
        ..ScenarioConfig::default()
    }
}

/// Named starting configurations.
pub fn scenario(name: &str) -> Option<ScenarioConfig> {
    let a = design_case("a")?;
    let d = design_case("d")?;
    let undriven = |tau: f64, gamma: f64, epsilon: f64| ScenarioConfig {
        pulse: PulseParameters { tau, gamma, ..PulseParameters::matched(1.0, gamma) },
        window: a.window(),
        epsilon,
        detuning: DetuningSource::None,
        ..ScenarioConfig::default()
    };
    Some(match name {
        // γ = 1, t_f = 1.5T, ε = −0.038 with the Fourier detuning.
        "baseline_transfer" => designed(a, -0.038),
        // No dephasing, no detuning: incomplete adiabatic transfer.
        "traditional_stirap" => undriven(0.5, 0.0, 0.0),
        "traditional_stirap_long_delay" => undriven(1.0, 0.0, 0.0),
        "dephasing_without_detuning" => undriven(0.5, 1.0, 0.0),
        "dephasing_without_detuning_offset" => undriven(0.5, 1.0, 0.05),
        "weak_dephasing_designed" => designed(a, 0.0),
        // γ = 2, t_f = 1.5T, ε = 0.2: transfer completes mid-window.
        "strong_dephasing_shutdown" => designed(d, 0.2),
        // Baseline plus excited-state damping/dephasing in a master equation.
        "excited_state_dissipation" => {
            let mut c = designed(a, -0.038);
            c.dynamics = Dynamics::Lindblad;
            c.rates.ground = GroundDephasing::Effective;
            c.rates.gamma_damp = 0.1;
            c.rates.gamma_dephase = 0.1;
            c
        }
        _ => return None,
    })
}
