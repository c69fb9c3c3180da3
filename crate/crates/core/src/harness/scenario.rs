use serde::{Deserialize, Serialize};

use super::config::{DelayCoupling, DetuningSource, ScenarioConfig};
use super::HarnessError;
use crate::design::{design_detuning, DesignOptions, DesignReport};
use crate::model::{gaussian_drive, DetuningProfile, PulseParameters};
use crate::numerics::{FitResult, IvpOptions};
use crate::propagate::{
    initial_state, optimum_shutdown_time, propagate_lindblad, propagate_schrodinger, DensityMatrix, Dynamics,
    PropagationOptions, Trajectory,
};

/// Final populations, peak excited-state population and shutdown time of
/// one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub final_p1: f64,
    pub final_p2: f64,
    pub final_p3: f64,
    pub final_norm: f64,
    pub final_p1r: f64,
    pub final_p2r: f64,
    pub final_p3r: f64,
    pub max_p2: f64,
    pub shutdown_time: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn from_trajectory(traj: &Trajectory, cfg: &ScenarioConfig) -> Self {
        let o = traj.final_observables().copied().expect("trajectory has samples");
        Self {
            final_p1: o.p1,
            final_p2: o.p2,
            final_p3: o.p3,
            final_norm: o.norm,
            final_p1r: o.p1r,
            final_p2r: o.p2r,
            final_p3r: o.p3r,
            max_p2: traj.max_p2(),
            shutdown_time: optimum_shutdown_time(traj, cfg.shutdown.p3_tol, cfg.shutdown.pr_threshold),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub trajectory: Trajectory,
    pub summary: Summary,
    /// Present when the detuning was designed during this run.
    pub design: Option<DesignReport>,
    /// The detuning actually used, deviations included.
    pub detuning: DetuningProfile,
}

/// Pulse parameters with the Rabi-frequency and delay deviations applied.
pub fn effective_pulse(cfg: &ScenarioConfig) -> PulseParameters {
    let dev = &cfg.deviations;
    let mut p = cfg.pulse;
    p.omega_peak *= 1.0 + dev.rel_omega;
    p.tau *= 1.0 + dev.rel_tau;
    if cfg.delay_coupling == DelayCoupling::Matched {
        p.gamma *= 1.0 + dev.rel_tau;
    }
    p
}

pub fn design_options(cfg: &ScenarioConfig) -> DesignOptions {
    DesignOptions { form: cfg.design_form, cancel: cfg.design_cancel, ..DesignOptions::default() }
}

/// The undeviated detuning of a scenario, designing it when the source asks
/// for it. The design uses the nominal pulses on the scenario window.
pub fn resolve_detuning(cfg: &ScenarioConfig) -> Result<(DetuningProfile, Option<DesignReport>), HarnessError> {
    match &cfg.detuning {
        DetuningSource::None => Ok((DetuningProfile::Zero, None)),
        DetuningSource::Fitted { family, params: Some(p) } => Ok((
            DetuningProfile::from_fit(&FitResult { family: *family, parameters: p.clone(), residual_rms: 0.0, iterations: 0 }),
            None,
        )),
        DetuningSource::Fitted { family, params: None } => {
            let report = design_detuning(&cfg.pulse, &cfg.window, &design_options(cfg), Some(*family))?;
            let profile = report.fit.as_ref().expect("fit requested").profile();
            Ok((profile, Some(report)))
        }
        DetuningSource::Ode => {
            let report = design_detuning(&cfg.pulse, &cfg.window, &design_options(cfg), None)?;
            Ok((report.solution.profile(), Some(report)))
        }
    }
}

/// Replaces a design-on-demand source by its resolved parameters so that
/// repeated runs (scan cells) skip the design step. ODE designs are kept as
/// they are not expressible as parameters.
pub(crate) fn freeze_detuning(cfg: &ScenarioConfig) -> Result<ScenarioConfig, HarnessError> {
    if let DetuningSource::Fitted { family, params: None } = &cfg.detuning {
        let (_, report) = resolve_detuning(cfg)?;
        let fit = report.and_then(|r| r.fit).expect("fit requested");
        let mut c = cfg.clone();
        c.detuning = DetuningSource::Fitted { family: *family, params: Some(fit.fit.parameters) };
        return Ok(c);
    }
    Ok(cfg.clone())
}

/// Runs design (if requested) and propagation for one configuration.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, HarnessError> {
    cfg.validate()?;
    let (base, design) = resolve_detuning(cfg)?;
    run_with_detuning(cfg, base, design)
}

pub(crate) fn run_with_detuning(
    cfg: &ScenarioConfig,
    base: DetuningProfile,
    design: Option<DesignReport>,
) -> Result<ScenarioRun, HarnessError> {
    let detuning = base.deviated(cfg.deviations.rel_delta0, cfg.deviations.rel_omega_fit);
    let pulse = effective_pulse(cfg);
    let psi0 = initial_state(cfg.epsilon)?;
    let opts = PropagationOptions { convention: cfg.convention, ivp: IvpOptions::with_tol(cfg.tol) };
    let drive = |t: f64| gaussian_drive(&pulse, &detuning, t);
    let trajectory = match cfg.dynamics {
        Dynamics::Schrodinger => propagate_schrodinger(drive, &psi0, &cfg.window, &opts)?,
        Dynamics::Lindblad => {
            let mut rates = cfg.rates;
            if cfg.ground_follows_pulse {
                rates.gamma_ground = pulse.dephasing_rate();
            }
            propagate_lindblad(drive, &rates, &DensityMatrix::from_pure(&psi0), &cfg.window, &opts)?
        }
    };
    let mut summary = Summary::from_trajectory(&trajectory, cfg);
    if let Some(w) = design.as_ref().and_then(|d| d.solution.boundary_warning.clone()) {
        summary.warnings.push(w);
    }
    Ok(ScenarioRun { trajectory, summary, design, detuning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;
    use crate::harness::DeviationSpec;

    #[test]
    fn baseline_summary() {
        let run = run_scenario(&presets::scenario("baseline_transfer").unwrap()).unwrap();
        let s = &run.summary;
        assert!(s.final_p3r >= 0.995, "{s:?}");
        assert!((s.final_p3 - 1.0).abs() <= 0.05);
        assert!(s.max_p2 <= 0.02);
        assert!(s.shutdown_time.is_some());
        assert!(run.design.is_none());
    }

    #[test]
    fn zero_deviation_is_identity() {
        let cfg = presets::scenario("baseline_transfer").unwrap();
        let a = run_scenario(&cfg).unwrap().summary;
        let b = run_scenario(&ScenarioConfig { deviations: DeviationSpec::new(0.0, 0.0, 0.0, 0.0), ..cfg }).unwrap().summary;
        assert_eq!(a, b);
    }

    #[test]
    fn delay_deviation_moves_gamma_when_matched() {
        let mut cfg = presets::scenario("baseline_transfer").unwrap();
        cfg.deviations.rel_tau = 0.1;
        let p = effective_pulse(&cfg);
        assert!((p.tau - 0.55).abs() < 1e-15 && (p.gamma - 1.1).abs() < 1e-15);
        cfg.delay_coupling = DelayCoupling::DelayOnly;
        assert_eq!(effective_pulse(&cfg).gamma, 1.0);
    }

    #[test]
    fn designed_sources_resolve() {
        let mut cfg = presets::scenario("baseline_transfer").unwrap();
        cfg.detuning = DetuningSource::Ode;
        let run = run_scenario(&cfg).unwrap();
        assert!(run.design.is_some());
        cfg.detuning = DetuningSource::Fitted { family: crate::numerics::FitFamily::Fourier, params: None };
        let frozen = freeze_detuning(&cfg).unwrap();
        match frozen.detuning {
            DetuningSource::Fitted { params: Some(p), .. } => assert!((p[2] - 1.928).abs() < 0.01),
            other => panic!("{other:?}"),
        }
    }
}
