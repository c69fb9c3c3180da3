//! Robustness of the baseline transfer to simultaneous parameter deviations.

use serde::{Deserialize, Serialize};

use super::config::{DeviationSpec, ScenarioConfig};
use super::exec::Execution;
use super::scenario::{freeze_detuning, resolve_detuning, run_with_detuning};
use super::HarnessError;

/// One deviation setting in percent with the reported `(P3r, P3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub d_omega_pct: f64,
    pub d_tau_pct: f64,
    pub d_delta0_pct: f64,
    pub d_omega_fit_pct: f64,
    pub p3r: f64,
    pub p3: f64,
}

impl DeviationRow {
    pub fn deviations(&self) -> DeviationSpec {
        DeviationSpec::new(self.d_omega_pct / 100.0, self.d_tau_pct / 100.0, self.d_delta0_pct / 100.0, self.d_omega_fit_pct / 100.0)
    }
}

const fn row(o: f64, t: f64, d: f64, w: f64, p3r: f64, p3: f64) -> DeviationRow {
    DeviationRow { d_omega_pct: o, d_tau_pct: t, d_delta0_pct: d, d_omega_fit_pct: w, p3r, p3 }
}

/// Reference values for the baseline transfer (γ = 1, t_f = 1.5T,
/// ε = −0.038, Fourier detuning).
pub const REFERENCE_TABLE2: [DeviationRow; 16] = [
    row(5.0, 5.0, 10.0, 10.0, 0.9989, 1.3311),
    row(5.0, 2.5, 5.0, 5.0, 0.9982, 1.1812),
    row(5.0, -2.5, -5.0, -5.0, 0.9947, 0.9435),
    row(5.0, -5.0, -10.0, -10.0, 0.9917, 0.8516),
    row(2.5, 5.0, 10.0, 10.0, 0.9988, 1.3104),
    row(2.5, 2.5, 5.0, 5.0, 0.9980, 1.1607),
    row(2.5, -2.5, -5.0, -5.0, 0.9944, 0.9239),
    row(2.5, -5.0, -10.0, -10.0, 0.9913, 0.8322),
    row(-2.5, 5.0, 10.0, 10.0, 0.9987, 1.2694),
    row(-2.5, 2.5, 5.0, 5.0, 0.9977, 1.1212),
    row(-2.5, -2.5, -5.0, -5.0, 0.9938, 0.8864),
    row(-2.5, -5.0, -10.0, -10.0, 0.9905, 0.7952),
    row(-5.0, 5.0, 10.0, 10.0, 0.9985, 1.2494),
    row(-5.0, 2.5, 5.0, 5.0, 0.9975, 1.1032),
    row(-5.0, -2.5, -5.0, -5.0, 0.9934, 0.8684),
    row(-5.0, -5.0, -10.0, -10.0, 0.9901, 0.7774),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Entry {
    pub reference: DeviationRow,
    pub p3r: f64,
    pub p3: f64,
}

impl Table2Entry {
    pub fn p3r_error(&self) -> f64 {
        (self.p3r - self.reference.p3r).abs()
    }

    pub fn p3_error(&self) -> f64 {
        (self.p3 - self.reference.p3).abs()
    }
}

/// Pairs of adjacent entries, ordered by aggregate deviation, where `P3`
/// fails to increase. Empty when the trend is monotone.
pub fn trend_violations(entries: &[Table2Entry]) -> Vec<(DeviationRow, DeviationRow)> {
    let mut sorted: Vec<&Table2Entry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.reference.deviations().aggregate().total_cmp(&b.reference.deviations().aggregate()));
    sorted.windows(2).filter(|w| w[1].p3 <= w[0].p3).map(|w| (w[0].reference, w[1].reference)).collect()
}

/// Runs `base` once per row with that row's deviations replacing any set on
/// `base`. The undeviated detuning is resolved once.
pub fn table2_report(base: &ScenarioConfig, rows: &[DeviationRow], exec: Execution) -> Result<Vec<Table2Entry>, HarnessError> {
    base.validate()?;
    let base = freeze_detuning(base)?;
    let (profile, _) = resolve_detuning(&base)?;
    exec.map(rows, |r| {
        let cfg = ScenarioConfig { deviations: r.deviations(), ..base.clone() };
        cfg.validate()?;
        let s = run_with_detuning(&cfg, profile.clone(), None)?.summary;
        Ok(Table2Entry { reference: *r, p3r: s.final_p3r, p3: s.final_p3 })
    })
    .into_iter()
    .collect()
}
