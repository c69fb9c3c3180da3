//! Two-axis parameter grids over a base scenario.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{parse_f64, parse_list, ConfigError, ConfigMap, ScenarioConfig};
use super::exec::Execution;
use super::scenario::{freeze_detuning, resolve_detuning, run_with_detuning, Summary};
use super::HarnessError;
use crate::propagate::{Observables, Trajectory};

pub const DEFAULT_GRID_CAP: usize = 401;

/// A scenario parameter a scan axis can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanParameter {
    /// Time within one trajectory: cells along this axis share a run.
    Time,
    Epsilon,
    Omega,
    Tau,
    Gamma,
    TFinal,
    DevOmega,
    DevTau,
    DevDelta0,
    DevOmegaFit,
    Gamma1,
    Gamma2,
}

const PARAMETER_NAMES: [(ScanParameter, &str); 12] = [
    (ScanParameter::Time, "t"),
    (ScanParameter::Epsilon, "epsilon"),
    (ScanParameter::Omega, "pulse.omega"),
    (ScanParameter::Tau, "pulse.tau"),
    (ScanParameter::Gamma, "pulse.gamma"),
    (ScanParameter::TFinal, "window.t_final"),
    (ScanParameter::DevOmega, "dev.omega"),
    (ScanParameter::DevTau, "dev.tau"),
    (ScanParameter::DevDelta0, "dev.delta0"),
    (ScanParameter::DevOmegaFit, "dev.omega_fit"),
    (ScanParameter::Gamma1, "rates.gamma1"),
    (ScanParameter::Gamma2, "rates.gamma2"),
];

impl ScanParameter {
    pub fn name(self) -> &'static str {
        PARAMETER_NAMES.iter().find(|p| p.0 == self).map(|p| p.1).expect("every parameter is named")
    }

    /// Whether changing the parameter changes the designed detuning.
    fn affects_design(self) -> bool {
        matches!(self, ScanParameter::Omega | ScanParameter::Tau | ScanParameter::Gamma | ScanParameter::TFinal)
    }

    fn apply(self, cfg: &mut ScenarioConfig, v: f64) {
        match self {
            ScanParameter::Time => {}
            ScanParameter::Epsilon => cfg.epsilon = v,
            ScanParameter::Omega => cfg.pulse.omega_peak = v,
            ScanParameter::Tau => cfg.pulse.tau = v,
            ScanParameter::Gamma => cfg.pulse.gamma = v,
            ScanParameter::TFinal => {
                cfg.window.t_start = -v;
                cfg.window.t_end = v;
            }
            ScanParameter::DevOmega => cfg.deviations.rel_omega = v,
            ScanParameter::DevTau => cfg.deviations.rel_tau = v,
            ScanParameter::DevDelta0 => cfg.deviations.rel_delta0 = v,
            ScanParameter::DevOmegaFit => cfg.deviations.rel_omega_fit = v,
            ScanParameter::Gamma1 => cfg.rates.gamma_damp = v,
            ScanParameter::Gamma2 => cfg.rates.gamma_dephase = v,
        }
    }
}

impl FromStr for ScanParameter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PARAMETER_NAMES.iter().find(|p| p.1 == s).map(|p| p.0).ok_or_else(|| {
            let names: Vec<_> = PARAMETER_NAMES.iter().map(|p| p.1).collect();
            format!("unknown scan parameter `{s}` (expected one of {})", names.join(", "))
        })
    }
}

impl fmt::Display for ScanParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-cell output quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    P3,
    P3r,
    ShutdownTime,
    MaxP2,
    FinalNorm,
}

const QUANTITY_NAMES: [(Quantity, &str); 5] = [
    (Quantity::P3, "P3"),
    (Quantity::P3r, "P3r"),
    (Quantity::ShutdownTime, "shutdown_time"),
    (Quantity::MaxP2, "max_P2"),
    (Quantity::FinalNorm, "final_norm"),
];

impl Quantity {
    pub fn name(self) -> &'static str {
        QUANTITY_NAMES.iter().find(|q| q.0 == self).map(|q| q.1).expect("every quantity is named")
    }

    pub fn of_summary(self, s: &Summary) -> Option<f64> {
        match self {
            Quantity::P3 => Some(s.final_p3),
            Quantity::P3r => Some(s.final_p3r),
            Quantity::ShutdownTime => s.shutdown_time,
            Quantity::MaxP2 => Some(s.max_p2),
            Quantity::FinalNorm => Some(s.final_norm),
        }
    }
}

impl FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QUANTITY_NAMES
            .iter()
            .find(|q| q.1 == s)
            .map(|q| q.0)
            .ok_or_else(|| format!("unknown quantity `{s}` (expected P3, P3r, shutdown_time, max_P2 or final_norm)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub parameter: ScanParameter,
    pub values: Vec<f64>,
}

impl ScanAxis {
    pub fn new(parameter: ScanParameter, values: Vec<f64>) -> Self {
        Self { parameter, values }
    }

    /// `n` evenly spaced values from `a` to `b` inclusive.
    pub fn linspace(parameter: ScanParameter, a: f64, b: f64, n: usize) -> Self {
        let values = match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect(),
        };
        Self { parameter, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub axis1: ScanAxis,
    pub axis2: ScanAxis,
    pub quantities: Vec<Quantity>,
    pub cap: usize,
}

impl ScanSpec {
    pub fn new(axis1: ScanAxis, axis2: ScanAxis, quantities: Vec<Quantity>) -> Self {
        Self { axis1, axis2, quantities, cap: DEFAULT_GRID_CAP }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidScan(m));
        for (k, axis) in [("axis1", &self.axis1), ("axis2", &self.axis2)] {
            if axis.values.is_empty() {
                return bad(format!("{k} has no values"));
            }
            if axis.values.len() > self.cap {
                return bad(format!("{k} has {} values, cap is {}", axis.values.len(), self.cap));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return bad(format!("{k} has non-finite values"));
            }
        }
        if self.axis1.parameter == self.axis2.parameter {
            return bad(format!("both axes scan {}", self.axis1.parameter));
        }
        if self.quantities.is_empty() {
            return bad("no output quantities".into());
        }
        Ok(())
    }

    /// Reads `scan.*` keys: `scan.preset`, `scan.axisN` (parameter name),
    /// `scan.axisN.values` (comma list) or `scan.axisN.range`
    /// (`start:end:count`), `scan.quantities`, `scan.cap`.
    pub fn from_map(map: &ConfigMap) -> Result<Self, ConfigError> {
        let mut spec = match map.get("scan.preset") {
            Some(name) => scan_preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?,
            None => ScanSpec::new(
                ScanAxis::new(ScanParameter::Epsilon, Vec::new()),
                ScanAxis::new(ScanParameter::Time, Vec::new()),
                vec![Quantity::P3, Quantity::P3r],
            ),
        };
        for (idx, axis) in [(1, &mut spec.axis1), (2, &mut spec.axis2)] {
            let key = format!("scan.axis{idx}");
            if let Some(v) = map.get(&key) {
                axis.parameter = v.parse().map_err(|e: String| ConfigError::InvalidValue { key: key.clone(), value: v.into(), reason: e })?;
            }
            let vkey = format!("{key}.values");
            let rkey = format!("{key}.range");
            if let Some(v) = map.get(&vkey) {
                axis.values = parse_list(&vkey, v)?;
            } else if let Some(v) = map.get(&rkey) {
                let parts: Vec<&str> = v.split(':').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(ConfigError::InvalidValue { key: rkey, value: v.into(), reason: "expected start:end:count".into() });
                }
                let n = parts[2]
                    .parse::<usize>()
                    .map_err(|e| ConfigError::InvalidValue { key: rkey.clone(), value: v.into(), reason: e.to_string() })?;
                *axis = ScanAxis::linspace(axis.parameter, parse_f64(&rkey, parts[0])?, parse_f64(&rkey, parts[1])?, n);
            }
        }
        if let Some(v) = map.get("scan.quantities") {
            spec.quantities = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e: String| ConfigError::InvalidValue { key: "scan.quantities".into(), value: v.into(), reason: e }))
                .collect::<Result<_, _>>()?;
        }
        if let Some(c) = map.usize("scan.cap")? {
            spec.cap = c;
        }
        for key in map.keys().filter(|k| k.starts_with("scan.")) {
            let known = matches!(key, "scan.preset" | "scan.quantities" | "scan.cap")
                || ["scan.axis1", "scan.axis2"].iter().any(|a| key == *a || key == format!("{a}.values") || key == format!("{a}.range"));
            if !known {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
        }
        Ok(spec)
    }
}

pub const SCAN_PRESETS: [&str; 4] = ["pulse_deviation_grid", "detuning_deviation_grid", "dissipation_grid", "epsilon_time_map"];

/// Standard grids: ±5% pulse deviations, ±10% detuning deviations,
/// `Γ₁, Γ₂ ∈ [0, 0.5]`, and ε × t.
pub fn scan_preset(name: &str) -> Option<ScanSpec> {
    use ScanParameter::*;
    let both = vec![Quantity::P3, Quantity::P3r];
    Some(match name {
        "pulse_deviation_grid" => ScanSpec::new(ScanAxis::linspace(DevOmega, -0.05, 0.05, 41), ScanAxis::linspace(DevTau, -0.05, 0.05, 41), both),
        "detuning_deviation_grid" => {
            ScanSpec::new(ScanAxis::linspace(DevDelta0, -0.1, 0.1, 41), ScanAxis::linspace(DevOmegaFit, -0.1, 0.1, 41), both)
        }
        "dissipation_grid" => ScanSpec::new(ScanAxis::linspace(Gamma1, 0.0, 0.5, 51), ScanAxis::linspace(Gamma2, 0.0, 0.5, 51), both),
        "epsilon_time_map" => ScanSpec::new(
            ScanAxis::linspace(Epsilon, -0.2, 0.2, 201),
            ScanAxis::linspace(Time, -1.5, 1.5, 201),
            vec![Quantity::P3, Quantity::P3r, Quantity::ShutdownTime],
        ),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    /// One entry per requested quantity; `None` when undefined (e.g. no
    /// shutdown time) or when the cell failed.
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub axis1: ScanAxis,
    pub axis2: ScanAxis,
    pub quantities: Vec<Quantity>,
    /// Row-major: `axis1` outer, `axis2` inner.
    pub cells: Vec<GridCell>,
}

impl ScanGrid {
    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.axis2.values.len() + j]
    }

    pub fn value(&self, i: usize, j: usize, q: Quantity) -> Option<f64> {
        let k = self.quantities.iter().position(|&x| x == q)?;
        self.cell(i, j).values[k]
    }

    /// All defined values of one quantity, in cell order.
    pub fn column(&self, q: Quantity) -> Vec<f64> {
        match self.quantities.iter().position(|&x| x == q) {
            Some(k) => self.cells.iter().filter_map(|c| c.values[k]).collect(),
            None => Vec::new(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.error.is_some())
    }
}

/// Observables linearly interpolated at time `t`, plus the running maximum
/// of `P₂` up to `t`.
fn observables_at(traj: &Trajectory, t: f64) -> Option<(Observables, f64)> {
    let ts = &traj.times;
    if ts.len() < 2 || t < ts[0] - 1e-12 || t > ts[ts.len() - 1] + 1e-12 {
        return None;
    }
    let k = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
    let (a, b) = (&traj.observables[k - 1], &traj.observables[k]);
    let s = ((t - ts[k - 1]) / (ts[k] - ts[k - 1])).clamp(0.0, 1.0);
    let lerp = |x: f64, y: f64| x + s * (y - x);
    let o = Observables {
        p1: lerp(a.p1, b.p1),
        p2: lerp(a.p2, b.p2),
        p3: lerp(a.p3, b.p3),
        norm: lerp(a.norm, b.norm),
        p1r: lerp(a.p1r, b.p1r),
        p2r: lerp(a.p2r, b.p2r),
        p3r: lerp(a.p3r, b.p3r),
    };
    let max_p2 = traj.observables[..k].iter().fold(o.p2, |m, x| m.max(x.p2));
    Some((o, max_p2))
}

fn time_cell_values(traj: &Trajectory, shutdown: Option<f64>, t: f64, qs: &[Quantity]) -> Result<Vec<Option<f64>>, String> {
    let (o, max_p2) = observables_at(traj, t).ok_or_else(|| format!("t = {t} outside the scenario window"))?;
    Ok(qs
        .iter()
        .map(|q| match q {
            Quantity::P3 => Some(o.p3),
            Quantity::P3r => Some(o.p3r),
            Quantity::ShutdownTime => shutdown,
            Quantity::MaxP2 => Some(max_p2),
            Quantity::FinalNorm => Some(o.norm),
        })
        .collect())
}

/// Evaluates every grid cell of `spec` on top of `base`. Cells are computed
/// independently (in parallel under [`Execution::Parallel`]) and returned in
/// deterministic order; a failing cell records its error and the scan goes on.
pub fn scan_grid(base: &ScenarioConfig, spec: &ScanSpec, exec: Execution) -> Result<ScanGrid, HarnessError> {
    spec.validate()?;
    base.validate()?;

    let time_axis = if spec.axis1.parameter == ScanParameter::Time {
        Some(1)
    } else if spec.axis2.parameter == ScanParameter::Time {
        Some(2)
    } else {
        None
    };
    let axes = [&spec.axis1, &spec.axis2];
    let design_fixed = !axes.iter().any(|a| a.parameter.affects_design());

    // Resolve a design-on-demand detuning once when no axis changes it.
    let (base, shared) = if design_fixed {
        let frozen = freeze_detuning(base)?;
        let (profile, _) = resolve_detuning(&frozen)?;
        (frozen, Some(profile))
    } else {
        (base.clone(), None)
    };

    let run = |cfg: ScenarioConfig| -> Result<(Trajectory, Summary), String> {
        let (profile, design) = match &shared {
            Some(p) => (p.clone(), None),
            None => resolve_detuning(&cfg).map_err(|e| e.to_string())?,
        };
        let r = run_with_detuning(&cfg, profile, design).map_err(|e| e.to_string())?;
        Ok((r.trajectory, r.summary))
    };
    let with = |pairs: &[(ScanParameter, f64)]| {
        let mut cfg = base.clone();
        for &(p, v) in pairs {
            p.apply(&mut cfg, v);
        }
        cfg.validate().map(|_| cfg).map_err(|e| e.to_string())
    };
    let n2 = spec.axis2.values.len();

    let cells = match time_axis {
        None => {
            let idx: Vec<(usize, usize)> =
                (0..spec.axis1.values.len()).flat_map(|i| (0..n2).map(move |j| (i, j))).collect();
            exec.map(&idx, |&(i, j)| {
                let (x, y) = (spec.axis1.values[i], spec.axis2.values[j]);
                let res = with(&[(spec.axis1.parameter, x), (spec.axis2.parameter, y)]).and_then(&run);
                match res {
                    Ok((_, s)) => GridCell { i, j, x, y, values: spec.quantities.iter().map(|q| q.of_summary(&s)).collect(), error: None },
                    Err(e) => GridCell { i, j, x, y, values: vec![None; spec.quantities.len()], error: Some(e) },
                }
            })
        }
        Some(ta) => {
            let other = if ta == 1 { &spec.axis2 } else { &spec.axis1 };
            let runs = exec.map(&other.values, |&v| with(&[(other.parameter, v)]).and_then(&run));
            let mut cells = Vec::with_capacity(spec.axis1.values.len() * n2);
            for (i, &x) in spec.axis1.values.iter().enumerate() {
                for (j, &y) in spec.axis2.values.iter().enumerate() {
                    let (k, t) = if ta == 1 { (j, x) } else { (i, y) };
                    let res = runs[k]
                        .as_ref()
                        .map_err(Clone::clone)
                        .and_then(|(traj, s)| time_cell_values(traj, s.shutdown_time, t, &spec.quantities));
                    cells.push(match res {
                        Ok(values) => GridCell { i, j, x, y, values, error: None },
                        Err(e) => GridCell { i, j, x, y, values: vec![None; spec.quantities.len()], error: Some(e) },
                    });
                }
            }
            cells
        }
    };
    Ok(ScanGrid { axis1: spec.axis1.clone(), axis2: spec.axis2.clone(), quantities: spec.quantities.clone(), cells })
}
