use serde::{Deserialize, Serialize};

use super::Trajectory;

/// Band on `P₃` around 1 and the minimum relative population at shutdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShutdownCriteria {
    pub p3_tol: f64,
    pub pr_threshold: f64,
}

impl Default for ShutdownCriteria {
    fn default() -> Self {
        Self { p3_tol: 0.01, pr_threshold: 0.9 }
    }
}

/// Earliest time at which the linearly interpolated trajectory has
/// `|P₃ - 1| ≤ p3_tol` and `P₃ʳ ≥ pr_threshold`.
pub fn optimum_shutdown_time(traj: &Trajectory, p3_tol: f64, pr_threshold: f64) -> Option<f64> {
    let obs = &traj.observables;
    if obs.len() == 1 {
        let o = &obs[0];
        return ((o.p3 - 1.0).abs() <= p3_tol && o.p3r >= pr_threshold).then_some(traj.times[0]);
    }
    (0..obs.len().saturating_sub(1)).find_map(|k| {
        let (a, b) = (&obs[k], &obs[k + 1]);
        let band = linear_band(a.p3, b.p3, 1.0 - p3_tol, 1.0 + p3_tol)?;
        let gate = linear_band(a.p3r, b.p3r, pr_threshold, f64::INFINITY)?;
        let lo = band.0.max(gate.0);
        let hi = band.1.min(gate.1);
        (lo <= hi).then(|| traj.times[k] + lo * (traj.times[k + 1] - traj.times[k]))
    })
}

/// Sub-interval of `s ∈ [0, 1]` where `lo ≤ v0 + s(v1 - v0) ≤ hi`.
fn linear_band(v0: f64, v1: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let dv = v1 - v0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    if dv == 0.0 {
        return (v0 >= lo && v0 <= hi).then_some((a, b));
    }
    let s_lo = (lo - v0) / dv;
    let s_hi = if hi.is_finite() { (hi - v0) / dv } else if dv > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    let (x, y) = if dv > 0.0 { (s_lo, s_hi) } else { (s_hi, s_lo) };
    a = a.max(x);
    b = b.min(y);
    (a <= b).then_some((a, b))
}
