#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use stirap_core::numerics::TimeGrid;

pub const ORACLE_STEP: f64 = 1e-4;

/// Piecewise-constant matrix-exponential propagation of `ċ = −i·G(t)·c`:
/// each sub-step of length ≤ `step` applies `exp(−i·G(t_mid)·h)`. Returns the
/// state at every grid sample.
pub fn expm_propagate(
    generator: impl Fn(f64) -> Matrix3<Complex64>,
    c0: [Complex64; 3],
    grid: &TimeGrid,
    step: f64,
) -> Vec<[Complex64; 3]> {
    let times = grid.times();
    let mut c = Vector3::from(c0);
    let mut out = vec![c0];
    for w in times.windows(2) {
        let n = ((w[1] - w[0]) / step).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for k in 0..n {
            let tm = w[0] + (k as f64 + 0.5) * h;
            let u = (generator(tm) * Complex64::new(0.0, -h)).exp();
            c = u * c;
        }
        out.push([c[0], c[1], c[2]]);
    }
    out
}

pub fn max_component_diff(a: &[[Complex64; 3]], b: &[[Complex64; 3]]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).flat_map(|(x, y)| (0..3).map(move |i| (x[i] - y[i]).norm())).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &Matrix3<Complex64>, tol: f64) -> bool {
    (m - m.adjoint()).norm() <= tol
}
