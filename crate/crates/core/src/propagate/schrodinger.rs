use num_complex::Complex64;

use super::{PropagateError, PropagationOptions, StateVector, Trajectory, TrajectoryStates};
use crate::model::{generator, DriveSample};
use crate::numerics::{integrate_ivp, TimeGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Integrates `i ċ = G(t) c` with `G` the dissipative Hamiltonian in the
/// chosen normalisation. `psi0` is placed at `grid.t_start`.
pub fn propagate_schrodinger<F>(
    drive: F,
    psi0: &StateVector,
    grid: &TimeGrid,
    opts: &PropagationOptions,
) -> Result<Trajectory, PropagateError>
where
    F: Fn(f64) -> DriveSample,
{
    let conv = opts.convention;
    let ys = integrate_ivp(
        |t, c: &[Complex64; 3]| {
            let g = generator(&drive(t), conv);
            std::array::from_fn(|i| -I * (g[(i, 0)] * c[0] + g[(i, 1)] * c[1] + g[(i, 2)] * c[2]))
        },
        psi0.amplitudes,
        grid,
        &opts.ivp,
    )?;
    let times = grid.times();
    let states = times.iter().zip(ys).map(|(&t, a)| StateVector::new(a, t)).collect();
    Trajectory::from_states(times, states, TrajectoryStates::Pure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gaussian_drive, DetuningProfile, PulseParameters, RabiConvention};
    use crate::propagate::initial_state;

    #[test]
    fn hermitian_drive_keeps_norm() {
        let p = PulseParameters { gamma: 0.0, ..Default::default() };
        let grid = TimeGrid::symmetric(1.5, 301).unwrap();
        let traj = propagate_schrodinger(
            |t| gaussian_drive(&p, &DetuningProfile::Fourier { delta0: 0.3, delta1: 0.5, omega: 2.0 }, t),
            &initial_state(0.1).unwrap(),
            &grid,
            &PropagationOptions::default(),
        )
        .unwrap();
        for o in &traj.observables {
            assert!((o.norm - 1.0).abs() < 1e-9);
            assert!((o.p1r + o.p2r + o.p3r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_rate_matches_population_imbalance() {
        let p = PulseParameters::matched(1.0, 1.0);
        let det = DetuningProfile::Fourier { delta0: 1.12, delta1: 1.12, omega: 1.92 };
        let grid = TimeGrid::symmetric(1.5, 3001).unwrap();
        for conv in [RabiConvention::Half, RabiConvention::Full] {
            let opts = PropagationOptions { convention: conv, ..Default::default() };
            let traj = propagate_schrodinger(|t| gaussian_drive(&p, &det, t), &initial_state(-0.038).unwrap(), &grid, &opts)
                .unwrap();
            let h = grid.spacing();
            for k in 1..grid.n_steps - 1 {
                let rate = (traj.observables[k + 1].norm - traj.observables[k - 1].norm) / (2.0 * h);
                let o = &traj.observables[k];
                let want = conv.factor() * p.dephasing_rate() * (o.p3 - o.p1);
                assert!((rate - want).abs() < 1e-5, "{conv:?} t={} {rate} {want}", traj.times[k]);
            }
        }
    }
}
