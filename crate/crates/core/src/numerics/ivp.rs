//! Dormand-Prince 5(4) with dense output, plus a fixed-step RK4 fallback.

use num_complex::Complex64;
use thiserror::Error;

use super::TimeGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("right-hand side is not finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("tolerance must be positive and finite (got {0})")]
    InvalidTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper {
    /// Embedded 5(4) pair with per-step error control.
    Adaptive,
    /// Classical RK4 with a fixed number of steps per unit time.
    Fixed { steps_per_unit: usize },
}

impl Stepper {
    pub const FIXED_DEFAULT: Stepper = Stepper::Fixed { steps_per_unit: 4000 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    /// Relative and absolute per-step tolerance.
    pub tol: f64,
    pub stepper: Stepper,
    pub max_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self { tol: 1e-9, stepper: Stepper::Adaptive, max_steps: 2_000_000 }
    }
}

impl IvpOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

type Vector<const N: usize> = [Complex64; N];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrates `y' = rhs(t, y)` from `grid.t_start` and returns `y` at every
/// grid time (the first entry is `y0`).
pub fn integrate_ivp<const N: usize, F>(
    rhs: F,
    y0: Vector<N>,
    grid: &TimeGrid,
    opts: &IvpOptions,
) -> Result<Vec<Vector<N>>, IntegrationError>
where
    F: FnMut(f64, &Vector<N>) -> Vector<N>,
{
    run(rhs, y0, grid, opts, None::<fn(&mut Vector<N>)>)
}

/// As [`integrate_ivp`], applying `project` to the state after every accepted
/// step and to every reported sample.
pub fn integrate_ivp_projected<const N: usize, F, P>(
    rhs: F,
    y0: Vector<N>,
    grid: &TimeGrid,
    opts: &IvpOptions,
    project: P,
) -> Result<Vec<Vector<N>>, IntegrationError>
where
    F: FnMut(f64, &Vector<N>) -> Vector<N>,
    P: FnMut(&mut Vector<N>),
{
    run(rhs, y0, grid, opts, Some(project))
}

fn run<const N: usize, F, P>(
    rhs: F,
    y0: Vector<N>,
    grid: &TimeGrid,
    opts: &IvpOptions,
    project: Option<P>,
) -> Result<Vec<Vector<N>>, IntegrationError>
where
    F: FnMut(f64, &Vector<N>) -> Vector<N>,
    P: FnMut(&mut Vector<N>),
{
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(IntegrationError::InvalidTolerance(opts.tol));
    }
    let mut rhs = Checked { f: rhs };
    match opts.stepper {
        Stepper::Adaptive => dopri5(&mut rhs, y0, grid, opts, project),
        Stepper::Fixed { steps_per_unit } => rk4(&mut rhs, y0, grid, steps_per_unit.max(1), project),
    }
}

struct Checked<F> {
    f: F,
}

impl<F> Checked<F> {
    fn eval<const N: usize>(&mut self, t: f64, y: &Vector<N>) -> Result<Vector<N>, IntegrationError>
    where
        F: FnMut(f64, &Vector<N>) -> Vector<N>,
    {
        let dy = (self.f)(t, y);
        if dy.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(dy)
        } else {
            Err(IntegrationError::NonFinite { t })
        }
    }
}

#[inline]
fn combo<const N: usize>(y: &Vector<N>, h: f64, terms: &[(f64, &Vector<N>)]) -> Vector<N> {
    let mut out = *y;
    for (c, k) in terms {
        let s = h * c;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

fn rms_norm<const N: usize>(v: &Vector<N>, scale: &[f64; N]) -> f64 {
    let s: f64 = (0..N).map(|i| (v[i].norm() / scale[i]).powi(2)).sum();
    (s / N.max(1) as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    rhs: &mut Checked<F>,
    t0: f64,
    y0: &Vector<N>,
    f0: &Vector<N>,
    tol: f64,
    span: f64,
) -> Result<f64, IntegrationError>
where
    F: FnMut(f64, &Vector<N>) -> Vector<N>,
{
    let scale: [f64; N] = std::array::from_fn(|i| tol + tol * y0[i].norm());
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = combo(y0, h0, &[(1.0, f0)]);
    let f1 = rhs.eval(t0 + h0, &y1)?;
    let diff: Vector<N> = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms_norm(&diff, &scale) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dmax).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(span))
}

fn dopri5<const N: usize, F, P>(
    rhs: &mut Checked<F>,
    y0: Vector<N>,
    grid: &TimeGrid,
    opts: &IvpOptions,
    mut project: Option<P>,
) -> Result<Vec<Vector<N>>, IntegrationError>
where
    F: FnMut(f64, &Vector<N>) -> Vector<N>,
    P: FnMut(&mut Vector<N>),
{
    let times = grid.times();
    let t_end = grid.t_end;
    let span = t_end - grid.t_start;
    let tol = opts.tol;

    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    if let Some(p) = project.as_mut() {
        p(&mut y);
    }
    out.push(y);
    let mut next = 1;

    let mut t = grid.t_start;
    let mut k1 = rhs.eval(t, &y)?;
    let mut h = initial_step(rhs, t, &y, &k1, tol, span)?;
    let mut steps = 0usize;
    let mut rejected_last = false;

    while next < times.len() {
        if steps >= opts.max_steps {
            return Err(IntegrationError::TooManySteps { t, max_steps: opts.max_steps });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) && !last {
            return Err(IntegrationError::StepUnderflow { t, h });
        }

        let y2 = combo(&y, h, &[(A21, &k1)]);
        let k2 = rhs.eval(t + C2 * h, &y2)?;
        let y3 = combo(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = rhs.eval(t + C3 * h, &y3)?;
        let y4 = combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = rhs.eval(t + C4 * h, &y4)?;
        let y5 = combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = rhs.eval(t + C5 * h, &y5)?;
        let y6 = combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = rhs.eval(t + h, &y6)?;
        let y_new = combo(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t_end } else { t + h };
        let k7 = rhs.eval(t_new, &y_new)?;
        steps += 1;

        let err_vec: Vector<N> = std::array::from_fn(|i| {
            (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h
        });
        let scale: [f64; N] = std::array::from_fn(|i| tol + tol * y[i].norm().max(y_new[i].norm()));
        let err = rms_norm(&err_vec, &scale);

        if err <= 1.0 {
            // Dense output coefficients (Hairer's contd5).
            let ydiff: Vector<N> = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: Vector<N> = std::array::from_fn(|i| k1[i] * h - ydiff[i]);
            let c3: Vector<N> = std::array::from_fn(|i| ydiff[i] - k7[i] * h - bspl[i]);
            let c4: Vector<N> = std::array::from_fn(|i| {
                (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h
            });
            while next < times.len() && (times[next] <= t_new || (last && next + 1 == times.len())) {
                let th = ((times[next] - t) / h).clamp(0.0, 1.0);
                let th1 = 1.0 - th;
                let mut yi: Vector<N> = std::array::from_fn(|i| {
                    y[i] + (ydiff[i] + (bspl[i] + (c3[i] + c4[i] * th1) * th) * th1) * th
                });
                if next + 1 == times.len() && last {
                    yi = y_new;
                }
                if let Some(p) = project.as_mut() {
                    p(&mut yi);
                }
                out.push(yi);
                next += 1;
            }

            t = t_new;
            y = y_new;
            k1 = k7;
            if let Some(p) = project.as_mut() {
                p(&mut y);
                k1 = rhs.eval(t, &y)?;
            }

            let mut fac = SAFETY * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h *= fac;
            rejected_last = false;
        } else {
            let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            h *= fac;
            rejected_last = true;
        }
    }
    Ok(out)
}

fn rk4<const N: usize, F, P>(
    rhs: &mut Checked<F>,
    y0: Vector<N>,
    grid: &TimeGrid,
    steps_per_unit: usize,
    mut project: Option<P>,
) -> Result<Vec<Vector<N>>, IntegrationError>
where
    F: FnMut(f64, &Vector<N>) -> Vector<N>,
    P: FnMut(&mut Vector<N>),
{
    let times = grid.times();
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    if let Some(p) = project.as_mut() {
        p(&mut y);
    }
    out.push(y);
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = ((b - a) * steps_per_unit as f64).ceil().max(1.0) as usize;
        let h = (b - a) / m as f64;
        for s in 0..m {
            let t = a + s as f64 * h;
            let k1 = rhs.eval(t, &y)?;
            let k2 = rhs.eval(t + 0.5 * h, &combo(&y, h, &[(0.5, &k1)]))?;
            let k3 = rhs.eval(t + 0.5 * h, &combo(&y, h, &[(0.5, &k2)]))?;
            let k4 = rhs.eval(t + h, &combo(&y, h, &[(1.0, &k3)]))?;
            y = combo(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
            if let Some(p) = project.as_mut() {
                p(&mut y);
            }
        }
        out.push(y);
    }
    Ok(out)
}
