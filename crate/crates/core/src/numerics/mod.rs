//! Numerical kernels shared by the physics modules: an adaptive Runge-Kutta
//! integrator over fixed-size complex vectors, a Levenberg-Marquardt fitter
//! for the two detuning families and a linear level-crossing search.

mod crossing;
mod fit;
mod grid;
mod ivp;

pub use crossing::{find_level_crossing, CrossingDirection};
pub use fit::{fit_least_squares, FitError, FitFamily, FitResult, FIT_MAX_ITERATIONS};
pub use grid::{GridError, TimeGrid};
pub use ivp::{integrate_ivp, integrate_ivp_projected, IntegrationError, IvpOptions, Stepper};
