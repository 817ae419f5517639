//! Continuous-side mathematics: the fluid ODE for Greedy with refills, its stationary
//! point, special functions and quadrature, the competitive-ratio bound formulas, and
//! small closed forms used as oracles by the discrete side.

mod bounds;
mod discrete;
mod drift;
mod lambert;
mod ode;
mod quadrature;
mod stationary;

pub use bounds::{
    cr_bound_th1, cr_bound_th1_exact, cr_bound_th2, cr_bound_th2_detailed, cr_lower_bound,
    cr_lower_bound_limit, mean_level, solve_alpha, solve_alpha_for,
};
pub use discrete::{z_total_closed_form, z_total_recurrence};
pub use drift::{greedy_drift, omega, omega_linearized, sigma, wormald_bound};
pub use lambert::{lambert_w, lambert_w_of_exp};
pub use ode::{g_of, initial_profile, integrate, ode_rhs, OdeSolution};
pub use quadrature::{adaptive_simpson, bisect};
pub use stationary::{stationary_z0, stationary_z0_k1, stationary_z0_kinf, StationaryPoint};
