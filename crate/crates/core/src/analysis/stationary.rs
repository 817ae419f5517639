use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lambert::lambert_w_of_exp;
use super::ode::g_of;
use super::quadrature::bisect;

/// Fixed point of the fluid system: `z_k* = z0* (beta/g*)^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub z0_star: f64,
    pub g_star: f64,
    pub profile: Vec<f64>,
    /// `|P(z0*)|` with `P(z) = sum_k z (beta/g(z))^k - 1`.
    pub residual: f64,
    /// `beta / g*`; the geometric profile only decays when this is at most 1.
    pub ratio: f64,
}

impl StationaryPoint {
    pub fn ratio_ok(&self) -> bool {
        self.ratio <= 1.0
    }
}

fn geometric_sum(x: f64, k: usize) -> f64 {
    let mut s = 0.0;
    for _ in 0..=k {
        s = s * x + 1.0;
    }
    s
}

/// Bisection on `P(z0) = z0 sum_{k=0}^K (beta/g(z0))^k - 1` over `(0, 1 - 1e-12)`.
pub fn stationary_z0(a: f64, beta: f64, k: usize) -> Result<StationaryPoint> {
    if !(a > 0.0 && beta > 0.0) || k == 0 {
        return Err(Error::Parameter(format!(
            "need a > 0, beta > 0, K >= 1; got a={a}, beta={beta}, K={k}"
        )));
    }
    let p = |z0: f64| -> f64 {
        let g = g_of(z0, a).expect("z0 < 1 inside the bracket");
        z0 * geometric_sum(beta / g, k) - 1.0
    };
    let z0 = bisect(p, 0.0, 1.0 - 1e-12, 0.0)?;
    let g = g_of(z0, a)?;
    let ratio = beta / g;
    let mut profile = Vec::with_capacity(k + 1);
    let mut z = z0;
    for _ in 0..=k {
        profile.push(z);
        z *= ratio;
    }
    Ok(StationaryPoint {
        z0_star: z0,
        g_star: g,
        residual: p(z0).abs(),
        profile,
        ratio,
    })
}

/// Closed form for `K = 1`: `z0* = 1/beta - W((a/beta) e^{-a(1 - 1/beta)}) / a`.
pub fn stationary_z0_k1(a: f64, beta: f64) -> Result<f64> {
    if !(a > 0.0 && beta > 0.0) {
        return Err(Error::Parameter(format!("need a, beta > 0; got a={a}, beta={beta}")));
    }
    let log_arg = (a / beta).ln() - a * (1.0 - 1.0 / beta);
    Ok(1.0 / beta - lambert_w_of_exp(log_arg)? / a)
}

/// `K -> infinity` limit: `z0* = 1 + ln(1 - beta)/a`, defined for `0 < beta < 1`.
pub fn stationary_z0_kinf(a: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) || !(a > 0.0) {
        return Err(Error::Parameter(format!(
            "K -> infinity limit needs a > 0 and 0 < beta < 1; got a={a}, beta={beta}"
        )));
    }
    Ok(1.0 + (-beta).ln_1p() / a)
}
