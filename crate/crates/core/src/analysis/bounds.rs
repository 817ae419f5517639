use std::f64::consts::E;

use crate::error::{Error, Result};

use super::ode::g_of;
use super::quadrature::{adaptive_simpson, bisect};
use super::stationary::stationary_z0;

const QUAD_TOL: f64 = 1e-12;

fn weight(x: f64) -> f64 {
    x.exp() / (1.0 - x)
}

fn first_moment(alpha: f64) -> f64 {
    adaptive_simpson(|x| x * weight(x), 0.0, alpha, QUAD_TOL)
}

/// `alpha` in (0,1) with `∫_0^alpha x e^x/(1-x) dx = target`.
pub fn solve_alpha_for(target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Parameter(format!("target must be positive, got {target}")));
    }
    // The integral diverges at 1, so some 1 - 10^-j brackets any target.
    let mut hi = 0.5;
    while first_moment(hi) < target {
        hi = 1.0 - (1.0 - hi) / 10.0;
        if 1.0 - hi < 1e-15 {
            return Err(Error::Parameter(format!("target {target} out of reach")));
        }
    }
    bisect(|a| first_moment(a) - target, 0.0, hi, 1e-13)
}

/// `alpha` with `∫_0^alpha x e^x/(1-x) dx = 1/2` (≈ 0.603).
pub fn solve_alpha() -> f64 {
    solve_alpha_for(0.5).expect("1/2 is reachable")
}

/// Asymptotic Balance bound on the elimination graph: `1 - (1-alpha) e^{-(1-alpha)}`.
pub fn cr_bound_th2() -> f64 {
    let r = 1.0 - solve_alpha();
    1.0 - r * (-r).exp()
}

/// Finite-parameter version for given `(m, b0, t0)`; its `alpha` solves
/// `∫_0^alpha x e^x/(1-x) dx = 1 - t0/(m b0 + 2 t0)`.
pub fn cr_bound_th2_detailed(m: u64, b0: u64, t0: u64) -> Result<f64> {
    if m < 2 || t0 == 0 {
        return Err(Error::Parameter(format!("need m >= 2 and t0 >= 1, got m={m}, t0={t0}")));
    }
    let c = (m * b0) as f64;
    let t0 = t0 as f64;
    let alpha = solve_alpha_for(1.0 - t0 / (c + 2.0 * t0))?;
    let i2 = adaptive_simpson(|x| x * x * weight(x), 0.0, alpha, QUAD_TOL);
    let i3 = adaptive_simpson(|x| x * (alpha - x) * weight(x), 0.0, alpha, QUAD_TOL);
    if !(i2.is_finite() && i3.is_finite()) {
        return Err(Error::Singularity(format!("quadrature diverged at alpha = {alpha}")));
    }
    Ok(1.0 - (c + t0) / (E * (c + 2.0 * t0)) - i2 / E + c / t0 * (1.0 - 1.0 / E + i3 / E))
}

/// `1 - 1/(1 + 1/b0)^{b0}`.
pub fn cr_bound_th1(b0: u64) -> f64 {
    let b = b0 as f64;
    1.0 - (-b * (1.0 / b).ln_1p()).exp()
}

/// `cr_bound_th1` as a reduced fraction `((b0+1)^b0 - b0^b0) / (b0+1)^b0`.
pub fn cr_bound_th1_exact(b0: u64) -> Option<(u128, u128)> {
    let e = u32::try_from(b0).ok()?;
    let den = (b0 as u128 + 1).checked_pow(e)?;
    let num = den - (b0 as u128).pow(e);
    let g = gcd(num, den);
    Some((num / g, den / g))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Mean level of the truncated geometric law `P(k) ∝ x^k`, `k = 0..K`; equals
/// `x/(1-x) - (K+1) x^{K+1}/(1 - x^{K+1})` away from `x = 1` and `K/2` at it.
pub fn mean_level(x: f64, k: usize) -> f64 {
    if x <= 1.0 {
        let (mut num, mut den, mut p) = (0.0, 0.0, 1.0);
        for i in 0..=k {
            num += i as f64 * p;
            den += p;
            p *= x;
        }
        num / den
    } else {
        k as f64 - mean_level(1.0 / x, k)
    }
}

/// Lower bound on Greedy's stochastic ratio (without its `O(T^{-1/4})` term):
/// `(T g*(1 - z0*) + n b0 - n mean_level(beta/g*, K)) / (n b0 + beta T)`.
pub fn cr_lower_bound(horizon: f64, k: usize, n: f64, b0: f64, beta: f64, a: f64) -> Result<f64> {
    let sp = stationary_z0(a, beta, k)?;
    let bracket = mean_level(sp.ratio, k);
    Ok((horizon * sp.g_star * (1.0 - sp.z0_star) + n * b0 - n * bracket) / (n * b0 + beta * horizon))
}

/// `T -> infinity` limit of [`cr_lower_bound`]: `g*(1 - z0*)/beta`.
pub fn cr_lower_bound_limit(k: usize, beta: f64, a: f64) -> Result<f64> {
    let sp = stationary_z0(a, beta, k)?;
    Ok(g_of(sp.z0_star, a)? * (1.0 - sp.z0_star) / beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_and_th2_constant() {
        let alpha = solve_alpha();
        assert!((alpha - 0.603).abs() < 1e-3);
        assert!((first_moment(alpha) - 0.5).abs() < 1e-9);
        let th2 = cr_bound_th2();
        assert!((th2 - 0.73325).abs() < 5e-4);
        assert!(th2 > 1.0 - 1.0 / E && th2 < 1.0);
        // sensitivity: d/dα of 1 - r e^{-r} is (1 - r) e^{-r} < 1
        let r = 1.0 - alpha;
        let bumped = 1.0 - (r - 1e-8) * (-(r - 1e-8)).exp();
        assert!((bumped - th2).abs() <= 1e-8);
    }

    #[test]
    fn detailed_bound_tends_to_asymptotic_one() {
        let th2 = cr_bound_th2();
        let v = cr_bound_th2_detailed(2, 1, 1_000_000_000).unwrap();
        assert!((v - th2).abs() < 1e-6, "{v} vs {th2}");
    }

    #[test]
    fn detailed_bound_decreases_in_t0() {
        for (m, b0) in [(5u64, 1u64), (20, 1), (20, 3), (100, 2)] {
            let vals: Vec<f64> = [1u64, 2, 5, 10, 50, 100, 1000, 10_000]
                .iter()
                .map(|&f| cr_bound_th2_detailed(m, b0, f * m).unwrap())
                .collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "m={m} b0={b0}: {vals:?}");
        }
    }

    #[test]
    fn th1_values() {
        assert_eq!(cr_bound_th1(1), 0.5);
        assert!((cr_bound_th1(2) - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(cr_bound_th1_exact(2), Some((5, 9)));
        assert_eq!(cr_bound_th1_exact(3), Some((37, 64)));
        assert!((cr_bound_th1(1_000_000) - (1.0 - 1.0 / E)).abs() < 1e-6);
    }

    #[test]
    fn mean_level_matches_closed_form() {
        for x in [0.1f64, 0.5, 0.9, 1.5, 3.0] {
            for k in [1usize, 2, 7, 30] {
                let p = (k + 1) as f64;
                let cf = x / (1.0 - x) - p * x.powf(p) / (1.0 - x.powf(p));
                assert!((mean_level(x, k) - cf).abs() < 1e-9 * cf.abs().max(1.0), "x={x} K={k}");
            }
            assert!((mean_level(1.0, 6) - 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lower_bound_tends_to_limit_and_never_exceeds_one() {
        let lim = cr_lower_bound_limit(3, 0.5, 2.0).unwrap();
        let far = cr_lower_bound(1e12, 3, 1000.0, 1.0, 0.5, 2.0).unwrap();
        assert!((far - lim).abs() < 1e-8);
        for a in [0.5, 1.0, 2.0, 5.0] {
            for beta in [0.1, 0.5, 0.9] {
                for k in [1usize, 3, 10, 50] {
                    for (t, n) in [(1e3, 1e3), (1e5, 1e3), (1e6, 1e5)] {
                        assert!(cr_lower_bound(t, k, n, 1.0, beta, a).unwrap() <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn limit_grows_towards_one_with_k() {
        let vals: Vec<f64> = [1usize, 2, 5, 10, 50]
            .iter()
            .map(|&k| cr_lower_bound_limit(k, 0.5, 2.0).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        assert!(1.0 - vals[4] < 1e-6);
    }
}
