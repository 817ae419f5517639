use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Series switch for `g` near the pole.
const SERIES_BELOW: f64 = 1e-8;
/// `ode_rhs` refuses `z_0` this close to 1.
const POLE_GUARD: f64 = 1e-12;

/// `g(z0) = (1 - e^{-a(1-z0)}) / (1 - z0)`, the rate at which an available node is
/// picked, per unit of available mass.
pub fn g_of(z0: f64, a: f64) -> Result<f64> {
    if !(z0 < 1.0) {
        return Err(Error::Singularity(format!("g(z0) needs z0 < 1, got {z0}")));
    }
    let x = 1.0 - z0;
    if x < SERIES_BELOW {
        // (1 - e^{-ax})/x = a - a^2 x/2 + a^3 x^2/6 - ...
        let mut term = a;
        let mut sum = a;
        for k in 2..=6 {
            term *= -a * x / k as f64;
            sum += term;
        }
        return Ok(sum);
    }
    Ok(-(-a * x).exp_m1() / x)
}

/// Right-hand side of the fluid system for `z = (z_0..z_K)`, `K >= 1`. Mass moves up one
/// level at rate `beta` (refills) and down one level at rate `g(z_0)` (matches); the
/// top level loses refills and the bottom one cannot be matched.
pub fn ode_rhs(z: &[f64], a: f64, beta: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; z.len()];
    rhs_into(z, a, beta, &mut out)?;
    Ok(out)
}

fn rhs_into(z: &[f64], a: f64, beta: f64, out: &mut [f64]) -> Result<()> {
    let k = z.len().checked_sub(1).filter(|&k| k >= 1).ok_or_else(|| {
        Error::Parameter(format!("state needs K >= 1 (length >= 2), got {}", z.len()))
    })?;
    if z[0] >= 1.0 - POLE_GUARD {
        return Err(Error::Singularity(format!("z_0 = {} at the pole", z[0])));
    }
    let g = g_of(z[0], a)?;
    out.fill(0.0);
    for i in 0..k {
        let up = beta * z[i];
        let down = g * z[i + 1];
        out[i] += down - up;
        out[i + 1] += up - down;
    }
    Ok(())
}

/// `z_{b0} = 1`: every node starts with the same budget.
pub fn initial_profile(k: usize, b0: usize) -> Result<Vec<f64>> {
    if b0 > k {
        return Err(Error::Parameter(format!("b0 = {b0} exceeds K = {k}")));
    }
    let mut z = vec![0.0; k + 1];
    z[b0] = 1.0;
    Ok(z)
}

/// Gridded trajectory of `(z_0..z_K, h)`; `tau[i]` is the grid, starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub a: f64,
    pub beta: f64,
    pub k: usize,
    pub dt: f64,
    pub tau: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

impl OdeSolution {
    /// Linear interpolation of `(z, h)` at `tau`, clamped to the grid.
    pub fn at(&self, tau: f64) -> (Vec<f64>, f64) {
        let last = self.tau.len() - 1;
        if tau <= self.tau[0] {
            return (self.z[0].clone(), self.h[0]);
        }
        if tau >= self.tau[last] {
            return (self.z[last].clone(), self.h[last]);
        }
        let i = self.tau.partition_point(|&x| x <= tau) - 1;
        let w = (tau - self.tau[i]) / (self.tau[i + 1] - self.tau[i]);
        let z = self.z[i]
            .iter()
            .zip(&self.z[i + 1])
            .map(|(p, q)| p + w * (q - p))
            .collect();
        (z, self.h[i] + w * (self.h[i + 1] - self.h[i]))
    }

    pub fn h_at(&self, tau: f64) -> f64 {
        self.at(tau).1
    }

    pub fn final_z(&self) -> &[f64] {
        self.z.last().expect("non-empty grid")
    }
}

/// Classical RK4 on `(z, h)` with `ceil(tau_end/dt)` equal steps, so the grid ends at
/// `tau_end` exactly; `h' = 1 - e^{-a(1 - z_0)}`.
pub fn integrate(init: &[f64], a: f64, beta: f64, tau_end: f64, dt: f64) -> Result<OdeSolution> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    if !(tau_end >= 0.0) || !tau_end.is_finite() {
        return Err(Error::Parameter(format!("tau_end must be >= 0, got {tau_end}")));
    }
    let mass: f64 = init.iter().sum();
    if (mass - 1.0).abs() > 1e-9 || init.iter().any(|&x| x < 0.0) {
        return Err(Error::Parameter(
            "initial state must lie on the probability simplex".into(),
        ));
    }
    let steps = (tau_end / dt).ceil().max(1.0) as usize;
    let step = tau_end / steps as f64;
    let dim = init.len() + 1;

    let f = |y: &[f64], out: &mut [f64]| -> Result<()> {
        let (z, dz) = (&y[..dim - 1], &mut out[..dim - 1]);
        rhs_into(z, a, beta, dz)?;
        out[dim - 1] = -(-a * (1.0 - y[0])).exp_m1();
        Ok(())
    };

    let mut y: Vec<f64> = init.iter().copied().chain([0.0]).collect();
    let mut sol = OdeSolution {
        a,
        beta,
        k: init.len() - 1,
        dt: step,
        tau: Vec::with_capacity(steps + 1),
        z: Vec::with_capacity(steps + 1),
        h: Vec::with_capacity(steps + 1),
    };
    let push = |sol: &mut OdeSolution, tau: f64, y: &[f64]| {
        sol.tau.push(tau);
        sol.z.push(y[..dim - 1].to_vec());
        sol.h.push(y[dim - 1]);
    };
    push(&mut sol, 0.0, &y);
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    for s in 1..=steps {
        f(&y, &mut k1)?;
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * step * k1[i];
        }
        f(&tmp, &mut k2)?;
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * step * k2[i];
        }
        f(&tmp, &mut k3)?;
        for i in 0..dim {
            tmp[i] = y[i] + step * k3[i];
        }
        f(&tmp, &mut k4)?;
        for i in 0..dim {
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let tau = if s == steps { tau_end } else { s as f64 * step };
        push(&mut sol, tau, &y);
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::stationary_z0;
    use proptest::prelude::*;

    #[test]
    fn g_values() {
        assert!((g_of(0.0, 1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((g_of(1.0 - 1e-13, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(g_of(1.0, 2.0).is_err());
        // both branches agree across the switch
        let (lo, hi) = (g_of(1.0 - 0.99e-8, 2.0).unwrap(), g_of(1.0 - 1.01e-8, 2.0).unwrap());
        assert!((lo - hi).abs() < 1e-7);
        // (1 - e^{-ax})/x falls as x = 1 - z0 grows, so g rises with z0
        let vals: Vec<f64> = (0..100).map(|i| g_of(i as f64 / 100.0, 2.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn k1_row_matches_scalar_equation() {
        let (a, beta) = (2.0, 0.5);
        for z0 in [0.0, 0.2, 0.7, 0.95] {
            let r = ode_rhs(&[z0, 1.0 - z0], a, beta).unwrap();
            let want = -beta * z0 + 1.0 - (-a * (1.0 - z0)).exp();
            assert!((r[0] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn pole_and_shape_errors() {
        assert!(matches!(
            ode_rhs(&[1.0, 0.0], 1.0, 1.0),
            Err(Error::Singularity(_))
        ));
        assert!(ode_rhs(&[1.0], 1.0, 1.0).is_err());
        assert!(integrate(&[0.0, 1.0], 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn stationary_profile_is_a_fixed_point() {
        for k in [1usize, 3, 8] {
            let sp = stationary_z0(2.0, 0.5, k).unwrap();
            let r = ode_rhs(&sp.profile, 2.0, 0.5).unwrap();
            assert!(r.iter().all(|x| x.abs() < 1e-10), "K={k}: {r:?}");
        }
    }

    #[test]
    fn rk4_is_converged_at_default_step() {
        let init = initial_profile(1, 1).unwrap();
        let coarse = integrate(&init, 2.0, 0.0, 3.0, 1e-3).unwrap();
        let fine = integrate(&init, 2.0, 0.0, 3.0, 1e-4).unwrap();
        assert!((coarse.h.last().unwrap() - fine.h.last().unwrap()).abs() < 1e-10);
        assert_eq!(*coarse.tau.last().unwrap(), 3.0);
        assert!(coarse.h.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn long_run_reaches_stationary_profile() {
        let init = initial_profile(3, 1).unwrap();
        let sol = integrate(&init, 2.0, 0.5, 50.0, 1e-3).unwrap();
        let sp = stationary_z0(2.0, 0.5, 3).unwrap();
        for (x, y) in sol.final_z().iter().zip(&sp.profile) {
            assert!((x - y).abs() < 1e-3);
        }
        for z in &sol.z {
            assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(z.iter().all(|&x| (-1e-9..=1.0 + 1e-9).contains(&x)));
        }
    }

    #[test]
    fn interpolation_hits_grid_points() {
        let init = initial_profile(2, 2).unwrap();
        let sol = integrate(&init, 1.5, 0.3, 1.0, 0.1).unwrap();
        let (z, h) = sol.at(sol.tau[4]);
        assert_eq!(z, sol.z[4]);
        assert_eq!(h, sol.h[4]);
        let mid = sol.at(0.5 * (sol.tau[4] + sol.tau[5])).1;
        assert!((mid - 0.5 * (sol.h[4] + sol.h[5])).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rhs_conserves_mass(raw in prop::collection::vec(0.0f64..1.0, 2..12), a in 0.1f64..5.0, beta in 0.0f64..3.0) {
            let s: f64 = raw.iter().sum::<f64>() + 1e-9;
            let mut z: Vec<f64> = raw.iter().map(|x| x / s).collect();
            if z[0] > 0.999 { z[0] = 0.999; }
            let r = ode_rhs(&z, a, beta).unwrap();
            prop_assert!(r.iter().sum::<f64>().abs() < 1e-14);
        }
    }
}
