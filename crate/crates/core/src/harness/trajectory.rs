use serde::{Deserialize, Serialize};

use crate::analysis::{wormald_bound, OdeSolution};
use crate::error::{Error, Result};
use crate::trace::MatchTrace;

/// `eps` used when evaluating the deviation bound.
pub const WORMALD_EPS: f64 = 0.1;

/// Sup-norm distance between a sampled run and the fluid limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDeviation {
    /// `max_t |ALG(t)/n - h(t/n)|` over every step.
    pub size_sup: f64,
    /// `max_t |Y_k(t)/n - z_k(t/n)|` over the sampled steps, per level `k`.
    pub level_sup: Vec<f64>,
    /// `wormald_bound(n, T, a, WORMALD_EPS) / n`.
    pub bound: f64,
    pub violated: bool,
}

/// One sampled point of a run next to the ODE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: u64,
    pub tau: f64,
    pub size_over_n: f64,
    pub h_tau: f64,
    pub y_over_n: Vec<f64>,
    pub z: Vec<f64>,
}

fn check_grid(trace: &MatchTrace, ode: &OdeSolution) -> Result<usize> {
    let n = trace.final_budgets.len();
    if n == 0 {
        return Err(Error::Parameter("trace has no offline nodes".into()));
    }
    if trace.yk_trajectory.is_empty() {
        return Err(Error::Parameter("trace carries no sampled histograms".into()));
    }
    if let Some(s) = trace.yk_trajectory.iter().find(|s| s.y.len() != ode.k + 1) {
        return Err(Error::Parameter(format!(
            "histogram at t={} has {} levels, ODE has {}",
            s.t,
            s.y.len(),
            ode.k + 1
        )));
    }
    let tau_end = trace.horizon() as f64 / n as f64;
    let last = *ode.tau.last().expect("non-empty grid");
    if tau_end > last * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "run reaches tau = {tau_end} but the ODE grid stops at {last}"
        )));
    }
    Ok(n)
}

/// Compare a sampled run with the ODE solution, interpolating the ODE linearly in `tau`.
pub fn compare_trajectory(trace: &MatchTrace, ode: &OdeSolution) -> Result<TrajectoryDeviation> {
    let n = check_grid(trace, ode)?;
    let nf = n as f64;
    let size_sup = trace
        .size_over_time
        .iter()
        .enumerate()
        .map(|(i, &s)| (s as f64 / nf - ode.h_at((i + 1) as f64 / nf)).abs())
        .fold(0.0, f64::max);
    let mut level_sup = vec![0.0f64; ode.k + 1];
    for s in &trace.yk_trajectory {
        let (z, _) = ode.at(s.t as f64 / nf);
        for (k, (&y, zk)) in s.y.iter().zip(z).enumerate() {
            level_sup[k] = level_sup[k].max((y as f64 / nf - zk).abs());
        }
    }
    let bound = wormald_bound(nf, trace.horizon() as f64, ode.a, WORMALD_EPS) / nf;
    Ok(TrajectoryDeviation {
        size_sup,
        level_sup,
        bound,
        violated: size_sup > bound,
    })
}

/// The sampled points of `trace` side by side with the ODE.
pub fn trajectory_rows(trace: &MatchTrace, ode: &OdeSolution) -> Result<Vec<TrajectoryRow>> {
    let nf = check_grid(trace, ode)? as f64;
    Ok(trace
        .yk_trajectory
        .iter()
        .map(|s| {
            let tau = s.t as f64 / nf;
            let (z, h_tau) = ode.at(tau);
            let size = if s.t == 0 {
                0
            } else {
                trace.size_over_time[(s.t - 1) as usize]
            };
            TrajectoryRow {
                t: s.t,
                tau,
                size_over_n: size as f64 / nf,
                h_tau,
                y_over_n: s.y.iter().map(|&y| y as f64 / nf).collect(),
                z,
            }
        })
        .collect())
}
