//! Browser bindings: fluid-limit trajectories, stationary profiles and small
//! Greedy/Balance simulations, all returned as JSON strings.

use refill_match::analysis::{initial_profile, integrate, stationary_z0};
use refill_match::generators::{gen_erdos_renyi, ErParams};
use refill_match::offline_opt::opt_maxflow;
use refill_match::{run_online, Cap, PolicyKind, RunOptions};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Keeps the page responsive: simulations above this many arrivals are refused.
const MAX_ARRIVALS: u64 = 2_000_000;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `{tau: [...], h: [...], z: [[z_0..z_K], ...]}` sampled at about `points` grid nodes.
#[wasm_bindgen]
pub fn ode_trajectory(k: usize, b0: usize, a: f64, beta: f64, tau_end: f64, points: usize) -> Result<String, JsError> {
    let sol = integrate(&initial_profile(k, b0).map_err(js_err)?, a, beta, tau_end, 1e-3).map_err(js_err)?;
    let step = (sol.tau.len() / points.max(2)).max(1);
    let idx: Vec<usize> = (0..sol.tau.len()).step_by(step).chain([sol.tau.len() - 1]).collect();
    Ok(json!({
        "tau": idx.iter().map(|&i| sol.tau[i]).collect::<Vec<_>>(),
        "h": idx.iter().map(|&i| sol.h[i]).collect::<Vec<_>>(),
        "z": idx.iter().map(|&i| &sol.z[i]).collect::<Vec<_>>(),
    })
    .to_string())
}

/// The stationary point as JSON.
#[wasm_bindgen]
pub fn stationary_profile(a: f64, beta: f64, k: usize) -> Result<String, JsError> {
    serde_json::to_string(&stationary_z0(a, beta, k).map_err(js_err)?).map_err(js_err)
}

/// Greedy and Balance on one Erdős–Rényi instance, with the exact optimum when the
/// instance is small enough and the fluid-limit prediction `n h(T/n)`.
#[wasm_bindgen]
pub fn simulate(n: u32, horizon: u64, a: f64, beta: f64, k: u64, seed: u64) -> Result<String, JsError> {
    if horizon > MAX_ARRIVALS {
        return Err(JsError::new(&format!("T is limited to {MAX_ARRIVALS} in the browser")));
    }
    let inst = gen_erdos_renyi(&ErParams {
        n,
        horizon,
        a,
        beta,
        b0: 1,
        cap: Cap::Bounded(k),
        seed,
    })
    .map_err(js_err)?;
    let stride = (horizon / 200).max(1);
    let mut out = json!({ "n": n, "T": horizon });
    for kind in [PolicyKind::Greedy, PolicyKind::Balance] {
        let trace = run_online(&inst, kind.build().as_ref(), seed, &RunOptions::sampled(stride)).map_err(js_err)?;
        let curve: Vec<(u64, u64)> = (0..horizon)
            .step_by(stride as usize)
            .map(|i| (i + 1, trace.size_over_time[i as usize]))
            .collect();
        out[kind.as_str()] = json!({ "size": trace.size(), "curve": curve });
    }
    let tau = horizon as f64 / n as f64;
    let sol = integrate(&initial_profile(k as usize, 1).map_err(js_err)?, a, beta, tau.max(1e-3), 1e-3).map_err(js_err)?;
    out["fluid"] = json!(sol.h_at(tau) * n as f64);
    if horizon <= 50_000 {
        out["opt"] = json!(opt_maxflow(&inst).map_err(js_err)?.value);
    }
    Ok(out.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outputs_are_json() {
        let v: serde_json::Value = serde_json::from_str(&ode_trajectory(2, 1, 2.0, 0.5, 1.0, 50).unwrap()).unwrap();
        assert_eq!(v["tau"].as_array().unwrap().last().unwrap().as_f64(), Some(1.0));
        let s: serde_json::Value = serde_json::from_str(&stationary_profile(2.0, 0.5, 3).unwrap()).unwrap();
        assert_eq!(s["profile"].as_array().unwrap().len(), 4);
        let r: serde_json::Value = serde_json::from_str(&simulate(200, 400, 2.0, 0.5, 2, 1).unwrap()).unwrap();
        let opt = r["opt"].as_u64().unwrap();
        assert!(r["greedy"]["size"].as_u64().unwrap() <= opt);
        assert!(r["balance"]["size"].as_u64().unwrap() <= opt);
    }
}
