use serde::{Deserialize, Serialize};

use crate::budget::Cap;
use crate::error::{param, Result};
use crate::instance::{ArrivalRun, InstanceHeader, OnlineInstance, RefillSchedule};
use crate::rng::{bernoulli_indices, derive_seed, stream_rng, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErParams {
    pub n: u32,
    #[serde(rename = "T")]
    pub horizon: u64,
    /// Expected degree of an arrival; edge probability is `a / n`.
    pub a: f64,
    pub beta: f64,
    pub b0: u64,
    pub cap: Cap,
    pub seed: u64,
}

/// Each `(u, t)` edge is present independently with probability `a/n`; refills are
/// Bernoulli(`beta/n`) per node and step. Arrival `t` draws its edges from its own
/// stream, so `beta` can change without moving a single edge.
pub fn gen_erdos_renyi(p: &ErParams) -> Result<OnlineInstance> {
    if p.n == 0 {
        return Err(param("n must be positive"));
    }
    if !(p.a.is_finite() && p.a >= 0.0 && p.a <= p.n as f64) {
        return Err(param(format!("need 0 <= a <= n, got a = {}", p.a)));
    }
    if !(p.beta.is_finite() && p.beta >= 0.0 && p.beta <= p.n as f64) {
        return Err(param(format!("need 0 <= beta <= n, got beta = {}", p.beta)));
    }
    let header = InstanceHeader {
        n: p.n,
        horizon: p.horizon,
        b0: p.b0,
        cap: p.cap,
        refills: RefillSchedule::Bernoulli {
            beta: p.beta,
            seed: derive_seed(p.seed, Stream::Refills, 0),
        },
    };
    let prob = p.a / p.n as f64;
    let mut runs = Vec::with_capacity(p.horizon as usize);
    let mut buf = Vec::new();
    for t in 1..=p.horizon {
        buf.clear();
        let mut rng = stream_rng(p.seed, Stream::Edges, t);
        bernoulli_indices(p.n, prob, &mut rng, &mut buf);
        runs.push(ArrivalRun {
            len: 1,
            nodes: buf.as_slice().into(),
        });
    }
    OnlineInstance::from_runs(header, runs)
}
