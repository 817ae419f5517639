use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_adaptive, RunOptions};
use crate::error::{Error, Result};
use crate::generators::{gen_theorem2, Theorem2Params};
use crate::policies::PolicyKind;
use crate::rng::{derive_seed, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceEntry {
    pub policy: PolicyKind,
    /// `(seed, ALG)` per run against the policy's own adversary.
    pub runs: Vec<(u64, u64)>,
    pub mean: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub b0: u64,
    pub m: u64,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub balance: u64,
    /// `Balance + m^2`.
    pub limit: u64,
    pub entries: Vec<DominanceEntry>,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }

    /// `Err(Assertion)` listing every offending run.
    pub fn ensure(&self) -> Result<()> {
        let bad: Vec<String> = self
            .entries
            .iter()
            .filter(|e| !e.holds)
            .map(|e| format!("{} mean {} runs {:?}", e.policy, e.mean, e.runs))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Assertion(format!(
                "ALG > Balance + m^2 = {} for: {}",
                self.limit,
                bad.join("; ")
            )))
        }
    }
}

fn run_once(b0: u64, m: u64, horizon: u64, policy: PolicyKind, seed: u64) -> Result<u64> {
    let mut adv = gen_theorem2(&Theorem2Params {
        b0,
        m,
        horizon,
        t0: None,
        seed,
    })?;
    let (trace, _) = run_adaptive(&mut adv, policy.build().as_ref(), seed, &RunOptions::default())?;
    Ok(trace.size())
}

/// Run Balance and each policy against its own phased-elimination adversary and test
/// `ALG <= Balance + m^2`. Randomized policies are run `seeds` times and judged on the
/// mean; deterministic ones once.
pub fn dominance_check(
    b0: u64,
    m: u64,
    horizon: u64,
    policies: &[PolicyKind],
    seeds: usize,
    master: u64,
) -> Result<DominanceReport> {
    let balance = run_once(b0, m, horizon, PolicyKind::Balance, master)?;
    let limit = balance + m * m;
    let entries = policies
        .iter()
        .map(|&policy| {
            let count = if policy == PolicyKind::Uniform { seeds.max(1) } else { 1 };
            let runs = (0..count)
                .into_par_iter()
                .map(|i| {
                    let seed = derive_seed(master, Stream::Replicate, i as u64);
                    run_once(b0, m, horizon, policy, seed).map(|s| (seed, s))
                })
                .collect::<Result<Vec<_>>>()?;
            let mean = runs.iter().map(|r| r.1 as f64).sum::<f64>() / runs.len() as f64;
            Ok(DominanceEntry {
                policy,
                runs,
                mean,
                holds: mean <= limit as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DominanceReport {
        b0,
        m,
        horizon,
        balance,
        limit,
        entries,
    })
}
