use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::{BudgetState, Cap};
use crate::error::{Error, Result};
use crate::instance::{AdaptiveInstance, InstanceHeader, NodeSet, RefillSchedule};
use crate::rng::{stream_rng, Stream};

/// Phase ends `t_1..t_count` of the elimination graph and their real approximations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub t0: u64,
    pub times: Vec<u64>,
    pub approx: Vec<f64>,
}

/// `t_{i+1} = b0 - 1 + t_i + ceil((b0 + t_i)/(m - 1))`, alongside
/// `t̃_i = (1 + 1/(m-1))^i (t0 + m b0 - m + 1) - m b0 + m - 1`.
pub fn phase_times(b0: u64, m: u64, t0: u64, count: usize) -> Result<PhaseSchedule> {
    if m < 2 {
        return Err(Error::Parameter(format!("phase times need m >= 2, got {m}")));
    }
    if t0 == 0 {
        return Err(Error::Parameter("t0 must be positive".into()));
    }
    if count as u64 > m - 1 {
        return Err(Error::Parameter(format!(
            "at most m-1 = {} phases, asked for {count}",
            m - 1
        )));
    }
    let mut times = Vec::with_capacity(count);
    let mut approx = Vec::with_capacity(count);
    let ratio = 1.0 + 1.0 / (m - 1) as f64;
    let base = t0 as f64 + (m * b0) as f64 - m as f64 + 1.0;
    let shift = (m * b0) as f64 - m as f64 + 1.0;
    let mut t = t0;
    for i in 1..=count {
        t = b0 - 1 + t + (b0 + t).div_ceil(m - 1);
        times.push(t);
        approx.push(ratio.powi(i as i32) * base - shift);
    }
    Ok(PhaseSchedule { t0, times, approx })
}

/// `t0 = floor(T / e)`.
pub fn default_t0(horizon: u64) -> u64 {
    (horizon as f64 / std::f64::consts::E).floor() as u64
}

/// `n = m - 1 + max(ceil(t0/(b0+q)), ceil(m q/(b0+q-1)))` with `q = floor(t0/m)`.
pub fn theorem2_server_count(b0: u64, m: u64, t0: u64) -> Result<u64> {
    let q = t0 / m;
    if q == 0 || b0 == 0 {
        return Err(Error::Parameter(format!(
            "need b0 >= 1 and t0 >= m, got b0 = {b0}, t0 = {t0}, m = {m}"
        )));
    }
    Ok(m - 1 + t0.div_ceil(b0 + q).max((m * q).div_ceil(b0 + q - 1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem2Params {
    pub b0: u64,
    pub m: u64,
    #[serde(rename = "T")]
    pub horizon: u64,
    /// Defaults to `floor(T / e)`.
    #[serde(default)]
    pub t0: Option<u64>,
    /// Seed of the adversary's own tie-breaking stream.
    #[serde(default)]
    pub seed: u64,
}

/// Phased elimination adversary. Arrivals `1..=t0` see every server; at `t0` it keeps
/// the `m-1` servers holding the least budget; at each `t_i` it drops the one holding
/// the most. After `t_{m-2}` a single server remains and receives every arrival.
#[derive(Debug)]
pub struct Theorem2Adversary {
    header: InstanceHeader,
    schedule: PhaseSchedule,
    all: NodeSet,
    retained: Vec<u32>,
    current: NodeSet,
    /// Number of removals performed so far (phase index minus one).
    removed: usize,
    rng: ChaCha8Rng,
}

pub fn gen_theorem2(p: &Theorem2Params) -> Result<Theorem2Adversary> {
    let Theorem2Params {
        b0,
        m,
        horizon,
        t0,
        seed,
    } = *p;
    if m < 2 {
        return Err(Error::Parameter(format!("need m >= 2, got {m}")));
    }
    let t0 = t0.unwrap_or_else(|| default_t0(horizon));
    if t0 < m || t0 > horizon {
        return Err(Error::Parameter(format!(
            "need m <= t0 <= T, got m = {m}, t0 = {t0}, T = {horizon}"
        )));
    }
    let n = theorem2_server_count(b0, m, t0)?;
    let n = u32::try_from(n).map_err(|_| Error::SizeLimit(format!("{n} servers")))?;
    let schedule = phase_times(b0, m, t0, (m - 1) as usize)?;
    let all: NodeSet = (0..n).collect::<Vec<_>>().into();
    Ok(Theorem2Adversary {
        header: InstanceHeader {
            n,
            horizon,
            b0,
            cap: Cap::Unbounded,
            refills: RefillSchedule::Periodic { m },
        },
        schedule,
        current: all.clone(),
        all,
        retained: Vec::new(),
        removed: 0,
        rng: stream_rng(seed, Stream::Adversary, 0),
    })
}

impl Theorem2Adversary {
    pub fn schedule(&self) -> &PhaseSchedule {
        &self.schedule
    }

    /// Servers currently receiving arrivals.
    pub fn active(&self) -> &[u32] {
        &self.current
    }

    fn retain_lowest(&mut self, budgets: &[u64]) {
        let keep = self.schedule.times.len().min(budgets.len());
        let mut order: Vec<u32> = self.all.to_vec();
        order.shuffle(&mut self.rng);
        order.sort_by_key(|&u| budgets[u as usize]);
        order.truncate(keep);
        order.sort_unstable();
        self.retained = order;
        self.current = Arc::from(self.retained.as_slice());
    }

    fn drop_highest(&mut self, budgets: &[u64]) {
        if self.retained.len() <= 1 {
            return;
        }
        let (pos, _) = self
            .retained
            .iter()
            .enumerate()
            .max_by_key(|&(i, &u)| (budgets[u as usize], std::cmp::Reverse(i)))
            .expect("non-empty");
        self.retained.remove(pos);
        self.current = Arc::from(self.retained.as_slice());
    }
}

impl AdaptiveInstance for Theorem2Adversary {
    fn header(&self) -> &InstanceHeader {
        &self.header
    }

    fn reveal(&mut self, t: u64, state: &BudgetState) -> NodeSet {
        if t == self.schedule.t0 + 1 {
            self.retain_lowest(state.budgets());
        }
        // Removals happen at t_1..t_{m-2}; the last phase keeps its single server.
        while self.removed + 1 < self.schedule.times.len()
            && t == self.schedule.times[self.removed] + 1
        {
            self.drop_highest(state.budgets());
            self.removed += 1;
        }
        self.current.clone()
    }

    fn observe(&mut self, _t: u64, _choice: Option<u32>) {}
}
