use std::sync::Arc;

use crate::budget::{BudgetState, Cap};
use crate::error::{Error, Result};
use crate::instance::{AdaptiveInstance, InstanceHeader, NodeSet, RefillSchedule};

/// Largest block we are willing to build (`k * b0` arrivals).
const MAX_BLOCK_ARRIVALS: u64 = 50_000_000;

/// Shape of one Kalyanasundaram–Pruhs block: `k = (b0+1)^b0` servers, `k*b0` arrivals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KpParams {
    pub b0: u64,
    pub k: u64,
    pub v_count: u64,
}

impl KpParams {
    pub fn new(b0: u64) -> Result<Self> {
        if b0 == 0 {
            return Err(Error::Parameter("b0 must be at least 1".into()));
        }
        let k = u32::try_from(b0 + 1)
            .ok()
            .and_then(|base| (base as u64).checked_pow(u32::try_from(b0).ok()?))
            .filter(|&k| k.saturating_mul(b0) <= MAX_BLOCK_ARRIVALS)
            .ok_or_else(|| Error::SizeLimit(format!("KP block for b0={b0} is too large")))?;
        Ok(Self {
            b0,
            k,
            v_count: k * b0,
        })
    }

    /// Arrivals per phase: `r_1..r_{b0}` followed by the final `b0^{b0+1}` stretch.
    pub fn phase_lengths(&self) -> Vec<u64> {
        let mut alive = self.k;
        let mut out = Vec::with_capacity(self.b0 as usize + 1);
        for _ in 0..self.b0 {
            alive = alive / (self.b0 + 1) * self.b0;
            out.push(alive);
        }
        out.push(self.b0.pow(self.b0 as u32 + 1));
        out
    }

    /// Matches Balance obtains on one block.
    pub fn alg_value(&self) -> u64 {
        self.v_count - self.b0.pow(self.b0 as u32 + 1)
    }

    /// Offline optimum of one block: every server spends its whole budget.
    pub fn opt_value(&self) -> u64 {
        self.v_count
    }
}

/// One block on servers `offset..offset+k`, whose first arrival is `start`.
///
/// The adversary tracks each server's spend through `observe` instead of reading the
/// engine's budgets, so periodic refills outside the block never leak into it.
#[derive(Debug)]
pub(crate) struct KpBlock {
    b0: u64,
    offset: u32,
    start: u64,
    /// Relative index (1-based) of the last arrival of each phase.
    ends: Vec<u64>,
    phase: usize,
    alive: Vec<u32>,
    current: NodeSet,
    spent: Vec<u64>,
}

impl KpBlock {
    pub(crate) fn new(p: &KpParams, offset: u32, start: u64) -> Self {
        let ends = p
            .phase_lengths()
            .iter()
            .scan(0, |acc, &len| {
                *acc += len;
                Some(*acc)
            })
            .collect();
        let alive: Vec<u32> = (offset..offset + p.k as u32).collect();
        Self {
            b0: p.b0,
            offset,
            start,
            ends,
            phase: 0,
            current: alive.as_slice().into(),
            alive,
            spent: vec![0; p.k as usize],
        }
    }

    pub(crate) fn end(&self) -> u64 {
        self.start + self.ends.last().copied().unwrap_or(0) - 1
    }

    pub(crate) fn reveal(&mut self, t: u64) -> NodeSet {
        let rel = t - self.start + 1;
        while rel > self.ends[self.phase] {
            self.phase += 1;
            self.shrink();
        }
        self.current.clone()
    }

    /// Drop the `|A|/(b0+1)` alive servers with the most remaining budget, lowest index
    /// first among equals.
    fn shrink(&mut self) {
        let drop = self.alive.len() / (self.b0 as usize + 1);
        let b0 = self.b0;
        let offset = self.offset;
        let spent = &self.spent;
        self.alive
            .sort_by_key(|&u| (std::cmp::Reverse(b0 - spent[(u - offset) as usize]), u));
        self.alive.drain(..drop);
        self.alive.sort_unstable();
        self.current = Arc::from(self.alive.as_slice());
    }

    pub(crate) fn observe(&mut self, choice: Option<u32>) {
        if let Some(u) = choice {
            if let Some(s) = u
                .checked_sub(self.offset)
                .and_then(|i| self.spent.get_mut(i as usize))
            {
                *s += 1;
            }
        }
    }

    /// Lowest-index server that spent its whole initial budget inside the block.
    pub(crate) fn first_depleted(&self) -> Option<u32> {
        self.spent
            .iter()
            .position(|&s| s >= self.b0)
            .map(|i| self.offset + i as u32)
    }
}

/// Standalone block: no refills, horizon `k * b0`.
#[derive(Debug)]
pub struct KpAdversary {
    header: InstanceHeader,
    params: KpParams,
    block: KpBlock,
}

pub fn kp_adversary(b0: u64) -> Result<KpAdversary> {
    let params = KpParams::new(b0)?;
    let header = InstanceHeader {
        n: u32::try_from(params.k).map_err(|_| Error::SizeLimit("too many servers".into()))?,
        horizon: params.v_count,
        b0,
        cap: Cap::Unbounded,
        refills: RefillSchedule::None,
    };
    let block = KpBlock::new(&params, 0, 1);
    Ok(KpAdversary {
        header,
        params,
        block,
    })
}

impl KpAdversary {
    pub fn params(&self) -> &KpParams {
        &self.params
    }
}

impl AdaptiveInstance for KpAdversary {
    fn header(&self) -> &InstanceHeader {
        &self.header
    }

    fn reveal(&mut self, t: u64, _state: &BudgetState) -> NodeSet {
        self.block.reveal(t)
    }

    fn observe(&mut self, _t: u64, choice: Option<u32>) {
        self.block.observe(choice);
    }
}
