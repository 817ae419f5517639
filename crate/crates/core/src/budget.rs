use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ceiling on stored budget. Refills that would exceed it are lost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CapRepr", into = "CapRepr")]
pub enum Cap {
    Bounded(u64),
    Unbounded,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CapRepr {
    Num(u64),
    Word(String),
}

impl TryFrom<CapRepr> for Cap {
    type Error = String;

    fn try_from(r: CapRepr) -> std::result::Result<Self, Self::Error> {
        match r {
            CapRepr::Num(0) => Err("cap must be positive".into()),
            CapRepr::Num(k) => Ok(Cap::Bounded(k)),
            CapRepr::Word(w) => w.parse(),
        }
    }
}

impl From<Cap> for CapRepr {
    fn from(c: Cap) -> Self {
        match c {
            Cap::Bounded(k) => CapRepr::Num(k),
            Cap::Unbounded => CapRepr::Word("unbounded".into()),
        }
    }
}

impl FromStr for Cap {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "unbounded" | "inf" | "none" => Ok(Cap::Unbounded),
            _ => match s.parse::<u64>() {
                Ok(0) => Err("cap must be positive".into()),
                Ok(k) => Ok(Cap::Bounded(k)),
                Err(_) => Err(format!("invalid cap '{s}'")),
            },
        }
    }
}

impl fmt::Display for Cap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cap::Bounded(k) => write!(f, "{k}"),
            Cap::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl Cap {
    #[inline]
    pub fn apply(self, b: u64) -> u64 {
        match self {
            Cap::Bounded(k) => b.min(k),
            Cap::Unbounded => b,
        }
    }

    pub fn bound(self) -> Option<u64> {
        match self {
            Cap::Bounded(k) => Some(k),
            Cap::Unbounded => None,
        }
    }
}

/// One step of the budget law: `min(cap, b_prev - matched + refill)`.
///
/// Matching a node with zero budget is a contract error, never clamped.
pub fn step_budget(b_prev: u64, matched: bool, refill: u64, cap: Cap) -> Result<u64> {
    if matched && b_prev == 0 {
        return Err(Error::Contract(
            "matched a node whose budget is zero".into(),
        ));
    }
    Ok(cap.apply(b_prev - matched as u64 + refill))
}

/// Budgets of all offline nodes plus the histogram `Y_k` of nodes holding exactly `k`.
#[derive(Clone, Debug)]
pub struct BudgetState {
    budgets: Vec<u64>,
    histogram: Vec<u64>,
    cap: Cap,
}

impl BudgetState {
    pub fn new(n: u32, b0: u64, cap: Cap) -> Self {
        let width = match cap {
            Cap::Bounded(k) => k as usize + 1,
            Cap::Unbounded => b0 as usize + 1,
        };
        let mut histogram = vec![0; width.max(b0 as usize + 1)];
        histogram[b0 as usize] = n as u64;
        Self {
            budgets: vec![b0; n as usize],
            histogram,
            cap,
        }
    }

    pub fn from_budgets(budgets: Vec<u64>, cap: Cap) -> Self {
        let mut state = Self {
            budgets,
            histogram: Vec::new(),
            cap,
        };
        state.histogram = budget_histogram(&state);
        state
    }

    #[inline]
    pub fn budgets(&self) -> &[u64] {
        &self.budgets
    }

    #[inline]
    pub fn get(&self, u: u32) -> u64 {
        self.budgets[u as usize]
    }

    pub fn n(&self) -> u32 {
        self.budgets.len() as u32
    }

    pub fn cap(&self) -> Cap {
        self.cap
    }

    /// Incrementally maintained histogram; trailing zero buckets may be present when
    /// the cap is unbounded.
    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    /// Apply `step_budget` to node `u`.
    pub fn step(&mut self, u: u32, matched: bool, refill: u64) -> Result<()> {
        let old = self.budgets[u as usize];
        let new = step_budget(old, matched, refill, self.cap)?;
        if new != old {
            self.move_bucket(old, new);
            self.budgets[u as usize] = new;
        }
        Ok(())
    }

    fn move_bucket(&mut self, old: u64, new: u64) {
        self.histogram[old as usize] -= 1;
        if new as usize >= self.histogram.len() {
            self.histogram.resize(new as usize + 1, 0);
        }
        self.histogram[new as usize] += 1;
    }

    pub fn total(&self) -> u64 {
        self.budgets.iter().sum()
    }

    pub fn into_budgets(self) -> Vec<u64> {
        self.budgets
    }
}

/// Counts `Y_0..Y_K` by direct scan. With a finite cap the result has `cap + 1`
/// entries; otherwise it ends at the largest budget present.
pub fn budget_histogram(state: &BudgetState) -> Vec<u64> {
    let max = state.budgets.iter().copied().max().unwrap_or(0);
    let width = match state.cap {
        Cap::Bounded(k) => k.max(max),
        Cap::Unbounded => max,
    } as usize
        + 1;
    let mut h = vec![0u64; width];
    for &b in &state.budgets {
        h[b as usize] += 1;
    }
    h
}
