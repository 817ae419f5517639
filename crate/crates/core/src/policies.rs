//! Online decision rules.
//!
//! A policy sees the revealed neighbor set, a read-only view of current budgets and
//! its own random stream, and returns a node or `None` (pass).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

/// Read-only budget lookup.
pub trait BudgetView {
    fn budget(&self, u: u32) -> u64;
}

impl BudgetView for [u64] {
    #[inline]
    fn budget(&self, u: u32) -> u64 {
        self[u as usize]
    }
}

impl BudgetView for &[u64] {
    #[inline]
    fn budget(&self, u: u32) -> u64 {
        self[u as usize]
    }
}

impl BudgetView for crate::budget::BudgetState {
    #[inline]
    fn budget(&self, u: u32) -> u64 {
        self.get(u)
    }
}

impl BudgetView for Vec<u64> {
    #[inline]
    fn budget(&self, u: u32) -> u64 {
        self[u as usize]
    }
}

pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    /// Decide for arrival `t`. Greedy and Balance pass only when no neighbor has budget.
    fn decide(
        &self,
        t: u64,
        neighbors: &[u32],
        budgets: &dyn BudgetView,
        rng: &mut dyn RngCore,
    ) -> Option<u32>;
}

/// Uniformly random available neighbor.
#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy;

/// Highest remaining budget among available neighbors.
#[derive(Clone, Copy, Debug, Default)]
pub struct Balance {
    /// Break ties by lowest index instead of uniformly at random.
    pub lowest_index_ties: bool,
}

/// Never matches.
#[derive(Clone, Copy, Debug, Default)]
pub struct Lazy;

/// Picks a uniformly random neighbor regardless of budget and passes if it is empty.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformNeighbor;

/// Replays a fixed list of decisions, one per arrival.
#[derive(Clone, Debug, Default)]
pub struct FixedScript {
    pub choices: Vec<Option<u32>>,
}

pub fn greedy_decide(
    neighbors: &[u32],
    budgets: &dyn BudgetView,
    rng: &mut dyn RngCore,
) -> Option<u32> {
    // Reservoir sampling over available neighbors keeps this allocation-free.
    let mut seen = 0u32;
    let mut pick = None;
    for &u in neighbors {
        if budgets.budget(u) >= 1 {
            seen += 1;
            if seen == 1 || rng.random_range(0..seen) == 0 {
                pick = Some(u);
            }
        }
    }
    pick
}

pub fn balance_decide(
    neighbors: &[u32],
    budgets: &dyn BudgetView,
    rng: &mut dyn RngCore,
) -> Option<u32> {
    let mut best = 0u64;
    let mut ties = 0u32;
    let mut pick = None;
    for &u in neighbors {
        let b = budgets.budget(u);
        if b == 0 || b < best {
            continue;
        }
        if b > best {
            best = b;
            ties = 1;
            pick = Some(u);
        } else {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                pick = Some(u);
            }
        }
    }
    pick
}

fn balance_lowest_index(neighbors: &[u32], budgets: &dyn BudgetView) -> Option<u32> {
    let mut best = 0u64;
    let mut pick = None;
    for &u in neighbors {
        let b = budgets.budget(u);
        if b > best {
            best = b;
            pick = Some(u);
        }
    }
    pick
}

impl Policy for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn decide(&self, _t: u64, nb: &[u32], b: &dyn BudgetView, rng: &mut dyn RngCore) -> Option<u32> {
        greedy_decide(nb, b, rng)
    }
}

impl Policy for Balance {
    fn name(&self) -> &str {
        if self.lowest_index_ties {
            "balance-lowest"
        } else {
            "balance"
        }
    }

    fn decide(&self, _t: u64, nb: &[u32], b: &dyn BudgetView, rng: &mut dyn RngCore) -> Option<u32> {
        if self.lowest_index_ties {
            balance_lowest_index(nb, b)
        } else {
            balance_decide(nb, b, rng)
        }
    }
}

impl Policy for Lazy {
    fn name(&self) -> &str {
        "lazy"
    }

    fn decide(&self, _: u64, _: &[u32], _: &dyn BudgetView, _: &mut dyn RngCore) -> Option<u32> {
        None
    }
}

impl Policy for UniformNeighbor {
    fn name(&self) -> &str {
        "uniform"
    }

    fn decide(&self, _t: u64, nb: &[u32], b: &dyn BudgetView, rng: &mut dyn RngCore) -> Option<u32> {
        if nb.is_empty() {
            return None;
        }
        let u = nb[rng.random_range(0..nb.len())];
        (b.budget(u) >= 1).then_some(u)
    }
}

impl Policy for FixedScript {
    fn name(&self) -> &str {
        "fixed-script"
    }

    fn decide(&self, t: u64, _: &[u32], _: &dyn BudgetView, _: &mut dyn RngCore) -> Option<u32> {
        self.choices.get((t - 1) as usize).copied().flatten()
    }
}

/// Policy selected by name in configs and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Greedy,
    Balance,
    BalanceLowest,
    Lazy,
    Uniform,
}

impl PolicyKind {
    pub fn build(self) -> Box<dyn Policy> {
        match self {
            PolicyKind::Greedy => Box::new(Greedy),
            PolicyKind::Balance => Box::new(Balance::default()),
            PolicyKind::BalanceLowest => Box::new(Balance {
                lowest_index_ties: true,
            }),
            PolicyKind::Lazy => Box::new(Lazy),
            PolicyKind::Uniform => Box::new(UniformNeighbor),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::Balance => "balance",
            PolicyKind::BalanceLowest => "balance-lowest",
            PolicyKind::Lazy => "lazy",
            PolicyKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "greedy" => PolicyKind::Greedy,
            "balance" => PolicyKind::Balance,
            "balance-lowest" => PolicyKind::BalanceLowest,
            "lazy" => PolicyKind::Lazy,
            "uniform" | "randomized-uniform" => PolicyKind::Uniform,
            other => {
                return Err(format!(
                    "unknown policy '{other}' (expected greedy|balance|balance-lowest|lazy|uniform|fixed-script)"
                ))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use proptest::prelude::*;

    #[test]
    fn greedy_passes_without_budget() {
        let mut rng = stream_rng(0, Stream::Policy, 0);
        let b = vec![0u64; 4];
        assert_eq!(greedy_decide(&[1, 2, 3], &b, &mut rng), None);
        let b = vec![0, 0, 0, 0, 2];
        assert_eq!(greedy_decide(&[4], &b, &mut rng), Some(4));
    }

    #[test]
    fn greedy_is_uniform_over_available() {
        let mut rng = stream_rng(42, Stream::Policy, 0);
        let b = vec![1u64, 1, 0];
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| greedy_decide(&[0, 1, 2], &b, &mut rng) == Some(0))
            .count();
        let freq = ones as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn balance_strict_argmax() {
        let mut rng = stream_rng(0, Stream::Policy, 0);
        let b = vec![0u64, 3, 1];
        assert_eq!(balance_decide(&[1, 2], &b, &mut rng), Some(1));
        assert_eq!(balance_decide(&[0], &b, &mut rng), None);
    }

    #[test]
    fn balance_ties_are_uniform() {
        let mut rng = stream_rng(5, Stream::Policy, 0);
        let b = vec![2u64; 3];
        let mut counts = [0usize; 3];
        let draws = 60_000;
        for _ in 0..draws {
            counts[balance_decide(&[0, 1, 2], &b, &mut rng).unwrap() as usize] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.01, "freq {f}");
        }
    }

    #[test]
    fn lowest_index_mode_is_deterministic() {
        let mut rng = stream_rng(5, Stream::Policy, 0);
        let p = Balance {
            lowest_index_ties: true,
        };
        let b = vec![2u64, 2, 2];
        for _ in 0..10 {
            assert_eq!(p.decide(1, &[0, 1, 2], &b, &mut rng), Some(0));
        }
    }

    #[test]
    fn names_round_trip() {
        for k in [
            PolicyKind::Greedy,
            PolicyKind::Balance,
            PolicyKind::BalanceLowest,
            PolicyKind::Lazy,
            PolicyKind::Uniform,
        ] {
            assert_eq!(k.as_str().parse::<PolicyKind>().unwrap(), k);
            assert_eq!(k.build().name(), k.as_str());
        }
        assert!("ranking".parse::<PolicyKind>().is_err());
    }

    struct Scaled<'a>(&'a [u64], u64);

    impl BudgetView for Scaled<'_> {
        fn budget(&self, u: u32) -> u64 {
            self.0[u as usize] * self.1
        }
    }

    proptest! {
        #[test]
        fn balance_argmax_invariant_under_scaling(
            budgets in prop::collection::vec(0u64..6, 1..12),
            c in 1u64..50,
        ) {
            let n = budgets.len() as u32;
            let nb: Vec<u32> = (0..n).collect();
            let p = Balance { lowest_index_ties: true };
            let mut rng = stream_rng(0, Stream::Policy, 0);
            let plain = p.decide(1, &nb, &budgets, &mut rng);
            let scaled = p.decide(1, &nb, &Scaled(&budgets, c), &mut rng);
            prop_assert_eq!(plain, scaled);
        }

        #[test]
        fn decisions_are_feasible(
            budgets in prop::collection::vec(0u64..3, 1..12),
            seed in any::<u64>(),
        ) {
            let n = budgets.len() as u32;
            let nb: Vec<u32> = (0..n).filter(|u| u % 2 == 0).collect();
            let mut rng = stream_rng(seed, Stream::Policy, 0);
            for kind in [PolicyKind::Greedy, PolicyKind::Balance, PolicyKind::Uniform] {
                let p = kind.build();
                match p.decide(1, &nb, &budgets, &mut rng) {
                    Some(u) => {
                        prop_assert!(nb.contains(&u));
                        prop_assert!(budgets[u as usize] >= 1);
                    }
                    None if kind != PolicyKind::Uniform => {
                        prop_assert!(nb.iter().all(|&u| budgets[u as usize] == 0));
                    }
                    None => {}
                }
            }
        }
    }
}
