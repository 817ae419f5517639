//! Offline optimum.
//!
//! [`opt_maxflow`] solves a time-expanded flow network, compressed in two ways:
//!
//! * a *segment* is a stretch of consecutive arrivals with one neighbor set and no refill
//!   of any of those neighbors strictly inside it. Budgets only fall during a segment, so
//!   the order of its matches is irrelevant and it becomes a single arrival node whose
//!   sink arc carries the segment length;
//! * each server's budget is a chain of nodes that only grows when a refill is followed
//!   by another adjacency. Refills between two adjacencies merge into one injection
//!   (`min(K, min(K, b + x) + y) = min(K, b + x + y)` while nothing is spent), and refills
//!   after a server's last adjacency are dropped.
//!
//! With a finite cap every chain node is split `in -> out` with capacity `K`, which is
//! exactly the `min(K, ·)` of the budget law; flow is free to leave units unused.

mod brute;
mod dinic;

use serde::{Deserialize, Serialize};

use crate::budget::Cap;
use crate::error::{Error, Result};
use crate::generators::phase_times;
use crate::instance::{NodeSet, OnlineInstance};
use crate::trace::{MatchTrace, TraceSource};

pub use brute::brute_force_opt;
pub use dinic::{FlowNetwork, INF};

/// Size guard for network construction.
#[derive(Clone, Copy, Debug)]
pub struct OptLimits {
    pub max_nodes: usize,
    pub max_arcs: usize,
}

impl Default for OptLimits {
    fn default() -> Self {
        Self {
            max_nodes: 20_000_000,
            max_arcs: 60_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: u64,
    /// `witness[t-1]` is the server matched to arrival `t` in one optimal solution.
    pub witness: Vec<Option<u32>>,
}

impl OptResult {
    /// The witness as a trace with `source = offline`.
    pub fn to_trace(&self, inst: &OnlineInstance) -> Result<MatchTrace> {
        let final_budgets = crate::engine::replay_budgets(inst, &self.witness)?;
        let mut size = 0;
        let size_over_time = self
            .witness
            .iter()
            .map(|c| {
                size += c.is_some() as u64;
                size
            })
            .collect();
        Ok(MatchTrace {
            policy: "opt".into(),
            rng_seed: 0,
            source: TraceSource::Offline,
            choices: self.witness.clone(),
            size_over_time,
            yk_trajectory: Vec::new(),
            final_budgets,
        })
    }
}

pub fn opt_maxflow(inst: &OnlineInstance) -> Result<OptResult> {
    opt_maxflow_with_limits(inst, &OptLimits::default())
}

#[derive(Clone, Copy)]
struct Chain {
    /// Node matches are drawn from; `NONE` until the first adjacency.
    head: u32,
    /// Source arc feeding `head`.
    src_arc: u32,
    /// Units put on `src_arc` before capping (first node only).
    src_amount: u64,
    /// `head` already has adjacency arcs.
    used: bool,
    /// First node of the chain (no incoming carry, capped on the source arc).
    first: bool,
    pending: u64,
}

const NONE: u32 = u32::MAX;

struct Segment {
    start: u64,
    len: u64,
    /// Range into `Builder::adj`.
    arcs: std::ops::Range<usize>,
}

struct Builder<'a> {
    g: FlowNetwork,
    src: u32,
    sink: u32,
    b0: u64,
    cap: Cap,
    chains: Vec<Chain>,
    adj: Vec<(u32, u32)>,
    segments: Vec<Segment>,
    limits: &'a OptLimits,
}

impl Builder<'_> {
    fn check(&self) -> Result<()> {
        if self.g.node_count() > self.limits.max_nodes || self.g.arc_count() > self.limits.max_arcs
        {
            return Err(Error::SizeLimit(format!(
                "flow network exceeds {} nodes / {} arcs",
                self.limits.max_nodes, self.limits.max_arcs
            )));
        }
        Ok(())
    }

    /// Node to match `u` from, materializing pending refills.
    fn head(&mut self, u: u32) -> u32 {
        let c = self.chains[u as usize];
        if c.head == NONE {
            let v = self.g.add_node();
            let amount = self.b0 + c.pending;
            let arc = self.g.add_arc(self.src, v, self.cap.apply(amount) as i64);
            self.chains[u as usize] = Chain {
                head: v,
                src_arc: arc,
                src_amount: amount,
                used: false,
                first: true,
                pending: 0,
            };
            return v;
        }
        if c.pending == 0 {
            return c.head;
        }
        let ch = &mut self.chains[u as usize];
        if !c.used {
            // Nothing was spent since the head was created: fold the refill in.
            if c.first {
                ch.src_amount += c.pending;
                self.g
                    .set_capacity(c.src_arc, self.cap.apply(ch.src_amount) as i64);
            } else {
                let now = self.g.capacity(c.src_arc);
                self.g.set_capacity(c.src_arc, now + c.pending as i64);
            }
            ch.pending = 0;
            return c.head;
        }
        let (inp, out) = match self.cap {
            Cap::Bounded(k) => {
                let i = self.g.add_node();
                let o = self.g.add_node();
                self.g.add_arc(i, o, k as i64);
                (i, o)
            }
            Cap::Unbounded => {
                let v = self.g.add_node();
                (v, v)
            }
        };
        self.g.add_arc(c.head, inp, INF);
        let arc = self.g.add_arc(self.src, inp, c.pending as i64);
        self.chains[u as usize] = Chain {
            head: out,
            src_arc: arc,
            src_amount: c.pending,
            used: false,
            first: false,
            pending: 0,
        };
        out
    }

    fn close(&mut self, nodes: &NodeSet, start: u64, len: u64) -> Result<()> {
        if len == 0 || nodes.is_empty() {
            return Ok(());
        }
        let a = self.g.add_node();
        self.g.add_arc(a, self.sink, len as i64);
        let from = self.adj.len();
        for &u in nodes.iter() {
            let h = self.head(u);
            let arc = self.g.add_arc(h, a, len as i64);
            self.chains[u as usize].used = true;
            self.adj.push((u, arc));
        }
        self.segments.push(Segment {
            start,
            len,
            arcs: from..self.adj.len(),
        });
        self.check()
    }
}

pub fn opt_maxflow_with_limits(inst: &OnlineInstance, limits: &OptLimits) -> Result<OptResult> {
    let h = inst.header();
    let mut g = FlowNetwork::new();
    let src = g.add_node();
    let sink = g.add_node();
    let mut b = Builder {
        g,
        src,
        sink,
        b0: h.b0,
        cap: h.cap,
        chains: vec![
            Chain {
                head: NONE,
                src_arc: NONE,
                src_amount: 0,
                used: false,
                first: true,
                pending: 0,
            };
            h.n as usize
        ],
        adj: Vec::new(),
        segments: Vec::new(),
        limits,
    };

    let mut refills = Vec::new();
    let mut t = 0u64;
    for run in inst.runs() {
        let mut seg_start = t + 1;
        for i in 0..run.len {
            t += 1;
            refills.clear();
            h.refills.refills_at(t, h.n, &mut refills);
            // A refill at `t` is usable from `t + 1`: close the segment first.
            let split = refills
                .iter()
                .any(|&(u, _)| run.nodes.binary_search(&u).is_ok());
            if split || i + 1 == run.len {
                b.close(&run.nodes, seg_start, t + 1 - seg_start)?;
                seg_start = t + 1;
            }
            for &(u, eta) in &refills {
                b.chains[u as usize].pending += eta;
            }
        }
    }

    let value = b.g.max_flow(src, sink) as u64;
    let mut witness = vec![None; h.horizon as usize];
    for seg in &b.segments {
        let mut t = seg.start;
        for &(u, arc) in &b.adj[seg.arcs.clone()] {
            for _ in 0..b.g.flow(arc) {
                witness[(t - 1) as usize] = Some(u);
                t += 1;
            }
        }
        debug_assert!(t <= seg.start + seg.len);
    }
    Ok(OptResult { value, witness })
}

/// `OPT <= n b0 + beta T` in the stochastic model.
pub fn opt_upper_bound_sto(n: u64, b0: u64, beta: f64, horizon: u64) -> f64 {
    (n * b0) as f64 + beta * horizon as f64
}

/// Approximate optimum of the phased elimination graph: every arrival up to
/// `t_{m-1}` (capped at `T`) plus one match per refill of the surviving server that
/// lands before the last arrival.
pub fn opt_closed_form_theorem2(b0: u64, m: u64, horizon: u64, t0: u64) -> Result<u64> {
    let s = phase_times(b0, m, t0, (m - 1) as usize)?;
    let last = s.times.last().copied().unwrap_or(t0).min(horizon);
    let tail = if horizon > last {
        (horizon - 1) / m - (last - 1) / m
    } else {
        0
    };
    Ok(last + tail)
}
