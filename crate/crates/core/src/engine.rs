//! The online matching engine.
//!
//! Each step `t`: reveal the neighbor set, ask the policy, check the choice against the
//! revealed set and the budgets at the end of `t - 1`, consume one unit, then apply the
//! refills of step `t` and the cap. A refill received at `t` is never usable at `t`.

use crate::budget::BudgetState;
use crate::error::{Error, Result};
use crate::instance::{AdaptiveInstance, OnlineInstance, TranscriptRecorder};
use crate::policies::Policy;
use crate::rng::{stream_rng, Stream};
use crate::trace::{HistogramSample, MatchTrace, TraceSource};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Record `Y_k(t)` at `t = 0`, every multiple of the stride, and at `T`.
    pub sample_stride: Option<u64>,
}

impl RunOptions {
    pub fn sampled(stride: u64) -> Self {
        Self {
            sample_stride: Some(stride.max(1)),
        }
    }
}

/// Run `policy` on a materialized instance.
pub fn run_online(
    inst: &OnlineInstance,
    policy: &dyn Policy,
    seed: u64,
    opts: &RunOptions,
) -> Result<MatchTrace> {
    drive(&mut inst.source(), policy, seed, opts, None)
}

/// Run `policy` against a reactive instance; also returns the frozen transcript.
pub fn run_adaptive(
    src: &mut dyn AdaptiveInstance,
    policy: &dyn Policy,
    seed: u64,
    opts: &RunOptions,
) -> Result<(MatchTrace, OnlineInstance)> {
    let mut rec = TranscriptRecorder::new(src.header().clone());
    let trace = drive(src, policy, seed, opts, Some(&mut rec))?;
    Ok((trace, rec.finish()?))
}

fn drive(
    src: &mut dyn AdaptiveInstance,
    policy: &dyn Policy,
    seed: u64,
    opts: &RunOptions,
    mut rec: Option<&mut TranscriptRecorder>,
) -> Result<MatchTrace> {
    let header = src.header().clone();
    header.validate()?;
    let horizon = header.horizon;
    let mut state = BudgetState::new(header.n, header.b0, header.cap);
    let mut rng = stream_rng(seed, Stream::Policy, 0);

    let mut choices = Vec::with_capacity(horizon as usize);
    let mut sizes = Vec::with_capacity(horizon as usize);
    let mut samples = Vec::new();
    let mut refills = Vec::new();
    let mut size = 0u64;

    if opts.sample_stride.is_some() {
        samples.push(sample(0, &state));
    }
    for t in 1..=horizon {
        let nodes = src.reveal(t, &state);
        if let Some(r) = rec.as_deref_mut() {
            r.push(&nodes);
        }
        let choice = policy.decide(t, &nodes, &state, &mut rng);
        if let Some(u) = choice {
            if nodes.binary_search(&u).is_err() {
                return Err(Error::PolicyFault {
                    t,
                    reason: format!("node {u} is not adjacent to the arrival"),
                });
            }
            if state.get(u) == 0 {
                return Err(Error::PolicyFault {
                    t,
                    reason: format!("node {u} has no budget"),
                });
            }
            state.step(u, true, 0)?;
            size += 1;
        }
        refills.clear();
        header.refills.refills_at(t, header.n, &mut refills);
        for &(u, eta) in &refills {
            state.step(u, false, eta)?;
        }
        src.observe(t, choice);
        choices.push(choice);
        sizes.push(size);
        if let Some(stride) = opts.sample_stride {
            if t % stride == 0 || t == horizon {
                samples.push(sample(t, &state));
            }
        }
    }

    Ok(MatchTrace {
        policy: policy.name().to_string(),
        rng_seed: seed,
        source: TraceSource::Online,
        choices,
        size_over_time: sizes,
        yk_trajectory: samples,
        final_budgets: state.into_budgets(),
    })
}

fn sample(t: u64, state: &BudgetState) -> HistogramSample {
    let mut y = state.histogram().to_vec();
    if state.cap().bound().is_none() {
        while y.len() > 1 && y.last() == Some(&0) {
            y.pop();
        }
    }
    HistogramSample { t, y }
}

/// Recompute final budgets from `choices` and the refill schedule using the budget law.
/// Errors if any choice is infeasible (not adjacent or no budget).
pub fn replay_budgets(inst: &OnlineInstance, choices: &[Option<u32>]) -> Result<Vec<u64>> {
    let h = inst.header();
    if choices.len() as u64 != h.horizon {
        return Err(Error::Contract(format!(
            "{} choices for horizon {}",
            choices.len(),
            h.horizon
        )));
    }
    let mut b = vec![h.b0; h.n as usize];
    let mut refills = Vec::new();
    for (i, (nodes, choice)) in inst.neighbors().zip(choices).enumerate() {
        let t = i as u64 + 1;
        let mut matched = None;
        if let Some(u) = *choice {
            if !nodes.contains(&u) {
                return Err(Error::PolicyFault {
                    t,
                    reason: format!("replayed node {u} not adjacent"),
                });
            }
            matched = Some(u);
        }
        refills.clear();
        h.refills.refills_at(t, h.n, &mut refills);
        let mut r = refills.iter().peekable();
        for u in 0..h.n {
            let eta = match r.peek() {
                Some(&&(v, e)) if v == u => {
                    r.next();
                    e
                }
                _ => 0,
            };
            let m = matched == Some(u);
            if m || eta > 0 {
                b[u as usize] = crate::budget::step_budget(b[u as usize], m, eta, h.cap)?;
            }
        }
    }
    Ok(b)
}
