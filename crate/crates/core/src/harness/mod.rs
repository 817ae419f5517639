//! Seeded experiment orchestration.
//!
//! Replicate `i` draws everything (graph, refills, policy and adversary tie-breaks) from
//! `derive_seed(master, Replicate, i)`. Replicates run on the rayon pool and are folded
//! back in index order, so reports do not depend on the thread count.

mod dominance;
mod emit;
mod stats;
mod trajectory;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{initial_profile, integrate, OdeSolution};
use crate::budget::Cap;
use crate::engine::{run_adaptive, run_online, RunOptions};
use crate::error::{param, Error, Result};
use crate::generators::{
    default_t0, gen_erdos_renyi, gen_theorem1, gen_theorem2, kp_adversary, ErParams,
    Theorem2Params,
};
use crate::instance::OnlineInstance;
use crate::offline_opt::{opt_closed_form_theorem2, opt_maxflow, opt_upper_bound_sto};
use crate::policies::PolicyKind;
use crate::rng::{derive_seed, Stream};
use crate::trace::MatchTrace;

pub use dominance::{dominance_check, DominanceEntry, DominanceReport};
pub use emit::{emit, emit_sweep, svg_line_chart, EmitFormat, Series};
pub use stats::Summary;
pub use trajectory::{
    compare_trajectory, trajectory_rows, TrajectoryDeviation, TrajectoryRow, WORMALD_EPS,
};

/// Step of the RK4 grid used for trajectory comparisons.
pub const ODE_DT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    ErdosRenyi {
        n: u32,
        #[serde(rename = "T")]
        horizon: u64,
        a: f64,
        beta: f64,
        b0: u64,
        cap: Cap,
    },
    Kp {
        b0: u64,
    },
    Theorem1 {
        b0: u64,
        m: u64,
        #[serde(rename = "T")]
        horizon: u64,
    },
    Theorem2 {
        b0: u64,
        m: u64,
        #[serde(rename = "T")]
        horizon: u64,
        #[serde(default)]
        t0: Option<u64>,
    },
    /// A frozen instance in the JSON instance format.
    File {
        path: PathBuf,
    },
}

impl GeneratorSpec {
    /// Same generator at another horizon (not available for `kp` and `file`).
    pub fn with_horizon(&self, t: u64) -> Result<Self> {
        let mut g = self.clone();
        match &mut g {
            GeneratorSpec::ErdosRenyi { horizon, .. }
            | GeneratorSpec::Theorem1 { horizon, .. }
            | GeneratorSpec::Theorem2 { horizon, .. } => *horizon = t,
            GeneratorSpec::Kp { .. } | GeneratorSpec::File { .. } => {
                return Err(param("this generator has no horizon parameter"))
            }
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMode {
    /// Exact offline optimum by max-flow.
    #[default]
    Maxflow,
    /// Known optimum of the construction (`kp`, `theorem2`).
    ClosedForm,
    /// `n b0 + beta T` (Erdős–Rényi only); ratios are then lower estimates.
    Bound,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub generator: GeneratorSpec,
    pub policy: PolicyKind,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Histogram sampling stride; defaults to `max(1, T/2000)`.
    #[serde(default)]
    pub stride: Option<u64>,
    /// Compare each run with the fluid-limit ODE (Erdős–Rényi with a finite cap only).
    #[serde(default)]
    pub trajectory: bool,
    #[serde(default)]
    pub opt: OptMode,
}

fn one() -> usize {
    1
}

impl ExperimentSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(param("replicates must be at least 1"));
        }
        if self.stride == Some(0) {
            return Err(param("stride must be at least 1"));
        }
        let er = matches!(self.generator, GeneratorSpec::ErdosRenyi { .. });
        if self.trajectory {
            match self.generator {
                GeneratorSpec::ErdosRenyi { cap: Cap::Bounded(_), .. } => {}
                _ => {
                    return Err(param(
                        "trajectory comparison needs an erdos_renyi generator with a finite cap",
                    ))
                }
            }
        }
        match self.opt {
            OptMode::Bound if !er => Err(param("opt = bound is only defined for erdos_renyi")),
            OptMode::ClosedForm
                if !matches!(
                    self.generator,
                    GeneratorSpec::Kp { .. } | GeneratorSpec::Theorem2 { .. }
                ) =>
            {
                Err(param("opt = closed-form is only defined for kp and theorem2"))
            }
            _ => Ok(()),
        }
    }

    pub fn replicate_seed(&self, i: usize) -> u64 {
        derive_seed(self.seed, Stream::Replicate, i as u64)
    }

    fn horizon(&self) -> Option<u64> {
        match self.generator {
            GeneratorSpec::ErdosRenyi { horizon, .. }
            | GeneratorSpec::Theorem1 { horizon, .. }
            | GeneratorSpec::Theorem2 { horizon, .. } => Some(horizon),
            _ => None,
        }
    }

    fn run_options(&self) -> RunOptions {
        if !self.trajectory {
            return RunOptions::default();
        }
        let t = self.horizon().unwrap_or(1);
        RunOptions::sampled(self.stride.unwrap_or((t / 2000).max(1)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub seed: u64,
    pub alg_size: u64,
    pub opt_value: Option<f64>,
    pub cr: Option<f64>,
    pub deviation: Option<TrajectoryDeviation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub size_sup_max: f64,
    pub size_sup_median: f64,
    /// Per-level maximum over replicates.
    pub level_sup_max: Vec<f64>,
    /// Per-level median over replicates.
    pub level_sup_median: Vec<f64>,
    pub bound: f64,
    pub violations: usize,
    /// Sampled path of replicate 0 next to the ODE.
    pub rows: Vec<TrajectoryRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub replicates: Vec<ReplicateResult>,
    pub alg: Summary,
    pub opt: Option<Summary>,
    pub cr: Option<Summary>,
    /// `mean(ALG) / mean(OPT)`: the estimator of `E[ALG]/E[OPT]`.
    pub ratio_of_means: Option<f64>,
    /// `mean(ALG/OPT)`.
    pub mean_of_ratios: Option<f64>,
    pub trajectory: Option<TrajectorySummary>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `ALG / OPT`, with `0/0 = 1`.
fn ratio(alg: u64, opt: f64) -> f64 {
    if opt == 0.0 {
        1.0
    } else {
        alg as f64 / opt
    }
}

/// Build and run one replicate; returns the trace and the (frozen) instance.
fn simulate(spec: &ExperimentSpec, seed: u64) -> Result<(MatchTrace, OnlineInstance)> {
    let policy = spec.policy.build();
    let opts = spec.run_options();
    match &spec.generator {
        &GeneratorSpec::ErdosRenyi {
            n,
            horizon,
            a,
            beta,
            b0,
            cap,
        } => {
            let inst = gen_erdos_renyi(&ErParams {
                n,
                horizon,
                a,
                beta,
                b0,
                cap,
                seed,
            })?;
            let trace = run_online(&inst, policy.as_ref(), seed, &opts)?;
            Ok((trace, inst))
        }
        &GeneratorSpec::Kp { b0 } => {
            run_adaptive(&mut kp_adversary(b0)?, policy.as_ref(), seed, &opts)
        }
        &GeneratorSpec::Theorem1 { b0, m, horizon } => {
            run_adaptive(&mut gen_theorem1(b0, m, horizon)?, policy.as_ref(), seed, &opts)
        }
        &GeneratorSpec::Theorem2 { b0, m, horizon, t0 } => {
            let mut adv = gen_theorem2(&Theorem2Params {
                b0,
                m,
                horizon,
                t0,
                seed,
            })?;
            run_adaptive(&mut adv, policy.as_ref(), seed, &opts)
        }
        GeneratorSpec::File { path } => {
            let inst = OnlineInstance::from_json(&std::fs::read_to_string(path)?)?;
            let trace = run_online(&inst, policy.as_ref(), seed, &opts)?;
            Ok((trace, inst))
        }
    }
}

fn optimum(spec: &ExperimentSpec, inst: &OnlineInstance) -> Result<Option<f64>> {
    Ok(match spec.opt {
        OptMode::None => None,
        OptMode::Maxflow => Some(opt_maxflow(inst)?.value as f64),
        OptMode::Bound => {
            let h = inst.header();
            let beta = match &h.refills {
                crate::instance::RefillSchedule::Bernoulli { beta, .. } => *beta,
                _ => 0.0,
            };
            Some(opt_upper_bound_sto(h.n as u64, h.b0, beta, h.horizon))
        }
        OptMode::ClosedForm => match spec.generator {
            GeneratorSpec::Kp { b0 } => Some(kp_adversary(b0)?.params().opt_value() as f64),
            GeneratorSpec::Theorem2 { b0, m, horizon, t0 } => {
                let t0 = t0.unwrap_or_else(|| default_t0(horizon));
                Some(opt_closed_form_theorem2(b0, m, horizon, t0)? as f64)
            }
            _ => return Err(param("no closed-form optimum for this generator")),
        },
    })
}

fn run_replicate(
    spec: &ExperimentSpec,
    ode: Option<&OdeSolution>,
    i: usize,
) -> Result<(ReplicateResult, Option<Vec<TrajectoryRow>>)> {
    let seed = spec.replicate_seed(i);
    let inner = || -> Result<_> {
        let (trace, inst) = simulate(spec, seed)?;
        let opt_value = optimum(spec, &inst)?;
        let alg_size = trace.size();
        let (deviation, rows) = match ode {
            Some(ode) => {
                let rows = if i == 0 {
                    Some(trajectory_rows(&trace, ode)?)
                } else {
                    None
                };
                (Some(compare_trajectory(&trace, ode)?), rows)
            }
            None => (None, None),
        };
        Ok((
            ReplicateResult {
                replicate: i,
                seed,
                alg_size,
                opt_value,
                cr: opt_value.map(|o| ratio(alg_size, o)),
                deviation,
            },
            rows,
        ))
    };
    inner().map_err(|e| Error::Replicate {
        replicate: i,
        seed,
        source: Box::new(e),
    })
}

fn fluid_limit(spec: &ExperimentSpec) -> Result<Option<OdeSolution>> {
    if !spec.trajectory {
        return Ok(None);
    }
    match spec.generator {
        GeneratorSpec::ErdosRenyi {
            n,
            horizon,
            a,
            beta,
            b0,
            cap: Cap::Bounded(k),
        } => {
            let init = initial_profile(k as usize, b0 as usize)?;
            let tau_end = (horizon as f64 / n as f64).max(ODE_DT);
            Ok(Some(integrate(&init, a, beta, tau_end, ODE_DT)?))
        }
        _ => Err(param("trajectory comparison needs erdos_renyi with a finite cap")),
    }
}

/// Run every replicate of `spec` and aggregate.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let ode = fluid_limit(spec)?;
    let results: Vec<_> = (0..spec.replicates)
        .into_par_iter()
        .map(|i| run_replicate(spec, ode.as_ref(), i))
        .collect();
    let mut replicates = Vec::with_capacity(results.len());
    let mut rows = None;
    for r in results {
        let (rep, r0) = r?;
        if r0.is_some() {
            rows = r0;
        }
        replicates.push(rep);
    }
    Ok(aggregate(spec.clone(), replicates, rows))
}

fn aggregate(
    spec: ExperimentSpec,
    replicates: Vec<ReplicateResult>,
    rows: Option<Vec<TrajectoryRow>>,
) -> ExperimentReport {
    let algs: Vec<f64> = replicates.iter().map(|r| r.alg_size as f64).collect();
    let alg = Summary::of(&algs);
    let opts: Option<Vec<f64>> = replicates.iter().map(|r| r.opt_value).collect();
    let opts = opts.filter(|v| !v.is_empty());
    let (opt, cr, ratio_of_means, mean_of_ratios) = match opts {
        Some(opts) => {
            let crs: Vec<f64> = replicates.iter().filter_map(|r| r.cr).collect();
            let o = Summary::of(&opts);
            let c = Summary::of(&crs);
            let rom = if o.mean == 0.0 { 1.0 } else { alg.mean / o.mean };
            let mor = c.mean;
            (Some(o), Some(c), Some(rom), Some(mor))
        }
        None => (None, None, None, None),
    };
    let devs: Vec<&TrajectoryDeviation> =
        replicates.iter().filter_map(|r| r.deviation.as_ref()).collect();
    let trajectory = (!devs.is_empty()).then(|| {
        let sizes: Vec<f64> = devs.iter().map(|d| d.size_sup).collect();
        let levels = devs[0].level_sup.len();
        let per_level =
            |k: usize| -> Vec<f64> { devs.iter().map(|d| d.level_sup[k]).collect() };
        TrajectorySummary {
            size_sup_max: sizes.iter().copied().fold(0.0, f64::max),
            size_sup_median: stats::median(&sizes),
            level_sup_max: (0..levels)
                .map(|k| per_level(k).into_iter().fold(0.0, f64::max))
                .collect(),
            level_sup_median: (0..levels).map(|k| stats::median(&per_level(k))).collect(),
            bound: devs[0].bound,
            violations: devs.iter().filter(|d| d.violated).count(),
            rows: rows.unwrap_or_default(),
        }
    });
    ExperimentReport {
        spec,
        replicates,
        alg,
        opt,
        cr,
        ratio_of_means,
        mean_of_ratios,
        trajectory,
    }
}

/// One point of a horizon sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "T")]
    pub horizon: u64,
    pub ratio_of_means: Option<f64>,
    pub cr: Option<Summary>,
}

/// Rerun `spec` at each horizon (same master seed).
pub fn horizon_sweep(spec: &ExperimentSpec, horizons: &[u64]) -> Result<Vec<SweepPoint>> {
    horizons
        .iter()
        .map(|&t| {
            let mut s = spec.clone();
            s.generator = spec.generator.with_horizon(t)?;
            let r = run_experiment(&s)?;
            Ok(SweepPoint {
                horizon: t,
                ratio_of_means: r.ratio_of_means,
                cr: r.cr,
            })
        })
        .collect()
}
