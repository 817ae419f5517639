//! `refill-match`: instance generation, simulation, offline optimum, fluid-limit
//! analysis and experiment pipelines.
//!
//! Exit codes: 0 success, 1 usage, 2 runtime error, 3 failed assertion.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use refill_match::analysis::{
    cr_bound_th1, cr_bound_th2, cr_bound_th2_detailed, cr_lower_bound, cr_lower_bound_limit,
    initial_profile, integrate, solve_alpha, stationary_z0,
};
use refill_match::generators::{
    default_t0, gen_erdos_renyi, gen_theorem1, gen_theorem2, kp_adversary, ErParams,
    Theorem2Params,
};
use refill_match::harness::{
    dominance_check, emit, emit_sweep, horizon_sweep, run_experiment, EmitFormat, ExperimentSpec,
};
use refill_match::offline_opt::{brute_force_opt, opt_maxflow};
use refill_match::{run_adaptive, run_online, AdaptiveInstance, Cap, Error, MatchTrace, OnlineInstance, PolicyKind, RunOptions};
use serde::Serialize;

#[derive(Parser, Serialize)]
#[command(name = "refill-match", version, about = "Online bipartite matching with budget refills")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "REFILL_MATCH_JOBS")]
    jobs: Option<usize>,
    /// Suppress the resolved-config log line on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Write an instance as JSON (adaptive adversaries are frozen against --policy).
    Gen(GenArgs),
    /// Run a policy on an instance file or a named adversary.
    Sim(SimArgs),
    /// Offline optimum of an instance file.
    Opt(OptArgs),
    /// Integrate the fluid-limit ODE and write the trajectory as CSV.
    Ode(OdeArgs),
    /// Stationary point of the fluid limit.
    Stationary(StationaryArgs),
    /// Constants and competitive-ratio bounds.
    Constants(ConstantsArgs),
    /// Full pipeline from an experiment JSON config.
    Experiment(ExperimentArgs),
    /// Check ALG <= Balance + m^2 on the phased elimination adversary.
    Dominance(DominanceArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum GenKind {
    ErdosRenyi,
    Kp,
    Theorem1,
    Theorem2,
}

#[derive(Args, Serialize)]
struct Source {
    /// Generator / adversary.
    #[arg(long, value_enum, conflicts_with = "instance")]
    generator: Option<GenKind>,
    /// Instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: u32,
    #[arg(short = 'T', long = "horizon", default_value_t = 1000)]
    horizon: u64,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    b0: u64,
    /// Budget cap K, or "inf".
    #[arg(long, default_value = "inf")]
    cap: String,
    /// Refill period / phase parameter of the adversaries.
    #[arg(long, default_value_t = 10)]
    m: u64,
    #[arg(long)]
    t0: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[command(flatten)]
    source: Source,
    /// Policy the adaptive adversaries react to.
    #[arg(long, default_value = "balance")]
    policy: String,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "greedy")]
    policy: String,
    /// Histogram sampling stride for the trace CSV.
    #[arg(long)]
    stride: Option<u64>,
    /// Write the per-step trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also compute OPT by max-flow and report the ratio.
    #[arg(long)]
    with_opt: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OptMethod {
    Maxflow,
    Brute,
}

#[derive(Args, Serialize)]
struct OptArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "maxflow")]
    method: OptMethod,
    /// Write an optimal assignment as a trace CSV (max-flow only).
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct OdeArgs {
    #[arg(short = 'K', long = "cap", default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    b0: usize,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 5.0)]
    tau: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct StationaryArgs {
    #[arg(short = 'K', long = "cap", default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
}

#[derive(Args, Serialize)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 1)]
    b0: u64,
    #[arg(long, default_value_t = 100)]
    m: u64,
    #[arg(short = 'T', long = "horizon", default_value_t = 1_000_000)]
    horizon: u64,
    #[arg(short = 'K', long = "cap", default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1000.0)]
    n: f64,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Print JSON instead of an aligned table.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
    format: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    policy: Option<String>,
    /// Also rerun at each of these horizons and write sweep.csv / cr_vs_T.svg.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<u64>,
}

#[derive(Args, Serialize)]
struct DominanceArgs {
    #[arg(long, default_value_t = 1)]
    b0: u64,
    #[arg(long, default_value_t = 20)]
    m: u64,
    #[arg(short = 'T', long = "horizon", default_value_t = 100_000)]
    horizon: u64,
    #[arg(long, value_delimiter = ',', default_value = "greedy,lazy,uniform")]
    policies: Vec<String>,
    /// Runs per randomized policy.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(Error),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Assertion(msg) => Failure::Assertion(msg),
            e => Failure::Runtime(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if !cli.quiet {
        eprintln!("config: {}", serde_json::to_string(&cli).unwrap_or_default());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(j);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| dispatch(&cli.command)),
        Err(e) => Err(Failure::Usage(e.to_string())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed the pipe (`| head`): not our failure
        Err(Failure::Runtime(Error::Io(e))) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Sim(a) => sim(a),
        Command::Opt(a) => opt(a),
        Command::Ode(a) => ode(a),
        Command::Stationary(a) => stationary(a),
        Command::Constants(a) => constants(a),
        Command::Experiment(a) => experiment(a),
        Command::Dominance(a) => dominance(a),
    }
}

fn policy(name: &str) -> Result<PolicyKind, Failure> {
    name.parse().map_err(Failure::Usage)
}

fn cap(s: &str) -> Result<Cap, Failure> {
    s.parse().map_err(|e| Failure::Usage(format!("--cap: {e}")))
}

/// Write to `path`, or stdout when absent.
fn write_out(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn adversary(s: &Source) -> Result<Option<Box<dyn AdaptiveInstance>>, Failure> {
    Ok(match s.generator {
        Some(GenKind::Kp) => Some(Box::new(kp_adversary(s.b0)?)),
        Some(GenKind::Theorem1) => Some(Box::new(gen_theorem1(s.b0, s.m, s.horizon)?)),
        Some(GenKind::Theorem2) => Some(Box::new(gen_theorem2(&Theorem2Params {
            b0: s.b0,
            m: s.m,
            horizon: s.horizon,
            t0: s.t0,
            seed: s.seed,
        })?)),
        _ => None,
    })
}

fn fixed_instance(s: &Source) -> Result<OnlineInstance, Failure> {
    match (&s.instance, s.generator) {
        (Some(p), _) => Ok(OnlineInstance::from_json(&fs::read_to_string(p)?)?),
        (None, Some(GenKind::ErdosRenyi)) => Ok(gen_erdos_renyi(&ErParams {
            n: s.n,
            horizon: s.horizon,
            a: s.a,
            beta: s.beta,
            b0: s.b0,
            cap: cap(&s.cap)?,
            seed: s.seed,
        })?),
        _ => Err(Failure::Usage("give --instance or --generator".into())),
    }
}

/// Run `kind` on the source; adaptive sources are frozen into an instance.
fn run_source(s: &Source, kind: PolicyKind, opts: &RunOptions) -> Result<(MatchTrace, OnlineInstance), Failure> {
    let p = kind.build();
    if let Some(mut adv) = adversary(s)? {
        return Ok(run_adaptive(adv.as_mut(), p.as_ref(), s.seed, opts)?);
    }
    let inst = fixed_instance(s)?;
    let trace = run_online(&inst, p.as_ref(), s.seed, opts)?;
    Ok((trace, inst))
}

fn gen(a: &GenArgs) -> Outcome {
    let (_, inst) = run_source(&a.source, policy(&a.policy)?, &RunOptions::default())?;
    write_out(a.out.as_deref(), inst.to_json()?.as_bytes())?;
    Ok(())
}

fn sim(a: &SimArgs) -> Outcome {
    let opts = a.stride.map(RunOptions::sampled).unwrap_or_default();
    let kind = policy(&a.policy)?;
    let (trace, inst) = run_source(&a.source, kind, &opts)?;
    if let Some(p) = &a.trace {
        trace.write_csv(fs::File::create(p)?)?;
    }
    let mut summary = serde_json::json!({
        "policy": kind.as_str(),
        "n": inst.n(),
        "T": inst.horizon(),
        "seed": a.source.seed,
        "alg_size": trace.size(),
    });
    if a.with_opt {
        let opt = opt_maxflow(&inst)?.value;
        summary["opt_value"] = opt.into();
        summary["cr"] = if opt == 0 { 1.0 } else { trace.size() as f64 / opt as f64 }.into();
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn opt(a: &OptArgs) -> Outcome {
    let inst = OnlineInstance::from_json(&fs::read_to_string(&a.instance)?)?;
    let value = match a.method {
        OptMethod::Brute => {
            if a.witness.is_some() {
                return Err(Failure::Usage("--witness needs --method maxflow".into()));
            }
            brute_force_opt(&inst)?
        }
        OptMethod::Maxflow => {
            let r = opt_maxflow(&inst)?;
            if let Some(p) = &a.witness {
                r.to_trace(&inst)?.write_csv(fs::File::create(p)?)?;
            }
            r.value
        }
    };
    println!("{value}");
    Ok(())
}

fn ode(a: &OdeArgs) -> Outcome {
    let sol = integrate(&initial_profile(a.k, a.b0)?, a.a, a.beta, a.tau, a.dt)?;
    let mut s = String::from("tau,h");
    for k in 0..=a.k {
        s.push_str(&format!(",z{k}"));
    }
    s.push('\n');
    for (i, tau) in sol.tau.iter().enumerate() {
        s.push_str(&format!("{tau},{}", sol.h[i]));
        for z in &sol.z[i] {
            s.push_str(&format!(",{z}"));
        }
        s.push('\n');
    }
    write_out(a.out.as_deref(), s.as_bytes())?;
    Ok(())
}

fn stationary(a: &StationaryArgs) -> Outcome {
    let p = stationary_z0(a.a, a.beta, a.k)?;
    println!("{}", serde_json::to_string_pretty(&p)?);
    Ok(())
}

fn constants(a: &ConstantsArgs) -> Outcome {
    let t0 = default_t0(a.horizon);
    let z = stationary_z0(a.a, a.beta, a.k)?;
    let mut rows: Vec<(String, f64)> = vec![
        ("alpha".into(), solve_alpha()),
        ("cr_bound_th2".into(), cr_bound_th2()),
        (format!("cr_bound_th1(b0={})", a.b0), cr_bound_th1(a.b0)),
        (
            format!("cr_bound_th2_detailed(m={},b0={},t0={t0})", a.m, a.b0),
            cr_bound_th2_detailed(a.m, a.b0, t0)?,
        ),
        ("z0*".into(), z.z0_star),
    ];
    for (k, zk) in z.profile.iter().enumerate().skip(1) {
        rows.push((format!("z{k}*"), *zk));
    }
    rows.push((
        format!("cr_lower_bound(T={},K={},n={},b0={})", a.horizon, a.k, a.n, a.b0),
        cr_lower_bound(a.horizon as f64, a.k, a.n, a.b0 as f64, a.beta, a.a)?,
    ));
    rows.push((format!("cr_lower_bound_limit(K={})", a.k), cr_lower_bound_limit(a.k, a.beta, a.a)?));
    if a.json {
        let map: serde_json::Map<String, serde_json::Value> =
            rows.into_iter().map(|(k, v)| (k, v.into())).collect();
        println!("{}", serde_json::to_string_pretty(&map)?);
    } else {
        let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (k, v) in rows {
            println!("{k:<w$} = {v}");
        }
    }
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> Outcome {
    let text = fs::read_to_string(&a.config)?;
    let mut spec: ExperimentSpec =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.config.display())))?;
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(r) = a.replicates {
        spec.replicates = r;
    }
    if let Some(p) = &a.policy {
        spec.policy = policy(p)?;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if !matches!(a.format.as_slice(), [_, ..]) {
        return Err(Failure::Usage("--format needs at least one of csv,json,svg".into()));
    }
    let formats = a
        .format
        .iter()
        .map(|f| f.parse::<EmitFormat>().map_err(Failure::Usage))
        .collect::<Result<Vec<_>, _>>()?;
    let report = run_experiment(&spec)?;
    for f in formats {
        for p in emit(&report, f, &a.out)? {
            eprintln!("wrote {}", p.display());
        }
    }
    if !a.sweep.is_empty() {
        let pts = horizon_sweep(&spec, &a.sweep)?;
        for p in emit_sweep(&pts, &a.out)? {
            eprintln!("wrote {}", p.display());
        }
    }
    let summary = serde_json::json!({
        "replicates": spec.replicates,
        "alg_mean": report.alg.mean,
        "ratio_of_means": report.ratio_of_means,
        "mean_of_ratios": report.mean_of_ratios,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn dominance(a: &DominanceArgs) -> Outcome {
    let kinds = a.policies.iter().map(|p| policy(p)).collect::<Result<Vec<_>, _>>()?;
    let r = dominance_check(a.b0, a.m, a.horizon, &kinds, a.seeds, a.seed)?;
    let json = serde_json::to_string_pretty(&r)?;
    match &a.out {
        Some(p) => fs::write(p, &json)?,
        None => println!("{json}"),
    }
    r.ensure()?;
    Ok(())
}
