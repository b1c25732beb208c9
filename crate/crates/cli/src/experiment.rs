//! The `run` subcommand: one instance, its LP, an exact optimum when small
//! enough, `trials` independent single roundings and one full solve.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use dbsteiner_core::dst_round::{
    round_super_tree, run_dst_rounding, solve_dst_relaxation, state_tree_height, DstRunParams, DstRunReport,
};
use dbsteiner_core::generate::{gen_dst, gen_gst, DstParams, GstParams};
use dbsteiner_core::gst_round::{prepare_gst_with, run_gst_rounding, GstRunParams, GstRunReport};
use dbsteiner_core::lpcore::{le_rel, EPS_OBJ};
use dbsteiner_core::oracle::{exact_dst, exact_gst, ExactResult, ExactStatus, OracleError};
use dbsteiner_core::rng::stream_rng;
use dbsteiner_core::states::DEFAULT_NODE_CAP;
use dbsteiner_core::stats::Summary;
use dbsteiner_core::treekit::default_height;
use dbsteiner_core::verify::{verify_dst_report, verify_gst_report};
use dbsteiner_core::{normalize, preprocess_gst, DirectedInstance, Error, GroupTreeInstance, SCHEMA_VERSION};
use serde::Serialize;

use crate::io::{emit_json, load, parse_range, CliError, Loaded};
use crate::Problem;

/// Trial streams start here so they never coincide with solve streams.
const TRIAL_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Instance file; the problem is read from its header.
    #[arg(long, conflicts_with = "gen")]
    instance: Option<PathBuf>,
    /// Generate the instance instead, e.g. `n=8,m=14,k=3,d=3,cost=1..9`
    /// (directed) or `n=30,k=4,depth=5,d=2` (group).
    #[arg(long, requires = "problem")]
    gen: Option<String>,
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent single roundings for the hit statistics.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Super-tree height; defaults to the depth of the optimal tree's state
    /// tree when the exact solver applies, else the logarithmic bound.
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Repetitions of the directed solve.
    #[arg(long)]
    q: Option<usize>,
    /// Repetitions of the group solve.
    #[arg(long)]
    m: Option<usize>,
    /// Upper bound on the scaling cap γ of the group solve.
    #[arg(long)]
    gamma_cap: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct OracleSummary {
    status: ExactStatus,
    cost: Option<u64>,
    /// State-tree depth of the optimal tree (directed only).
    state_tree_height: Option<usize>,
}

#[derive(Debug, Serialize)]
struct TargetHits {
    /// Terminal vertex (directed) or group index (group).
    target: usize,
    hits: u64,
    trials: u64,
    rate: f64,
    std_error: f64,
}

/// Mean, spread and count of a sample, so 3σ gates can be recomputed.
#[derive(Debug, Serialize)]
struct SampleStats {
    count: u64,
    mean: f64,
    std_dev: f64,
    std_error: f64,
}

impl From<Summary> for SampleStats {
    fn from(s: Summary) -> Self {
        SampleStats { count: s.count, mean: s.mean, std_dev: s.std_dev(), std_error: s.std_error() }
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum SolveReport {
    Dst(DstRunReport),
    Gst(GstRunReport),
}

#[derive(Debug, Serialize)]
struct RunReport {
    schema_version: u32,
    problem: &'static str,
    instance: String,
    seed: u64,
    trials: u64,
    h: Option<usize>,
    lp_cost: f64,
    oracle: Option<OracleSummary>,
    hits: Vec<TargetHits>,
    trial_cost: SampleStats,
    solve: SolveReport,
}

fn hit_table(targets: impl IntoIterator<Item = usize>, counts: &[u64], trials: u64) -> Vec<TargetHits> {
    targets
        .into_iter()
        .zip(counts)
        .map(|(target, &hits)| {
            let rate = hits as f64 / trials as f64;
            TargetHits { target, hits, trials, rate, std_error: (rate * (1.0 - rate) / trials as f64).sqrt() }
        })
        .collect()
}

fn spec_map(spec: &str) -> Result<BTreeMap<&str, &str>, CliError> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::Argument(format!("`{kv}` is not key=value")))
        })
        .collect()
}

fn spec_get<T: std::str::FromStr>(map: &BTreeMap<&str, &str>, key: &str, default: Option<T>) -> Result<T, CliError> {
    match map.get(key) {
        Some(v) => v.parse().map_err(|_| CliError::Argument(format!("bad value for `{key}`: {v}"))),
        None => default.ok_or_else(|| CliError::Argument(format!("generator spec needs `{key}`"))),
    }
}

fn spec_cost(map: &BTreeMap<&str, &str>) -> Result<std::ops::RangeInclusive<u64>, CliError> {
    let (lo, hi) = parse_range(map.get("cost").copied().unwrap_or("1..9")).map_err(CliError::Argument)?;
    Ok(lo..=hi)
}

fn generated_dst(spec: &str, seed: u64) -> Result<DirectedInstance, CliError> {
    let map = spec_map(spec)?;
    let p = DstParams {
        n: spec_get(&map, "n", None)?,
        m: spec_get(&map, "m", None)?,
        k: spec_get(&map, "k", None)?,
        d_max: spec_get(&map, "d", Some(3))?,
        cost: spec_cost(&map)?,
    };
    Ok(gen_dst(&p, spec_get(&map, "seed", Some(seed))?).map_err(Error::from)?)
}

fn generated_gst(spec: &str, seed: u64) -> Result<GroupTreeInstance, CliError> {
    let map = spec_map(spec)?;
    let p = GstParams {
        n: spec_get(&map, "n", None)?,
        k: spec_get(&map, "k", None)?,
        depth: spec_get(&map, "depth", None)?,
        d_max: spec_get(&map, "d", Some(3))?,
        cost: spec_cost(&map)?,
    };
    let raw = gen_gst(&p, spec_get(&map, "seed", Some(seed))?).map_err(Error::from)?;
    Ok(preprocess_gst(&raw, None).map_err(Error::from)?)
}

/// The exact optimum, or `None` when the instance is beyond the oracle.
fn oracle_or_skip(result: Result<ExactResult, OracleError>) -> Result<Option<ExactResult>, Error> {
    match result {
        Ok(r) if r.status == ExactStatus::Infeasible => Err(Error::Infeasible("the exact solver finds no feasible tree".into())),
        Ok(r) => Ok(Some(r)),
        Err(OracleError::TooLarge { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let (loaded, label) = match (&args.instance, &args.gen) {
        (Some(path), _) => (load(path)?, path.display().to_string()),
        (None, Some(spec)) => match args.problem {
            Some(Problem::Dst) => (Loaded::Dst(generated_dst(spec, args.seed)?), format!("gen:dst:{spec}")),
            Some(Problem::Gst) => (Loaded::Gst(generated_gst(spec, args.seed)?), format!("gen:gst:{spec}")),
            None => return Err(CliError::Argument("--gen needs --problem".into())),
        },
        (None, None) => return Err(CliError::Argument("give --instance or --gen".into())),
    };
    if args.trials == 0 {
        return Err(CliError::Argument("--trials must be positive".into()));
    }
    let report = match loaded {
        Loaded::Dst(src) => run_dst_experiment(&args, src, label)?,
        Loaded::Gst(inst) => run_gst_experiment(&args, inst, label)?,
    };
    emit_json(&args.out, &report)
}

fn run_dst_experiment(args: &RunArgs, src: DirectedInstance, label: String) -> Result<RunReport, CliError> {
    let norm = normalize(&src).map_err(Error::from)?;
    let exact = oracle_or_skip(exact_dst(&src))?;
    let opt_height = match &exact {
        Some(r) => Some(state_tree_height(&norm, &r.edges)?),
        None => None,
    };
    let h = args.height.or(opt_height).unwrap_or_else(|| default_height(norm.vertex_count()));
    let relax = solve_dst_relaxation(&norm, h, args.node_cap)?;
    let lp_cost = relax.lp_cost();
    if let (Some(r), Some(depth)) = (&exact, opt_height) {
        let opt = r.cost.unwrap_or(0) as f64;
        if h >= depth && !le_rel(lp_cost, opt, EPS_OBJ) {
            return Err(Error::Invariant(format!("LP value {lp_cost} exceeds the optimum {opt} at height {h}")).into());
        }
    }

    let k = src.terminals.len();
    let mut counts = vec![0u64; k];
    let mut trial_cost = Summary::default();
    for i in 0..args.trials {
        let o = round_super_tree(&norm, &relax.super_tree, &relax.solution.x, &mut stream_rng(args.seed, TRIAL_STREAM_BASE + i))?;
        trial_cost.push(o.cost as f64);
        for t in o.tree.covered_terminals(&norm) {
            let source = norm.source_vertex(t);
            if let Some(j) = src.terminals.iter().position(|&s| s == source) {
                counts[j] += 1;
            }
        }
    }

    let params = DstRunParams { h: Some(h), q: args.q, seed: args.seed, node_cap: args.node_cap, instance: label.clone() };
    let solve = run_dst_rounding(&norm, &relax, &params)?;
    let issues = verify_dst_report(&src, &solve);
    if !issues.is_empty() {
        return Err(CliError::Verify(issues));
    }
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        problem: "dst",
        instance: label,
        seed: args.seed,
        trials: args.trials,
        h: Some(h),
        lp_cost,
        oracle: exact.map(|r| OracleSummary { status: r.status, cost: r.cost, state_tree_height: opt_height }),
        hits: hit_table(src.terminals.iter().copied(), &counts, args.trials),
        trial_cost: trial_cost.into(),
        solve: SolveReport::Dst(solve),
    })
}

fn run_gst_experiment(args: &RunArgs, inst: GroupTreeInstance, label: String) -> Result<RunReport, CliError> {
    let exact = oracle_or_skip(exact_gst(&inst))?;
    let prep = prepare_gst_with(&inst, args.gamma_cap)?;
    if let Some(opt) = exact.as_ref().and_then(|r| r.cost) {
        if !le_rel(prep.lp_cost, opt as f64, EPS_OBJ) {
            return Err(Error::Invariant(format!("LP value {} exceeds the optimum {opt}", prep.lp_cost)).into());
        }
    }

    let group_of = inst.group_of();
    let mut counts = vec![0u64; inst.k()];
    let mut trial_cost = Summary::default();
    for i in 0..args.trials {
        let sample = prep.sampler.sample(&mut stream_rng(args.seed, TRIAL_STREAM_BASE + i));
        trial_cost.push(inst.vertex_cost_sum(&sample) as f64);
        let mut hit = vec![false; inst.k()];
        sample.iter().filter_map(|&v| group_of[v]).for_each(|t| hit[t] = true);
        hit.iter().zip(counts.iter_mut()).for_each(|(&h, c)| *c += u64::from(h));
    }

    let params = GstRunParams { m: args.m, seed: args.seed, gamma_cap: args.gamma_cap, instance: label.clone() };
    let solve = run_gst_rounding(&inst, &prep, &params)?;
    let issues = verify_gst_report(&inst, &solve);
    if !issues.is_empty() {
        return Err(CliError::Verify(issues));
    }
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        problem: "gst",
        instance: label,
        seed: args.seed,
        trials: args.trials,
        h: None,
        lp_cost: prep.lp_cost,
        oracle: exact.map(|r| OracleSummary { status: r.status, cost: r.cost, state_tree_height: None }),
        hits: hit_table(0..inst.k(), &counts, args.trials),
        trial_cost: trial_cost.into(),
        solve: SolveReport::Gst(solve),
    })
}
