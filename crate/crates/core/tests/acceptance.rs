//! Acceptance suite: twelve property and statistical gates, one PASS/FAIL
//! line each. Exits nonzero when any gate fails.
//!
//! Reference quantities (subtree sizes, LP-feasible points of optimal trees,
//! exact α sequences, scaling properties) are recomputed here from first
//! principles rather than read back from the library.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use dbsteiner_core::dst_round::{round_super_tree, run_dst, state_tree_height, DstRunParams};
use dbsteiner_core::generate::{broom, gen_dst, gen_gst, DstParams, GstParams};
use dbsteiner_core::gst_round::{alpha_sequence, prepare_gst, run_gst_rounding, GstPreparation, GstRunParams};
use dbsteiner_core::lpcore::{build_dst_lp, build_gst_lp, check_modified, le_rel, solve_lp, EPS_FEAS, EPS_OBJ};
use dbsteiner_core::oracle::{exact_dst, exact_gst, ExactResult, ExactStatus};
use dbsteiner_core::rng::stream_rng;
use dbsteiner_core::states::{
    build_super_tree, gen_state_tree, stitch_multi_tree, validate_state_tree, StateError, SuperTree, DEFAULT_NODE_CAP,
};
use dbsteiner_core::stats::{bernoulli_sigma, frequency_matches, Summary};
use dbsteiner_core::treekit::{default_height, find_balanced_separator};
use dbsteiner_core::verify::{verify_dst_report, verify_gst_report};
use dbsteiner_core::{normalize, preprocess_gst, DirectedInstance, Error, GroupTreeInstance, NormalizedInstance, RootedTree};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

const TRIALS: u64 = 10_000;
const Z: f64 = 3.0;

type Gate = Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, Option<Duration>, fn() -> Gate); 12] = [
        (1, "balanced separator", Some(Duration::from_secs(1)), c01_separator),
        (2, "reduction round-trip", Some(Duration::from_secs(30)), c02_round_trip),
        (3, "LP dominance", Some(Duration::from_secs(300)), c03_lp_dominance),
        (4, "DST marginals", Some(Duration::from_secs(300)), c04_marginals),
        (5, "DST terminal coverage", Some(Duration::from_secs(300)), c05_coverage),
        (6, "DST expected cost", None, c06_expected_cost),
        (7, "DST concentration", None, c07_concentration),
        (8, "DST end-to-end", Some(Duration::from_secs(600)), c08_dst_end_to_end),
        (9, "GST scaling invariants", None, c09_scaling),
        (10, "GST group coverage", Some(Duration::from_secs(600)), c10_group_coverage),
        (11, "GST end-to-end", None, c11_gst_end_to_end),
        (12, "alpha recurrence", Some(Duration::from_secs(1)), c12_alpha),
    ];
    let mut failed = 0;
    for (id, name, budget, gate) in criteria {
        let start = Instant::now();
        let result = gate();
        let elapsed = start.elapsed();
        let result = match (result, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 12 criteria failed");
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- suites

/// A random instance with its exact optimum and generator seed.
struct DstCase {
    seed: u64,
    src: DirectedInstance,
    norm: NormalizedInstance,
    opt: ExactResult,
}

/// Super-tree size above which a directed case is set aside. The size grows
/// exponentially in `h`, and a few dense `h = 5` draws reach several million
/// nodes, which exceeds a desk-scale memory budget.
const SUITE_NODE_CAP: u64 = 300_000;

/// Feasible generator outputs with `n` in `n_range`, and how many feasible
/// draws were set aside by `node_cap`.
struct DstSuite {
    cases: Vec<DstCase>,
    oversized: usize,
}

/// The first `count` feasible generator outputs whose oracle-guided
/// super-tree has at most `node_cap` nodes.
fn dst_cases(stream: u64, count: usize, n_range: (usize, usize), k_max: usize, node_cap: Option<u64>) -> DstSuite {
    let mut cases = Vec::with_capacity(count);
    let mut oversized = 0;
    for seed in 0.. {
        if cases.len() == count {
            break;
        }
        let mut rng = stream_rng(seed, stream);
        let n = rng.gen_range(n_range.0..=n_range.1);
        let m = rng.gen_range(n - 1..=(2 * n).min(24).min((n - 1) * (n - 1)));
        let k = rng.gen_range(1..=k_max.min(n - 1));
        let d_max = rng.gen_range(2..=3);
        let src = gen_dst(&DstParams { n, m, k, d_max, cost: 1..=9 }, seed).expect("generator parameters are consistent");
        let opt = exact_dst(&src).expect("within oracle limits");
        if opt.status != ExactStatus::Optimal {
            continue;
        }
        let norm = normalize(&src).expect("generated instances normalize");
        if let Some(cap) = node_cap {
            if super_tree_size(&norm, &opt) > cap {
                oversized += 1;
                continue;
            }
        }
        cases.push(DstCase { seed, src, norm, opt });
    }
    DstSuite { cases, oversized }
}

/// Exact node count of the super-tree at the optimum's state-tree depth.
/// A zero cap makes the builder stop after its counting pass.
fn super_tree_size(norm: &NormalizedInstance, opt: &ExactResult) -> u64 {
    let h = state_tree_height(norm, &opt.edges).expect("optimal trees decompose");
    match build_super_tree(norm, h, 0) {
        Err(StateError::CapExceeded { total, .. }) => total,
        other => panic!("counting pass returned {:?}", other.map(|st| st.len())),
    }
}

struct GstCase {
    inst: GroupTreeInstance,
    prep: GstPreparation,
    opt: Option<u64>,
}

fn feasible_gst(inst: GroupTreeInstance) -> Option<(GroupTreeInstance, GstPreparation)> {
    match prepare_gst(&inst) {
        Ok(prep) => Some((inst, prep)),
        Err(Error::Infeasible(_)) => None,
        Err(e) => panic!("prepare_gst failed: {e}"),
    }
}

fn gst_cases(stream: u64, count: usize, n_range: (usize, usize), k_max: usize, with_oracle: bool) -> Vec<GstCase> {
    let mut cases = Vec::with_capacity(count);
    for seed in 0.. {
        if cases.len() == count {
            break;
        }
        let mut rng = stream_rng(seed, stream);
        let n = rng.gen_range(n_range.0..=n_range.1);
        let k = rng.gen_range(1..=k_max);
        let depth = rng.gen_range(2..=8.min(n / 3));
        let d_max = rng.gen_range(1..=3);
        let raw = match gen_gst(&GstParams { n, k, depth, d_max, cost: 1..=9 }, seed) {
            Ok(r) => r,
            // Too few leaves for k groups at this shape.
            Err(_) => continue,
        };
        let inst = preprocess_gst(&raw, None).expect("generated instances preprocess");
        let Some((inst, prep)) = feasible_gst(inst) else { continue };
        let opt = if with_oracle {
            let r = exact_gst(&inst).expect("within oracle limits");
            assert_eq!(r.status, ExactStatus::Optimal, "oracle disagrees with LP feasibility");
            r.cost
        } else {
            None
        };
        cases.push(GstCase { inst, prep, opt });
    }
    cases
}

fn small_gst_suite() -> &'static [GstCase] {
    static S: OnceLock<Vec<GstCase>> = OnceLock::new();
    S.get_or_init(|| gst_cases(301, 100, (10, 60), 8, true))
}

fn e2e_gst_suite() -> &'static [GstCase] {
    static S: OnceLock<Vec<GstCase>> = OnceLock::new();
    S.get_or_init(|| gst_cases(1101, 50, (40, 200), 8, false))
}

/// Brooms with 2^15 bristles, so that `L = 17` and `γ = 2`.
fn broom_suite() -> &'static [GstCase] {
    static S: OnceLock<Vec<GstCase>> = OnceLock::new();
    S.get_or_init(|| {
        [(3usize, 4usize, 1..=9u64), (10, 16, 1..=1), (30, 64, 1..=100)]
            .into_iter()
            .enumerate()
            .map(|(i, (handle, k, cost))| {
                let raw = broom(handle, 1 << 15, k, k as u32, cost, i as u64).expect("broom parameters are consistent");
                let inst = preprocess_gst(&raw, None).expect("brooms preprocess");
                let (inst, prep) = feasible_gst(inst).expect("hub degree k admits one bristle per group");
                GstCase { inst, prep, opt: None }
            })
            .collect()
    })
}

// ---------------------------------------------------------------- helpers

/// `|Λ*(v)|` by walking parent links from every node.
fn subtree_size(parent: &[Option<usize>], v: usize) -> usize {
    (0..parent.len())
        .filter(|&u| {
            let mut w = Some(u);
            while let Some(x) = w {
                if x == v {
                    return true;
                }
                w = parent[x];
            }
            false
        })
        .count()
}

/// 0/1 vector of the super-tree nodes selected by the embedding of the
/// state tree of `edges`.
fn embedding(norm: &NormalizedInstance, st: &SuperTree, edges: &[usize]) -> Result<Vec<f64>, String> {
    let tree = norm.lift_tree(edges).map_err(|e| e.to_string())?;
    let tau = gen_state_tree(norm, &tree, st.height_budget()).map_err(|e| e.to_string())?;
    let sel = st.embed(&tau).ok_or("state tree of the optimum is not embedded")?;
    let mut x = vec![0.0; st.len()];
    sel.into_iter().for_each(|q| x[q] = 1.0);
    Ok(x)
}

/// `⌈log2(2n)⌉` by integer doubling.
fn ceil_log2_2n(n: usize) -> u32 {
    let mut l = 0;
    while (1usize << l) < 2 * n {
        l += 1;
    }
    l
}

fn gamma_of(l: u32) -> u32 {
    (31 - l.leading_zeros()).saturating_sub(2)
}

// ------------------------------------------------------------ criterion 1

fn c01_separator() -> Gate {
    let mut checked = 0;
    for seed in 0..1000u64 {
        let mut rng = stream_rng(seed, 1);
        let n = rng.gen_range(3..=256);
        let mut parent = vec![None];
        let mut kids = vec![0u8];
        for v in 1..n {
            let p = loop {
                let p = rng.gen_range(0..v);
                if kids[p] < 2 {
                    break p;
                }
            };
            parent.push(Some(p));
            kids[p] += 1;
            kids.push(0);
        }
        let tree = RootedTree::from_parents(parent.clone()).map_err(|e| e.to_string())?;
        let v = find_balanced_separator(&tree).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = subtree_size(&parent, v);
        ensure(3 * s > n && 3 * s <= 2 * n + 3, || format!("seed {seed}: n = {n}, separator {v} has |Λ*| = {s}"))?;
        checked += 1;
    }
    Ok(format!("{checked} binary trees, n in [3, 256]"))
}

// ------------------------------------------------------------ criterion 2

fn c02_round_trip() -> Gate {
    let cases = dst_cases(2, 100, (3, 12), 4, None).cases;
    let results: Vec<Result<(), String>> = cases
        .par_iter()
        .map(|c| {
            let tree = c.norm.lift_tree(&c.opt.edges).map_err(|e| e.to_string())?;
            let h = default_height(c.norm.vertex_count());
            let tau = gen_state_tree(&c.norm, &tree, h).map_err(|e| format!("seed {}: {e}", c.seed))?;
            let bad = validate_state_tree(&c.norm, &tau, h);
            ensure(bad.is_empty(), || format!("seed {}: invalid state tree {bad:?}", c.seed))?;
            let back = stitch_multi_tree(&c.norm, &tau, h).map_err(|e| format!("seed {}: {e}", c.seed))?;
            let good = back.check_good(&c.norm);
            ensure(good.is_empty(), || format!("seed {}: stitched tree not good {good:?}", c.seed))?;
            let cost = back.cost(&c.norm).map_err(|e| e.to_string())?;
            ensure(Some(cost) == c.opt.cost, || format!("seed {}: cost {cost} vs optimum {:?}", c.seed, c.opt.cost))?;
            ensure(back.sorted_labels() == tree.sorted_labels(), || format!("seed {}: label multisets differ", c.seed))
        })
        .collect();
    results.into_iter().collect::<Result<(), String>>()?;
    Ok(format!("{} oracle-optimal trees", cases.len()))
}

// ------------------------------------------------------------ criterion 3

fn c03_lp_dominance() -> Gate {
    let DstSuite { cases, oversized } = dst_cases(3, 100, (4, 10), 4, Some(SUITE_NODE_CAP));
    let gaps: Vec<Result<f64, String>> = cases
        .par_iter()
        .map(|c| {
            let opt = c.opt.cost.expect("optimal") as f64;
            let h = state_tree_height(&c.norm, &c.opt.edges).map_err(|e| e.to_string())?;
            let st = build_super_tree(&c.norm, h, DEFAULT_NODE_CAP).map_err(|e| format!("seed {}: {e}", c.seed))?;
            let lp = build_dst_lp(&st, c.norm.terminals().len());
            // The optimal tree is a feasible LP point of value `opt`.
            let x_opt = embedding(&c.norm, &st, &c.opt.edges)?;
            let viol = lp.model.max_violation(&x_opt);
            ensure(viol <= EPS_FEAS, || format!("seed {}: embedded optimum violates a row by {viol}", c.seed))?;
            let val = lp.model.objective_value(&x_opt);
            ensure((val - opt).abs() <= EPS_OBJ * opt.max(1.0), || format!("seed {}: embedded value {val} vs {opt}", c.seed))?;
            let sol = solve_lp(&lp.model).map_err(|e| e.to_string())?;
            ensure(sol.is_optimal(), || format!("seed {}: LP not optimal", c.seed))?;
            ensure(le_rel(sol.objective, opt, 1e-6), || format!("seed {}: LP {} > optimum {opt}", c.seed, sol.objective))?;
            Ok(opt - sol.objective)
        })
        .collect();
    let dst_gaps = gaps.into_iter().collect::<Result<Vec<f64>, String>>()?;

    let gst = small_gst_suite();
    for (i, c) in gst.iter().enumerate() {
        let opt = c.opt.expect("oracle ran") as f64;
        let lp = build_gst_lp(&c.inst).map_err(|e| e.to_string())?;
        let mut x_opt = vec![0.0; c.inst.vertex_count()];
        let best = exact_gst(&c.inst).map_err(|e| e.to_string())?;
        best.vertices.iter().for_each(|&v| x_opt[v] = 1.0);
        let viol = lp.model.max_violation(&x_opt);
        ensure(viol <= EPS_FEAS, || format!("group case {i}: optimal subtree violates a row by {viol}"))?;
        ensure(le_rel(c.prep.lp_cost, opt, 1e-6), || format!("group case {i}: LP {} > optimum {opt}", c.prep.lp_cost))?;
    }
    let strict = dst_gaps.iter().filter(|&&g| g > 1e-6).count();
    Ok(format!(
        "{} directed ({strict} with a strict gap, {oversized} oversized skipped), {} group instances",
        dst_gaps.len(),
        gst.len()
    ))
}

// -------------------------------------------------------- criteria 4 to 7

/// Statistics of `TRIALS` single roundings of one fractional point.
struct DstBatch {
    label: String,
    h: usize,
    h_prime: usize,
    x: Vec<f64>,
    lp_value: f64,
    node_hits: Vec<u64>,
    terminal_hits: Vec<u64>,
    cost: Summary,
    /// `exp(s·m_v)` samples for each original vertex.
    mgf: Vec<Summary>,
}

fn roll(label: String, norm: &NormalizedInstance, st: &SuperTree, x: Vec<f64>, seed: u64) -> Result<DstBatch, String> {
    let src = &norm.source;
    let h_prime = st.height();
    let s = (1.0 / (2.0 * h_prime as f64)).ln_1p();
    let outcomes: Vec<(Vec<usize>, Vec<usize>, u64, Vec<u32>)> = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let o = round_super_tree(norm, st, &x, &mut stream_rng(seed, i)).map_err(|e| e.to_string())?;
            let covered: Vec<usize> = o.tree.covered_terminals(norm).into_iter().map(|t| norm.source_vertex(t)).collect();
            let copies = o.copies[..src.vertex_count].to_vec();
            Ok((o.selected, covered, o.cost, copies))
        })
        .collect::<Result<_, String>>()?;
    let mut node_hits = vec![0u64; st.len()];
    let mut terminal_hits = vec![0u64; src.terminals.len()];
    let mut cost = Summary::default();
    let mut mgf = vec![Summary::default(); src.vertex_count];
    for (selected, covered, c, copies) in outcomes {
        selected.into_iter().for_each(|q| node_hits[q] += 1);
        for (j, t) in src.terminals.iter().enumerate() {
            terminal_hits[j] += u64::from(covered.contains(t));
        }
        cost.push(c as f64);
        for (m, &k) in mgf.iter_mut().zip(&copies) {
            m.push((s * f64::from(k)).exp());
        }
    }
    let lp_value = st_cost_value(st, &x);
    Ok(DstBatch { label, h: st.height_budget(), h_prime, x, lp_value, node_hits, terminal_hits, cost, mgf })
}

fn st_cost_value(st: &SuperTree, x: &[f64]) -> f64 {
    (0..st.len()).map(|q| st.cost(q) as f64 * x[q]).sum()
}

/// Twenty instances, each rounded from its LP optimum and from a mixture
/// of that optimum with the embeddings of two distinct feasible trees.
fn dst_batches() -> &'static Result<Vec<DstBatch>, String> {
    static B: OnceLock<Result<Vec<DstBatch>, String>> = OnceLock::new();
    B.get_or_init(|| {
        let cases = dst_cases(4, 20, (5, 8), 4, Some(SUITE_NODE_CAP)).cases;
        let per_case: Vec<Result<Vec<DstBatch>, String>> = cases
            .par_iter()
            .map(|c| {
                // Second tree: the optimum once every edge of the first costs 100 more.
                let mut penalized = c.src.clone();
                c.opt.edges.iter().for_each(|&e| penalized.edges[e].cost += 100);
                let alt = exact_dst(&penalized).map_err(|e| e.to_string())?;
                let h1 = state_tree_height(&c.norm, &c.opt.edges).map_err(|e| e.to_string())?;
                let h2 = state_tree_height(&c.norm, &alt.edges).map_err(|e| e.to_string())?;
                let h = h1.max(h2);
                let st = build_super_tree(&c.norm, h, DEFAULT_NODE_CAP).map_err(|e| e.to_string())?;
                let lp = build_dst_lp(&st, c.norm.terminals().len());
                let sol = solve_lp(&lp.model).map_err(|e| e.to_string())?;
                ensure(sol.is_optimal(), || format!("seed {}: LP not optimal", c.seed))?;
                let e1 = embedding(&c.norm, &st, &c.opt.edges)?;
                let e2 = embedding(&c.norm, &st, &alt.edges)?;
                let mix: Vec<f64> = (0..st.len()).map(|q| 0.5 * sol.x[q] + 0.25 * e1[q] + 0.25 * e2[q]).collect();
                ensure(lp.model.max_violation(&mix) <= EPS_FEAS, || format!("seed {}: mixture infeasible", c.seed))?;
                Ok(vec![
                    roll(format!("seed {} LP", c.seed), &c.norm, &st, sol.x, c.seed)?,
                    roll(format!("seed {} mixture", c.seed), &c.norm, &st, mix, c.seed + 1_000_000)?,
                ])
            })
            .collect();
        per_case.into_iter().collect::<Result<Vec<_>, _>>().map(|v| v.into_iter().flatten().collect())
    })
}

fn c04_marginals() -> Gate {
    let batches = dst_batches().as_ref().map_err(Clone::clone)?;
    let mut fractional = 0;
    let mut misses = Vec::new();
    for b in batches {
        for (q, (&hits, &x)) in b.node_hits.iter().zip(&b.x).enumerate() {
            if x > EPS_FEAS && x < 1.0 - EPS_FEAS {
                fractional += 1;
            }
            if !frequency_matches(hits, TRIALS, x, Z) {
                misses.push(format!("{} node {q}: {hits}/{TRIALS} vs x = {x:.4}", b.label));
            }
        }
    }
    let nodes: usize = batches.iter().map(|b| b.x.len()).sum();
    ensure(misses.is_empty(), || format!("{} of {nodes} nodes outside 3σ: {}", misses.len(), misses.join("; ")))?;
    Ok(format!("{} points, {nodes} nodes ({fractional} fractional), {TRIALS} roundings each", batches.len()))
}

fn c05_coverage() -> Gate {
    let batches = dst_batches().as_ref().map_err(Clone::clone)?;
    let mut worst = f64::INFINITY;
    for b in batches {
        let p = 1.0 / (b.h as f64 + 1.0);
        let floor = p - Z * bernoulli_sigma(p, TRIALS);
        for (j, &hits) in b.terminal_hits.iter().enumerate() {
            let rate = hits as f64 / TRIALS as f64;
            worst = worst.min(rate - p);
            ensure(rate >= floor, || format!("{} terminal #{j}: rate {rate} < {floor}", b.label))?;
        }
    }
    Ok(format!("min rate − 1/(h+1) = {worst:.4}"))
}

fn c06_expected_cost() -> Gate {
    let batches = dst_batches().as_ref().map_err(Clone::clone)?;
    let mut worst = f64::NEG_INFINITY;
    for b in batches {
        let cap = b.lp_value + Z * b.cost.std_error();
        worst = worst.max(b.cost.mean / b.lp_value);
        ensure(le_rel(b.cost.mean, cap, EPS_OBJ), || format!("{}: mean {} > {cap}", b.label, b.cost.mean))?;
    }
    Ok(format!("max mean/LP = {worst:.4}"))
}

fn c07_concentration() -> Gate {
    let batches = dst_batches().as_ref().map_err(Clone::clone)?;
    let mut worst = f64::NEG_INFINITY;
    for b in batches {
        let bound = 1.0 + 2.0 / b.h_prime as f64;
        for (v, m) in b.mgf.iter().enumerate() {
            worst = worst.max(m.mean - bound);
            ensure(m.mean <= bound + Z * m.std_error(), || format!("{} vertex {v}: E[e^(s m)] = {} > {bound}", b.label, m.mean))?;
        }
    }
    Ok(format!("max E[e^(s m_v)] − (1 + 2/h′) = {worst:.4}"))
}

// ------------------------------------------------------------ criterion 8

fn c08_dst_end_to_end() -> Gate {
    let DstSuite { cases, oversized } = dst_cases(8, 50, (4, 10), 4, Some(SUITE_NODE_CAP));
    let mut full = 0;
    for (i, c) in cases.iter().enumerate() {
        let h = state_tree_height(&c.norm, &c.opt.edges).map_err(|e| e.to_string())?;
        let params = DstRunParams { h: Some(h), seed: i as u64, ..DstRunParams::default() };
        let report = run_dst(&c.norm, &params).map_err(|e| format!("seed {}: {e}", c.seed))?;
        let expected_q = ((h as f64 + 1.0) * (10.0 * c.src.terminals.len() as f64).ln()).ceil() as usize;
        ensure(report.q == expected_q, || format!("seed {}: Q = {} vs {expected_q}", c.seed, report.q))?;
        let issues = verify_dst_report(&c.src, &report);
        ensure(issues.is_empty(), || format!("seed {}: {issues:?}", c.seed))?;
        ensure(report.tree_edges.is_empty() || !report.degree_violations.is_empty(), || {
            format!("seed {}: degree ratios missing", c.seed)
        })?;
        full += usize::from(report.coverage.is_full());
    }
    ensure(full * 10 >= cases.len() * 8, || format!("full coverage in {full} of {} runs", cases.len()))?;
    Ok(format!("full coverage in {full} of {} runs ({oversized} oversized skipped), every report verified", cases.len()))
}

// ------------------------------------------------------------ criterion 9

/// P1 to P6, monotonicity of `x′` and the branching bound, recomputed.
fn scaling_issues(c: &GstCase) -> Vec<String> {
    let inst = &c.inst;
    let p = &c.prep;
    let n = inst.vertex_count();
    let tol = 1e-6;
    let xt = &p.modified.x;
    let xp = &p.scaled.x_prime;
    let mut out = Vec::new();
    let lib = check_modified(inst, &p.tree, &p.modified, p.lp_cost);
    if !lib.is_empty() {
        out.push(format!("library scan: {lib:?}"));
    }
    for u in 0..n {
        let v = xt[u];
        if v != 0.0 {
            let e = -v.log2();
            if e.fract() != 0.0 || v > 1.0 || v * 2.0 * (n as f64) < 1.0 - tol {
                out.push(format!("P1 at {u}: {v}"));
            }
        }
        if let Some(par) = inst.parent[u] {
            if xt[u] > xt[par] {
                out.push(format!("P2 at {u}"));
            }
            if xp[u] > xp[par] * (1.0 + tol) {
                out.push(format!("x′ grows into {u}"));
            }
        }
    }
    for (t, g) in inst.groups.iter().enumerate() {
        let mass: f64 = g.iter().map(|&o| xt[o]).sum();
        if !(0.5 * (1.0 - tol)..=2.0 * (1.0 + tol)).contains(&mass) {
            out.push(format!("P3 group {t}: {mass}"));
        }
        let mut below = vec![0.0; n];
        for &o in g {
            let mut w = Some(o);
            while let Some(a) = w {
                below[a] += xt[o];
                w = inst.parent[a];
            }
        }
        for u in 0..n {
            if below[u] > 2.0 * xt[u] * (1.0 + tol) + 1e-12 {
                out.push(format!("P4 group {t} at {u}: {} > 2·{}", below[u], xt[u]));
            }
        }
    }
    let mut child_mass = vec![0.0; n];
    let mut child_ratio = vec![0.0; n];
    for u in 0..n {
        if let Some(par) = inst.parent[u] {
            child_mass[par] += xt[u];
            if xp[par] > 0.0 {
                child_ratio[par] += xp[u] / xp[par];
            }
        }
    }
    for u in 0..n {
        let d = f64::from(inst.degree_bound[u]);
        if child_mass[u] > 2.0 * d * xt[u] * (1.0 + tol) + 1e-12 {
            out.push(format!("P5 at {u}: {} > 2·{d}·{}", child_mass[u], xt[u]));
        }
        if child_ratio[u] > 4.0 * d * (1.0 + tol) {
            out.push(format!("branching at {u}: {} > 4·{d}", child_ratio[u]));
        }
    }
    let cost: f64 = xt.iter().zip(&inst.cost).map(|(x, &c)| x * c as f64).sum();
    if cost > 2.0 * p.lp_cost * (1.0 + tol) + 1e-9 {
        out.push(format!("P6: {cost} > 2·{}", p.lp_cost));
    }
    out
}

fn c09_scaling() -> Gate {
    let suites = [("small", small_gst_suite()), ("broom", broom_suite()), ("end-to-end", e2e_gst_suite())];
    let mut count = 0;
    for (name, suite) in suites {
        for (i, c) in suite.iter().enumerate() {
            let issues = scaling_issues(c);
            ensure(issues.is_empty(), || format!("{name} case {i}: {}", issues.join("; ")))?;
            count += 1;
        }
    }
    Ok(format!("{count} instances"))
}

// ----------------------------------------------------------- criterion 10

fn group_rates(c: &GstCase, seed: u64) -> Vec<f64> {
    let group_of = c.inst.group_of();
    let k = c.inst.k();
    let hits = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let mut hit = vec![0u64; k];
            for v in c.prep.sampler.sample(&mut stream_rng(seed, i)) {
                if let Some(t) = group_of[v] {
                    hit[t] = 1;
                }
            }
            hit
        })
        .reduce(|| vec![0u64; k], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    hits.into_iter().map(|h| h as f64 / TRIALS as f64).collect()
}

fn c10_group_coverage() -> Gate {
    let mut worst = f64::INFINITY;
    let mut groups = 0;
    for (i, c) in broom_suite().iter().enumerate() {
        let l = ceil_log2_2n(c.inst.vertex_count());
        let g = gamma_of(l);
        ensure(g >= 1, || format!("broom {i}: γ = 0"))?;
        ensure(c.prep.scaled.big_l == l && c.prep.scaled.gamma == g, || format!("broom {i}: L, γ disagree"))?;
        let alpha0 = alpha_sequence(l, g)[0];
        for (t, rate) in group_rates(c, 10 + i as u64).into_iter().enumerate() {
            let z: f64 = c.inst.groups[t].iter().map(|&o| c.prep.modified.x[o]).sum();
            let p = alpha0 * z / 2.0;
            worst = worst.min(rate - p);
            ensure(rate >= p - Z * bernoulli_sigma(p, TRIALS), || format!("broom {i} group {t}: {rate} < α0·z/2 = {p}"))?;
            groups += 1;
        }
    }
    for (i, c) in small_gst_suite().iter().enumerate() {
        let l = ceil_log2_2n(c.inst.vertex_count());
        ensure(gamma_of(l) == 0, || format!("small case {i}: γ > 0"))?;
        for (t, rate) in group_rates(c, 100 + i as u64).into_iter().enumerate() {
            let z: f64 = c.inst.groups[t].iter().map(|&o| c.prep.modified.x[o]).sum();
            let p = z / (4.0 * f64::from(l));
            worst = worst.min(rate - p);
            ensure(rate >= p - Z * bernoulli_sigma(p, TRIALS), || format!("small case {i} group {t}: {rate} < z/(4L) = {p}"))?;
            groups += 1;
        }
    }
    Ok(format!("{groups} groups on {} brooms and {} small trees, min margin {worst:.4}", broom_suite().len(), small_gst_suite().len()))
}

// ----------------------------------------------------------- criterion 11

fn c11_gst_end_to_end() -> Gate {
    let suite = e2e_gst_suite();
    let mut full = 0;
    let mut worst = 0.0f64;
    for (i, c) in suite.iter().enumerate() {
        let params = GstRunParams { seed: i as u64, instance: format!("case {i}"), ..GstRunParams::default() };
        let r = run_gst_rounding(&c.inst, &c.prep, &params).map_err(|e| format!("case {i}: {e}"))?;
        let issues = verify_gst_report(&c.inst, &r);
        ensure(issues.is_empty(), || format!("case {i}: {issues:?}"))?;
        ensure(r.degree_violations.values().all(|d| d.is_finite()), || format!("case {i}: non-finite degree ratio"))?;
        ensure(r.union_vertices.len() <= 1 || !r.degree_violations.is_empty(), || format!("case {i}: degree ratios missing"))?;
        let cap = 4.0 * f64::from(1u32 << r.gamma) * r.m as f64;
        let ratio = if r.lp_cost > 0.0 { r.union_cost as f64 / r.lp_cost } else { 0.0 };
        ensure(r.lp_cost > 0.0 || r.union_cost == 0, || format!("case {i}: positive union cost over a zero LP"))?;
        ensure(ratio <= cap, || format!("case {i}: union/LP = {ratio} > {cap}"))?;
        worst = worst.max(ratio / cap);
        full += usize::from(r.all_covered());
    }
    ensure(full * 10 >= suite.len() * 9, || format!("all groups covered in {full} of {} runs", suite.len()))?;
    Ok(format!("all groups covered in {full} of {} runs, max (union/LP)/(4·2^γ·M) = {worst:.4}", suite.len()))
}

// ----------------------------------------------------------- criterion 12

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `Σ_{i ≤ 2j} (−y)^i / i!`, an upper bound on `e^{−y}` for `y ≥ 0`.
fn exp_neg_upper(y: &BigRational, terms: usize) -> BigRational {
    let mut sum = rat(0, 1);
    let mut term = rat(1, 1);
    for i in 0..=2 * terms {
        sum += &term;
        term = -(term * y) / rat(i as i64 + 1, 1);
    }
    sum
}

fn c12_alpha() -> Gate {
    for l in 1u32..=64 {
        let g = gamma_of(l);
        let two_l = rat(2 * i64::from(l), 1);
        let mut exact = vec![rat(0, 1); g as usize + 1];
        exact[g as usize] = rat(1, 1) / &two_l;
        for i in (0..g as usize).rev() {
            let a = exact[i + 1].clone();
            exact[i] = rat(2, 1) * &a - rat(4, 1) * &a * &a;
        }
        for (i, a) in exact.iter().enumerate() {
            let cap = rat(1 << (g as usize - i), 1) / &two_l;
            ensure(*a <= cap, || format!("L = {l}: α_{i} above 2^(γ−ℓ)/(2L)"))?;
        }
        let y = rat(1 << g, i64::from(l));
        let floor = rat(1 << g, 1) / &two_l * exp_neg_upper(&y, 20);
        ensure(exact[0] >= floor, || format!("L = {l}: α_0 below (2^γ/2L)e^(−2^γ/L)"))?;
        let lib = alpha_sequence(l, g);
        ensure(lib.len() == exact.len(), || format!("L = {l}: {} values, expected {}", lib.len(), exact.len()))?;
        for (i, (&f, a)) in lib.iter().zip(&exact).enumerate() {
            let got = BigRational::from_float(f).ok_or("non-finite α")?;
            let diff = if got > *a { &got - a } else { a - &got };
            ensure(diff <= a * rat(1, 1_000_000_000_000), || format!("L = {l}: library α_{i} = {f} differs from exact"))?;
        }
    }
    Ok("L = 1..64".into())
}
