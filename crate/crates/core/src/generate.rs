//! Seeded random instance generators.

use std::collections::HashSet;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng as _;
use thiserror::Error;

use crate::instances::{DirectedInstance, Edge, GroupTreeInstance};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("inconsistent generator parameters: {0}")]
    Parameters(String),
}

fn bad(msg: impl Into<String>) -> GenError {
    GenError::Parameters(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DstParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub d_max: u32,
    pub cost: RangeInclusive<u64>,
}

/// Random digraph rooted at 0. A uniformly random arborescence spanning all
/// vertices comes first, so every terminal is reachable from the root; the
/// remaining `m - (n - 1)` edges are uniform among the unused non-root heads.
pub fn gen_dst(p: &DstParams, seed: u64) -> Result<DirectedInstance, GenError> {
    let DstParams { n, m, k, d_max, ref cost } = *p;
    if n < 2 {
        return Err(bad("n must be at least 2"));
    }
    if m < n - 1 || m > (n - 1) * (n - 1) {
        return Err(bad(format!("m = {m} outside [{}, {}]", n - 1, (n - 1) * (n - 1))));
    }
    if k == 0 || k > n - 1 {
        return Err(bad(format!("k = {k} outside [1, {}]", n - 1)));
    }
    if d_max == 0 || cost.is_empty() {
        return Err(bad("d_max and the cost range must be non-empty"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(&mut rng);
    order.insert(0, 0);

    let mut used = HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for i in 1..n {
        let (u, v) = (order[rng.gen_range(0..i)], order[i]);
        used.insert((u, v));
        edges.push(Edge { from: u, to: v, cost: rng.gen_range(cost.clone()) });
    }
    let mut free: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (1..n).map(move |v| (u, v))).filter(|&(u, v)| u != v && !used.contains(&(u, v))).collect();
    free.shuffle(&mut rng);
    for &(u, v) in free.iter().take(m - (n - 1)) {
        edges.push(Edge { from: u, to: v, cost: rng.gen_range(cost.clone()) });
    }
    edges.sort_by_key(|e| (e.from, e.to));

    let mut candidates: Vec<usize> = (1..n).collect();
    candidates.shuffle(&mut rng);
    let mut terminals: Vec<usize> = candidates[..k].to_vec();
    terminals.sort_unstable();
    let degree_bound = (0..n).map(|_| rng.gen_range(1..=d_max)).collect();
    Ok(DirectedInstance { vertex_count: n, edges, root: 0, terminals, degree_bound })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GstParams {
    pub n: usize,
    pub k: usize,
    /// Maximum depth; a root path of exactly this depth is always present.
    pub depth: usize,
    pub d_max: u32,
    pub cost: RangeInclusive<u64>,
}

/// Random rooted tree with vertex 0 as the root: a spine `0 → 1 → … → depth`
/// and every further vertex attached below a uniformly chosen vertex of depth
/// less than `depth`. Groups are disjoint leaf sets; each group gets one
/// leaf, and every other leaf joins a uniform group with probability 1/2.
pub fn gen_gst(p: &GstParams, seed: u64) -> Result<GroupTreeInstance, GenError> {
    let GstParams { n, k, depth, d_max, ref cost } = *p;
    if depth == 0 || n < depth + 1 {
        return Err(bad(format!("need 1 ≤ depth < n, got depth = {depth}, n = {n}")));
    }
    if k == 0 || d_max == 0 || cost.is_empty() {
        return Err(bad("k, d_max and the cost range must be non-empty"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut parent = vec![None; n];
    let mut level = vec![0usize; n];
    for v in 1..=depth {
        parent[v] = Some(v - 1);
        level[v] = v;
    }
    let mut open: Vec<usize> = (0..depth).collect();
    for v in depth + 1..n {
        let p = open[rng.gen_range(0..open.len())];
        parent[v] = Some(p);
        level[v] = level[p] + 1;
        if level[v] < depth {
            open.push(v);
        }
    }
    let mut has_child = vec![false; n];
    for p in parent.iter().flatten() {
        has_child[*p] = true;
    }
    let mut leaves: Vec<usize> = (0..n).filter(|&v| !has_child[v]).collect();
    if leaves.len() < k {
        return Err(bad(format!("{} leaves cannot host {k} groups", leaves.len())));
    }
    leaves.shuffle(&mut rng);
    let mut groups = vec![Vec::new(); k];
    for (i, &v) in leaves.iter().enumerate() {
        if i < k {
            groups[i].push(v);
        } else if rng.gen_bool(0.5) {
            groups[rng.gen_range(0..k)].push(v);
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    let cost = (0..n).map(|_| rng.gen_range(cost.clone())).collect();
    let degree_bound = (0..n).map(|_| rng.gen_range(1..=d_max)).collect();
    Ok(GroupTreeInstance { parent, cost, groups, degree_bound, synthetic_leaf: vec![false; n] })
}

/// Broom: a handle path `0 → … → handle` ending in a hub with `bristles`
/// leaf children. Groups take the bristles round-robin after a shuffle;
/// bristle costs are drawn from `cost`, handle costs are 1, and the hub may
/// keep `hub_degree` children.
pub fn broom(
    handle: usize,
    bristles: usize,
    k: usize,
    hub_degree: u32,
    cost: RangeInclusive<u64>,
    seed: u64,
) -> Result<GroupTreeInstance, GenError> {
    if k == 0 || bristles < k || hub_degree == 0 || cost.is_empty() {
        return Err(bad("broom needs 1 ≤ k ≤ bristles, hub_degree ≥ 1 and a cost range"));
    }
    let mut rng = stream_rng(seed, 0);
    let hub = handle;
    let n = handle + 1 + bristles;
    let mut parent: Vec<Option<usize>> = (0..=handle).map(|v| v.checked_sub(1)).collect();
    parent.extend(std::iter::repeat_n(Some(hub), bristles));
    let mut cost_v = vec![1u64; handle + 1];
    cost_v.extend((0..bristles).map(|_| rng.gen_range(cost.clone())));
    let mut ids: Vec<usize> = (hub + 1..n).collect();
    ids.shuffle(&mut rng);
    let mut groups = vec![Vec::new(); k];
    for (i, v) in ids.into_iter().enumerate() {
        groups[i % k].push(v);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    let mut degree_bound = vec![1u32; n];
    degree_bound[hub] = hub_degree;
    Ok(GroupTreeInstance { parent, cost: cost_v, groups, degree_bound, synthetic_leaf: vec![false; n] })
}
