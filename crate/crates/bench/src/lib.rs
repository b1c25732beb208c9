//! Fixed benchmark fixtures shared by the criterion benches.

use dbsteiner_core::generate::{gen_dst, gen_gst, DstParams, GstParams};
use dbsteiner_core::oracle::exact_dst;
use dbsteiner_core::dst_round::state_tree_height;
use dbsteiner_core::{normalize, preprocess_gst, GroupTreeInstance, NormalizedInstance};

/// A small directed instance and the state-tree depth of its optimum.
pub fn dst_fixture(seed: u64) -> (NormalizedInstance, usize) {
    let p = DstParams { n: 7, m: 12, k: 3, d_max: 3, cost: 1..=9 };
    let src = gen_dst(&p, seed).expect("valid generator parameters");
    let norm = normalize(&src).expect("generated instances normalize");
    let opt = exact_dst(&src).expect("within oracle limits");
    let h = state_tree_height(&norm, &opt.edges).expect("optimal tree lifts");
    (norm, h)
}

/// A preprocessed group instance on `n` tree vertices.
pub fn gst_fixture(n: usize, seed: u64) -> GroupTreeInstance {
    let p = GstParams { n, k: 6, depth: 8, d_max: 3, cost: 1..=9 };
    let raw = gen_gst(&p, seed).expect("valid generator parameters");
    preprocess_gst(&raw, None).expect("generated instances preprocess")
}
