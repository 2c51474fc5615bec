//! Synthetic graph streams for tests, benchmarks and the verification harness.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ingest::{EdgeKey, NodeId, StreamSource};

/// Complete graph on nodes `0..n`, edges in lexicographic order.
pub fn complete(n: u64) -> Result<StreamSource> {
    let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    StreamSource::from_pairs(pairs, format!("complete:{n}"))
}

/// Star with hub `0` and `leaves` leaves.
pub fn star(leaves: u64) -> Result<StreamSource> {
    StreamSource::from_pairs((1..=leaves).map(|l| (0, l)), format!("star:{leaves}"))
}

/// Erdős–Rényi G(n, p), edges in lexicographic order.
pub fn erdos_renyi(n: u64, p: f64, seed: u64) -> Result<StreamSource> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < p {
                pairs.push((a, b));
            }
        }
    }
    StreamSource::from_pairs(pairs, format!("gnp:{n}:{p}:{seed}"))
}

/// Uniform random graph with exactly `edges` distinct edges over `n` nodes
/// (G(n, M) by rejection). Suited to large sparse streams.
pub fn random_edges(n: u64, edges: usize, seed: u64) -> Result<StreamSource> {
    assert!(n >= 2, "need at least two nodes");
    let max = (n as u128 * (n as u128 - 1) / 2) as usize;
    let edges = edges.min(max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<EdgeKey> = HashSet::with_capacity(edges);
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(edges);
    while pairs.len() < edges {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if let Some(k) = EdgeKey::new(a, b) {
            if seen.insert(k) {
                pairs.push((k.lo, k.hi));
            }
        }
    }
    StreamSource::from_pairs(pairs, format!("gnm:{n}:{edges}:{seed}"))
}
