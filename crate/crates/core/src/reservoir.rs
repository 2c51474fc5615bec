//! Fixed-size priority-ordered edge reservoir.
//!
//! Every arriving edge `k` gets a weight `w(k)` computed against the current
//! sample, an independent draw `u(k)` on `(0, 1]` and the priority
//! `r(k) = w(k) / u(k)`. The reservoir keeps the `m` highest priorities seen so
//! far; `zstar` is the largest priority ever discarded, and resident edge `i`
//! has conditional inclusion probability `min(1, w(i) / zstar)`.
//!
//! Ties on priority are broken by arrival: among equal priorities the newest
//! edge is discarded first.

use std::collections::{HashMap, HashSet};

use rustc_hash::FxBuildHasher;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GpsError, Result};
use crate::heap::{HeapItem, IndexedMinHeap};
use crate::ingest::{Edge, EdgeKey, NodeId};
use crate::scalar::Scalar;
use crate::weight::EdgeWeight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Estimates are computed from the reservoir at query time.
    Post,
    /// Estimates are accumulated as edges arrive; resident edges carry
    /// covariance accumulators.
    Instream,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Post => "post",
            Mode::Instream => "instream",
        }
    }
}

/// Per-edge cumulative covariance terms used by in-stream estimation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulators<F> {
    pub tri: F,
    pub wedge: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledEdge<F> {
    edge: Edge,
    weight: F,
    draw: F,
    priority: F,
    pub(crate) acc: Accumulators<F>,
}

impl<F: Scalar> SampledEdge<F> {
    pub fn edge(&self) -> &Edge {
        &self.edge
    }

    pub fn weight(&self) -> F {
        self.weight
    }

    pub fn draw(&self) -> F {
        self.draw
    }

    pub fn priority(&self) -> F {
        self.priority
    }

    pub fn accumulators(&self) -> Accumulators<F> {
        self.acc
    }
}

impl<F: Scalar> HeapItem for SampledEdge<F> {
    type Key = EdgeKey;

    fn key(&self) -> EdgeKey {
        self.edge.key()
    }

    fn precedes(&self, other: &Self) -> bool {
        self.priority < other.priority
            || (self.priority == other.priority && self.edge.arrival > other.edge.arrival)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateOutcome<F> {
    /// Whether the arriving edge is resident after the update.
    pub inserted: bool,
    /// The edge that left the provisional sample: a previous resident, or the
    /// arriving edge itself when it was rejected.
    pub evicted: Option<Edge>,
    pub zstar: F,
    pub weight: F,
    pub priority: F,
}

/// Sampled neighbours of a node. The hasher is fixed so iteration order, and
/// with it floating-point summation order, is reproducible.
pub type NodeSet = HashSet<NodeId, FxBuildHasher>;
pub(crate) type Adjacency = HashMap<NodeId, NodeSet, FxBuildHasher>;

#[derive(Clone, Debug)]
pub struct ReservoirState<F: Scalar> {
    capacity: usize,
    pub(crate) heap: IndexedMinHeap<SampledEdge<F>>,
    pub(crate) adjacency: Adjacency,
    zstar: F,
    mode: Mode,
    processed: u64,
    evictions: u64,
}

impl<F: Scalar> ReservoirState<F> {
    pub fn new(capacity: usize, mode: Mode) -> Result<Self> {
        if capacity == 0 {
            return Err(GpsError::InvalidConfig("reservoir capacity must be >= 1".into()));
        }
        Ok(Self {
            capacity,
            heap: IndexedMinHeap::with_capacity(capacity.min(1 << 20) + 1),
            adjacency: Adjacency::default(),
            zstar: F::zero(),
            mode,
            processed: 0,
            evictions: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn zstar(&self) -> F {
        self.zstar
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of arrivals passed to `update`.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Number of times the provisional sample overflowed.
    pub fn evictions(&self) -> u64 {
        self.evictions
    }

    pub fn contains(&self, key: &EdgeKey) -> bool {
        self.heap.contains(key)
    }

    pub fn get(&self, key: &EdgeKey) -> Option<&SampledEdge<F>> {
        self.heap.get(key)
    }

    /// Resident edges in heap order.
    pub fn entries(&self) -> &[SampledEdge<F>] {
        self.heap.as_slice()
    }

    /// Minimum-priority resident.
    pub fn min_entry(&self) -> Option<&SampledEdge<F>> {
        self.heap.peek()
    }

    pub fn neighbors(&self, node: NodeId) -> Option<&NodeSet> {
        self.adjacency.get(&node)
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency.get(&node).map_or(0, NodeSet::len)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Common sampled neighbours of `a` and `b`, found by scanning the smaller
    /// neighbourhood and probing the larger.
    pub fn common_neighbors(&self, a: NodeId, b: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        common_neighbors(&self.adjacency, a, b)
    }

    /// `|Γ̂(a) ∩ Γ̂(b)|`: the number of sampled triangles an edge `(a, b)` would close.
    pub fn shared_neighbors(&self, a: NodeId, b: NodeId) -> usize {
        self.common_neighbors(a, b).count()
    }

    /// `min(1, w / zstar)`, or 1 before the first eviction.
    pub fn prob_for_weight(&self, weight: F) -> F {
        inclusion_for(weight, self.zstar)
    }

    /// Conditional inclusion probability of a resident edge.
    pub fn inclusion_prob(&self, key: &EdgeKey) -> Result<F> {
        self.heap
            .get(key)
            .map(|s| self.prob_for_weight(s.weight))
            .ok_or(GpsError::NotResident(key.lo, key.hi))
    }

    /// Processes one arrival: draw `u`, weigh, prioritize, insert and evict.
    pub fn update<W, R>(&mut self, edge: Edge, weight_fn: &W, rng: &mut R) -> Result<UpdateOutcome<F>>
    where
        W: EdgeWeight<F> + ?Sized,
        R: Rng + ?Sized,
    {
        let draw = uniform_open_closed(rng);
        self.update_with_draw(edge, weight_fn, draw)
    }

    /// [`update`](Self::update) with an explicit draw `u ∈ (0, 1]`.
    pub fn update_with_draw<W>(&mut self, edge: Edge, weight_fn: &W, draw: F) -> Result<UpdateOutcome<F>>
    where
        W: EdgeWeight<F> + ?Sized,
    {
        if !(draw > F::zero() && draw <= F::one()) {
            return Err(GpsError::InvalidConfig(format!("draw {draw} outside (0, 1]")));
        }
        let key = edge.key();
        if self.heap.contains(&key) {
            return Err(GpsError::AlreadyResident(key.lo, key.hi));
        }
        let weight = weight_fn.weight(&edge, self);
        if !(weight.is_finite() && weight > F::zero()) {
            return Err(GpsError::InvalidConfig(format!(
                "weight function returned {weight} for edge ({}, {})",
                edge.u, edge.v
            )));
        }
        let priority = weight / draw;
        let candidate = SampledEdge {
            edge,
            weight,
            draw,
            priority,
            acc: Accumulators::default(),
        };
        self.processed += 1;

        let mut inserted = true;
        let mut evicted = None;
        if self.heap.len() < self.capacity {
            let _ = self.heap.push(candidate);
            self.link(key);
        } else {
            self.evictions += 1;
            let root = self.heap.peek().expect("full reservoir has a root");
            if candidate.precedes(root) {
                self.zstar = self.zstar.max(priority);
                inserted = false;
                evicted = Some(edge);
            } else {
                let old = self.heap.replace_root(candidate).expect("non-empty heap");
                self.zstar = self.zstar.max(old.priority);
                self.unlink(old.edge.key());
                self.link(key);
                evicted = Some(old.edge);
            }
        }
        Ok(UpdateOutcome {
            inserted,
            evicted,
            zstar: self.zstar,
            weight,
            priority,
        })
    }

    /// Drops in-stream accumulators and switches to post-stream mode. The
    /// sample itself is unchanged.
    pub fn into_post(mut self) -> Self {
        self.heap.for_each_mut(|s| s.acc = Accumulators::default());
        self.mode = Mode::Post;
        self
    }

    #[cfg(test)]
    pub(crate) fn accumulators_mut(&mut self, key: &EdgeKey) -> Option<&mut Accumulators<F>> {
        self.heap.get_mut(key).map(|s| &mut s.acc)
    }

    fn link(&mut self, key: EdgeKey) {
        self.adjacency.entry(key.lo).or_default().insert(key.hi);
        self.adjacency.entry(key.hi).or_default().insert(key.lo);
    }

    fn unlink(&mut self, key: EdgeKey) {
        for (a, b) in [(key.lo, key.hi), (key.hi, key.lo)] {
            if let Some(set) = self.adjacency.get_mut(&a) {
                set.remove(&b);
                if set.is_empty() {
                    self.adjacency.remove(&a);
                }
            }
        }
    }

    /// Structural self-check: heap order, position map, adjacency mirrors
    /// the resident set, and residents beat the threshold.
    pub fn is_consistent(&self) -> bool {
        if !self.heap.is_consistent() || self.heap.len() > self.capacity {
            return false;
        }
        let degree_sum: usize = self.adjacency.values().map(NodeSet::len).sum();
        if degree_sum != 2 * self.heap.len() {
            return false;
        }
        if self.adjacency.values().any(NodeSet::is_empty) {
            return false;
        }
        for (&a, set) in &self.adjacency {
            for &b in set {
                match EdgeKey::new(a, b) {
                    Some(k) if self.heap.contains(&k) => {}
                    _ => return false,
                }
            }
        }
        if self.zstar > F::zero() {
            if self.evictions == 0 {
                return false;
            }
            if self.heap.as_slice().iter().any(|s| s.priority <= self.zstar) {
                return false;
            }
        } else if self.evictions > 0 {
            return false;
        }
        true
    }

    pub fn snapshot(&self) -> ReservoirSnapshot<F> {
        let mut edges: Vec<SnapshotEdge<F>> = self
            .heap
            .as_slice()
            .iter()
            .map(|s| SnapshotEdge {
                u: s.edge.u,
                v: s.edge.v,
                w: s.weight,
                priority: s.priority,
            })
            .collect();
        edges.sort_by_key(|e| (e.u, e.v));
        ReservoirSnapshot {
            capacity: self.capacity,
            zstar: self.zstar,
            edges,
        }
    }
}

pub(crate) fn inclusion_for<F: Scalar>(weight: F, zstar: F) -> F {
    if zstar == F::zero() {
        F::one()
    } else {
        F::one().min(weight / zstar)
    }
}

pub(crate) fn common_neighbors<'a>(
    adjacency: &'a Adjacency,
    a: NodeId,
    b: NodeId,
) -> impl Iterator<Item = NodeId> + 'a {
    let pair = match (adjacency.get(&a), adjacency.get(&b)) {
        (Some(x), Some(y)) if x.len() <= y.len() => Some((x, y)),
        (Some(x), Some(y)) => Some((y, x)),
        _ => None,
    };
    pair.into_iter()
        .flat_map(|(small, large)| small.iter().filter(move |n| large.contains(n)))
        .copied()
}

/// Maps a draw `x ∈ [0, 1)` onto `(0, 1]` as `1 - x`.
pub fn open_closed_from<F: Scalar>(x: f64) -> F {
    F::lit(1.0 - x)
}

/// A uniform draw on `(0, 1]`.
pub fn uniform_open_closed<F: Scalar, R: Rng + ?Sized>(rng: &mut R) -> F {
    open_closed_from(rng.gen::<f64>())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnapshotEdge<F> {
    pub u: NodeId,
    pub v: NodeId,
    pub w: F,
    pub priority: F,
}

/// Debug/golden export of the sample, edges sorted by endpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReservoirSnapshot<F> {
    pub capacity: usize,
    pub zstar: F,
    pub edges: Vec<SnapshotEdge<F>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::WeightFunction;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(a: u64, b: u64, t: u64) -> Edge {
        Edge::new(a, b, t).unwrap()
    }

    fn uniform() -> WeightFunction<f64> {
        WeightFunction::Uniform
    }

    #[test]
    fn zero_capacity_rejected() {
        assert!(ReservoirState::<f64>::new(0, Mode::Post).is_err());
    }

    #[test]
    fn shared_neighbors_single() {
        let mut s = ReservoirState::<f64>::new(10, Mode::Post).unwrap();
        s.update_with_draw(e(1, 3, 1), &uniform(), 1.0).unwrap();
        s.update_with_draw(e(2, 3, 2), &uniform(), 1.0).unwrap();
        assert_eq!(s.shared_neighbors(1, 2), 1);
        assert_eq!(s.shared_neighbors(2, 1), 1);
        assert_eq!(s.shared_neighbors(1, 99), 0);
    }

    #[test]
    fn shared_neighbors_empty() {
        let s = ReservoirState::<f64>::new(10, Mode::Post).unwrap();
        assert_eq!(s.shared_neighbors(1, 2), 0);
    }

    #[test]
    fn shared_neighbors_k5_minus_edge() {
        let mut s = ReservoirState::<f64>::new(20, Mode::Post).unwrap();
        let mut t = 0;
        for a in 1..=5u64 {
            for b in a + 1..=5 {
                if (a, b) != (1, 2) {
                    t += 1;
                    s.update_with_draw(e(a, b, t), &uniform(), 1.0).unwrap();
                }
            }
        }
        // brute force: nodes adjacent to both 1 and 2 in the sample
        let brute = (1..=5u64)
            .filter(|&x| {
                let has = |a: u64, b: u64| EdgeKey::new(a, b).is_some_and(|k| s.contains(&k));
                has(1, x) && has(2, x)
            })
            .count();
        assert_eq!(brute, 3);
        assert_eq!(s.shared_neighbors(1, 2), brute);
    }

    #[test]
    fn insert_below_capacity() {
        let mut s = ReservoirState::<f64>::new(3, Mode::Post).unwrap();
        let out = s.update_with_draw(e(1, 2, 1), &uniform(), 0.5).unwrap();
        assert!(out.inserted);
        assert_eq!(out.evicted, None);
        assert_eq!(out.zstar, 0.0);
        assert_eq!(out.priority, 2.0);
    }

    #[test]
    fn arriving_argmin_is_rejected() {
        let mut s = ReservoirState::<f64>::new(1, Mode::Post).unwrap();
        s.update_with_draw(e(1, 2, 1), &uniform(), 0.2).unwrap(); // r = 5
        let out = s.update_with_draw(e(3, 4, 2), &uniform(), 0.5).unwrap(); // r = 2
        assert!(!out.inserted);
        assert_eq!(out.evicted, Some(e(3, 4, 2)));
        assert_eq!(out.zstar, 2.0);
        assert!(s.contains(&EdgeKey::new(1, 2).unwrap()));
        assert_eq!(s.neighbors(3), None);
        assert!(s.is_consistent());
    }

    #[test]
    fn resident_argmin_is_evicted() {
        let mut s = ReservoirState::<f64>::new(1, Mode::Post).unwrap();
        s.update_with_draw(e(1, 2, 1), &uniform(), 0.5).unwrap(); // r = 2
        let out = s.update_with_draw(e(3, 4, 2), &uniform(), 0.2).unwrap(); // r = 5
        assert!(out.inserted);
        assert_eq!(out.evicted, Some(e(1, 2, 1)));
        assert_eq!(s.zstar(), 2.0);
        assert_eq!(s.neighbors(1), None);
        assert_eq!(s.degree(3), 1);
        assert!(s.is_consistent());
    }

    #[test]
    fn equal_priorities_evict_newest() {
        let mut s = ReservoirState::<f64>::new(1, Mode::Post).unwrap();
        s.update_with_draw(e(1, 2, 1), &uniform(), 0.5).unwrap();
        let out = s.update_with_draw(e(3, 4, 2), &uniform(), 0.5).unwrap();
        assert!(!out.inserted);
        assert!(s.contains(&EdgeKey::new(1, 2).unwrap()));
    }

    #[test]
    fn duplicate_resident_is_an_error() {
        let mut s = ReservoirState::<f64>::new(4, Mode::Post).unwrap();
        s.update_with_draw(e(1, 2, 1), &uniform(), 0.5).unwrap();
        assert_eq!(
            s.update_with_draw(e(2, 1, 2), &uniform(), 0.5).unwrap_err(),
            GpsError::AlreadyResident(1, 2)
        );
    }

    #[test]
    fn bad_draw_rejected() {
        let mut s = ReservoirState::<f64>::new(4, Mode::Post).unwrap();
        assert!(s.update_with_draw(e(1, 2, 1), &uniform(), 0.0).is_err());
        assert!(s.update_with_draw(e(1, 2, 1), &uniform(), 1.5).is_err());
    }

    #[test]
    fn short_stream_keeps_everything() {
        let mut s = ReservoirState::<f64>::new(50, Mode::Post).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in 1..=40u64 {
            s.update(e(t, t + 1, t), &WeightFunction::triangle(), &mut rng).unwrap();
        }
        assert_eq!(s.len(), 40);
        assert_eq!(s.zstar(), 0.0);
        for entry in s.entries() {
            assert_eq!(s.inclusion_prob(&entry.edge().key()).unwrap(), 1.0);
        }
    }

    #[test]
    fn inclusion_prob_formula() {
        assert_eq!(inclusion_for(19.0f64, 0.0), 1.0);
        assert_eq!(inclusion_for(19.0f64, 38.0), 0.5);
        assert_eq!(inclusion_for(19.0f64, 10.0), 1.0);
        let s = ReservoirState::<f64>::new(2, Mode::Post).unwrap();
        assert_eq!(
            s.inclusion_prob(&EdgeKey::new(1, 2).unwrap()).unwrap_err(),
            GpsError::NotResident(1, 2)
        );
    }

    #[test]
    fn open_closed_mapping() {
        assert_eq!(open_closed_from::<f64>(0.0), 1.0);
        assert_eq!(open_closed_from::<f64>(0.75), 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1_000_000 {
            let u: f64 = uniform_open_closed(&mut rng);
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn generic_over_f32() {
        let mut s = ReservoirState::<f32>::new(2, Mode::Post).unwrap();
        let w = WeightFunction::<f32>::triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (t, (a, b)) in [(1u64, 2u64), (2, 3), (1, 3), (3, 4)].into_iter().enumerate() {
            s.update(e(a, b, t as u64 + 1), &w, &mut rng).unwrap();
        }
        assert_eq!(s.len(), 2);
        assert!(s.zstar() > 0.0);
        assert!(s.is_consistent());
    }

    #[test]
    fn into_post_clears_accumulators() {
        let mut s = ReservoirState::<f64>::new(4, Mode::Instream).unwrap();
        s.update_with_draw(e(1, 2, 1), &uniform(), 0.5).unwrap();
        s.accumulators_mut(&EdgeKey::new(1, 2).unwrap()).unwrap().tri = 3.0;
        let p = s.into_post();
        assert_eq!(p.mode(), Mode::Post);
        assert_eq!(p.entries()[0].accumulators(), Accumulators::default());
    }

    #[test]
    fn snapshot_json_shape() {
        let mut s = ReservoirState::<f64>::new(1, Mode::Post).unwrap();
        s.update_with_draw(e(2, 1, 1), &uniform(), 0.5).unwrap();
        s.update_with_draw(e(3, 4, 2), &uniform(), 1.0).unwrap();
        let json = serde_json::to_string(&s.snapshot()).unwrap();
        assert_eq!(
            json,
            r#"{"capacity":1,"zstar":1.0,"edges":[{"u":1,"v":2,"w":1.0,"priority":2.0}]}"#
        );
    }

    fn random_stream(raw: Vec<(u64, u64)>) -> Vec<Edge> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b) in raw {
            if let Some(k) = EdgeKey::new(a, b) {
                if seen.insert(k) {
                    out.push(Edge::new(a, b, out.len() as u64 + 1).unwrap());
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn invariants_hold_along_stream(
            raw in proptest::collection::vec((0u64..25, 0u64..25), 1..200),
            m in 1usize..40,
            seed: u64,
        ) {
            let stream = random_stream(raw);
            let mut s = ReservoirState::<f64>::new(m, Mode::Post).unwrap();
            let w = WeightFunction::triangle();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut last_z = 0.0;
            let mut priorities: Vec<(f64, u64, EdgeKey)> = Vec::new();
            for (t, edge) in stream.iter().enumerate() {
                let out = s.update(*edge, &w, &mut rng).unwrap();
                priorities.push((out.priority, edge.arrival, edge.key()));
                prop_assert!(s.zstar() >= last_z);
                last_z = s.zstar();
                prop_assert!(s.is_consistent());
                prop_assert_eq!(s.len(), (t + 1).min(m));
                prop_assert_eq!(s.zstar() == 0.0, s.evictions() == 0);
                // replay: the sample is the m highest priorities so far
                let mut sorted = priorities.clone();
                sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
                let mut want: Vec<EdgeKey> = sorted.iter().take(m).map(|p| p.2).collect();
                let mut have: Vec<EdgeKey> = s.entries().iter().map(|x| x.edge().key()).collect();
                want.sort();
                have.sort();
                prop_assert_eq!(have, want);
            }
        }
    }
}
