//! In-stream estimation: estimates are frozen when the closing edge of a
//! triangle or wedge arrives, using the sample as it stood just before that
//! edge's sampling step.
//!
//! Resident edges carry two cumulative covariance terms (see
//! [`Accumulators`](crate::reservoir::Accumulators)). They are created at zero
//! when an edge enters the sample and dropped with it on eviction; the
//! counters themselves only ever grow.

use rand::Rng;
use serde::Serialize;

use crate::error::{GpsError, Result};
use crate::heap::IndexedMinHeap;
use crate::ingest::{Edge, EdgeKey};
use crate::post::EstimateReport;
use crate::reservoir::{inclusion_for, Mode, ReservoirState, SampledEdge, UpdateOutcome};
use crate::scalar::Scalar;
use crate::weight::EdgeWeight;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct InstreamCounters<F> {
    pub n_tri: F,
    pub n_wedge: F,
    pub v_tri: F,
    pub v_wedge: F,
    pub cov_tri_wedge: F,
}

impl<F: Scalar> InstreamCounters<F> {
    pub fn new() -> Self {
        Self {
            n_tri: F::zero(),
            n_wedge: F::zero(),
            v_tri: F::zero(),
            v_wedge: F::zero(),
            cov_tri_wedge: F::zero(),
        }
    }

    pub fn report(&self) -> EstimateReport<F> {
        report(self)
    }
}

/// Packages running counters with clustering and 95% bounds.
pub fn report<F: Scalar>(c: &InstreamCounters<F>) -> EstimateReport<F> {
    EstimateReport::from_totals(c.n_tri, c.n_wedge, c.v_tri, c.v_wedge, c.cov_tri_wedge)
}

/// Folds the triangles and wedges closed by `edge` into `counters`. Reads
/// the sample before `edge` is inserted; only accumulators of resident edges
/// are mutated.
pub fn instream_estimate<F: Scalar>(
    state: &mut ReservoirState<F>,
    counters: &mut InstreamCounters<F>,
    edge: &Edge,
) {
    let one = F::one();
    let zstar = state.zstar();
    let (u, v) = (edge.u, edge.v);
    let ReservoirState { heap, adjacency, .. } = state;

    let nu = adjacency.get(&u);
    let nv = adjacency.get(&v);

    // Triangles (k1, k2, edge) with k1 = (u, x), k2 = (v, x).
    if let (Some(nu), Some(nv)) = (nu, nv) {
        let (small, large, small_end, large_end) = if nu.len() <= nv.len() {
            (nu, nv, u, v)
        } else {
            (nv, nu, v, u)
        };
        for &x in small {
            if !large.contains(&x) {
                continue;
            }
            let k1 = EdgeKey::new(small_end, x).expect("no self loops");
            let k2 = EdgeKey::new(large_end, x).expect("no self loops");
            let s1 = heap.get(&k1).expect("adjacency mirrors residents");
            let s2 = heap.get(&k2).expect("adjacency mirrors residents");
            let (q1, q2) = (inclusion_for(s1.weight(), zstar), inclusion_for(s2.weight(), zstar));
            let (a1, a2) = (s1.accumulators(), s2.accumulators());
            let inv = one / (q1 * q2);
            counters.n_tri = counters.n_tri + inv;
            counters.v_tri = counters.v_tri + (inv - one) * inv;
            counters.v_tri = counters.v_tri + F::lit(2.0) * (a1.tri + a2.tri) * inv;
            counters.cov_tri_wedge = counters.cov_tri_wedge + (a1.wedge + a2.wedge) * inv;
            let acc1 = &mut heap.get_mut(&k1).expect("resident").acc;
            acc1.tri = acc1.tri + (one / q1 - one) / q2;
            let acc2 = &mut heap.get_mut(&k2).expect("resident").acc;
            acc2.tri = acc2.tri + (one / q2 - one) / q1;
        }
    }

    // Wedges (j, edge) for every resident j adjacent to edge.
    for (end, neighbours) in [(u, nu), (v, nv)] {
        for &x in neighbours.into_iter().flatten() {
            wedge_step(heap, counters, zstar, EdgeKey::new(end, x).expect("no self loops"));
        }
    }
}

fn wedge_step<F: Scalar>(
    heap: &mut IndexedMinHeap<SampledEdge<F>>,
    counters: &mut InstreamCounters<F>,
    zstar: F,
    j: EdgeKey,
) {
    let one = F::one();
    let entry = heap.get_mut(&j).expect("adjacency mirrors residents");
    let iq = one / inclusion_for(entry.weight(), zstar);
    counters.n_wedge = counters.n_wedge + iq;
    counters.v_wedge = counters.v_wedge + iq * (iq - one);
    counters.v_wedge = counters.v_wedge + F::lit(2.0) * entry.acc.wedge * iq;
    counters.cov_tri_wedge = counters.cov_tri_wedge + entry.acc.tri * iq;
    entry.acc.wedge = entry.acc.wedge + iq - one;
}

/// Estimate-then-sample step for one arrival.
pub fn process_edge<F, W, R>(
    state: &mut ReservoirState<F>,
    counters: &mut InstreamCounters<F>,
    edge: Edge,
    weight_fn: &W,
    rng: &mut R,
) -> Result<UpdateOutcome<F>>
where
    F: Scalar,
    W: EdgeWeight<F> + ?Sized,
    R: Rng + ?Sized,
{
    if state.mode() != Mode::Instream {
        return Err(GpsError::ModeMismatch {
            expected: "instream",
            found: state.mode().as_str(),
        });
    }
    if state.contains(&edge.key()) {
        return Err(GpsError::AlreadyResident(edge.u, edge.v));
    }
    instream_estimate(state, counters, &edge);
    state.update(edge, weight_fn, rng)
}
