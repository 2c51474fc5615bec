//! Post-stream estimation of triangle and wedge counts from a reservoir.
//!
//! Every quantity is localized on resident edges. For a resident edge
//! `k = (a, b)` with inclusion probability `q`, the loop over the sampled
//! neighbourhood of the lower-degree endpoint finds the triangles through `k`
//! and the wedges centred on that endpoint; a second loop visits the wedges
//! centred on the other endpoint. Pairs of triangles (or of wedges) overlap in
//! at most one edge, so each pair's covariance term is picked up exactly once,
//! at the shared edge, through a running sum.
//!
//! A triangle and a wedge can share one or two edges. Pairs sharing exactly
//! one edge are handled at that edge like the same-class pairs; a wedge lying
//! inside a triangle shares two edges with it and is split evenly between
//! them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GpsError, Result};
use crate::ingest::{EdgeKey, NodeId};
use crate::reservoir::{inclusion_for, Mode, ReservoirState, SampledEdge};
use crate::scalar::{CompensatedSum, Scalar};
use crate::weight::WeightFunction;

/// Two-sided normal quantile for 95% bounds.
pub const Z95: f64 = 1.96;

/// Estimates with variances, covariance, clustering and 95% bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport<F> {
    pub n_tri: F,
    pub n_wedge: F,
    pub v_tri: F,
    pub v_wedge: F,
    pub cov_tri_wedge: F,
    /// `3 * n_tri / n_wedge`; `None` when no wedge was estimated.
    pub alpha: Option<F>,
    /// Delta-method variance of `alpha`.
    pub v_alpha: Option<F>,
    /// Set when the delta-method value came out negative and was clamped to 0.
    pub v_alpha_clamped: bool,
    pub ci95_tri: (F, F),
    pub ci95_wedge: (F, F),
    pub ci95_alpha: Option<(F, F)>,
}

/// Delta-method variance of the clustering estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaVariance<F> {
    pub value: F,
    pub clamped: bool,
}

/// `9 * Var(n_tri / n_wedge)` by the delta method. `None` if `n_wedge == 0`.
pub fn clustering_variance<F: Scalar>(
    n_tri: F,
    n_wedge: F,
    v_tri: F,
    v_wedge: F,
    cov_tri_wedge: F,
) -> Option<DeltaVariance<F>> {
    if n_wedge.is_nan() || n_wedge <= F::zero() {
        return None;
    }
    let w2 = n_wedge * n_wedge;
    let ratio_var = v_tri / w2 + n_tri * n_tri * v_wedge / (w2 * w2)
        - F::lit(2.0) * n_tri * cov_tri_wedge / (w2 * n_wedge);
    let value = F::lit(9.0) * ratio_var;
    if value < F::zero() {
        Some(DeltaVariance {
            value: F::zero(),
            clamped: true,
        })
    } else {
        Some(DeltaVariance {
            value,
            clamped: false,
        })
    }
}

/// `estimate ± 1.96 sqrt(variance)`, lower end clamped at 0.
pub fn ci95<F: Scalar>(estimate: F, variance: F) -> (F, F) {
    let half = F::lit(Z95) * variance.max(F::zero()).sqrt();
    ((estimate - half).max(F::zero()), estimate + half)
}

impl<F: Scalar> EstimateReport<F> {
    pub fn from_totals(n_tri: F, n_wedge: F, v_tri: F, v_wedge: F, cov_tri_wedge: F) -> Self {
        let alpha = (n_wedge > F::zero()).then(|| F::lit(3.0) * n_tri / n_wedge);
        let delta = clustering_variance(n_tri, n_wedge, v_tri, v_wedge, cov_tri_wedge);
        Self {
            n_tri,
            n_wedge,
            v_tri,
            v_wedge,
            cov_tri_wedge,
            alpha,
            v_alpha: delta.map(|d| d.value),
            v_alpha_clamped: delta.is_some_and(|d| d.clamped),
            ci95_tri: ci95(n_tri, v_tri),
            ci95_wedge: ci95(n_wedge, v_wedge),
            ci95_alpha: alpha.zip(delta).map(|(a, d)| ci95(a, d.value)),
        }
    }
}

/// Contributions of one resident edge before the final reduction.
///
/// `n_*`/`v_*` are summed over every subgraph through the edge (each
/// triangle is seen from three edges, each wedge from two); `c_tri`,
/// `c_wedge` and `c_tri_wedge` are already-scaled covariance sums that enter
/// the totals unreduced.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeTerms<F> {
    pub n_tri: F,
    pub v_tri: F,
    pub c_tri: F,
    pub n_wedge: F,
    pub v_wedge: F,
    pub c_wedge: F,
    pub c_tri_wedge: F,
}

fn prob_of<F: Scalar>(state: &ReservoirState<F>, a: NodeId, b: NodeId) -> F {
    let key = EdgeKey::new(a, b).expect("adjacency holds no self loops");
    let w = state
        .heap
        .get(&key)
        .expect("adjacency mirrors resident edges")
        .weight();
    inclusion_for(w, state.zstar())
}

fn edge_terms<F: Scalar>(
    state: &ReservoirState<F>,
    entry: &SampledEdge<F>,
    triangles: &mut Vec<(F, F)>,
) -> EdgeTerms<F> {
    let one = F::one();
    let edge = entry.edge();
    let iq = one / inclusion_for(entry.weight(), state.zstar());
    let (a, b) = if state.degree(edge.u) <= state.degree(edge.v) {
        (edge.u, edge.v)
    } else {
        (edge.v, edge.u)
    };
    let na = &state.adjacency[&a];
    let nb = &state.adjacency[&b];

    let mut t = EdgeTerms::default();
    let mut run_tri = F::zero();
    let mut run_wedge = F::zero();
    let mut pair_tri = F::zero();
    let mut pair_wedge = F::zero();
    triangles.clear();

    for &x in na {
        if x == b {
            continue;
        }
        let iq1 = one / prob_of(state, a, x);
        if nb.contains(&x) {
            let iq2 = one / prob_of(state, b, x);
            let s = iq * iq1 * iq2;
            t.n_tri = t.n_tri + s;
            t.v_tri = t.v_tri + s * (s - one);
            let legs = iq1 * iq2;
            pair_tri = pair_tri + run_tri * legs;
            run_tri = run_tri + legs;
            triangles.push((iq1, iq2));
        }
        let s = iq * iq1;
        t.n_wedge = t.n_wedge + s;
        t.v_wedge = t.v_wedge + s * (s - one);
        pair_wedge = pair_wedge + run_wedge * iq1;
        run_wedge = run_wedge + iq1;
    }
    for &x in nb {
        if x == a {
            continue;
        }
        let iq2 = one / prob_of(state, b, x);
        let s = iq * iq2;
        t.n_wedge = t.n_wedge + s;
        t.v_wedge = t.v_wedge + s * (s - one);
        pair_wedge = pair_wedge + run_wedge * iq2;
        run_wedge = run_wedge + iq2;
    }

    let shared = iq * (iq - one);
    let scale = F::lit(2.0) * shared;
    t.c_tri = pair_tri * scale;
    t.c_wedge = pair_wedge * scale;

    // run_wedge now sums the other-edge inverse probabilities of every wedge
    // through this edge; drop the two wedges inside each triangle.
    let half = F::lit(0.5);
    let mut cross = F::zero();
    let mut within = F::zero();
    for &(iq1, iq2) in triangles.iter() {
        let others = (run_wedge - iq1 - iq2).max(F::zero());
        cross = cross + iq1 * iq2 * others;
        let s_tri = iq * iq1 * iq2;
        within = within + s_tri * ((iq * iq1 - one) + (iq * iq2 - one)) * half;
    }
    t.c_tri_wedge = cross * shared + within;
    t
}

#[derive(Clone, Copy, Debug, Default)]
struct Totals<F> {
    n_tri: CompensatedSum<F>,
    v_tri: CompensatedSum<F>,
    c_tri: CompensatedSum<F>,
    n_wedge: CompensatedSum<F>,
    v_wedge: CompensatedSum<F>,
    c_wedge: CompensatedSum<F>,
    c_tri_wedge: CompensatedSum<F>,
}

impl<F: Scalar> Totals<F> {
    fn new() -> Self {
        Self {
            n_tri: CompensatedSum::new(),
            v_tri: CompensatedSum::new(),
            c_tri: CompensatedSum::new(),
            n_wedge: CompensatedSum::new(),
            v_wedge: CompensatedSum::new(),
            c_wedge: CompensatedSum::new(),
            c_tri_wedge: CompensatedSum::new(),
        }
    }

    fn add(&mut self, t: &EdgeTerms<F>) {
        self.n_tri.add(t.n_tri);
        self.v_tri.add(t.v_tri);
        self.c_tri.add(t.c_tri);
        self.n_wedge.add(t.n_wedge);
        self.v_wedge.add(t.v_wedge);
        self.c_wedge.add(t.c_wedge);
        self.c_tri_wedge.add(t.c_tri_wedge);
    }

    fn merge(self, o: Self) -> Self {
        Self {
            n_tri: self.n_tri.merge(o.n_tri),
            v_tri: self.v_tri.merge(o.v_tri),
            c_tri: self.c_tri.merge(o.c_tri),
            n_wedge: self.n_wedge.merge(o.n_wedge),
            v_wedge: self.v_wedge.merge(o.v_wedge),
            c_wedge: self.c_wedge.merge(o.c_wedge),
            c_tri_wedge: self.c_tri_wedge.merge(o.c_tri_wedge),
        }
    }

    fn report(&self) -> EstimateReport<F> {
        let third = F::one() / F::lit(3.0);
        let half = F::lit(0.5);
        EstimateReport::from_totals(
            self.n_tri.value() * third,
            self.n_wedge.value() * half,
            self.v_tri.value() * third + self.c_tri.value(),
            self.v_wedge.value() * half + self.c_wedge.value(),
            self.c_tri_wedge.value(),
        )
    }
}

fn require_post<F: Scalar>(state: &ReservoirState<F>) -> Result<()> {
    match state.mode() {
        Mode::Post => Ok(()),
        Mode::Instream => Err(GpsError::ModeMismatch {
            expected: "post",
            found: "instream",
        }),
    }
}

/// Per-edge contributions, keyed by edge, in heap order.
pub fn per_edge_terms<F: Scalar>(state: &ReservoirState<F>) -> Result<Vec<(EdgeKey, EdgeTerms<F>)>> {
    require_post(state)?;
    let mut scratch = Vec::new();
    Ok(state
        .entries()
        .iter()
        .map(|e| (e.edge().key(), edge_terms(state, e, &mut scratch)))
        .collect())
}

/// Unbiased triangle/wedge estimates and variances from the current sample.
pub fn estimate<F: Scalar>(state: &ReservoirState<F>) -> Result<EstimateReport<F>> {
    require_post(state)?;
    let mut totals = Totals::new();
    let mut scratch = Vec::new();
    for entry in state.entries() {
        totals.add(&edge_terms(state, entry, &mut scratch));
    }
    Ok(totals.report())
}

/// [`estimate`] with the per-edge loop split across the rayon pool and
/// partial sums merged with compensation.
pub fn estimate_parallel<F: Scalar>(state: &ReservoirState<F>) -> Result<EstimateReport<F>> {
    require_post(state)?;
    let totals = state
        .entries()
        .par_iter()
        .fold(
            || (Totals::new(), Vec::new()),
            |(mut acc, mut scratch), entry| {
                acc.add(&edge_terms(state, entry, &mut scratch));
                (acc, scratch)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(Totals::new, Totals::merge);
    Ok(totals.report())
}

/// Estimated covariance between the triangle and wedge count estimators.
pub fn tri_wedge_covariance<F: Scalar>(state: &ReservoirState<F>) -> Result<F> {
    require_post(state)?;
    let mut scratch = Vec::new();
    Ok(state
        .entries()
        .iter()
        .map(|e| edge_terms(state, e, &mut scratch).c_tri_wedge)
        .collect::<CompensatedSum<F>>()
        .value())
}

/// Serialized report: every estimate field plus run metadata.
#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument<F> {
    pub format_version: u32,
    #[serde(flatten)]
    pub report: EstimateReport<F>,
    pub metadata: ReportMetadata<F>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportMetadata<F> {
    pub m: usize,
    pub zstar: F,
    pub edges_processed: u64,
    pub seed: Option<u64>,
    pub weight_fn: WeightFunction<F>,
    pub mode: Mode,
}

pub const REPORT_FORMAT_VERSION: u32 = 1;
