//! One-pass driver tying the reservoir to either estimation mode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ingest::Edge;
use crate::instream::{process_edge, InstreamCounters};
use crate::post::{self, EstimateReport};
use crate::reservoir::{Mode, ReservoirState, UpdateOutcome};
use crate::scalar::Scalar;
use crate::weight::EdgeWeight;

/// Owns the reservoir, the in-stream counters, the weight function and a
/// seeded generator. The same seed gives the same sample in both modes: the
/// estimation step never draws randomness.
#[derive(Clone, Debug)]
pub struct GpsSampler<F: Scalar, W> {
    state: ReservoirState<F>,
    counters: InstreamCounters<F>,
    weight: W,
    rng: ChaCha8Rng,
    seed: u64,
}

impl<F: Scalar, W: EdgeWeight<F>> GpsSampler<F, W> {
    pub fn new(capacity: usize, mode: Mode, weight: W, seed: u64) -> Result<Self> {
        Ok(Self {
            state: ReservoirState::new(capacity, mode)?,
            counters: InstreamCounters::new(),
            weight,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        })
    }

    pub fn push(&mut self, edge: Edge) -> Result<UpdateOutcome<F>> {
        match self.state.mode() {
            Mode::Post => self.state.update(edge, &self.weight, &mut self.rng),
            Mode::Instream => process_edge(&mut self.state, &mut self.counters, edge, &self.weight, &mut self.rng),
        }
    }

    pub fn extend<'a, I: IntoIterator<Item = &'a Edge>>(&mut self, edges: I) -> Result<()> {
        for e in edges {
            self.push(*e)?;
        }
        Ok(())
    }

    /// Current estimates: computed from the sample in post mode, read off the
    /// running counters in in-stream mode.
    pub fn report(&self) -> Result<EstimateReport<F>> {
        match self.state.mode() {
            Mode::Post => post::estimate(&self.state),
            Mode::Instream => Ok(self.counters.report()),
        }
    }

    pub fn state(&self) -> &ReservoirState<F> {
        &self.state
    }

    pub fn counters(&self) -> &InstreamCounters<F> {
        &self.counters
    }

    pub fn weight(&self) -> &W {
        &self.weight
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn into_state(self) -> ReservoirState<F> {
        self.state
    }
}
