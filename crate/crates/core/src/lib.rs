//! Graph priority sampling.
//!
//! A one-pass, fixed-size, weight-sensitive edge reservoir over a graph
//! stream, with unbiased estimators of triangle counts, wedge counts and the
//! global clustering coefficient, together with unbiased variance estimates.
//!
//! Estimates can be taken from the sample at any time ([`post`]) or
//! accumulated while the stream is processed ([`instream`]). The numeric code
//! is generic over [`Scalar`] (`f32`/`f64`); the aliases below fix `f64`.

pub mod error;
pub mod generators;
pub mod heap;
pub mod ingest;
pub mod instream;
pub mod metrics;
pub mod oracle;
pub mod post;
pub mod reservoir;
pub mod sampler;
pub mod scalar;
pub mod weight;

pub use error::{GpsError, Result};
pub use ingest::{parse_edge_list, parse_edge_list_from, permute_stream, Edge, EdgeKey, NodeId, ParseOptions, StreamSource};
pub use instream::InstreamCounters;
pub use oracle::{exact_counts, prefix_counts, ExactCounts};
pub use post::{estimate, EstimateReport};
pub use reservoir::{Mode, NodeSet, ReservoirState, SampledEdge, UpdateOutcome};
pub use sampler::GpsSampler;
pub use scalar::Scalar;
pub use weight::{EdgeWeight, WeightFunction};

pub type Reservoir = ReservoirState<f64>;
pub type Report = EstimateReport<f64>;
pub type Counters = InstreamCounters<f64>;
pub type Weight = WeightFunction<f64>;
pub type Sampler = GpsSampler<f64, WeightFunction<f64>>;

pub type Reservoir32 = ReservoirState<f32>;
pub type Report32 = EstimateReport<f32>;
