//! Sampling weight functions `W(k, K̂)`.

use serde::Serialize;

use crate::error::{GpsError, Result};
use crate::ingest::Edge;
use crate::reservoir::ReservoirState;
use crate::scalar::Scalar;

/// A sampling weight evaluated against the reservoir as it stands before the
/// arriving edge is inserted. Must return a strictly positive finite value.
pub trait EdgeWeight<F: Scalar> {
    fn weight(&self, edge: &Edge, state: &ReservoirState<F>) -> F;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum WeightFunction<F> {
    /// Every edge weighs 1; reduces to classical reservoir sampling.
    Uniform,
    /// `multiplier * (#triangles the edge closes in the sample) + base`.
    Triangle { multiplier: F, base: F },
}

pub const DEFAULT_TRIANGLE_MULTIPLIER: f64 = 9.0;
pub const DEFAULT_TRIANGLE_BASE: f64 = 1.0;

impl<F: Scalar> WeightFunction<F> {
    pub fn triangle() -> Self {
        Self::Triangle {
            multiplier: F::lit(DEFAULT_TRIANGLE_MULTIPLIER),
            base: F::lit(DEFAULT_TRIANGLE_BASE),
        }
    }

    pub fn triangle_with(multiplier: F, base: F) -> Result<Self> {
        if !(multiplier.is_finite() && multiplier >= F::zero()) {
            return Err(GpsError::InvalidConfig(format!(
                "triangle multiplier must be finite and >= 0, got {multiplier}"
            )));
        }
        if !(base.is_finite() && base > F::zero()) {
            return Err(GpsError::InvalidConfig(format!(
                "triangle base must be finite and > 0, got {base}"
            )));
        }
        Ok(Self::Triangle { multiplier, base })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Triangle { .. } => "triangle",
        }
    }
}

impl<F: Scalar> EdgeWeight<F> for WeightFunction<F> {
    fn weight(&self, edge: &Edge, state: &ReservoirState<F>) -> F {
        match *self {
            Self::Uniform => F::one(),
            Self::Triangle { multiplier, base } => {
                multiplier * F::from_count(state.shared_neighbors(edge.u, edge.v)) + base
            }
        }
    }
}

impl<F: Scalar, W: EdgeWeight<F> + ?Sized> EdgeWeight<F> for &W {
    fn weight(&self, edge: &Edge, state: &ReservoirState<F>) -> F {
        (**self).weight(edge, state)
    }
}
