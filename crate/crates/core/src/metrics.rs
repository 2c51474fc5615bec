//! Multi-trial verification harness: unbiasedness checks, variance
//! calibration, interval coverage, relative errors and per-edge timing.
//!
//! Everything here is fixed to `f64`.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GpsError, Result};
use crate::ingest::Edge;
use crate::oracle::{exact_counts, prefix_counts, ExactCounts};
use crate::post::{self, EstimateReport};
use crate::reservoir::Mode;
use crate::sampler::GpsSampler;
use crate::weight::{EdgeWeight, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Triangles,
    Wedges,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Triangles => "triangles",
            Statistic::Wedges => "wedges",
        }
    }

    /// `(estimate, variance estimate, ci95)` for this statistic.
    pub fn pick(&self, r: &EstimateReport<f64>) -> (f64, f64, (f64, f64)) {
        match self {
            Statistic::Triangles => (r.n_tri, r.v_tri, r.ci95_tri),
            Statistic::Wedges => (r.n_wedge, r.v_wedge, r.ci95_wedge),
        }
    }

    pub fn truth(&self, c: &ExactCounts) -> f64 {
        match self {
            Statistic::Triangles => c.triangles as f64,
            Statistic::Wedges => c.wedges as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialConfig {
    pub capacity: usize,
    pub weight: WeightFunction<f64>,
    pub mode: Mode,
    pub trials: usize,
    pub base_seed: u64,
}

impl TrialConfig {
    /// Seed of trial `i`; trials of one run use consecutive, disjoint seeds.
    pub fn trial_seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub report: EstimateReport<f64>,
    pub micros_per_edge: f64,
}

pub fn run_trial(edges: &[Edge], config: &TrialConfig, trial: usize) -> Result<TrialRecord> {
    let seed = config.trial_seed(trial);
    let mut sampler = GpsSampler::new(config.capacity, config.mode, config.weight, seed)?;
    let start = Instant::now();
    sampler.extend(edges)?;
    let elapsed = start.elapsed();
    let report = sampler.report()?;
    Ok(TrialRecord {
        trial,
        seed,
        report,
        micros_per_edge: elapsed.as_secs_f64() * 1e6 / edges.len().max(1) as f64,
    })
}

/// Runs all trials in parallel; records come back ordered by trial index.
pub fn run_trial_records(edges: &[Edge], config: &TrialConfig) -> Result<Vec<TrialRecord>> {
    (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(edges, config, i))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub statistic: Statistic,
    pub truth: f64,
    pub trials: usize,
    pub mean_estimate: f64,
    pub empirical_variance: f64,
    pub mean_variance_estimate: f64,
    /// `|mean - truth| / truth`; `None` when the truth is 0.
    pub are: Option<f64>,
    pub ci_coverage: f64,
    pub mean_update_micros: f64,
}

impl TrialSummary {
    pub fn same_except_timing(&self, other: &Self) -> bool {
        Self {
            mean_update_micros: 0.0,
            ..self.clone()
        } == Self {
            mean_update_micros: 0.0,
            ..other.clone()
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (`n - 1` denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn relative_error(estimate: f64, truth: f64) -> Option<f64> {
    (truth != 0.0).then(|| (estimate - truth).abs() / truth.abs())
}

pub fn summarize(records: &[TrialRecord], statistic: Statistic, truth: f64) -> TrialSummary {
    let picked: Vec<(f64, f64, (f64, f64))> = records.iter().map(|r| statistic.pick(&r.report)).collect();
    let estimates: Vec<f64> = picked.iter().map(|p| p.0).collect();
    let variances: Vec<f64> = picked.iter().map(|p| p.1).collect();
    let covered = picked
        .iter()
        .filter(|(_, _, (lo, hi))| *lo <= truth && truth <= *hi)
        .count();
    let mean_estimate = mean(&estimates);
    let micros: Vec<f64> = records.iter().map(|r| r.micros_per_edge).collect();
    TrialSummary {
        statistic,
        truth,
        trials: records.len(),
        mean_estimate,
        empirical_variance: sample_variance(&estimates),
        mean_variance_estimate: mean(&variances),
        are: relative_error(mean_estimate, truth),
        ci_coverage: covered as f64 / records.len().max(1) as f64,
        mean_update_micros: mean(&micros),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummaries {
    pub exact: ExactCounts,
    pub triangles: TrialSummary,
    pub wedges: TrialSummary,
}

/// Runs `config.trials` seeded executions and summarizes them against the
/// exact counts of `edges`.
pub fn run_trials(edges: &[Edge], config: &TrialConfig) -> Result<TrialSummaries> {
    if config.trials < 2 {
        return Err(GpsError::InvalidConfig("at least two trials are required".into()));
    }
    if edges.is_empty() {
        return Err(GpsError::EmptyStream);
    }
    let exact = exact_counts(edges);
    let records = run_trial_records(edges, config)?;
    Ok(TrialSummaries {
        exact,
        triangles: summarize(&records, Statistic::Triangles, exact.triangles as f64),
        wedges: summarize(&records, Statistic::Wedges, exact.wedges as f64),
    })
}

/// Outcome of a `|mean - target| <= k * SE` check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanCheck {
    pub mean: f64,
    pub target: f64,
    pub se: f64,
    pub z: f64,
    pub k: f64,
    pub pass: bool,
}

/// Compares the sample mean with `target` at `k` standard errors, where the
/// standard error is `sqrt(sample_variance / n)`.
pub fn mean_check(samples: &[f64], target: f64, k: f64) -> MeanCheck {
    let m = mean(samples);
    let se = (sample_variance(samples) / samples.len().max(1) as f64).sqrt();
    let diff = (m - target).abs();
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    MeanCheck {
        mean: m,
        target,
        se,
        z,
        k,
        pass: diff <= k * se,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrackingError {
    pub mare: f64,
    pub max_are: f64,
    pub evaluated: usize,
    /// Points skipped because the truth was zero.
    pub skipped: usize,
}

/// Mean and maximum relative error of a tracked series against the truth at
/// the same arrival indices.
pub fn tracking_error(track: &[(u64, f64)], truth: &[(u64, f64)]) -> Result<TrackingError> {
    if track.len() != truth.len() {
        return Err(GpsError::InvalidConfig(format!(
            "series lengths differ: {} estimates, {} truths",
            track.len(),
            truth.len()
        )));
    }
    let mut sum = 0.0;
    let mut max_are: f64 = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for (&(t, est), &(t2, exact)) in track.iter().zip(truth) {
        if t != t2 {
            return Err(GpsError::InvalidConfig(format!("misaligned series at t={t} vs t={t2}")));
        }
        match relative_error(est, exact) {
            Some(e) => {
                sum += e;
                max_are = max_are.max(e);
                evaluated += 1;
            }
            None => skipped += 1,
        }
    }
    if evaluated == 0 {
        return Err(GpsError::NoEvaluablePoints);
    }
    Ok(TrackingError {
        mare: sum / evaluated as f64,
        max_are,
        evaluated,
        skipped,
    })
}

/// Default spacing of tracked points: `max(1, len / 200)`.
pub fn default_track_interval(stream_len: usize) -> usize {
    (stream_len / 200).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackPoint {
    pub t: u64,
    pub n_tri: f64,
    pub v_tri: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_wedge: f64,
    pub v_wedge: f64,
    pub alpha: Option<f64>,
    pub zstar: f64,
    pub sample_size: usize,
}

/// Current estimates of `sampler` as a tracking row for arrival `t`.
pub fn track_point<W: EdgeWeight<f64>>(t: u64, sampler: &GpsSampler<f64, W>) -> Result<TrackPoint> {
    let r = sampler.report()?;
    Ok(TrackPoint {
        t,
        n_tri: r.n_tri,
        v_tri: r.v_tri,
        ci_lo: r.ci95_tri.0,
        ci_hi: r.ci95_tri.1,
        n_wedge: r.n_wedge,
        v_wedge: r.v_wedge,
        alpha: r.alpha,
        zstar: sampler.state().zstar(),
        sample_size: sampler.state().len(),
    })
}

/// Streams `edges` once and records the current estimates after every
/// `interval`-th arrival (and after the last one).
pub fn track(
    edges: &[Edge],
    capacity: usize,
    weight: WeightFunction<f64>,
    mode: Mode,
    seed: u64,
    interval: usize,
) -> Result<Vec<TrackPoint>> {
    if interval == 0 {
        return Err(GpsError::InvalidConfig("tracking interval must be >= 1".into()));
    }
    let mut sampler = GpsSampler::new(capacity, mode, weight, seed)?;
    let mut points = Vec::with_capacity(edges.len() / interval + 1);
    for (i, e) in edges.iter().enumerate() {
        sampler.push(*e)?;
        let t = i + 1;
        if t % interval == 0 || t == edges.len() {
            points.push(track_point(t as u64, &sampler)?);
        }
    }
    Ok(points)
}

/// Triangle-count tracking error of one run, evaluated at the tracked points
/// strictly after the first eviction (`t > capacity`).
pub fn triangle_tracking_error(
    edges: &[Edge],
    capacity: usize,
    weight: WeightFunction<f64>,
    mode: Mode,
    seed: u64,
    interval: usize,
) -> Result<TrackingError> {
    let points = track(edges, capacity, weight, mode, seed, interval)?;
    let exact = prefix_counts(edges);
    let (est, truth): (Vec<_>, Vec<_>) = points
        .iter()
        .filter(|p| p.t as usize > capacity)
        .map(|p| ((p.t, p.n_tri), (p.t, exact[p.t as usize - 1].triangles as f64)))
        .unzip();
    tracking_error(&est, &truth)
}

/// Post-stream report from the final sample of an in-stream run with the
/// same seed; lets one pass feed both estimators.
pub fn paired_reports(
    edges: &[Edge],
    capacity: usize,
    weight: WeightFunction<f64>,
    seed: u64,
) -> Result<(EstimateReport<f64>, EstimateReport<f64>)> {
    let mut sampler = GpsSampler::new(capacity, Mode::Instream, weight, seed)?;
    sampler.extend(edges)?;
    let instream = sampler.report()?;
    let post = post::estimate(&sampler.into_state().into_post())?;
    Ok((post, instream))
}
