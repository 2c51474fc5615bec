use std::path::PathBuf;

use clap::{ArgAction, Args, ValueEnum};
use gps_core::{Mode, Weight};
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightName {
    Uniform,
    Triangle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Post,
    Instream,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Post => Mode::Post,
            ModeName::Instream => Mode::Instream,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone, Debug)]
pub struct InputArgs {
    /// Edge list: one `u v` pair per line, `#` comments.
    #[arg(long)]
    pub input: PathBuf,
    /// Treat node tokens as arbitrary labels and map them to dense ids.
    #[arg(long)]
    pub labels: bool,
    /// Fail on a repeated edge instead of dropping it.
    #[arg(long)]
    pub strict_duplicates: bool,
}

#[derive(Args, Clone, Debug)]
pub struct SamplingArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Reservoir size in edges.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    #[arg(long, value_enum, default_value_t = WeightName::Triangle)]
    pub weight: WeightName,
    /// Triangle weight: multiplier on the count of sampled triangles closed.
    #[arg(long, default_value_t = 9.0)]
    pub tri_mult: f64,
    /// Triangle weight: additive base, must be positive.
    #[arg(long, default_value_t = 1.0)]
    pub tri_base: f64,
    #[arg(long, value_enum, default_value_t = ModeName::Post)]
    pub mode: ModeName,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Shuffle the stream with the run seed before sampling.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub permute: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl SamplingArgs {
    pub fn weight_fn(&self) -> CliResult<Weight> {
        match self.weight {
            WeightName::Uniform => Ok(Weight::Uniform),
            WeightName::Triangle => Ok(Weight::triangle_with(self.tri_mult, self.tri_base)?),
        }
    }

    pub fn capacity(&self) -> CliResult<usize> {
        usize::try_from(self.m).map_err(|_| CliError::Usage("--m does not fit this platform".into()))
    }
}

#[derive(Args, Clone, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Record estimates every this many arrivals; 0 disables tracking.
    #[arg(long, default_value_t = 0)]
    pub track_interval: u64,
    /// Tracking CSV destination. Defaults to `<output>.track.csv`, or
    /// `gps-track.csv` when writing the report to stdout.
    #[arg(long)]
    pub track_output: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Number of independent seeded runs; trial i uses seed + i.
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Allowed deviation of each trial mean from the truth, in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub tolerance: f64,
    /// Also check that mean variance estimates match the empirical variance.
    #[arg(long)]
    pub check_variance: bool,
    /// Refuse inputs with more edges than this; exact counting is brute force.
    #[arg(long, default_value_t = 200_000)]
    pub max_edges: u64,
}

#[derive(Args, Clone, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

/// Everything that determines a run, embedded in every output document.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub input: String,
    pub labels: bool,
    pub strict_duplicates: bool,
    pub m: u64,
    pub weight_fn: Weight,
    pub mode: ModeName,
    pub seed: u64,
    pub permute: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_interval: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(s: &SamplingArgs) -> CliResult<Self> {
        Ok(Self {
            input: s.input.input.display().to_string(),
            labels: s.input.labels,
            strict_duplicates: s.input.strict_duplicates,
            m: s.m,
            weight_fn: s.weight_fn()?,
            mode: s.mode,
            seed: s.seed,
            permute: s.permute,
            track_interval: None,
            trials: None,
            tolerance: None,
            format: s.format,
        })
    }
}
