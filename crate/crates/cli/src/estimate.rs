use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use gps_core::metrics::{track_point, TrackPoint};
use gps_core::post::{ReportDocument, ReportMetadata, REPORT_FORMAT_VERSION};
use gps_core::Sampler;
use serde::Serialize;

use crate::config::{EstimateArgs, Format, RunConfig};
use crate::input::{load_stream, open_output, InputSummary};
use crate::{CliError, CliResult};

#[derive(Serialize)]
struct EstimateOutput {
    #[serde(flatten)]
    document: ReportDocument<f64>,
    config: RunConfig,
    input: InputSummary,
    micros_per_edge: f64,
}

fn track_path(args: &EstimateArgs) -> PathBuf {
    if let Some(p) = &args.track_output {
        return p.clone();
    }
    match &args.sampling.output {
        Some(out) => out.with_extension("track.csv"),
        None => PathBuf::from("gps-track.csv"),
    }
}

pub fn write_track(points: &[TrackPoint], path: Option<&Path>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(open_output(path)?);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &EstimateArgs) -> CliResult<()> {
    let s = &args.sampling;
    let interval = usize::try_from(args.track_interval)
        .map_err(|_| CliError::Usage("--track-interval too large".into()))?;
    if s.format == Format::Csv && interval == 0 {
        return Err(CliError::Usage(
            "CSV output is the tracking series; set --track-interval".into(),
        ));
    }
    let weight = s.weight_fn()?;
    let mut config = RunConfig::new(s)?;
    config.track_interval = Some(args.track_interval);
    let (stream, input) = load_stream(s)?;
    let edges = stream.edges();

    let mut sampler = Sampler::new(s.capacity()?, s.mode.into(), weight, s.seed)?;
    let mut points = Vec::new();
    let mut busy = Duration::ZERO;
    let mut since = Instant::now();
    for (i, e) in edges.iter().enumerate() {
        sampler.push(*e)?;
        let t = i + 1;
        if interval > 0 && (t % interval == 0 || t == edges.len()) {
            busy += since.elapsed();
            points.push(track_point(t as u64, &sampler)?);
            since = Instant::now();
        }
    }
    busy += since.elapsed();

    if s.format == Format::Csv {
        return write_track(&points, s.output.as_deref());
    }
    if interval > 0 {
        let path = track_path(args);
        write_track(&points, Some(&path))?;
        eprintln!("gps: tracking series written to {}", path.display());
    }

    let state = sampler.state();
    let document = ReportDocument {
        format_version: REPORT_FORMAT_VERSION,
        report: sampler.report()?,
        metadata: ReportMetadata {
            m: state.capacity(),
            zstar: state.zstar(),
            edges_processed: state.processed(),
            seed: Some(s.seed),
            weight_fn: weight,
            mode: state.mode(),
        },
    };
    let out = EstimateOutput {
        document,
        config,
        input,
        micros_per_edge: busy.as_secs_f64() * 1e6 / edges.len() as f64,
    };
    let mut w = open_output(s.output.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w)?;
    Ok(())
}

