use std::io::Write as _;

use gps_core::metrics::{mean_check, run_trial_records, sample_variance, summarize, Statistic, TrialConfig, TrialSummary};
use gps_core::post::REPORT_FORMAT_VERSION;
use gps_core::{exact_counts, ExactCounts};
use serde::Serialize;

use crate::config::{Format, RunConfig, VerifyArgs};
use crate::input::{load_stream, open_output, InputSummary};
use crate::{CliError, CliResult};

#[derive(Clone, Debug, Serialize)]
struct Check {
    name: String,
    statistic: Statistic,
    skipped: bool,
    notice: Option<String>,
    mean: f64,
    target: f64,
    se: f64,
    z: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    format_version: u32,
    config: &'a RunConfig,
    input: &'a InputSummary,
    exact: ExactCounts,
    triangles: &'a TrialSummary,
    wedges: &'a TrialSummary,
    checks: &'a [Check],
    passed: bool,
}

/// One CSV row per configuration; `*_pass` is empty for a skipped check.
#[derive(Serialize)]
struct VerifyRow<'a> {
    input: &'a str,
    edges: usize,
    m: u64,
    mode: &'a str,
    weight_fn: &'a str,
    trials: usize,
    tolerance: f64,
    tri_truth: f64,
    tri_mean: f64,
    tri_empirical_variance: f64,
    tri_mean_variance_estimate: f64,
    tri_are: Option<f64>,
    tri_ci_coverage: f64,
    tri_z: Option<f64>,
    tri_pass: Option<bool>,
    wedge_truth: f64,
    wedge_mean: f64,
    wedge_empirical_variance: f64,
    wedge_mean_variance_estimate: f64,
    wedge_are: Option<f64>,
    wedge_ci_coverage: f64,
    wedge_z: Option<f64>,
    wedge_pass: Option<bool>,
    mean_update_micros: f64,
    passed: bool,
}

fn skipped(name: String, statistic: Statistic, tolerance: f64) -> Check {
    let notice = format!("{} truth is 0, ARE undefined; {name} skipped", statistic.as_str());
    Check {
        name,
        statistic,
        skipped: true,
        notice: Some(notice),
        mean: 0.0,
        target: 0.0,
        se: 0.0,
        z: 0.0,
        tolerance,
        pass: true,
    }
}

fn check(name: String, statistic: Statistic, samples: &[f64], target: f64, tolerance: f64) -> Check {
    let c = mean_check(samples, target, tolerance);
    Check {
        name,
        statistic,
        skipped: false,
        notice: None,
        mean: c.mean,
        target: c.target,
        se: c.se,
        z: c.z,
        tolerance,
        pass: c.pass,
    }
}

pub fn run(args: &VerifyArgs) -> CliResult<()> {
    let s = &args.sampling;
    if args.trials < 2 {
        return Err(CliError::Usage("--trials must be at least 2".into()));
    }
    if !(args.tolerance >= 0.0 && args.tolerance.is_finite()) {
        return Err(CliError::Usage("--tolerance must be a non-negative number".into()));
    }
    let mut config = RunConfig::new(s)?;
    config.trials = Some(args.trials);
    config.tolerance = Some(args.tolerance);
    let (stream, input) = load_stream(s)?;
    if stream.len() as u64 > args.max_edges {
        return Err(CliError::Usage(format!(
            "input has {} edges, above --max-edges {}; exact counting refused",
            stream.len(),
            args.max_edges
        )));
    }
    let exact = exact_counts(stream.edges());
    let cfg = TrialConfig {
        capacity: s.capacity()?,
        weight: s.weight_fn()?,
        mode: s.mode.into(),
        trials: args.trials as usize,
        base_seed: s.seed,
    };
    let records = run_trial_records(stream.edges(), &cfg)?;

    let mut checks = Vec::new();
    let mut summaries = Vec::new();
    for stat in [Statistic::Triangles, Statistic::Wedges] {
        let truth = stat.truth(&exact);
        summaries.push(summarize(&records, stat, truth));
        let picked: Vec<(f64, f64)> = records.iter().map(|r| {
            let (est, var, _) = stat.pick(&r.report);
            (est, var)
        }).collect();
        let est: Vec<f64> = picked.iter().map(|p| p.0).collect();
        let var: Vec<f64> = picked.iter().map(|p| p.1).collect();
        let unbiased = format!("{}_unbiased", stat.as_str());
        let calibrated = format!("{}_variance", stat.as_str());
        if truth == 0.0 {
            checks.push(skipped(unbiased, stat, args.tolerance));
            if args.check_variance {
                checks.push(skipped(calibrated, stat, args.tolerance));
            }
            continue;
        }
        checks.push(check(unbiased, stat, &est, truth, args.tolerance));
        if args.check_variance {
            checks.push(check(calibrated, stat, &var, sample_variance(&est), args.tolerance));
        }
    }
    let passed = checks.iter().all(|c| c.pass);
    for c in &checks {
        match &c.notice {
            Some(n) => eprintln!("gps: notice: {n}"),
            None => eprintln!(
                "gps: {} mean {:.4} target {:.4} z {:.2} {}",
                c.name,
                c.mean,
                c.target,
                c.z,
                if c.pass { "PASS" } else { "FAIL" }
            ),
        }
    }

    let (tri, wedge) = (&summaries[0], &summaries[1]);
    let mut w = open_output(s.output.as_deref())?;
    match s.format {
        Format::Json => {
            let out = VerifyOutput {
                format_version: REPORT_FORMAT_VERSION,
                config: &config,
                input: &input,
                exact,
                triangles: tri,
                wedges: wedge,
                checks: &checks,
                passed,
            };
            serde_json::to_writer_pretty(&mut w, &out)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let first = |stat: Statistic| checks.iter().find(|c| c.statistic == stat && c.name.ends_with("unbiased"));
            let z = |stat| first(stat).filter(|c| !c.skipped).map(|c| c.z);
            let pass = |stat| first(stat).filter(|c| !c.skipped).map(|c| c.pass);
            let mode = match cfg.mode {
                gps_core::Mode::Post => "post",
                gps_core::Mode::Instream => "instream",
            };
            let row = VerifyRow {
                input: &config.input,
                edges: input.edges,
                m: s.m,
                mode,
                weight_fn: cfg.weight.name(),
                trials: cfg.trials,
                tolerance: args.tolerance,
                tri_truth: tri.truth,
                tri_mean: tri.mean_estimate,
                tri_empirical_variance: tri.empirical_variance,
                tri_mean_variance_estimate: tri.mean_variance_estimate,
                tri_are: tri.are,
                tri_ci_coverage: tri.ci_coverage,
                tri_z: z(Statistic::Triangles),
                tri_pass: pass(Statistic::Triangles),
                wedge_truth: wedge.truth,
                wedge_mean: wedge.mean_estimate,
                wedge_empirical_variance: wedge.empirical_variance,
                wedge_mean_variance_estimate: wedge.mean_variance_estimate,
                wedge_are: wedge.are,
                wedge_ci_coverage: wedge.ci_coverage,
                wedge_z: z(Statistic::Wedges),
                wedge_pass: pass(Statistic::Wedges),
                mean_update_micros: tri.mean_update_micros,
                passed,
            };
            let mut cw = csv::Writer::from_writer(w);
            cw.serialize(row)?;
            cw.flush()?;
        }
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}
