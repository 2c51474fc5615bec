use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use gps_core::{exact_counts, parse_edge_list_from, permute_stream, ParseOptions, StreamSource};
use serde::Serialize;

use crate::config::{InputArgs, OracleArgs, SamplingArgs};
use crate::{CliError, CliResult};

#[derive(Clone, Debug, Serialize)]
pub struct InputSummary {
    pub edges: usize,
    pub nodes: usize,
    pub duplicates_dropped: usize,
    pub self_loops_dropped: usize,
    pub labels: Option<usize>,
}

/// Rewrites labelled lines to dense numeric ids in order of first
/// appearance. Line numbers are kept so parse errors still point at the
/// original line.
fn relabel(text: &str, comment: char) -> (String, usize) {
    let mut ids: HashMap<&str, u64> = HashMap::new();
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(comment) {
            out.push('\n');
            continue;
        }
        let tokens: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .take(2)
            .collect();
        if tokens.len() < 2 {
            out.push_str(trimmed);
            out.push('\n');
            continue;
        }
        for (i, t) in tokens.iter().enumerate() {
            let next = ids.len() as u64;
            let id = *ids.entry(t).or_insert(next);
            let _ = write!(out, "{}{id}", if i == 0 { "" } else { " " });
        }
        out.push('\n');
    }
    (out, ids.len())
}

pub fn load(args: &InputArgs) -> CliResult<(StreamSource, Option<usize>)> {
    let path = &args.input;
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let options = ParseOptions {
        drop_duplicates: !args.strict_duplicates,
        ..ParseOptions::default()
    };
    let origin = path.display().to_string();
    let parsed = if args.labels {
        let (numeric, n) = relabel(&text, options.comment_prefix);
        parse_edge_list_from(&numeric, &options, origin).map(|s| (s, Some(n)))
    } else {
        parse_edge_list_from(&text, &options, origin).map(|s| (s, None))
    };
    parsed.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// The input as it will be streamed: permuted with the run seed unless
/// disabled.
pub fn load_stream(args: &SamplingArgs) -> CliResult<(StreamSource, InputSummary)> {
    let (source, labels) = load(&args.input)?;
    let summary = InputSummary {
        edges: source.len(),
        nodes: source.node_count(),
        duplicates_dropped: source.duplicates_dropped(),
        self_loops_dropped: source.self_loops_dropped(),
        labels,
    };
    let stream = if args.permute { permute_stream(&source, args.seed) } else { source };
    Ok((stream, summary))
}

pub fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn oracle(args: &OracleArgs) -> CliResult<()> {
    let (source, _) = load(&args.input)?;
    let counts = exact_counts(source.edges());
    println!("{}", serde_json::to_string(&counts)?);
    Ok(())
}
