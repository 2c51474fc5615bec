//! Edge-list ingestion.
//!
//! The only accepted format is line-oriented text: two unsigned integers per
//! line separated by whitespace or a comma. Extra tokens after the first two
//! are ignored. Lines starting with the comment prefix are skipped.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GpsError, Result};

pub type NodeId = u64;

/// Canonical undirected node pair, `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub lo: NodeId,
    pub hi: NodeId,
}

impl EdgeKey {
    /// Returns `None` for a self loop.
    pub fn new(a: NodeId, b: NodeId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Self { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Self { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Endpoint opposite to `node`. `node` must be one of the endpoints.
    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.lo {
            self.hi
        } else {
            self.lo
        }
    }
}

/// A stream edge: canonical endpoints `u < v` and a 1-based arrival index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub arrival: u64,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId, arrival: u64) -> Option<Self> {
        EdgeKey::new(a, b).map(|k| Self {
            u: k.lo,
            v: k.hi,
            arrival,
        })
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            lo: self.u,
            hi: self.v,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub comment_prefix: char,
    /// Silently drop repeated edges (counted) instead of failing.
    pub drop_duplicates: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            comment_prefix: '#',
            drop_duplicates: true,
        }
    }
}

/// An immutable, simplified edge stream.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamSource {
    edges: Vec<Edge>,
    origin: String,
    seed: Option<u64>,
    duplicates_dropped: usize,
    self_loops_dropped: usize,
}

impl StreamSource {
    /// Builds a stream from raw pairs in order, dropping self loops and
    /// duplicates. Fails on an empty result.
    pub fn from_pairs<I>(pairs: I, origin: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut b = Builder::default();
        for (line, (a, c)) in pairs.into_iter().enumerate() {
            b.push(a, c, line + 1, true)?;
        }
        b.finish(origin.into())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    pub fn node_count(&self) -> usize {
        let mut nodes = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            nodes.insert(e.u);
            nodes.insert(e.v);
        }
        nodes.len()
    }

    /// Serializes back to the edge-list text format, one `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 12);
        for e in &self.edges {
            let _ = writeln!(out, "{} {}", e.u, e.v);
        }
        out
    }

    /// Prefix of the first `t` arrivals.
    pub fn prefix(&self, t: usize) -> &[Edge] {
        &self.edges[..t.min(self.edges.len())]
    }
}

#[derive(Default)]
struct Builder {
    edges: Vec<Edge>,
    seen: HashSet<EdgeKey>,
    duplicates_dropped: usize,
    self_loops_dropped: usize,
}

impl Builder {
    fn push(&mut self, a: NodeId, b: NodeId, line: usize, drop_duplicates: bool) -> Result<()> {
        let Some(key) = EdgeKey::new(a, b) else {
            self.self_loops_dropped += 1;
            return Ok(());
        };
        if !self.seen.insert(key) {
            if drop_duplicates {
                self.duplicates_dropped += 1;
                return Ok(());
            }
            return Err(GpsError::DuplicateEdge {
                line,
                u: key.lo,
                v: key.hi,
            });
        }
        let arrival = self.edges.len() as u64 + 1;
        self.edges.push(Edge {
            u: key.lo,
            v: key.hi,
            arrival,
        });
        Ok(())
    }

    fn finish(self, origin: String) -> Result<StreamSource> {
        if self.edges.is_empty() {
            return Err(GpsError::EmptyStream);
        }
        Ok(StreamSource {
            edges: self.edges,
            origin,
            seed: None,
            duplicates_dropped: self.duplicates_dropped,
            self_loops_dropped: self.self_loops_dropped,
        })
    }
}

fn parse_node(token: &str, line: usize) -> Result<NodeId> {
    token.parse::<NodeId>().map_err(|e| GpsError::Parse {
        line,
        message: format!("invalid node id {token:?}: {e}"),
    })
}

/// Parses edge-list text into a simplified stream.
pub fn parse_edge_list(text: &str, options: &ParseOptions) -> Result<StreamSource> {
    parse_edge_list_from(text, options, "<text>")
}

pub fn parse_edge_list_from(
    text: &str,
    options: &ParseOptions,
    origin: impl Into<String>,
) -> Result<StreamSource> {
    let mut b = Builder::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with(options.comment_prefix) {
            continue;
        }
        let mut tokens = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty());
        let (Some(a), Some(c)) = (tokens.next(), tokens.next()) else {
            return Err(GpsError::Parse {
                line: line_no,
                message: "expected two node ids".into(),
            });
        };
        let a = parse_node(a, line_no)?;
        let c = parse_node(c, line_no)?;
        b.push(a, c, line_no, options.drop_duplicates)?;
    }
    b.finish(origin.into())
}

/// Fisher-Yates shuffle driven by a seeded ChaCha generator. Arrival
/// indices are reassigned `1..=len` in the new order.
pub fn permute_stream(stream: &StreamSource, seed: u64) -> StreamSource {
    let mut edges = stream.edges.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    for (i, e) in edges.iter_mut().enumerate() {
        e.arrival = i as u64 + 1;
    }
    StreamSource {
        edges,
        origin: stream.origin.clone(),
        seed: Some(seed),
        duplicates_dropped: stream.duplicates_dropped,
        self_loops_dropped: stream.self_loops_dropped,
    }
}
