//! Test-only brute-force oracles. Independent of the localized estimators:
//! subgraphs are enumerated explicitly as edge sets and every covariance
//! term is formed from set unions and intersections.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use gps_core::{EdgeKey, Reservoir};

pub type EdgeSet = BTreeSet<EdgeKey>;

#[derive(Clone, Copy, Debug)]
pub struct BruteForce {
    pub n_tri: f64,
    pub n_wedge: f64,
    pub v_tri: f64,
    pub v_wedge: f64,
    pub cov_tri_wedge: f64,
}

fn share_node(a: &EdgeKey, b: &EdgeKey) -> bool {
    a.lo == b.lo || a.lo == b.hi || a.hi == b.lo || a.hi == b.hi
}

/// Sampled triangles and wedges of the reservoir as explicit edge sets.
pub fn sampled_subgraphs(state: &Reservoir) -> (Vec<EdgeSet>, Vec<EdgeSet>) {
    let keys: Vec<EdgeKey> = state.entries().iter().map(|e| e.edge().key()).collect();
    let mut wedges = Vec::new();
    let mut triangles = BTreeSet::new();
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            let (a, b) = (keys[i], keys[j]);
            if !share_node(&a, &b) {
                continue;
            }
            wedges.push([a, b].into_iter().collect::<EdgeSet>());
            // the two outer endpoints close a triangle if that edge is resident
            let mut ends: Vec<u64> = vec![a.lo, a.hi, b.lo, b.hi];
            ends.sort_unstable();
            let outer: Vec<u64> = ends
                .iter()
                .copied()
                .filter(|n| ends.iter().filter(|m| *m == n).count() == 1)
                .collect();
            if let [x, y] = outer[..] {
                let c = EdgeKey::new(x, y).unwrap();
                if state.contains(&c) {
                    triangles.insert([a, b, c].into_iter().collect::<EdgeSet>());
                }
            }
        }
    }
    (triangles.into_iter().collect(), wedges)
}

fn ht(set: &EdgeSet, inv: &HashMap<EdgeKey, f64>) -> f64 {
    set.iter().map(|k| inv[k]).product()
}

/// `Ŝ_{J1 ∪ J2} (Ŝ_{J1 ∩ J2} - 1)`; zero for disjoint sets.
fn cov_term(a: &EdgeSet, b: &EdgeSet, inv: &HashMap<EdgeKey, f64>) -> f64 {
    let inter: EdgeSet = a.intersection(b).copied().collect();
    if inter.is_empty() {
        return 0.0;
    }
    let union: EdgeSet = a.union(b).copied().collect();
    ht(&union, inv) * (ht(&inter, inv) - 1.0)
}

fn class_totals(sets: &[EdgeSet], inv: &HashMap<EdgeKey, f64>) -> (f64, f64) {
    let mut n = 0.0;
    let mut v = 0.0;
    for (i, s) in sets.iter().enumerate() {
        let x = ht(s, inv);
        n += x;
        v += x * (x - 1.0);
        for other in &sets[..i] {
            v += 2.0 * cov_term(s, other, inv);
        }
    }
    (n, v)
}

pub fn brute_force(state: &Reservoir) -> BruteForce {
    let inv: HashMap<EdgeKey, f64> = state
        .entries()
        .iter()
        .map(|e| (e.edge().key(), 1.0 / state.prob_for_weight(e.weight())))
        .collect();
    let (tris, wedges) = sampled_subgraphs(state);
    let (n_tri, v_tri) = class_totals(&tris, &inv);
    let (n_wedge, v_wedge) = class_totals(&wedges, &inv);
    let cov_tri_wedge = tris
        .iter()
        .flat_map(|t| wedges.iter().map(move |w| (t, w)))
        .map(|(t, w)| cov_term(t, w, &inv))
        .sum();
    BruteForce {
        n_tri,
        n_wedge,
        v_tri,
        v_wedge,
        cov_tri_wedge,
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Sample covariance with `n - 1` denominator.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0)
}
