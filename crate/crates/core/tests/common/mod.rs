//! Independent reference implementations and fixtures for the test suites.
//!
//! None of these reuse the library's dynamic programs or sweeps: they
//! enumerate matchings, thresholds and ε values directly.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use eedag::{
    build_dag, build_supergraph, AlignedPair, Alignment, Backbone, BackboneNode, Dataset, Label,
    TimeGrid, TimeSeries,
};
use rand::Rng;

pub fn grid(n: usize) -> TimeGrid {
    TimeGrid::new((0..n).map(|i| i as f64).collect()).unwrap()
}

pub fn series(name: &str, heights: &[f64]) -> TimeSeries {
    TimeSeries::new(name, grid(heights.len()), heights.to_vec()).unwrap()
}

pub fn dataset(columns: &[(&str, Vec<f64>)]) -> Dataset {
    let n = columns[0].1.len();
    Dataset::from_columns(grid(n), columns.iter().map(|(n, h)| (*n, h.clone()))).unwrap()
}

/// Sine and cosine sampled at `n` uniform points of `[0, 2π]`.
pub fn sin_cos(n: usize) -> Dataset {
    let g = TimeGrid::uniform(0.0, TAU, n).unwrap();
    let sin = g.points().iter().map(|z| z.sin()).collect();
    let cos = g.points().iter().map(|z| z.cos()).collect();
    Dataset::from_columns(g, [("sin", sin), ("cos", cos)]).unwrap()
}

pub fn backbone(pairs: &[(Label, f64)]) -> Backbone {
    Backbone::from_pairs(pairs).unwrap()
}

pub fn sine_backbone_one() -> Backbone {
    use Label::*;
    backbone(&[
        (Min, 0.25),
        (Max, 0.5),
        (Min, 0.5),
        (Max, 0.016),
        (Min, 0.016),
        (Max, 0.25),
    ])
}

pub fn sine_backbone_two() -> Backbone {
    use Label::*;
    backbone(&[
        (Min, 0.25),
        (Max, 0.042),
        (Min, 0.042),
        (Max, 0.5),
        (Min, 0.5),
        (Max, 0.25),
    ])
}

/// Random plateau-free heights in `[-1, 1)`.
pub fn random_heights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if h.windows(2).all(|w| w[0] != w[1]) {
            return h;
        }
    }
}

/// Random plateau-free heights drawn from a coarse integer lattice, so
/// that equal non-adjacent heights occur often.
pub fn random_lattice_heights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n);
    while h.len() < n {
        let v = rng.gen_range(0..6) as f64;
        if h.last() != Some(&v) {
            h.push(v);
        }
    }
    h
}

/// Alternating backbone of length `len` with weights from `weights`.
pub fn random_backbone<R: Rng>(rng: &mut R, len: usize, weights: &[f64]) -> Backbone {
    let mut label = if rng.gen_bool(0.5) {
        Label::Min
    } else {
        Label::Max
    };
    let mut nodes = Vec::with_capacity(len);
    for _ in 0..len {
        nodes.push(BackboneNode {
            label,
            weight: weights[rng.gen_range(0..weights.len())],
        });
        label = label.opposite();
    }
    Backbone::new("r", nodes).unwrap()
}

/// Alternating backbone with continuous weights in `(0, 1]`.
pub fn random_backbone_continuous<R: Rng>(rng: &mut R, len: usize) -> Backbone {
    let mut label = if rng.gen_bool(0.5) {
        Label::Min
    } else {
        Label::Max
    };
    let mut nodes = Vec::with_capacity(len);
    for _ in 0..len {
        nodes.push(BackboneNode {
            label,
            weight: 1.0 - rng.gen_range(0.0..1.0),
        });
        label = label.opposite();
    }
    Backbone::new("r", nodes).unwrap()
}

/// Every order-preserving, label-respecting matching between `x` and `y`.
fn matchings(x: &Backbone, y: &Backbone) -> Vec<Vec<(usize, usize)>> {
    fn extend(
        x: &Backbone,
        y: &Backbone,
        i: usize,
        next_j: usize,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == x.len() {
            out.push(current.clone());
            return;
        }
        extend(x, y, i + 1, next_j, current, out);
        for j in next_j..y.len() {
            if x.nodes[i].label == y.nodes[j].label {
                current.push((i, j));
                extend(x, y, i + 1, j + 1, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(x, y, 0, 0, &mut Vec::new(), &mut out);
    out
}

/// Per-position costs of the alignment realizing `matching`.
fn matching_costs(x: &Backbone, y: &Backbone, matching: &[(usize, usize)]) -> Vec<f64> {
    let mut x_used = vec![false; x.len()];
    let mut y_used = vec![false; y.len()];
    let mut costs = Vec::new();
    for &(i, j) in matching {
        x_used[i] = true;
        y_used[j] = true;
        costs.push((x.weight(i) - y.weight(j)).abs());
    }
    costs.extend((0..x.len()).filter(|&i| !x_used[i]).map(|i| x.weight(i)));
    costs.extend((0..y.len()).filter(|&j| !y_used[j]).map(|j| y.weight(j)));
    costs
}

pub fn oracle_backbone_distance(x: &Backbone, y: &Backbone) -> Result<f64, String> {
    if x.len() + y.len() > 12 {
        return Err(format!(
            "oracle limited to 12 nodes, got {}",
            x.len() + y.len()
        ));
    }
    Ok(matchings(x, y)
        .iter()
        .map(|m| matching_costs(x, y, m).iter().sum::<f64>())
        .fold(f64::INFINITY, f64::min))
}

pub fn oracle_backbone_infinity_distance(x: &Backbone, y: &Backbone) -> Result<f64, String> {
    if x.len() + y.len() > 12 {
        return Err(format!(
            "oracle limited to 12 nodes, got {}",
            x.len() + y.len()
        ));
    }
    Ok(matchings(x, y)
        .iter()
        .map(|m| matching_costs(x, y, m).iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min))
}

/// Every alignment of `x` and `y` as an explicit pair sequence.
pub fn all_alignments(x: &Backbone, y: &Backbone) -> Vec<Alignment> {
    fn walk(
        x: &Backbone,
        y: &Backbone,
        i: usize,
        j: usize,
        seq: &mut Vec<AlignedPair>,
        out: &mut Vec<Alignment>,
    ) {
        if i == x.len() && j == y.len() {
            out.push(Alignment::new(seq.clone()));
            return;
        }
        if i < x.len() && j < y.len() && x.nodes[i].label == y.nodes[j].label {
            seq.push(AlignedPair::matched(i, j));
            walk(x, y, i + 1, j + 1, seq, out);
            seq.pop();
        }
        if i < x.len() {
            seq.push(AlignedPair::x_only(i));
            walk(x, y, i + 1, j, seq, out);
            seq.pop();
        }
        if j < y.len() {
            seq.push(AlignedPair::y_only(j));
            walk(x, y, i, j + 1, seq, out);
            seq.pop();
        }
    }
    let mut out = Vec::new();
    walk(x, y, 0, 0, &mut Vec::new(), &mut out);
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// All minimum-cost alignments.
pub fn optimal_alignments(x: &Backbone, y: &Backbone) -> Vec<Alignment> {
    let all = all_alignments(x, y);
    let best = all
        .iter()
        .map(|a| a.cost(x, y))
        .fold(f64::INFINITY, f64::min);
    all.into_iter()
        .filter(|a| close(a.cost(x, y), best))
        .collect()
}

/// Node lives by sweeping every height threshold and tracking which
/// minimum is the oldest in each sublevel run.
pub fn oracle_node_lives(h: &[f64]) -> BTreeMap<usize, f64> {
    let mut out = oracle_min_lives(h);
    let neg: Vec<f64> = h.iter().map(|v| -v).collect();
    out.extend(oracle_min_lives(&neg));
    out
}

fn oracle_min_lives(h: &[f64]) -> BTreeMap<usize, f64> {
    let n = h.len();
    let is_min = |i: usize| (i == 0 || h[i - 1] > h[i]) && (i + 1 == n || h[i + 1] > h[i]);
    let minima: Vec<usize> = (0..n).filter(|&i| is_min(i)).collect();
    let mut thresholds = h.to_vec();
    thresholds.sort_by(f64::total_cmp);
    let lo = thresholds[0];
    let hi = thresholds[n - 1];
    let mut lives = BTreeMap::new();
    for &m in &minima {
        let mut life = (hi - lo) / 2.0;
        for &theta in thresholds.iter().filter(|&&t| t >= h[m]) {
            let (mut l, mut r) = (m, m);
            while l > 0 && h[l - 1] <= theta {
                l -= 1;
            }
            while r + 1 < n && h[r + 1] <= theta {
                r += 1;
            }
            let older = minima
                .iter()
                .any(|&o| o >= l && o <= r && (h[o], o) < (h[m], m));
            if older {
                life = (theta - h[m]) / 2.0;
                break;
            }
        }
        lives.insert(m, life);
    }
    lives
}

/// `(left, right, left_closed, right_closed)` of the interval at exactly
/// `eps`, found by walking outward from `i` while the interpolant stays
/// strictly inside the shifted sublevel (or superlevel) set.
pub fn flood_interval(times: &[f64], h: &[f64], i: usize, eps: f64) -> (f64, f64, bool, bool) {
    let n = h.len();
    let is_min = (i == 0 || h[i - 1] > h[i]) && (i + 1 == n || h[i + 1] > h[i]);
    let inside = |k: usize| {
        if is_min {
            h[k] < h[i] + 2.0 * eps
        } else {
            h[k] > h[i] - 2.0 * eps
        }
    };
    let mut l = i;
    while l > 0 && inside(l - 1) {
        l -= 1;
    }
    let (left, left_closed) = if l == 0 {
        (times[0], true)
    } else {
        (times[l - 1], false)
    };
    let mut r = i;
    while r + 1 < n && inside(r + 1) {
        r += 1;
    }
    let (right, right_closed) = if r == n - 1 {
        (times[n - 1], true)
    } else {
        (times[r + 1], false)
    };
    (left, right, left_closed, right_closed)
}

fn overlap(a: (f64, f64, bool, bool), b: (f64, f64, bool, bool)) -> bool {
    let point_in = |p: f64, iv: (f64, f64, bool, bool)| {
        (if iv.2 { p >= iv.0 } else { p > iv.0 }) && (if iv.3 { p <= iv.1 } else { p < iv.1 })
    };
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    if lo < hi {
        return true;
    }
    lo == hi && point_in(lo, a) && point_in(lo, b)
}

/// First `ε = k · resolution` at which the two intervals overlap.
pub fn oracle_eps_star(
    a: &TimeSeries,
    ia: usize,
    b: &TimeSeries,
    ib: usize,
    resolution: f64,
) -> Option<f64> {
    assert!(resolution > 0.0);
    let span = |ts: &TimeSeries| {
        let h = ts.heights();
        h.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - h.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let steps = ((span(a).max(span(b)) / resolution).ceil() as usize) + 2;
    (0..=steps).map(|k| k as f64 * resolution).find(|&eps| {
        overlap(
            flood_interval(a.times(), a.heights(), ia, eps),
            flood_interval(b.times(), b.heights(), ib, eps),
        )
    })
}

/// Extremal event DAG distance by brute force over all combinations of
/// minimum-cost alignments.
pub fn oracle_dag_distance(a: &Dataset, b: &Dataset) -> f64 {
    let (da, db) = (build_dag(a).unwrap(), build_dag(b).unwrap());
    let mut node_term = 0.0;
    let mut sets = Vec::new();
    for name in da.series_names() {
        let x = eedag::extract_backbone(&da, name).unwrap();
        let y = eedag::extract_backbone(&db, name).unwrap();
        node_term += oracle_backbone_distance(&x, &y).unwrap();
        sets.push(optimal_alignments(&x, &y));
    }
    let mut best = f64::INFINITY;
    let mut index = vec![0usize; sets.len()];
    loop {
        let chosen: Vec<Alignment> = index
            .iter()
            .enumerate()
            .map(|(i, &c)| sets[i][c].clone())
            .collect();
        let sg = build_supergraph(&da, &db, &chosen).unwrap();
        best = best.min(sg.edge_term());
        let mut d = 0;
        while d < sets.len() {
            index[d] += 1;
            if index[d] < sets[d].len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
        if d == sets.len() {
            break;
        }
    }
    node_term + best
}
