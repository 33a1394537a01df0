//! Extremal event supergraphs and the extremal event DAG distance.
//!
//! The distance between two datasets with the same series names is the sum
//! of the backbone distances of same-named series plus the smallest total
//! absolute edge-weight difference over the supergraphs induced by optimal
//! backbone alignments.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{
    alignment_matrix, backtrack, enumerate_optimal_matchings, extract_backbone, validate_alignment,
    Alignment, AlignmentReport, Backbone, TiePolicy,
};
use crate::error::{Error, Result};
use crate::event_dag::{build_dag, escape, format_weight, ExtremalEventDAG};
use crate::ingest::{collapse_plateaus, min_max, Dataset, TimeSeries};
use crate::persistence::{find_extrema, persistence_diagram, Death, Filtration};

pub const DEFAULT_PAIR_CAP: usize = 64;
pub const MAX_COMBINATIONS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceOptions {
    /// Most optimal alignments considered per backbone pair.
    pub pair_cap: usize,
    /// Most alignment combinations evaluated; defaults to `min(pair_cap², 1024)`.
    pub combination_cap: Option<usize>,
    pub tie_policy: TiePolicy,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self::with_cap(DEFAULT_PAIR_CAP)
    }
}

impl DistanceOptions {
    pub fn with_cap(pair_cap: usize) -> Self {
        Self {
            pair_cap,
            combination_cap: None,
            tie_policy: TiePolicy::default(),
        }
    }

    fn combination_limit(&self) -> usize {
        self.combination_cap.unwrap_or_else(|| {
            self.pair_cap
                .saturating_mul(self.pair_cap)
                .min(MAX_COMBINATIONS)
        })
    }
}

/// One aligned position of one backbone pair. Node references are DAG
/// vertex ids; a side without a node has weight 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupergraphVertex {
    pub pair: usize,
    pub position: usize,
    pub x: Option<usize>,
    pub y: Option<usize>,
    pub weight_a: f64,
    pub weight_b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupergraphEdge {
    pub src: usize,
    pub dst: usize,
    pub weight_a: f64,
    pub weight_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Supergraph {
    /// Series name of each backbone pair, in the order of the first DAG.
    pub series: Vec<String>,
    pub vertices: Vec<SupergraphVertex>,
    pub edges: Vec<SupergraphEdge>,
}

impl Supergraph {
    pub fn node_term(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v.weight_a - v.weight_b).abs())
            .sum()
    }

    pub fn edge_term(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| (e.weight_a - e.weight_b).abs())
            .sum()
    }

    /// Number of edges joining backbone pairs `i` and `j`, in either direction.
    pub fn cross_edge_count(&self, i: usize, j: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| {
                let (p, q) = (self.vertices[e.src].pair, self.vertices[e.dst].pair);
                (p == i && q == j) || (p == j && q == i)
            })
            .count()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph supergraph {\n  rankdir=LR;\n");
        for (id, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(
                out,
                "  s{id} [label=\"{}@{} ({}, {})\"];",
                escape(&self.series[v.pair]),
                v.position + 1,
                format_weight(v.weight_a),
                format_weight(v.weight_b)
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"({}, {})\"];",
                e.src,
                e.dst,
                format_weight(e.weight_a),
                format_weight(e.weight_b)
            );
        }
        out.push_str("}\n");
        out
    }
}

/// For each series of `a`, the index of the same-named series of `b`.
fn pair_series(a: &ExtremalEventDAG, b: &ExtremalEventDAG) -> Result<Vec<usize>> {
    let mut pairing = Vec::with_capacity(a.series_names().len());
    for name in a.series_names() {
        let j = b.series_index(name).ok_or_else(|| {
            Error::NameMismatch(format!("`{name}` is missing from the second dataset"))
        })?;
        pairing.push(j);
    }
    if let Some(extra) = b
        .series_names()
        .iter()
        .find(|n| a.series_index(n).is_none())
    {
        return Err(Error::NameMismatch(format!(
            "`{extra}` is missing from the first dataset"
        )));
    }
    Ok(pairing)
}

/// Node references of one alignment, as vertex ids of the two DAGs.
type Positions = Vec<(Option<usize>, Option<usize>)>;

fn positions(
    a: &ExtremalEventDAG,
    b: &ExtremalEventDAG,
    i: usize,
    j: usize,
    al: &Alignment,
) -> Positions {
    let (oa, ob) = (a.series_vertices(i).start, b.series_vertices(j).start);
    al.pairs
        .iter()
        .map(|p| (p.x.map(|k| oa + k), p.y.map(|k| ob + k)))
        .collect()
}

/// Weights of the projected edge `u -> v` in each DAG, or `None` when
/// neither DAG has it.
fn projected_edge(
    a: &ExtremalEventDAG,
    b: &ExtremalEventDAG,
    u: (Option<usize>, Option<usize>),
    v: (Option<usize>, Option<usize>),
) -> Option<(f64, f64)> {
    let wa = u.0.zip(v.0).and_then(|(p, q)| a.edge_weight(p, q));
    let wb = u.1.zip(v.1).and_then(|(p, q)| b.edge_weight(p, q));
    if wa.is_none() && wb.is_none() {
        return None;
    }
    Some((wa.unwrap_or(0.0), wb.unwrap_or(0.0)))
}

/// Supergraph of two DAGs under one alignment per series of `dag_a`, given
/// in `dag_a`'s series order.
pub fn build_supergraph(
    dag_a: &ExtremalEventDAG,
    dag_b: &ExtremalEventDAG,
    alignments: &[Alignment],
) -> Result<Supergraph> {
    let pairing = pair_series(dag_a, dag_b)?;
    if alignments.len() != pairing.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} alignments, got {}",
            pairing.len(),
            alignments.len()
        )));
    }
    let mut vertices = Vec::new();
    for (i, (&j, al)) in pairing.iter().zip(alignments).enumerate() {
        let name = &dag_a.series_names()[i];
        let x = extract_backbone(dag_a, name)?;
        let y = extract_backbone(dag_b, name)?;
        validate_alignment(al, &x, &y).map_err(|violations| Error::InvalidAlignment {
            series: name.clone(),
            details: violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; "),
        })?;
        for (position, (xa, yb)) in positions(dag_a, dag_b, i, j, al).into_iter().enumerate() {
            vertices.push(SupergraphVertex {
                pair: i,
                position,
                x: xa,
                y: yb,
                weight_a: xa.map_or(0.0, |p| dag_a.vertices()[p].weight),
                weight_b: yb.map_or(0.0, |q| dag_b.vertices()[q].weight),
            });
        }
    }
    let mut edges = Vec::new();
    for (src, u) in vertices.iter().enumerate() {
        for (dst, v) in vertices.iter().enumerate() {
            if src == dst {
                continue;
            }
            if let Some((weight_a, weight_b)) = projected_edge(dag_a, dag_b, (u.x, u.y), (v.x, v.y))
            {
                edges.push(SupergraphEdge {
                    src,
                    dst,
                    weight_a,
                    weight_b,
                });
            }
        }
    }
    Ok(Supergraph {
        series: dag_a.series_names().to_vec(),
        vertices,
        edges,
    })
}

/// Edge-term contribution of the edges within one alignment (`pb` = `None`)
/// or between two alignments in both directions.
fn block_cost(
    a: &ExtremalEventDAG,
    b: &ExtremalEventDAG,
    pa: &Positions,
    pb: Option<&Positions>,
) -> f64 {
    let mut total = 0.0;
    let mut add = |u, v| {
        if let Some((wa, wb)) = projected_edge(a, b, u, v) {
            total += (wa - wb).abs();
        }
    };
    match pb {
        None => {
            for (s, &u) in pa.iter().enumerate() {
                for (t, &v) in pa.iter().enumerate() {
                    if s != t {
                        add(u, v);
                    }
                }
            }
        }
        Some(pb) => {
            for &u in pa {
                for &v in pb {
                    add(u, v);
                    add(v, u);
                }
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackboneTerm {
    pub series: String,
    pub distance: f64,
    /// Optimal alignments with distinct matchings that were found.
    pub optimal_alignments: usize,
    pub tied: bool,
    /// The per-pair cap was hit and only the canonical alignment was used.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub total: f64,
    pub node_term: f64,
    pub edge_term: f64,
    pub backbones: Vec<BackboneTerm>,
    pub alignments: Vec<AlignmentReport>,
    /// Some backbone pair has more than one optimal alignment.
    pub tied: bool,
    /// Enumeration was cut short by a cap somewhere.
    pub truncated: bool,
    pub combinations_evaluated: usize,
    pub stability_bound: Option<f64>,
}

/// Builds both DAGs and compares them with the default per-pair cap policy.
pub fn dag_distance(ds_a: &Dataset, ds_b: &Dataset, cap: usize) -> Result<DistanceReport> {
    dag_distance_with(ds_a, ds_b, &DistanceOptions::with_cap(cap))
}

pub fn dag_distance_with(
    ds_a: &Dataset,
    ds_b: &Dataset,
    opts: &DistanceOptions,
) -> Result<DistanceReport> {
    let (dag_a, dag_b) = rayon::join(|| build_dag(ds_a), || build_dag(ds_b));
    let (dag_a, dag_b) = (dag_a?, dag_b?);
    let chosen = compare_dags(&dag_a, &dag_b, opts)?;
    let mut report = chosen.report;
    if ds_a.grid() == ds_b.grid() {
        let supergraph = build_supergraph(&dag_a, &dag_b, &chosen.alignments)?;
        report.stability_bound = bound_for(ds_a, ds_b, &supergraph)?;
    }
    Ok(report)
}

/// The outcome of [`compare_dags`]: the report and the alignments it used.
pub struct Comparison {
    pub report: DistanceReport,
    pub alignments: Vec<Alignment>,
}

/// Distance between two already built DAGs. The stability bound is left
/// empty because it needs the raw series.
pub fn compare_dags(
    dag_a: &ExtremalEventDAG,
    dag_b: &ExtremalEventDAG,
    opts: &DistanceOptions,
) -> Result<Comparison> {
    let pairing = pair_series(dag_a, dag_b)?;
    let k = pairing.len();

    struct PairSolution {
        x: Backbone,
        y: Backbone,
        distance: f64,
        canonical: Alignment,
        choices: Vec<Alignment>,
        tied: bool,
        truncated: bool,
    }

    let solutions: Vec<PairSolution> = dag_a
        .series_names()
        .par_iter()
        .map(|name| {
            let x = extract_backbone(dag_a, name)?;
            let y = extract_backbone(dag_b, name)?;
            let mat = alignment_matrix(&x, &y);
            let canonical = backtrack(&mat, &x, &y, opts.tie_policy);
            let (choices, truncated) = enumerate_optimal_matchings(&mat, &x, &y, opts.pair_cap);
            Ok(PairSolution {
                distance: mat.corner(),
                tied: choices.len() > 1,
                choices,
                canonical,
                truncated,
                x,
                y,
            })
        })
        .collect::<Result<_>>()?;

    let mut truncated = false;
    let mut choice_sets: Vec<Vec<Alignment>> = solutions
        .iter()
        .map(|s| {
            if s.truncated || s.choices.len() == 1 {
                truncated |= s.truncated;
                vec![s.canonical.clone()]
            } else {
                s.choices.clone()
            }
        })
        .collect();
    let limit = opts.combination_limit().max(1);
    let product = choice_sets.iter().try_fold(1usize, |acc, c| {
        acc.checked_mul(c.len()).filter(|&p| p <= limit)
    });
    if product.is_none() {
        truncated = true;
        choice_sets = solutions
            .iter()
            .map(|s| vec![s.canonical.clone()])
            .collect();
    }

    let placed: Vec<Vec<Positions>> = choice_sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            set.iter()
                .map(|al| positions(dag_a, dag_b, i, pairing[i], al))
                .collect()
        })
        .collect();

    // Edge-term blocks per pair of backbone pairs and per choice of alignments.
    let within: Vec<Vec<f64>> = placed
        .par_iter()
        .map(|set| {
            set.iter()
                .map(|p| block_cost(dag_a, dag_b, p, None))
                .collect()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let between: Vec<Vec<Vec<f64>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            placed[i]
                .iter()
                .map(|pi| {
                    placed[j]
                        .iter()
                        .map(|pj| block_cost(dag_a, dag_b, pi, Some(pj)))
                        .collect()
                })
                .collect()
        })
        .collect();

    let radix: Vec<usize> = choice_sets.iter().map(Vec::len).collect();
    let mut index = vec![0usize; k];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0usize;
    loop {
        let mut cost: f64 = (0..k).map(|i| within[i][index[i]]).sum();
        for (p, &(i, j)) in pairs.iter().enumerate() {
            cost += between[p][index[i]][index[j]];
        }
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, index.clone()));
        }
        let mut digit = 0;
        while digit < k {
            index[digit] += 1;
            if index[digit] < radix[digit] {
                break;
            }
            index[digit] = 0;
            digit += 1;
        }
        if digit == k {
            break;
        }
    }
    let (edge_term, pick) =
        best.ok_or_else(|| Error::Invariant("no alignment combination".into()))?;

    let alignments: Vec<Alignment> = pick
        .iter()
        .enumerate()
        .map(|(i, &c)| choice_sets[i][c].clone())
        .collect();
    let node_term: f64 = solutions.iter().map(|s| s.distance).sum();
    let report = DistanceReport {
        total: node_term + edge_term,
        node_term,
        edge_term,
        backbones: solutions
            .iter()
            .map(|s| BackboneTerm {
                series: s.x.series.clone(),
                distance: s.distance,
                optimal_alignments: s.choices.len(),
                tied: s.tied,
                truncated: s.truncated,
            })
            .collect(),
        alignments: solutions
            .iter()
            .zip(&alignments)
            .map(|(s, al)| al.report(&s.x, &s.y, s.tied))
            .collect(),
        tied: solutions.iter().any(|s| s.tied),
        truncated,
        combinations_evaluated: evaluated,
        stability_bound: None,
    };
    Ok(Comparison { report, alignments })
}

/// Half the smallest L∞ gap in the dimension-0 diagram of the series, over
/// distinct off-diagonal points and their distance to the diagonal. The
/// essential class is truncated at the maximum of the filtered function.
pub fn diagram_gap(ts: &TimeSeries, which: Filtration) -> f64 {
    let (lo, hi) = min_max(ts.heights());
    let top = match which {
        Filtration::Sublevel => hi,
        Filtration::Superlevel => -lo,
    };
    let points: Vec<(f64, f64)> = persistence_diagram(ts, which)
        .into_iter()
        .map(|p| match p.death {
            Death::Finite(d) => (p.birth, d),
            Death::Infinite => (p.birth, top),
        })
        .collect();
    let mut best = f64::INFINITY;
    for (k, &(b, d)) in points.iter().enumerate() {
        best = best.min((d - b) / 2.0);
        for &(b2, d2) in &points[k + 1..] {
            best = best.min((b - b2).abs().max((d - d2).abs()));
        }
    }
    best / 2.0
}

/// `δ_f = min(δ_min, δ_max)` of a plateau-free series.
pub fn delta_f(ts: &TimeSeries) -> f64 {
    diagram_gap(ts, Filtration::Sublevel).min(diagram_gap(ts, Filtration::Superlevel))
}

/// Per-series sup-norm differences, or `None` when some pair of series is
/// not close enough for the local stability bound to apply.
fn closeness(ds_a: &Dataset, ds_b: &Dataset) -> Result<Option<Vec<(usize, f64)>>> {
    if ds_a.grid() != ds_b.grid() {
        return Err(Error::GridMismatch);
    }
    let mut out = Vec::with_capacity(ds_a.len());
    for ts in ds_a.series() {
        let other = ds_b.get(ts.name()).ok_or_else(|| {
            Error::NameMismatch(format!(
                "`{}` is missing from the second dataset",
                ts.name()
            ))
        })?;
        let eps = ts
            .heights()
            .iter()
            .zip(other.heights())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let (f, _) = collapse_plateaus(ts)?;
        if !(eps < delta_f(&f) / 2.0) {
            return Ok(None);
        }
        let (g, _) = collapse_plateaus(other)?;
        out.push((find_extrema(&g).len(), eps));
    }
    if ds_b.len() != ds_a.len() {
        return Err(Error::NameMismatch(
            "datasets have different series counts".into(),
        ));
    }
    Ok(Some(out))
}

fn bound_for(ds_a: &Dataset, ds_b: &Dataset, supergraph: &Supergraph) -> Result<Option<f64>> {
    let Some(terms) = closeness(ds_a, ds_b)? else {
        return Ok(None);
    };
    let mut bound = 0.0;
    for &(k, eps) in &terms {
        let k = k as f64;
        bound += k * eps + k * (k - 1.0) / 2.0 * eps;
    }
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let count = supergraph.cross_edge_count(i, j) as f64;
            bound += count * terms[i].1.max(terms[j].1);
        }
    }
    Ok(Some(bound))
}

/// Right-hand side of the local stability inequality for comparing `ds_a`
/// against its perturbation `ds_b`, or `None` when the series are not
/// within half of `δ_f` of each other.
pub fn stability_bound(ds_a: &Dataset, ds_b: &Dataset) -> Result<Option<f64>> {
    if closeness(ds_a, ds_b)?.is_none() {
        return Ok(None);
    }
    Ok(dag_distance(ds_a, ds_b, DEFAULT_PAIR_CAP)?.stability_bound)
}
