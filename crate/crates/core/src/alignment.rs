//! Backbones, alignments and the edit-distance dynamic program between them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_dag::ExtremalEventDAG;
use crate::persistence::Label;

/// Ties in the alignment matrix are detected with this relative tolerance.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackboneNode {
    pub label: Label,
    pub weight: f64,
}

/// The label/weight sequence of one series' extrema in time order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Backbone {
    pub series: String,
    pub nodes: Vec<BackboneNode>,
}

impl Backbone {
    pub fn new(series: impl Into<String>, nodes: Vec<BackboneNode>) -> Result<Self> {
        let series = series.into();
        if let Some(k) = nodes.windows(2).position(|w| w[0].label == w[1].label) {
            return Err(Error::InvalidArgument(format!(
                "backbone `{series}` repeats label {} at positions {k} and {}",
                nodes[k].label,
                k + 1
            )));
        }
        if let Some(k) = nodes
            .iter()
            .position(|n| !(n.weight >= 0.0) || !n.weight.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "backbone `{series}` has an invalid weight at position {k}"
            )));
        }
        Ok(Self { series, nodes })
    }

    /// Unnamed backbone from `(label, weight)` pairs.
    pub fn from_pairs(pairs: &[(Label, f64)]) -> Result<Self> {
        Self::new(
            "",
            pairs
                .iter()
                .map(|&(label, weight)| BackboneNode { label, weight })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.nodes[k].weight
    }
}

pub fn extract_backbone(dag: &ExtremalEventDAG, series: &str) -> Result<Backbone> {
    let idx = dag
        .series_index(series)
        .ok_or_else(|| Error::UnknownSeries(series.to_owned()))?;
    let nodes = dag.vertices()[dag.series_vertices(idx)]
        .iter()
        .map(|v| BackboneNode {
            label: v.label,
            weight: v.weight,
        })
        .collect();
    Backbone::new(series, nodes)
}

/// One alignment position. `None` stands for the empty node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignedPair {
    pub x: Option<usize>,
    pub y: Option<usize>,
}

impl AlignedPair {
    pub fn matched(x: usize, y: usize) -> Self {
        Self {
            x: Some(x),
            y: Some(y),
        }
    }

    pub fn x_only(x: usize) -> Self {
        Self {
            x: Some(x),
            y: None,
        }
    }

    pub fn y_only(y: usize) -> Self {
        Self {
            x: None,
            y: Some(y),
        }
    }

    pub fn cost(&self, x: &Backbone, y: &Backbone) -> f64 {
        let wx = self.x.map_or(0.0, |i| x.weight(i));
        let wy = self.y.map_or(0.0, |j| y.weight(j));
        (wx - wy).abs()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alignment {
    pub pairs: Vec<AlignedPair>,
}

impl Alignment {
    pub fn new(pairs: Vec<AlignedPair>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of absolute weight differences over all positions.
    pub fn cost(&self, x: &Backbone, y: &Backbone) -> f64 {
        self.pairs.iter().map(|p| p.cost(x, y)).sum()
    }

    /// Largest absolute weight difference over all positions.
    pub fn max_cost(&self, x: &Backbone, y: &Backbone) -> f64 {
        self.pairs.iter().map(|p| p.cost(x, y)).fold(0.0, f64::max)
    }

    /// The matched index pairs, ignoring insertions.
    pub fn matching(&self) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .filter_map(|p| Some((p.x?, p.y?)))
            .collect()
    }

    pub fn report(&self, x: &Backbone, y: &Backbone, tied: bool) -> AlignmentReport {
        let pairs = self
            .pairs
            .iter()
            .map(|p| PairReport {
                x: p.x,
                y: p.y,
                x_label: p.x.map(|i| x.nodes[i].label),
                y_label: p.y.map(|j| y.nodes[j].label),
                cost: p.cost(x, y),
            })
            .collect();
        AlignmentReport {
            x_series: x.series.clone(),
            y_series: y.series.clone(),
            pairs,
            total: self.cost(x, y),
            tied,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub x: Option<usize>,
    pub y: Option<usize>,
    pub x_label: Option<Label>,
    pub y_label: Option<Label>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub x_series: String,
    pub y_series: String,
    pub pairs: Vec<PairReport>,
    pub total: f64,
    /// More than one optimal alignment exists.
    pub tied: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    X,
    Y,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::X => "x",
            Side::Y => "y",
        })
    }
}

/// A broken alignment property, with the offending positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    NullPair {
        position: usize,
    },
    IndexOutOfRange {
        position: usize,
        side: Side,
        index: usize,
    },
    OrderNotPreserved {
        position: usize,
        side: Side,
    },
    Misalignment {
        position: usize,
        x: usize,
        y: usize,
    },
    NotAMatching {
        side: Side,
        index: usize,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NullPair { position } => {
                write!(f, "position {position} pairs two empty nodes")
            }
            Violation::IndexOutOfRange {
                position,
                side,
                index,
            } => write!(
                f,
                "position {position} refers to missing {side} node {index}"
            ),
            Violation::OrderNotPreserved { position, side } => {
                write!(f, "position {position} breaks the order of backbone {side}")
            }
            Violation::Misalignment { position, x, y } => write!(
                f,
                "position {position} matches x node {x} with y node {y} of a different label"
            ),
            Violation::NotAMatching { side, index, count } => {
                write!(f, "{side} node {index} appears {count} times")
            }
        }
    }
}

/// Checks the four alignment properties; every violation is reported.
pub fn validate_alignment(
    alignment: &Alignment,
    x: &Backbone,
    y: &Backbone,
) -> std::result::Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut counts = [vec![0usize; x.len()], vec![0usize; y.len()]];
    let mut last: [Option<usize>; 2] = [None, None];
    for (position, pair) in alignment.pairs.iter().enumerate() {
        if pair.x.is_none() && pair.y.is_none() {
            violations.push(Violation::NullPair { position });
            continue;
        }
        let sides = [(Side::X, pair.x, x.len()), (Side::Y, pair.y, y.len())];
        let mut in_range = true;
        for (k, (side, index, len)) in sides.into_iter().enumerate() {
            let Some(index) = index else { continue };
            if index >= len {
                violations.push(Violation::IndexOutOfRange {
                    position,
                    side,
                    index,
                });
                in_range = false;
                continue;
            }
            counts[k][index] += 1;
            if last[k].is_some_and(|prev| index <= prev) {
                violations.push(Violation::OrderNotPreserved { position, side });
            }
            last[k] = Some(last[k].map_or(index, |prev| prev.max(index)));
        }
        if let (true, Some(i), Some(j)) = (in_range, pair.x, pair.y) {
            if x.nodes[i].label != y.nodes[j].label {
                violations.push(Violation::Misalignment {
                    position,
                    x: i,
                    y: j,
                });
            }
        }
    }
    for (k, side) in [Side::X, Side::Y].into_iter().enumerate() {
        for (index, &count) in counts[k].iter().enumerate() {
            if count != 1 {
                violations.push(Violation::NotAMatching { side, index, count });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Cost of matching two nodes, or `None` when their labels differ.
fn diff(x: &BackboneNode, y: &BackboneNode) -> Option<f64> {
    (x.label == y.label).then(|| (x.weight - y.weight).abs())
}

/// `M[i][j]` is the cheapest alignment of the first `i` nodes of `x` with the
/// first `j` nodes of `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AlignmentMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// The optimal alignment cost of the full backbones.
    pub fn corner(&self) -> f64 {
        self.data[self.data.len() - 1]
    }

    fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }
}

pub fn alignment_matrix(x: &Backbone, y: &Backbone) -> AlignmentMatrix {
    fill(x, y, |prev, cost| prev + cost)
}

/// Shared recurrence: `combine(previous entry, move cost)`, minimized over moves.
fn fill(x: &Backbone, y: &Backbone, combine: impl Fn(f64, f64) -> f64) -> AlignmentMatrix {
    let (m, n) = (x.len(), y.len());
    let mut mat = AlignmentMatrix {
        rows: m + 1,
        cols: n + 1,
        data: vec![0.0; (m + 1) * (n + 1)],
    };
    for i in 1..=m {
        let v = combine(mat.get(i - 1, 0), x.weight(i - 1));
        mat.set(i, 0, v);
    }
    for j in 1..=n {
        let v = combine(mat.get(0, j - 1), y.weight(j - 1));
        mat.set(0, j, v);
    }
    for i in 1..=m {
        for j in 1..=n {
            let mut best = combine(mat.get(i - 1, j), x.weight(i - 1))
                .min(combine(mat.get(i, j - 1), y.weight(j - 1)));
            if let Some(d) = diff(&x.nodes[i - 1], &y.nodes[j - 1]) {
                best = best.min(combine(mat.get(i - 1, j - 1), d));
            }
            mat.set(i, j, best);
        }
    }
    mat
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    /// Match `x_i` with `y_j`.
    Diagonal,
    /// Insert `x_i` against the empty node.
    Vertical,
    /// Insert `y_j` against the empty node.
    Horizontal,
}

/// Preference among tied moves when backtracking a single alignment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Match, then insert from `x`, then insert from `y`.
    #[default]
    MatchFirst,
    /// Insert from `x`, then insert from `y`, then match.
    InsertFirst,
}

impl TiePolicy {
    fn order(self) -> [Move; 3] {
        match self {
            TiePolicy::MatchFirst => [Move::Diagonal, Move::Vertical, Move::Horizontal],
            TiePolicy::InsertFirst => [Move::Vertical, Move::Horizontal, Move::Diagonal],
        }
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "match-first" => Ok(TiePolicy::MatchFirst),
            "insert-first" => Ok(TiePolicy::InsertFirst),
            other => Err(Error::InvalidArgument(format!(
                "unknown tie policy `{other}`"
            ))),
        }
    }
}

/// True when `mv` into `(i, j)` attains `M[i][j]`.
fn tight(mat: &AlignmentMatrix, x: &Backbone, y: &Backbone, i: usize, j: usize, mv: Move) -> bool {
    let target = mat.get(i, j);
    match mv {
        Move::Diagonal => {
            i > 0
                && j > 0
                && diff(&x.nodes[i - 1], &y.nodes[j - 1])
                    .is_some_and(|d| approx_eq(mat.get(i - 1, j - 1) + d, target))
        }
        Move::Vertical => i > 0 && approx_eq(mat.get(i - 1, j) + x.weight(i - 1), target),
        Move::Horizontal => j > 0 && approx_eq(mat.get(i, j - 1) + y.weight(j - 1), target),
    }
}

fn step(i: usize, j: usize, mv: Move) -> (usize, usize, AlignedPair) {
    match mv {
        Move::Diagonal => (i - 1, j - 1, AlignedPair::matched(i - 1, j - 1)),
        Move::Vertical => (i - 1, j, AlignedPair::x_only(i - 1)),
        Move::Horizontal => (i, j - 1, AlignedPair::y_only(j - 1)),
    }
}

/// Walks from the bottom-right corner back to the origin along tight moves.
pub fn backtrack(
    mat: &AlignmentMatrix,
    x: &Backbone,
    y: &Backbone,
    policy: TiePolicy,
) -> Alignment {
    let (mut i, mut j) = (x.len(), y.len());
    let mut pairs = Vec::with_capacity(i + j);
    while i > 0 || j > 0 {
        let mv = policy
            .order()
            .into_iter()
            .find(|&mv| tight(mat, x, y, i, j, mv))
            .unwrap_or(if i > 0 {
                Move::Vertical
            } else {
                Move::Horizontal
            });
        let (ni, nj, pair) = step(i, j, mv);
        pairs.push(pair);
        (i, j) = (ni, nj);
    }
    pairs.reverse();
    Alignment::new(pairs)
}

/// Every optimal backtracking path, at most `cap` of them. The flag is set
/// when more paths exist than were returned.
pub fn enumerate_optimal(
    mat: &AlignmentMatrix,
    x: &Backbone,
    y: &Backbone,
    cap: usize,
) -> (Vec<Alignment>, bool) {
    Enumerator::new(mat, x, y, cap, false).run()
}

/// Optimal alignments with pairwise distinct matchings, at most `cap`.
///
/// Alignments that differ only in how a run of insertions between two
/// matches is interleaved are represented once, with the `x` insertions of
/// each run placed before the `y` insertions.
pub fn enumerate_optimal_matchings(
    mat: &AlignmentMatrix,
    x: &Backbone,
    y: &Backbone,
    cap: usize,
) -> (Vec<Alignment>, bool) {
    Enumerator::new(mat, x, y, cap, true).run()
}

struct Enumerator<'a> {
    mat: &'a AlignmentMatrix,
    x: &'a Backbone,
    y: &'a Backbone,
    cap: usize,
    canonical: bool,
    found: Vec<Alignment>,
    truncated: bool,
    path: Vec<AlignedPair>,
}

impl<'a> Enumerator<'a> {
    fn new(
        mat: &'a AlignmentMatrix,
        x: &'a Backbone,
        y: &'a Backbone,
        cap: usize,
        canonical: bool,
    ) -> Self {
        Self {
            mat,
            x,
            y,
            cap: cap.max(1),
            canonical,
            found: Vec::new(),
            truncated: false,
            path: Vec::with_capacity(x.len() + y.len()),
        }
    }

    fn run(mut self) -> (Vec<Alignment>, bool) {
        self.visit(self.x.len(), self.y.len(), false);
        (self.found, self.truncated)
    }

    /// `after_vertical`: walking backwards, an `x` insertion was taken
    /// since the last match.
    fn visit(&mut self, i: usize, j: usize, after_vertical: bool) {
        if self.truncated {
            return;
        }
        if i == 0 && j == 0 {
            if self.found.len() == self.cap {
                self.truncated = true;
                return;
            }
            let mut pairs = self.path.clone();
            pairs.reverse();
            self.found.push(Alignment::new(pairs));
            return;
        }
        for mv in [Move::Diagonal, Move::Vertical, Move::Horizontal] {
            if self.canonical && after_vertical && mv == Move::Horizontal {
                continue;
            }
            if !tight(self.mat, self.x, self.y, i, j, mv) {
                continue;
            }
            let (ni, nj, pair) = step(i, j, mv);
            self.path.push(pair);
            let flag = match mv {
                Move::Diagonal => false,
                Move::Vertical => true,
                Move::Horizontal => after_vertical,
            };
            self.visit(ni, nj, flag);
            self.path.pop();
            if self.truncated {
                return;
            }
        }
    }
}

/// Minimum alignment cost.
pub fn backbone_distance(x: &Backbone, y: &Backbone) -> f64 {
    alignment_matrix(x, y).corner()
}

/// Minimum over alignments of the largest aligned weight difference.
pub fn backbone_infinity_distance(x: &Backbone, y: &Backbone) -> f64 {
    fill(x, y, f64::max).corner()
}
