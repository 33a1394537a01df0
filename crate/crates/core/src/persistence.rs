//! Local extrema, merge trees and 0-dimensional persistence of a single
//! piecewise-linear time series.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{min_max, TimeSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Min,
    Max,
}

impl Label {
    pub fn opposite(self) -> Self {
        match self {
            Label::Min => Label::Max,
            Label::Max => Label::Min,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Min => "min",
            Label::Max => "max",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Label::Min),
            "max" => Ok(Label::Max),
            other => Err(Error::InvalidArgument(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub time: f64,
    pub height: f64,
    pub label: Label,
}

/// Local extrema of a plateau-free series in time order.
///
/// Both endpoints are always reported. Labels alternate.
pub fn find_extrema(ts: &TimeSeries) -> Vec<Extremum> {
    let h = ts.heights();
    let z = ts.times();
    let n = h.len();
    debug_assert!(
        ts.is_plateau_free(),
        "find_extrema expects a plateau-free series"
    );
    let mut out = Vec::new();
    let mut push = |index: usize, label: Label| {
        out.push(Extremum {
            index,
            time: z[index],
            height: h[index],
            label,
        })
    };
    if n == 0 {
        return out;
    }
    if n == 1 {
        push(0, Label::Min);
        return out;
    }
    push(0, if h[0] < h[1] { Label::Min } else { Label::Max });
    for i in 1..n - 1 {
        if h[i] < h[i - 1] && h[i] < h[i + 1] {
            push(i, Label::Min);
        } else if h[i] > h[i - 1] && h[i] > h[i + 1] {
            push(i, Label::Max);
        }
    }
    push(
        n - 1,
        if h[n - 1] < h[n - 2] {
            Label::Min
        } else {
            Label::Max
        },
    );
    out
}

/// One merge event of the sublevel-set sweep.
///
/// `u` is the minimum whose component dies at the saddle `s`, merging into
/// the older component born at `v`. The global minimum `g` is recorded as
/// `(g, g, g)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MergeTriplet {
    pub u: usize,
    pub s: usize,
    pub v: usize,
}

impl MergeTriplet {
    pub fn is_essential(&self) -> bool {
        self.u == self.s && self.s == self.v
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (hi, lo) = if self.rank[ra] >= self.rank[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo] = hi;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        hi
    }
}

/// Sweeps samples in ascending `(height, index)` order, merging adjacent
/// components. When two components meet, the one born lower survives; equal
/// birth heights keep the component that starts earlier in the domain.
///
/// Triplets are returned in merge order with the essential triplet last.
pub fn merge_tree(ts: &TimeSeries) -> Vec<MergeTriplet> {
    let h = ts.heights();
    let n = h.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| h[a].total_cmp(&h[b]).then(a.cmp(&b)));

    let mut sets = DisjointSet::new(n);
    let mut birth = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut triplets = Vec::new();
    let older = |a: usize, b: usize| (h[a], a) < (h[b], b);

    for &x in &order {
        seen[x] = true;
        let left = (x > 0 && seen[x - 1]).then(|| x - 1);
        let right = (x + 1 < n && seen[x + 1]).then_some(x + 1);
        match (left, right) {
            (None, None) => birth[x] = x,
            (Some(nb), None) | (None, Some(nb)) => {
                let b = birth[sets.find(nb)];
                let root = sets.union(nb, x);
                birth[root] = b;
            }
            (Some(l), Some(r)) => {
                let bl = birth[sets.find(l)];
                let br = birth[sets.find(r)];
                let (elder, younger) = if older(bl, br) { (bl, br) } else { (br, bl) };
                triplets.push(MergeTriplet {
                    u: younger,
                    s: x,
                    v: elder,
                });
                sets.union(l, r);
                let root = sets.union(l, x);
                birth[root] = elder;
            }
        }
    }
    let g = order[0];
    triplets.push(MergeTriplet { u: g, s: g, v: g });
    triplets
}

/// Node lives of the minima described by `tree`: half the merge height
/// above the birth, or half the total range for the global minimum.
pub fn min_lives(ts: &TimeSeries, tree: &[MergeTriplet]) -> BTreeMap<usize, f64> {
    let h = ts.heights();
    let (lo, hi) = min_max(h);
    tree.iter()
        .map(|t| {
            let life = if t.is_essential() {
                (hi - lo) / 2.0
            } else {
                (h[t.s] - h[t.u]).abs() / 2.0
            };
            (t.u, life)
        })
        .collect()
}

/// Node life of every extremum of a series, keyed by grid position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeLifeTable(BTreeMap<usize, f64>);

impl NodeLifeTable {
    pub fn get(&self, index: usize) -> Option<f64> {
        self.0.get(&index).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    pub fn as_map(&self) -> &BTreeMap<usize, f64> {
        &self.0
    }
}

pub fn node_lives(ts: &TimeSeries) -> NodeLifeTable {
    let mut table = min_lives(ts, &merge_tree(ts));
    let flipped = ts.negated();
    table.extend(min_lives(&flipped, &merge_tree(&flipped)));
    NodeLifeTable(table)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Death {
    Finite(f64),
    /// The essential class never dies.
    Infinite,
}

impl fmt::Display for Death {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Death::Finite(d) => write!(f, "{d}"),
            Death::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePoint {
    pub birth: f64,
    pub death: Death,
    pub minimum_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filtration {
    #[default]
    Sublevel,
    Superlevel,
}

impl FromStr for Filtration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sublevel" => Ok(Filtration::Sublevel),
            "superlevel" => Ok(Filtration::Superlevel),
            other => Err(Error::InvalidArgument(format!(
                "unknown filtration `{other}`"
            ))),
        }
    }
}

/// Dimension-0 diagram, ordered by grid position of the generating minimum.
///
/// The superlevel diagram of `f` is the sublevel diagram of `-f` and is
/// reported in the coordinates of `-f`.
pub fn persistence_diagram(ts: &TimeSeries, which: Filtration) -> Vec<PersistencePoint> {
    let owned;
    let ts = match which {
        Filtration::Sublevel => ts,
        Filtration::Superlevel => {
            owned = ts.negated();
            &owned
        }
    };
    let h = ts.heights();
    let mut points: Vec<PersistencePoint> = merge_tree(ts)
        .into_iter()
        .map(|t| PersistencePoint {
            birth: h[t.u],
            death: if t.is_essential() {
                Death::Infinite
            } else {
                Death::Finite(h[t.s])
            },
            minimum_index: t.u,
        })
        .collect();
    points.sort_by_key(|p| p.minimum_index);
    points
}

/// `birth,death,index` rows with `inf` for the essential class.
pub fn diagram_to_csv(points: &[PersistencePoint]) -> String {
    let mut out = String::from("birth,death,index\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.birth, p.death, p.minimum_index));
    }
    out
}
