//! Discrete ε-extremal intervals on a sampled series and the threshold at
//! which the intervals of two extrema first overlap.
//!
//! For a minimum at `z_i` the interval at `ε` is the connected component of
//! `{f < h_i + 2ε}` of the linear interpolant that contains `z_i`, widened
//! outward to grid points. Maxima use the mirrored superlevel condition.
//! Endpoints that reach the domain boundary are closed there; all other
//! endpoints are open.

use crate::error::{Error, Result};
use crate::ingest::{TimeGrid, TimeSeries};
use crate::persistence::Label;

/// Sorted ε values at which an interval endpoint moves outward.
pub type JumpList = Vec<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteInterval {
    pub left_index: usize,
    pub right_index: usize,
    pub left: f64,
    pub right: f64,
    pub left_closed: bool,
    pub right_closed: bool,
}

impl DiscreteInterval {
    pub fn contains(&self, t: f64) -> bool {
        let above = if self.left_closed {
            t >= self.left
        } else {
            t > self.left
        };
        let below = if self.right_closed {
            t <= self.right
        } else {
            t < self.right
        };
        above && below
    }

    pub fn intersects(&self, other: &Self) -> bool {
        let (lo, lo_closed) = match self.left.total_cmp(&other.left) {
            std::cmp::Ordering::Less => (other.left, other.left_closed),
            std::cmp::Ordering::Greater => (self.left, self.left_closed),
            std::cmp::Ordering::Equal => (self.left, self.left_closed && other.left_closed),
        };
        let (hi, hi_closed) = match self.right.total_cmp(&other.right) {
            std::cmp::Ordering::Less => (self.right, self.right_closed),
            std::cmp::Ordering::Greater => (other.right, other.right_closed),
            std::cmp::Ordering::Equal => (self.right, self.right_closed && other.right_closed),
        };
        lo < hi || (lo == hi && lo_closed && hi_closed)
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

/// Grid position where the sublevel (or superlevel) barrier first rises to
/// a new record, together with the half-gap `|h_j - h_i| / 2` at that point.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Record {
    gap: f64,
    index: usize,
}

/// Everything needed to evaluate the interval of one extremum at any ε.
#[derive(Clone, Debug)]
pub struct IntervalProfile {
    grid: TimeGrid,
    index: usize,
    label: Label,
    left: Vec<Record>,
    right: Vec<Record>,
}

impl IntervalProfile {
    /// Profile of the extremum at grid position `index` of `ts`.
    pub fn new(ts: &TimeSeries, index: usize) -> Result<Self> {
        let label = extremum_label(ts.heights(), index).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "position {index} is not a local extremum of `{}`",
                ts.name()
            ))
        })?;
        let h = ts.heights();
        let right = records(h, index, label, index + 1..h.len());
        let left = records(h, index, label, (0..index).rev());
        Ok(Self {
            grid: ts.grid().clone(),
            index,
            label,
            left,
            right,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn time(&self) -> f64 {
        self.grid.points()[self.index]
    }

    pub fn jumps_left(&self) -> JumpList {
        self.left.iter().map(|r| r.gap).collect()
    }

    pub fn jumps_right(&self) -> JumpList {
        self.right.iter().map(|r| r.gap).collect()
    }

    pub fn jumps(&self) -> JumpList {
        let mut all = self.jumps_left();
        all.extend(self.jumps_right());
        all.sort_by(f64::total_cmp);
        all
    }

    /// Interval at exactly `eps`. A grid point whose half-gap equals `eps`
    /// is not yet inside.
    pub fn interval_at(&self, eps: f64) -> DiscreteInterval {
        self.build(
            self.left.partition_point(|r| r.gap < eps),
            self.right.partition_point(|r| r.gap < eps),
        )
    }

    /// The interval for every ε in a small enough right neighborhood of `eps`.
    pub fn interval_after(&self, eps: f64) -> DiscreteInterval {
        self.build(
            self.left.partition_point(|r| r.gap <= eps),
            self.right.partition_point(|r| r.gap <= eps),
        )
    }

    fn build(&self, left_rank: usize, right_rank: usize) -> DiscreteInterval {
        let z = self.grid.points();
        let (left_index, left_closed) = match self.left.get(left_rank) {
            Some(r) => (r.index, false),
            None => (0, true),
        };
        let (right_index, right_closed) = match self.right.get(right_rank) {
            Some(r) => (r.index, false),
            None => (z.len() - 1, true),
        };
        DiscreteInterval {
            left_index,
            right_index,
            left: z[left_index],
            right: z[right_index],
            left_closed,
            right_closed,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (self.grid.start(), self.grid.end())
    }
}

fn extremum_label(h: &[f64], i: usize) -> Option<Label> {
    let n = h.len();
    if i >= n || n < 2 {
        return None;
    }
    let below = |j: usize| h[j] < h[i];
    let above = |j: usize| h[j] > h[i];
    let neighbors: Vec<usize> = [i.checked_sub(1), (i + 1 < n).then_some(i + 1)]
        .into_iter()
        .flatten()
        .collect();
    if neighbors.iter().all(|&j| above(j)) {
        Some(Label::Min)
    } else if neighbors.iter().all(|&j| below(j)) {
        Some(Label::Max)
    } else {
        None
    }
}

fn records(
    h: &[f64],
    i: usize,
    label: Label,
    mut walk: impl Iterator<Item = usize>,
) -> Vec<Record> {
    let Some(first) = walk.next() else {
        return Vec::new();
    };
    let mut out = vec![Record {
        gap: (h[first] - h[i]).abs() / 2.0,
        index: first,
    }];
    let mut barrier = h[first];
    for j in walk {
        let crosses = match label {
            Label::Min => h[j] >= barrier,
            Label::Max => h[j] <= barrier,
        };
        if crosses {
            out.push(Record {
                gap: (h[j] - h[i]).abs() / 2.0,
                index: j,
            });
            barrier = h[j];
        }
    }
    out
}

fn locate(ts: &TimeSeries, t: f64) -> Result<usize> {
    ts.times()
        .binary_search_by(|z| z.total_cmp(&t))
        .map_err(|_| {
            Error::InvalidArgument(format!("{t} is not a grid coordinate of `{}`", ts.name()))
        })
}

fn profile_at(ts: &TimeSeries, t: f64) -> Result<IntervalProfile> {
    IntervalProfile::new(ts, locate(ts, t)?)
}

/// Discrete ε-extremal interval of the extremum of `ts` at time `t`.
pub fn extremal_interval(ts: &TimeSeries, t: f64, eps: f64) -> Result<DiscreteInterval> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be non-negative, got {eps}"
        )));
    }
    Ok(profile_at(ts, t)?.interval_at(eps))
}

pub fn eps_jumps_right(ts: &TimeSeries, t: f64) -> Result<JumpList> {
    Ok(profile_at(ts, t)?.jumps_right())
}

pub fn eps_jumps_left(ts: &TimeSeries, t: f64) -> Result<JumpList> {
    Ok(profile_at(ts, t)?.jumps_left())
}

pub fn eps_jumps(ts: &TimeSeries, t: f64) -> Result<JumpList> {
    Ok(profile_at(ts, t)?.jumps())
}

/// Smallest ε at which the intervals of the two extrema overlap, or `None`
/// when their series live on disjoint domains and never overlap.
pub fn eps_intersection(a: &TimeSeries, ta: f64, b: &TimeSeries, tb: f64) -> Result<Option<f64>> {
    epsilon_star(&profile_at(a, ta)?, &profile_at(b, tb)?)
}

/// [`eps_intersection`] on precomputed profiles.
///
/// Overlap just past ε is monotone in ε and only changes at jump values,
/// so the answer is the first candidate (0 or a jump of either extremum)
/// at which it holds. Each sorted jump list is searched by bisection.
pub fn epsilon_star(a: &IntervalProfile, b: &IntervalProfile) -> Result<Option<f64>> {
    let overlaps = |eps: f64| a.interval_after(eps).intersects(&b.interval_after(eps));
    if overlaps(0.0) {
        return Ok(Some(0.0));
    }
    let lists = [&a.left, &a.right, &b.left, &b.right];
    let best = lists
        .iter()
        .filter_map(|records| {
            let rank = records.partition_point(|r| !overlaps(r.gap));
            records.get(rank).map(|r| r.gap)
        })
        .min_by(f64::total_cmp);
    if best.is_some() {
        return Ok(best);
    }
    let ((a0, a1), (b0, b1)) = (a.domain(), b.domain());
    if a0.max(b0) <= a1.min(b1) {
        return Err(Error::Invariant(format!(
            "intervals at times {} and {} never meet on overlapping domains",
            a.time(),
            b.time()
        )));
    }
    Ok(None)
}
