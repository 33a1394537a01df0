//! Time series collections: CSV ingestion, plateau handling, amplitude
//! normalization and synthetic sinusoid fixtures.
//!
//! A [`Dataset`] is a set of uniquely named [`TimeSeries`] sampled on one
//! shared, strictly increasing [`TimeGrid`]. The wide CSV layout has a
//! `time` column followed by one column per series.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing sample coordinates `z_1 < ... < z_N`, `N >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid(Arc<[f64]>);

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a time grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(bad) = points.iter().position(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time coordinate {bad} is not finite"
            )));
        }
        if let Some(row) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotoneTime { row: row + 1 });
        }
        Ok(Self(points.into()))
    }

    /// `n` evenly spaced points on `[start, end]`, with both endpoints exact.
    pub fn uniform(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a time grid needs at least 2 points, got {n}"
            )));
        }
        let step = (end - start) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|k| start + step * k as f64).collect();
        points[n - 1] = end;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.0[0]
    }

    pub fn end(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    fn select(&self, keep: &[usize]) -> Self {
        Self(keep.iter().map(|&i| self.0[i]).collect())
    }
}

/// A named height sequence on its own copy of a time grid.
///
/// Series freshly parsed into a [`Dataset`] all carry the dataset grid; after
/// [`collapse_plateaus`] a series carries the restricted grid view.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    name: String,
    grid: TimeGrid,
    heights: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, grid: TimeGrid, heights: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if heights.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "series `{name}` has {} heights for a grid of {} points",
                heights.len(),
                grid.len()
            )));
        }
        if let Some(bad) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "series `{name}` has a non-finite height at position {bad}"
            )));
        }
        Ok(Self {
            name,
            grid,
            heights,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn is_plateau_free(&self) -> bool {
        self.heights.windows(2).all(|w| w[0] != w[1])
    }

    /// The series with every height negated; extrema swap labels.
    pub fn negated(&self) -> Self {
        Self {
            name: self.name.clone(),
            grid: self.grid.clone(),
            heights: self.heights.iter().map(|h| -h).collect(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub(crate) fn with_heights(&self, heights: Vec<f64>) -> Self {
        debug_assert_eq!(heights.len(), self.grid.len());
        Self {
            name: self.name.clone(),
            grid: self.grid.clone(),
            heights,
        }
    }
}

/// Uniquely named series sharing one time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    grid: TimeGrid,
    series: Vec<TimeSeries>,
}

impl Dataset {
    pub fn new(grid: TimeGrid, series: Vec<TimeSeries>) -> Result<Self> {
        let mut seen = HashSet::new();
        for ts in &series {
            if !seen.insert(ts.name()) {
                return Err(Error::DuplicateName(ts.name().to_owned()));
            }
            if ts.grid() != &grid {
                return Err(Error::InvalidArgument(format!(
                    "series `{}` is not sampled on the dataset grid",
                    ts.name()
                )));
            }
        }
        Ok(Self { grid, series })
    }

    /// Builds a dataset from named height columns over `grid`.
    pub fn from_columns<S: Into<String>>(
        grid: TimeGrid,
        columns: impl IntoIterator<Item = (S, Vec<f64>)>,
    ) -> Result<Self> {
        let series = columns
            .into_iter()
            .map(|(name, heights)| TimeSeries::new(name, grid.clone(), heights))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, series)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn get(&self, name: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|ts| ts.name() == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.series.iter().map(TimeSeries::name)
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Concatenates the series of several datasets sampled on the same grid.
    pub fn merge(parts: impl IntoIterator<Item = Dataset>) -> Result<Self> {
        let mut parts = parts.into_iter();
        let first = parts
            .next()
            .ok_or_else(|| Error::InvalidArgument("nothing to merge".into()))?;
        let grid = first.grid.clone();
        let mut series = first.series;
        for part in parts {
            if part.grid != grid {
                return Err(Error::GridMismatch);
            }
            series.extend(part.series);
        }
        Self::new(grid, series)
    }

    pub(crate) fn map_series(&self, f: impl FnMut(&TimeSeries) -> TimeSeries) -> Result<Self> {
        Self::new(self.grid.clone(), self.series.iter().map(f).collect())
    }
}

/// Parses a wide CSV document: a `time` column then one column per series.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(csv_error)?.clone();
    match headers.get(0) {
        Some("time") => {}
        Some(other) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("first column must be `time`, found `{other}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header row".into(),
            })
        }
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    if names.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no series columns".into(),
        });
    }
    let mut seen = HashSet::new();
    for name in &names {
        if name.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "empty series name".into(),
            });
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }

    let mut times = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let mut cells = record.iter().map(|cell| parse_cell(cell, line));
        times.push(cells.next().unwrap_or_else(|| parse_cell("", line))?);
        for column in columns.iter_mut() {
            column.push(cells.next().unwrap_or_else(|| parse_cell("", line))?);
        }
    }
    if times.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: format!("need at least 2 data rows, found {}", times.len()),
        });
    }
    let grid = TimeGrid::new(times)?;
    Dataset::from_columns(grid, names.into_iter().zip(columns))
}

fn parse_cell(cell: &str, line: u64) -> Result<f64> {
    if cell.is_empty() {
        return Err(Error::Parse {
            line,
            message: "missing cell".into(),
        });
    }
    match cell.parse::<f64>() {
        Ok(value) if value.is_finite() => Ok(value),
        _ => Err(Error::Parse {
            line,
            message: format!("`{cell}` is not a finite number"),
        }),
    }
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: err.to_string(),
    }
}

/// Writes `ds` in the wide CSV layout accepted by [`parse_dataset`].
pub fn write_dataset(ds: &Dataset) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["time".to_owned()];
    header.extend(ds.names().map(str::to_owned));
    // Writing into a Vec<u8> cannot fail.
    writer.write_record(&header).expect("in-memory csv write");
    for (row, z) in ds.grid().points().iter().enumerate() {
        let mut record = vec![z.to_string()];
        record.extend(ds.series().iter().map(|ts| ts.heights()[row].to_string()));
        writer.write_record(&record).expect("in-memory csv write");
    }
    let bytes = writer.into_inner().expect("in-memory csv flush");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// A run of equal consecutive heights that was collapsed to its first sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateauWarning {
    pub series: String,
    /// Grid position of the first sample of the run.
    pub start: usize,
    /// Number of samples in the run, at least 2.
    pub len: usize,
}

impl fmt::Display for PlateauWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "series `{}`: collapsed {} equal heights starting at position {}",
            self.series, self.len, self.start
        )
    }
}

/// Replaces every maximal run of equal consecutive heights by its first
/// sample, restricting the series' grid accordingly.
pub fn collapse_plateaus(ts: &TimeSeries) -> Result<(TimeSeries, Vec<PlateauWarning>)> {
    let heights = ts.heights();
    let mut keep = Vec::with_capacity(heights.len());
    let mut warnings = Vec::new();
    let mut start = 0;
    while start < heights.len() {
        let mut end = start + 1;
        while end < heights.len() && heights[end] == heights[start] {
            end += 1;
        }
        keep.push(start);
        if end - start > 1 {
            warnings.push(PlateauWarning {
                series: ts.name().to_owned(),
                start,
                len: end - start,
            });
        }
        start = end;
    }
    if keep.len() < 2 {
        return Err(Error::ConstantSeries(ts.name().to_owned()));
    }
    if warnings.is_empty() {
        return Ok((ts.clone(), warnings));
    }
    let collapsed = TimeSeries {
        name: ts.name().to_owned(),
        grid: ts.grid().select(&keep),
        heights: keep.iter().map(|&i| heights[i]).collect(),
    };
    Ok((collapsed, warnings))
}

/// Rescales each series affinely so its minimum maps to `lo` and maximum to `hi`.
pub fn normalize_amplitude(ds: &Dataset, lo: f64, hi: f64) -> Result<Dataset> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "normalization range [{lo}, {hi}] is empty"
        )));
    }
    for ts in ds.series() {
        let (min, max) = min_max(ts.heights());
        if min == max {
            return Err(Error::ConstantSeries(ts.name().to_owned()));
        }
    }
    ds.map_series(|ts| {
        let (min, max) = min_max(ts.heights());
        if min == lo && max == hi {
            return ts.clone();
        }
        let scale = (hi - lo) / (max - min);
        let heights = ts
            .heights()
            .iter()
            .map(|&h| {
                if h == min {
                    lo
                } else if h == max {
                    hi
                } else {
                    lo + (h - min) * scale
                }
            })
            .collect();
        ts.with_heights(heights)
    })
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    Sine,
    Cosine,
}

impl WaveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveKind::Sine => "sine",
            WaveKind::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for WaveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" | "sin" => Ok(WaveKind::Sine),
            "cosine" | "cos" => Ok(WaveKind::Cosine),
            other => Err(Error::InvalidArgument(format!(
                "unknown wave kind `{other}`"
            ))),
        }
    }
}

/// Parameters of a synthetic sinusoid sampled uniformly on `[0, 2π]`.
///
/// With `n_noise_bumps > 0` the noise is that many localized wiggles of size
/// `noise_amplitude`, each placed on a monotone stretch so that it adds
/// exactly one extra max/min pair. With no bumps, `noise_amplitude` is the
/// half-width of i.i.d. uniform noise added to every sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: WaveKind,
    pub amplitude: f64,
    pub phase: f64,
    pub noise_amplitude: f64,
    pub n_points: usize,
    pub n_noise_bumps: usize,
}

impl SyntheticSpec {
    pub fn new(kind: WaveKind, n_points: usize) -> Self {
        Self {
            kind,
            amplitude: 1.0,
            phase: 0.0,
            noise_amplitude: 0.0,
            n_points,
            n_noise_bumps: 0,
        }
    }
}

/// Single-series dataset named after the wave kind. Deterministic in `seed`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    let series_name = spec.kind.as_str();
    let (grid, heights) = synthetic_heights(spec, seed)?;
    Dataset::from_columns(grid, [(series_name, heights)])
}

fn synthetic_heights(spec: &SyntheticSpec, seed: u64) -> Result<(TimeGrid, Vec<f64>)> {
    let n = spec.n_points;
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "synthetic series need at least 8 points, got {n}"
        )));
    }
    if !(spec.noise_amplitude >= 0.0) || !spec.amplitude.is_finite() || !spec.phase.is_finite() {
        return Err(Error::InvalidArgument(
            "invalid synthetic parameters".into(),
        ));
    }
    let grid = TimeGrid::uniform(0.0, TAU, n)?;
    let wave = |z: f64| match spec.kind {
        WaveKind::Sine => (z + spec.phase).sin(),
        WaveKind::Cosine => (z + spec.phase).cos(),
    };
    let clean: Vec<f64> = grid
        .points()
        .iter()
        .map(|&z| spec.amplitude * wave(z))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heights = clean.clone();
    let a = spec.noise_amplitude;
    if spec.n_noise_bumps > 0 {
        for (k, rising) in place_bumps(&clean, a, spec.n_noise_bumps, &mut rng)? {
            let sign = if rising { 1.0 } else { -1.0 };
            heights[k] += sign * a;
            heights[k + 1] -= sign * a;
        }
    } else if a > 0.0 {
        for h in heights.iter_mut() {
            *h += rng.gen_range(-a..=a);
        }
    }
    Ok((grid, heights))
}

/// Chooses wiggle positions `k` (perturbing samples `k` and `k + 1`) on
/// stretches where the clean signal is strictly monotone over `k-2..=k+3`
/// and a wiggle of size `a` reverses the step `k -> k+1`.
fn place_bumps(
    clean: &[f64],
    a: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, bool)>> {
    let n = clean.len();
    let mut candidates: Vec<(usize, bool)> = (2..n.saturating_sub(3))
        .filter_map(|k| {
            let steps = &clean[k - 2..=k + 3];
            let rising = steps.windows(2).all(|w| w[0] < w[1]);
            let falling = steps.windows(2).all(|w| w[0] > w[1]);
            let reversible = a > (clean[k + 1] - clean[k]).abs() / 2.0;
            ((rising || falling) && reversible).then_some((k, rising))
        })
        .collect();
    candidates.shuffle(rng);
    let mut chosen: Vec<(usize, bool)> = Vec::with_capacity(count);
    for cand in candidates {
        if chosen.len() == count {
            break;
        }
        if chosen.iter().all(|&(k, _)| k.abs_diff(cand.0) >= 4) {
            chosen.push(cand);
        }
    }
    if chosen.len() < count {
        return Err(Error::InvalidArgument(format!(
            "could only place {} of {count} noise bumps of size {a}",
            chosen.len()
        )));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Several synthetic series on one grid; series `i` uses seed `seed + i`.
pub fn synthetic_collection<S: Into<String>>(
    specs: impl IntoIterator<Item = (S, SyntheticSpec)>,
    seed: u64,
) -> Result<Dataset> {
    let mut grid = None;
    let mut columns = Vec::new();
    for (i, (name, spec)) in specs.into_iter().enumerate() {
        let (g, heights) = synthetic_heights(&spec, seed.wrapping_add(i as u64))?;
        match &grid {
            None => grid = Some(g),
            Some(existing) if existing != &g => return Err(Error::GridMismatch),
            Some(_) => {}
        }
        columns.push((name.into(), heights));
    }
    let grid = grid.ok_or_else(|| Error::InvalidArgument("no synthetic series".into()))?;
    Dataset::from_columns(grid, columns)
}
