//! Null-distribution baselines: scrambled series names and random cyclic
//! shifts, with summary statistics.
//!
//! Randomness comes from ChaCha8 seeded with the run seed; sample `s` uses
//! stream `s` of that generator, so every sample is reproducible on its own
//! and independent of scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::TiePolicy;
use crate::distance::{compare_dags, DistanceOptions, DEFAULT_PAIR_CAP};
use crate::error::{Error, Result};
use crate::event_dag::{build_dag, SliceMode};
use crate::ingest::{Dataset, TimeSeries};

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The same height data under a uniformly random permutation of the names.
pub fn permute_names(ds: &Dataset, seed: u64) -> Result<Dataset> {
    permute_names_with(ds, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn permute_names_with<R: Rng + ?Sized>(ds: &Dataset, rng: &mut R) -> Result<Dataset> {
    if ds.len() < 2 {
        return Err(Error::InvalidArgument(
            "permuting names needs at least 2 series".into(),
        ));
    }
    let mut names: Vec<String> = ds.names().map(str::to_owned).collect();
    names.shuffle(rng);
    let series = ds
        .series()
        .iter()
        .zip(names)
        .map(|(ts, name)| ts.clone().with_name(name))
        .collect();
    Dataset::new(ds.grid().clone(), series)
}

/// Heights `h_m, …, h_n, h_1, …, h_{m-1}` on the unchanged grid (`m` is 1-based).
pub fn cyclic_shift(ts: &TimeSeries, m: usize) -> Result<TimeSeries> {
    let n = ts.len();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "shift {m} is outside 1..={n}"
        )));
    }
    let mut heights = ts.heights().to_vec();
    heights.rotate_left(m - 1);
    Ok(ts.with_heights(heights))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub pair_cap: usize,
    /// Slice mode for any ε-slices exported alongside the run.
    pub slice_mode: SliceMode,
    pub tie_policy: TiePolicy,
    /// Scramble series names in every sample.
    pub permute: bool,
    /// Cyclically shift every series by an independent random amount.
    pub shift: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 100,
            pair_cap: DEFAULT_PAIR_CAP,
            slice_mode: SliceMode::default(),
            tie_policy: TiePolicy::default(),
            permute: true,
            shift: true,
        }
    }
}

impl RunConfig {
    fn distance_options(&self) -> DistanceOptions {
        DistanceOptions {
            tie_policy: self.tie_policy,
            ..DistanceOptions::with_cap(self.pair_cap)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    /// Distances in sample order.
    pub samples: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation.
    pub std: f64,
    pub reference_distance: f64,
    /// `(mean - reference) / std`; absent when the samples have no spread.
    pub z_score: Option<f64>,
}

/// Randomizes `other` once per sample and measures its distance to `reference`.
pub fn baseline(
    reference: &Dataset,
    other: &Dataset,
    config: &RunConfig,
) -> Result<BaselineResult> {
    if config.samples == 0 {
        return Err(Error::InvalidArgument(
            "a baseline needs at least one sample".into(),
        ));
    }
    let opts = config.distance_options();
    let ref_dag = build_dag(reference)?;
    let reference_distance = compare_dags(&ref_dag, &build_dag(other)?, &opts)?
        .report
        .total;
    let samples: Vec<f64> = (0..config.samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = sample_rng(config.seed, s as u64);
            let scrambled = randomize(other, config, &mut rng)?;
            Ok(compare_dags(&ref_dag, &build_dag(&scrambled)?, &opts)?
                .report
                .total)
        })
        .collect::<Result<_>>()?;
    let stats = Summary::of(&samples);
    Ok(BaselineResult {
        z_score: (stats.std > 0.0).then(|| (stats.mean - reference_distance) / stats.std),
        mean: stats.mean,
        median: stats.median,
        std: stats.std,
        reference_distance,
        samples,
    })
}

fn randomize(ds: &Dataset, config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let mut out = if config.permute {
        permute_names_with(ds, rng)?
    } else {
        ds.clone()
    };
    if config.shift {
        let n = ds.grid().len();
        let shifted = out
            .series()
            .iter()
            .map(|ts| cyclic_shift(ts, rng.gen_range(1..=n)))
            .collect::<Result<Vec<_>>>()?;
        out = Dataset::new(ds.grid().clone(), shifted)?;
    }
    Ok(out)
}

/// Order-independent statistics of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                median: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let std = if n > 1 {
            let ss: f64 = sorted.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, median, std }
    }
}
