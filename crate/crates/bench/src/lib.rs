//! Deterministic inputs for the benchmarks.

use std::f64::consts::TAU;

use eedag::{
    synthetic_collection, Backbone, BackboneNode, Dataset, Label, SyntheticSpec, WaveKind,
};

/// `series` noisy sinusoids with staggered phases on `points` samples.
pub fn staggered_waves(series: usize, points: usize, bumps: usize, seed: u64) -> Dataset {
    let specs = (0..series).map(|i| {
        let kind = if i % 2 == 0 {
            WaveKind::Sine
        } else {
            WaveKind::Cosine
        };
        let spec = SyntheticSpec {
            phase: i as f64 * TAU / series as f64,
            noise_amplitude: 0.15,
            n_noise_bumps: bumps,
            ..SyntheticSpec::new(kind, points)
        };
        (format!("s{i:02}"), spec)
    });
    synthetic_collection(specs, seed).expect("benchmark parameters are valid")
}

/// Alternating backbone whose weights cycle through a fixed pattern offset by `shift`.
pub fn patterned_backbone(len: usize, shift: usize) -> Backbone {
    const WEIGHTS: [f64; 5] = [0.9, 0.35, 0.6, 0.1, 0.45];
    let nodes = (0..len)
        .map(|i| BackboneNode {
            label: if i % 2 == 0 { Label::Min } else { Label::Max },
            weight: WEIGHTS[(i + shift) % WEIGHTS.len()],
        })
        .collect();
    Backbone::new("bench", nodes).expect("labels alternate")
}
