//! Exit-gate checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any of them fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use eedag::{
    alignment_matrix, backbone_distance, backbone_infinity_distance, build_dag, collapse_plateaus,
    dag_distance, delta_f, eps_intersection, find_extrema, node_lives, synthetic_collection,
    Backbone, BackboneNode, Dataset, Label, RunConfig, SyntheticSpec, TimeSeries, WaveKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_secs), || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn sin_cos_fixture() -> Outcome {
    let start = Instant::now();
    let dag = build_dag(&common::sin_cos(1001)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let weights = |s: usize| -> Vec<f64> {
        dag.series_vertices(s)
            .map(|v| dag.vertices()[v].weight)
            .collect()
    };
    let close = |got: &[f64], want: &[f64]| {
        got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 5e-3)
    };
    let (sin, cos) = (weights(0), weights(1));
    ensure(close(&sin, &[0.5, 1.0, 1.0, 0.5]), || {
        format!("sine weights {sin:?}")
    })?;
    ensure(close(&cos, &[1.0, 1.0, 1.0]), || {
        format!("cosine weights {cos:?}")
    })?;

    let id = |s, o| {
        dag.vertex_id(s, o)
            .ok_or_else(|| format!("missing vertex {s}/{o}"))
    };
    let (sin_min, sin_max, cos_min) = (id(0, 1)?, id(0, 2)?, id(1, 2)?);
    let v = dag.vertices();
    ensure(
        v[sin_max].label == Label::Max && (v[sin_max].time - FRAC_PI_2).abs() < 1e-2,
        || "sine maximum not at π/2".into(),
    )?;
    ensure(
        v[cos_min].label == Label::Min && (v[cos_min].time - PI).abs() < 1e-2,
        || "cosine minimum not at π".into(),
    )?;
    let same = dag.edge_weight(sin_min, sin_max).unwrap_or(f64::NAN);
    ensure((same - 0.5).abs() <= 5e-3, || {
        format!("same-series edge {same}")
    })?;
    let cross = dag.edge_weight(sin_max, cos_min).unwrap_or(f64::NAN);
    ensure((cross - 0.1464).abs() <= 5e-3, || {
        format!("cross edge {cross}")
    })?;
    within_time(elapsed, 5)?;
    Ok(format!("same-series {same:.4}, cross {cross:.4}"))
}

fn reference_backbones() -> Outcome {
    let (x, y) = (common::sine_backbone_one(), common::sine_backbone_two());
    let d = backbone_distance(&x, &y);
    let corner = alignment_matrix(&x, &y).corner();
    ensure((d - 0.116).abs() <= 1e-3, || format!("distance {d}"))?;
    ensure((0.115 - 1e-12..=0.116 + 1e-12).contains(&corner), || {
        format!("corner {corner}")
    })?;
    Ok(format!("distance {d:.6}, corner {corner:.6}"))
}

fn phase_locked(noise: f64, seed: u64) -> Dataset {
    let specs = (0..4).map(|i| {
        let spec = SyntheticSpec {
            phase: i as f64 * FRAC_PI_2,
            noise_amplitude: noise,
            n_noise_bumps: 3,
            ..SyntheticSpec::new(WaveKind::Sine, 101)
        };
        (format!("g{i}"), spec)
    });
    synthetic_collection(specs, seed).expect("valid synthetic parameters")
}

fn baseline_separation() -> Outcome {
    let trials = 100u64;
    let mut separated = 0;
    for t in 0..trials {
        let reference = phase_locked(0.05, 1000 + 2 * t);
        let replicate = phase_locked(0.1, 1001 + 2 * t);
        let config = RunConfig {
            seed: t,
            samples: 100,
            ..RunConfig::default()
        };
        let r = eedag::baseline(&reference, &replicate, &config).map_err(|e| e.to_string())?;
        if r.reference_distance < r.mean {
            separated += 1;
        }
    }
    let rate = separated as f64 / trials as f64;
    ensure(rate >= 0.95, || {
        format!("reference below null mean in {separated}/{trials} trials")
    })?;
    Ok(format!("{separated}/{trials} trials separated"))
}

fn backbone_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac4);
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    for trial in 0..500 {
        let (lx, ly) = (rng.gen_range(0..=5), rng.gen_range(0..=5));
        let (x, y) = if trial % 2 == 0 {
            let grid = [0.125, 0.25, 0.5, 1.0];
            (
                common::random_backbone(&mut rng, lx, &grid),
                common::random_backbone(&mut rng, ly, &grid),
            )
        } else {
            (
                common::random_backbone_continuous(&mut rng, lx),
                common::random_backbone_continuous(&mut rng, ly),
            )
        };
        let (d, o) = (
            backbone_distance(&x, &y),
            common::oracle_backbone_distance(&x, &y)?,
        );
        ensure(d == o || rel(d, o), || {
            format!("trial {trial}: d_B {d} vs oracle {o}")
        })?;
        let (d, o) = (
            backbone_infinity_distance(&x, &y),
            common::oracle_backbone_infinity_distance(&x, &y)?,
        );
        ensure(d == o || rel(d, o), || {
            format!("trial {trial}: d_B∞ {d} vs oracle {o}")
        })?;
    }
    within_time(start.elapsed(), 30)?;
    Ok("500 pairs agree".into())
}

fn persistence_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac5);
    for trial in 0..500 {
        let n = rng.gen_range(2..=12);
        let h = if trial % 2 == 0 {
            common::random_heights(&mut rng, n)
        } else {
            common::random_lattice_heights(&mut rng, n)
        };
        let got: Vec<(usize, f64)> = node_lives(&common::series("s", &h)).iter().collect();
        let want: Vec<(usize, f64)> = common::oracle_node_lives(&h).into_iter().collect();
        ensure(got == want, || {
            format!("heights {h:?}: {got:?} vs {want:?}")
        })?;
    }
    within_time(start.elapsed(), 10)?;
    Ok("500 series agree".into())
}

fn intersection_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac6);
    let res = 1e-3;
    for trial in 0..200 {
        let (na, nb) = (rng.gen_range(2..=12), rng.gen_range(2..=12));
        let a = common::series("a", &common::random_heights(&mut rng, na));
        let b = common::series("b", &common::random_heights(&mut rng, nb));
        let (ea, eb) = (find_extrema(&a), find_extrema(&b));
        let xa = &ea[rng.gen_range(0..ea.len())];
        let xb = &eb[rng.gen_range(0..eb.len())];
        let got = eps_intersection(&a, xa.time, &b, xb.time).map_err(|e| e.to_string())?;
        let scan = common::oracle_eps_star(&a, xa.index, &b, xb.index, res);
        let ok = match (got, scan) {
            (Some(g), Some(s)) => s >= g - 1e-12 && s <= g + res + 1e-12,
            (None, None) => true,
            _ => false,
        };
        ensure(ok, || format!("trial {trial}: {got:?} vs scan {scan:?}"))?;
    }
    within_time(start.elapsed(), 30)?;
    Ok("200 pairs agree".into())
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac7);
    let grid = [0.25, 0.5, 0.75, 1.0];
    let mut violations = Vec::new();
    for trial in 0..1000 {
        let draw = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..=6);
            if trial % 2 == 0 {
                common::random_backbone(rng, len, &grid)
            } else {
                common::random_backbone_continuous(rng, len)
            }
        };
        let (x, y, z) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let (dxy, dyx) = (backbone_distance(&x, &y), backbone_distance(&y, &x));
        let (dxz, dyz) = (backbone_distance(&x, &z), backbone_distance(&y, &z));
        let tol = 1e-12 * (1.0 + dxy.max(dxz).max(dyz));
        if dxy < 0.0 {
            violations.push(format!("trial {trial}: negative"));
        }
        if (dxy - dyx).abs() > tol {
            violations.push(format!("trial {trial}: asymmetric {dxy} {dyx}"));
        }
        if backbone_distance(&x, &x) != 0.0 || (dxy == 0.0) != (x.nodes == y.nodes) {
            violations.push(format!("trial {trial}: identity"));
        }
        if dxz > dxy + dyz + tol {
            violations.push(format!("trial {trial}: triangle {dxz} > {dxy} + {dyz}"));
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    Ok("1000 triples".into())
}

fn backbone_of(ts: &TimeSeries) -> Backbone {
    let (ts, _) = collapse_plateaus(ts).expect("non-constant series");
    let lives = node_lives(&ts);
    let nodes = find_extrema(&ts)
        .iter()
        .map(|e| BackboneNode {
            label: e.label,
            weight: lives.get(e.index).expect("extremum has a life"),
        })
        .collect();
    Backbone::new(ts.name(), nodes).expect("extrema alternate")
}

fn stability_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac8);
    let names = ["a", "b", "c"];
    let (mut inf_bad, mut sum_bad, mut dag_bad) = (0, 0, 0);
    let mut first = None;
    for trial in 0..200 {
        let n = rng.gen_range(4..=12);
        let cols: Vec<(&str, Vec<f64>)> = names
            .iter()
            .map(|&name| (name, common::random_heights(&mut rng, n)))
            .collect();
        let a = common::dataset(&cols);
        let delta = a
            .series()
            .iter()
            .map(|ts| delta_f(&collapse_plateaus(ts).expect("non-constant").0))
            .fold(f64::INFINITY, f64::min);
        let eta = 0.8 * delta / 2.0;
        let perturbed: Vec<(&str, Vec<f64>)> = cols
            .iter()
            .map(|(name, h)| {
                (
                    *name,
                    h.iter().map(|v| v + rng.gen_range(-eta..=eta)).collect(),
                )
            })
            .collect();
        let b = common::dataset(&perturbed);

        for (f, g) in a.series().iter().zip(b.series()) {
            let (x, y) = (backbone_of(f), backbone_of(g));
            let k = (x.len() + y.len()) as f64;
            if backbone_infinity_distance(&x, &y) > eta + 1e-12 {
                inf_bad += 1;
                first.get_or_insert_with(|| {
                    format!(
                        "trial {trial} series {}: {:?} -> {:?}",
                        f.name(),
                        f.heights(),
                        g.heights()
                    )
                });
            }
            if backbone_distance(&x, &y) > k * eta + 1e-12 {
                sum_bad += 1;
            }
        }
        let report = dag_distance(&a, &b, 64).map_err(|e| e.to_string())?;
        match report.stability_bound {
            Some(bound) if report.total <= bound + 1e-12 => {}
            _ => dag_bad += 1,
        }
    }
    let summary = format!("d_B∞ violations {inf_bad}/600, d_B violations {sum_bad}/600, d_ED violations {dag_bad}/200");
    ensure(inf_bad + sum_bad + dag_bad == 0, || match &first {
        Some(example) => format!("{summary}; first d_B∞ case {example}"),
        None => summary.clone(),
    })?;
    Ok(summary)
}

fn yeast_scale(seed: u64) -> Dataset {
    let specs = (0..16).map(|i| {
        let spec = SyntheticSpec {
            phase: i as f64 * TAU / 16.0,
            noise_amplitude: 0.15,
            n_noise_bumps: 6,
            ..SyntheticSpec::new(
                if i % 2 == 0 {
                    WaveKind::Sine
                } else {
                    WaveKind::Cosine
                },
                265,
            )
        };
        (format!("gene{i:02}"), spec)
    });
    synthetic_collection(specs, seed).expect("valid synthetic parameters")
}

fn scale() -> Outcome {
    let (a, b) = (yeast_scale(1), yeast_scale(2));
    let start = Instant::now();
    let dag = build_dag(&a).map_err(|e| e.to_string())?;
    let build = start.elapsed();
    let start = Instant::now();
    let report = dag_distance(&a, &b, 64).map_err(|e| e.to_string())?;
    let dist = start.elapsed();
    within_time(build, 60)?;
    within_time(dist, 120)?;
    Ok(format!(
        "{} vertices, {} edges, build {:.2}s, distance {:.2}s (d = {:.3})",
        dag.vertices().len(),
        dag.edges().len(),
        build.as_secs_f64(),
        dist.as_secs_f64(),
        report.total
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("AC1", "sine/cosine fixture", sin_cos_fixture),
        ("AC2", "reference backbone distance", reference_backbones),
        (
            "AC3",
            "baseline separation on phase-locked data",
            baseline_separation,
        ),
        (
            "AC4",
            "backbone distances vs exhaustive oracle",
            backbone_oracles,
        ),
        ("AC5", "node lives vs threshold sweep", persistence_oracle),
        (
            "AC6",
            "interval intersection vs ε scan",
            intersection_oracle,
        ),
        ("AC7", "metric axioms", metric_axioms),
        ("AC8", "local stability suites", stability_suites),
        ("AC9", "yeast-scale runtime", scale),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
