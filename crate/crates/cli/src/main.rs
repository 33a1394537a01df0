use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eedag::{
    baseline, build_dag_with_warnings, collapse_plateaus, dag_distance, diagram_to_csv,
    epsilon_slice, export, generate_synthetic, normalize_amplitude, parse_dataset,
    persistence_diagram, write_dataset, Dataset, ExportFormat, ExtremalEventDAG, Filtration,
    RunConfig, SliceMode, SyntheticSpec, WaveKind,
};

#[derive(Parser)]
#[command(
    name = "eedag",
    version,
    about = "Extremal event DAGs for collections of time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the extremal event DAG of a CSV dataset.
    Build(BuildArgs),
    /// Distance between the DAGs of two datasets.
    Distance(DistanceArgs),
    /// Keep only edges above a robustness threshold.
    Slice(SliceArgs),
    /// Persistence diagram of one series.
    Persistence(PersistenceArgs),
    /// Compare a distance against scrambled and shifted null samples.
    Baseline(BaselineArgs),
    /// Write a synthetic sine or cosine series.
    Synth(SynthArgs),
}

#[derive(Args)]
struct BuildArgs {
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Rescale every series to the range LO,HI before building.
    #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
    normalize: Option<(f64, f64)>,
}

#[derive(Args)]
struct DistanceArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Most tied optimal alignments considered per series.
    #[arg(long, default_value_t = eedag::distance::DEFAULT_PAIR_CAP)]
    cap: usize,
    /// Accepted for symmetry with `baseline`; the distance itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SliceArgs {
    dag: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value = "comparable")]
    mode: SliceMode,
    #[arg(long, value_name = "FILE")]
    dot: PathBuf,
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PersistenceArgs {
    input: PathBuf,
    #[arg(long)]
    series: String,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, default_value = "sublevel")]
    which: Filtration,
}

#[derive(Args)]
struct BaselineArgs {
    reference: PathBuf,
    other: PathBuf,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scramble series names. With neither flag both randomizations run.
    #[arg(long)]
    permute: bool,
    /// Cyclically shift every series.
    #[arg(long)]
    shift: bool,
    #[arg(long, default_value_t = eedag::distance::DEFAULT_PAIR_CAP)]
    cap: usize,
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    kind: WaveKind,
    #[arg(long)]
    points: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Number of smooth noise bumps; plain uniform noise when 0.
    #[arg(long, default_value_t = 0)]
    bumps: usize,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    Ok((lo, hi))
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dataset(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn build_logged(ds: &Dataset) -> Result<ExtremalEventDAG> {
    let (dag, warnings) = build_dag_with_warnings(ds)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(dag)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(args) => {
            let mut ds = read_dataset(&args.input)?;
            if let Some((lo, hi)) = args.normalize {
                ds = normalize_amplitude(&ds, lo, hi)?;
            }
            let mut dag = build_logged(&ds)?;
            if let Some(stem) = args.input.file_stem() {
                dag.set_grid_name(Some(stem.to_string_lossy().into_owned()));
            }
            if let Some(path) = &args.dot {
                write(path, &export(&dag, ExportFormat::Dot)?)?;
            }
            match &args.json {
                Some(path) => write(path, &dag.to_json()?)?,
                None if args.dot.is_none() => println!("{}", dag.to_json()?),
                None => {}
            }
            eprintln!(
                "{} vertices, {} edges",
                dag.vertices().len(),
                dag.edges().len()
            );
        }
        Command::Distance(args) => {
            if args.seed.is_some() {
                log::debug!("--seed has no effect on a single distance");
            }
            let (a, b) = (read_dataset(&args.a)?, read_dataset(&args.b)?);
            let report = dag_distance(&a, &b, args.cap)?;
            if let Some(path) = &args.report {
                write(path, &serde_json::to_string_pretty(&report)?)?;
            }
            println!("distance\t{}", report.total);
            println!("node_term\t{}", report.node_term);
            println!("edge_term\t{}", report.edge_term);
            match report.stability_bound {
                Some(bound) => println!("stability_bound\t{bound}"),
                None => println!("stability_bound\tnone"),
            }
            if report.truncated {
                log::warn!(
                    "tied alignment enumeration was truncated; the distance is an upper bound"
                );
            }
        }
        Command::Slice(args) => {
            let text = fs::read_to_string(&args.dag)
                .with_context(|| format!("reading {}", args.dag.display()))?;
            let dag = ExtremalEventDAG::from_json(&text)?;
            let sliced = epsilon_slice(&dag, args.epsilon, args.mode)?;
            write(&args.dot, &sliced.to_dot())?;
            if let Some(path) = &args.json {
                write(path, &sliced.to_json()?)?;
            }
            eprintln!(
                "kept {} of {} edges",
                sliced.edges().len(),
                dag.edges().len()
            );
        }
        Command::Persistence(args) => {
            let ds = read_dataset(&args.input)?;
            let ts = ds
                .get(&args.series)
                .ok_or_else(|| eedag::Error::UnknownSeries(args.series.clone()))?;
            let (ts, warnings) = collapse_plateaus(ts)?;
            for w in warnings {
                log::warn!("{w}");
            }
            let csv = diagram_to_csv(&persistence_diagram(&ts, args.which));
            match &args.csv {
                Some(path) => write(path, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Baseline(args) => {
            let (reference, other) = (read_dataset(&args.reference)?, read_dataset(&args.other)?);
            let both = !args.permute && !args.shift;
            let config = RunConfig {
                seed: args.seed,
                samples: args.samples,
                pair_cap: args.cap,
                permute: args.permute || both,
                shift: args.shift || both,
                ..RunConfig::default()
            };
            let result = baseline(&reference, &other, &config)?;
            if let Some(path) = &args.report {
                write(path, &serde_json::to_string_pretty(&result)?)?;
            }
            println!("reference\t{}", result.reference_distance);
            println!("mean\t{}", result.mean);
            println!("median\t{}", result.median);
            println!("std\t{}", result.std);
            match result.z_score {
                Some(z) => println!("z_score\t{z}"),
                None => println!("z_score\tnone"),
            }
        }
        Command::Synth(args) => {
            if args.points == 0 {
                bail!("--points must be positive");
            }
            let spec = SyntheticSpec {
                amplitude: args.amplitude,
                phase: args.phase,
                noise_amplitude: args.noise,
                n_noise_bumps: args.bumps,
                ..SyntheticSpec::new(args.kind, args.points)
            };
            let ds = generate_synthetic(&spec, args.seed)?;
            write(&args.out, &write_dataset(&ds))?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err
        .chain()
        .filter_map(|e| e.downcast_ref::<eedag::Error>())
        .any(eedag::Error::is_internal);
    if internal {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
