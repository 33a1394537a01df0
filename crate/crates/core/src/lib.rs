//! Extremal event DAGs of time series collections and the edit distance
//! between them.
//!
//! A dataset of series on a shared grid is summarized by a DAG whose
//! vertices are the local extrema of every series, weighted by how much
//! noise they survive, and whose edges record temporal order weighted by how
//! robust that order is. Two such DAGs are compared by aligning the extrema
//! of same-named series and summing node and edge weight differences.
//!
//! ```
//! use eedag::{build_dag, dag_distance, parse_dataset};
//!
//! let a = parse_dataset("time,s\n0,0\n1,2\n2,1\n3,3").unwrap();
//! let b = parse_dataset("time,s\n0,0\n1,2\n2,1.5\n3,3").unwrap();
//! let dag = build_dag(&a).unwrap();
//! assert_eq!(dag.vertices().len(), 4);
//! let report = dag_distance(&a, &b, 64).unwrap();
//! assert!(report.total > 0.0);
//! ```

pub mod alignment;
pub mod distance;
pub mod error;
pub mod event_dag;
pub mod harness;
pub mod ingest;
pub mod intervals;
pub mod persistence;

pub use alignment::{
    alignment_matrix, backbone_distance, backbone_infinity_distance, backtrack, enumerate_optimal,
    enumerate_optimal_matchings, extract_backbone, validate_alignment, AlignedPair, Alignment,
    AlignmentMatrix, AlignmentReport, Backbone, BackboneNode, TiePolicy, Violation,
};
pub use distance::{
    build_supergraph, compare_dags, dag_distance, dag_distance_with, delta_f, stability_bound,
    DistanceOptions, DistanceReport, Supergraph,
};
pub use error::{Error, Result};
pub use event_dag::{
    build_dag, build_dag_with_warnings, epsilon_slice, export, DagEdge, DagVertex, ExportFormat,
    ExtremalEventDAG, SliceMode,
};
pub use harness::{baseline, cyclic_shift, permute_names, sample_rng, BaselineResult, RunConfig};
pub use ingest::{
    collapse_plateaus, generate_synthetic, normalize_amplitude, parse_dataset,
    synthetic_collection, write_dataset, Dataset, PlateauWarning, SyntheticSpec, TimeGrid,
    TimeSeries, WaveKind,
};
pub use intervals::{
    eps_intersection, eps_jumps, eps_jumps_left, eps_jumps_right, extremal_interval,
    DiscreteInterval, IntervalProfile, JumpList,
};
pub use persistence::{
    diagram_to_csv, find_extrema, merge_tree, min_lives, node_lives, persistence_diagram, Death,
    Extremum, Filtration, Label, MergeTriplet, NodeLifeTable, PersistencePoint,
};
