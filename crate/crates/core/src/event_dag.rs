//! Weighted extremal event DAGs, ε-slices and JSON / Graphviz export.

use std::fmt::Write as _;
use std::ops::Range;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{collapse_plateaus, Dataset, PlateauWarning};
use crate::intervals::{epsilon_star, IntervalProfile};
use crate::persistence::{find_extrema, node_lives, Label};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagVertex {
    /// Position of the owning series in the DAG's series table.
    pub series: usize,
    /// 1-based rank of the extremum within its series.
    pub ordinal: usize,
    pub label: Label,
    pub time: f64,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Vertices are grouped by series in table order and sorted by time within
/// a series. Edges are sorted by `(src, dst)` and indexed per source.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalEventDAG {
    grid_name: Option<String>,
    series_names: Vec<String>,
    series_offsets: Vec<usize>,
    vertices: Vec<DagVertex>,
    edges: Vec<DagEdge>,
    edge_offsets: Vec<usize>,
}

impl ExtremalEventDAG {
    /// Assembles a DAG from parts, checking ordering and acyclicity.
    pub fn from_parts(
        grid_name: Option<String>,
        series_names: Vec<String>,
        vertices: Vec<DagVertex>,
        mut edges: Vec<DagEdge>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let k = series_names.len();
        let mut series_offsets = vec![0; k + 1];
        for (id, pair) in vertices.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if (b.series, b.ordinal) <= (a.series, a.ordinal) {
                return bad(format!("vertex {} is out of order", id + 1));
            }
            if a.series == b.series && b.time <= a.time {
                return bad(format!(
                    "vertex {} is not later than its predecessor",
                    id + 1
                ));
            }
        }
        for (id, v) in vertices.iter().enumerate() {
            if v.series >= k {
                return bad(format!("vertex {id} names series {} of {k}", v.series));
            }
            if !(v.weight >= 0.0) || !v.time.is_finite() {
                return bad(format!("vertex {id} has an invalid time or weight"));
            }
            series_offsets[v.series + 1] = id + 1;
        }
        for s in 1..=k {
            series_offsets[s] = series_offsets[s].max(series_offsets[s - 1]);
        }
        edges.sort_by_key(|e| (e.src, e.dst));
        let n = vertices.len();
        for pair in edges.windows(2) {
            if (pair[0].src, pair[0].dst) == (pair[1].src, pair[1].dst) {
                return bad(format!("duplicate edge {} -> {}", pair[0].src, pair[0].dst));
            }
        }
        let mut edge_offsets = vec![0; n + 1];
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return bad(format!("edge {} -> {} leaves the vertex set", e.src, e.dst));
            }
            if vertices[e.src].time >= vertices[e.dst].time {
                return bad(format!(
                    "edge {} -> {} does not go forward in time",
                    e.src, e.dst
                ));
            }
            if !(e.weight >= 0.0) {
                return bad(format!("edge {} -> {} has an invalid weight", e.src, e.dst));
            }
            edge_offsets[e.src + 1] += 1;
        }
        for v in 0..n {
            edge_offsets[v + 1] += edge_offsets[v];
        }
        Ok(Self {
            grid_name,
            series_names,
            series_offsets,
            vertices,
            edges,
            edge_offsets,
        })
    }

    pub fn grid_name(&self) -> Option<&str> {
        self.grid_name.as_deref()
    }

    pub fn set_grid_name(&mut self, name: Option<String>) {
        self.grid_name = name;
    }

    pub fn series_names(&self) -> &[String] {
        &self.series_names
    }

    pub fn series_index(&self, name: &str) -> Option<usize> {
        self.series_names.iter().position(|n| n == name)
    }

    pub fn vertices(&self) -> &[DagVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[DagEdge] {
        &self.edges
    }

    /// Vertex ids of one series, in time order.
    pub fn series_vertices(&self, series: usize) -> Range<usize> {
        self.series_offsets[series]..self.series_offsets[series + 1]
    }

    pub fn vertex_id(&self, series: usize, ordinal: usize) -> Option<usize> {
        if series >= self.series_names.len() {
            return None;
        }
        let range = self.series_vertices(series);
        let slice = &self.vertices[range.clone()];
        slice
            .binary_search_by_key(&ordinal, |v| v.ordinal)
            .ok()
            .map(|k| range.start + k)
    }

    pub fn out_edges(&self, src: usize) -> &[DagEdge] {
        &self.edges[self.edge_offsets[src]..self.edge_offsets[src + 1]]
    }

    pub fn edge_weight(&self, src: usize, dst: usize) -> Option<f64> {
        let out = self.out_edges(src);
        out.binary_search_by_key(&dst, |e| e.dst)
            .ok()
            .map(|k| out[k].weight)
    }

    pub fn max_weight(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.weight)
            .chain(self.edges.iter().map(|e| e.weight))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = DagDocument {
            grid_name: self.grid_name.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexRecord {
                    series: self.series_names[v.series].clone(),
                    ordinal: v.ordinal,
                    label: v.label,
                    time: v.time,
                    weight: v.weight,
                })
                .collect(),
            edges: self.edges.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Inverse of [`Self::to_json`]. The series table is rebuilt in order of
    /// first appearance among the vertices.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DagDocument = serde_json::from_str(text)?;
        let mut names: Vec<String> = Vec::new();
        let vertices = doc
            .vertices
            .into_iter()
            .map(|v| {
                let series = match names.iter().position(|n| *n == v.series) {
                    Some(i) => i,
                    None => {
                        names.push(v.series);
                        names.len() - 1
                    }
                };
                DagVertex {
                    series,
                    ordinal: v.ordinal,
                    label: v.label,
                    time: v.time,
                    weight: v.weight,
                }
            })
            .collect();
        Self::from_parts(doc.grid_name, names, vertices, doc.edges)
    }

    pub fn vertex_caption(&self, id: usize) -> String {
        let v = &self.vertices[id];
        format!(
            "{}:{}@{} (w={})",
            self.series_names[v.series],
            v.label,
            v.ordinal,
            format_weight(v.weight)
        )
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph eedag {\n  rankdir=LR;\n");
        for id in 0..self.vertices.len() {
            let _ = writeln!(
                out,
                "  v{id} [label=\"{}\"];",
                escape(&self.vertex_caption(id))
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  v{} -> v{} [label=\"{}\"];",
                e.src,
                e.dst,
                format_weight(e.weight)
            );
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct DagDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_name: Option<String>,
    vertices: Vec<VertexRecord>,
    edges: Vec<DagEdge>,
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    series: String,
    ordinal: usize,
    label: Label,
    time: f64,
    weight: f64,
}

pub(crate) fn format_weight(w: f64) -> String {
    format!("{w:.4}")
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Dot,
}

pub fn export(dag: &ExtremalEventDAG, format: ExportFormat) -> Result<String> {
    match format {
        ExportFormat::Json => dag.to_json(),
        ExportFormat::Dot => Ok(dag.to_dot()),
    }
}

/// Builds the DAG of `ds`, logging any plateau collapses.
pub fn build_dag(ds: &Dataset) -> Result<ExtremalEventDAG> {
    let (dag, warnings) = build_dag_with_warnings(ds)?;
    for w in &warnings {
        warn!("{w}");
    }
    Ok(dag)
}

/// Builds the DAG of `ds` and returns the plateau collapses it performed.
pub fn build_dag_with_warnings(ds: &Dataset) -> Result<(ExtremalEventDAG, Vec<PlateauWarning>)> {
    let mut warnings = Vec::new();
    let mut vertices = Vec::new();
    let mut profiles = Vec::new();
    for (series, ts) in ds.series().iter().enumerate() {
        let (ts, mut collapsed) = collapse_plateaus(ts)?;
        warnings.append(&mut collapsed);
        let lives = node_lives(&ts);
        for (k, ex) in find_extrema(&ts).into_iter().enumerate() {
            let weight = lives.get(ex.index).ok_or_else(|| {
                Error::Invariant(format!(
                    "extremum {} of `{}` has no node life",
                    ex.index,
                    ts.name()
                ))
            })?;
            vertices.push(DagVertex {
                series,
                ordinal: k + 1,
                label: ex.label,
                time: ex.time,
                weight,
            });
            profiles.push(IntervalProfile::new(&ts, ex.index)?);
        }
    }

    let edges: Vec<Vec<DagEdge>> = (0..vertices.len())
        .into_par_iter()
        .map(|p| {
            let vp = &vertices[p];
            vertices
                .iter()
                .enumerate()
                .filter(|(_, vq)| vp.time < vq.time)
                .map(|(q, vq)| {
                    let mut weight = vp.weight.min(vq.weight);
                    if vp.series != vq.series {
                        if let Some(eps) = epsilon_star(&profiles[p], &profiles[q])? {
                            weight = weight.min(eps);
                        }
                    }
                    Ok(DagEdge {
                        src: p,
                        dst: q,
                        weight,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let names = ds.names().map(str::to_owned).collect();
    let dag = ExtremalEventDAG::from_parts(None, names, vertices, edges.concat())?;
    Ok((dag, warnings))
}

/// Which side of the threshold an ε-slice keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceMode {
    /// Weights strictly above ε: the order relations that survive every ε-perturbation.
    #[default]
    Comparable,
    /// Weights at most ε.
    Verbatim,
}

impl FromStr for SliceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comparable" => Ok(SliceMode::Comparable),
            "verbatim" => Ok(SliceMode::Verbatim),
            other => Err(Error::InvalidArgument(format!(
                "unknown slice mode `{other}`"
            ))),
        }
    }
}

/// Subgraph of the vertices and edges whose weights pass the threshold.
/// An edge is kept only when both of its endpoints are.
pub fn epsilon_slice(
    dag: &ExtremalEventDAG,
    eps: f64,
    mode: SliceMode,
) -> Result<ExtremalEventDAG> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be non-negative, got {eps}"
        )));
    }
    let keep = |w: f64| match mode {
        SliceMode::Comparable => w > eps,
        SliceMode::Verbatim => w <= eps,
    };
    let mut new_id = vec![None; dag.vertices.len()];
    let mut vertices = Vec::new();
    for (id, v) in dag.vertices.iter().enumerate() {
        if keep(v.weight) {
            new_id[id] = Some(vertices.len());
            vertices.push(v.clone());
        }
    }
    let edges = dag
        .edges
        .iter()
        .filter(|e| keep(e.weight))
        .filter_map(|e| {
            Some(DagEdge {
                src: new_id[e.src]?,
                dst: new_id[e.dst]?,
                weight: e.weight,
            })
        })
        .collect();
    ExtremalEventDAG::from_parts(
        dag.grid_name.clone(),
        dag.series_names.clone(),
        vertices,
        edges,
    )
}
