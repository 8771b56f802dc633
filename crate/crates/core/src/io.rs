//! JSON interchange for topologies, fault sets and cycles, and DOT export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::faults::{FaultError, FaultSet};
use crate::topology::{Color, Edge, Topology, TopologyError, Vertex};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Faults(#[from] FaultError),
    #[error("{0}")]
    Mismatch(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: Vertex,
    pub v: Vertex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl EdgeJson {
    fn of(e: Edge, with_dim: bool) -> EdgeJson {
        EdgeJson { u: e.u(), v: e.v(), dim: with_dim.then_some(e.dim()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyJson {
    pub n: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultsJson {
    pub n: usize,
    pub faults: Vec<EdgeJson>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleJson {
    pub n: usize,
    pub cycle: Vec<Vertex>,
    pub through: Option<EdgeJson>,
    pub trace: Vec<String>,
}

pub fn topology_json(t: &Topology) -> TopologyJson {
    TopologyJson {
        n: t.n(),
        vertices: t.vertices_sorted(),
        edges: t.edges_sorted().into_iter().map(|e| EdgeJson::of(e, true)).collect(),
    }
}

/// Checks that a topology document describes exactly `t`.
pub fn check_topology_json(t: &Topology, doc: &TopologyJson) -> Result<(), IoError> {
    let want = topology_json(t);
    if doc.n != want.n {
        return Err(IoError::Mismatch(format!("document is for BH{}, expected BH{}", doc.n, want.n)));
    }
    let mut edges: Vec<Edge> = doc.edges.iter().map(|e| t.edge(e.u, e.v)).collect::<Result<_, _>>()?;
    edges.sort();
    let mut verts = doc.vertices.clone();
    verts.sort();
    if verts != want.vertices || edges != t.edges_sorted() {
        return Err(IoError::Mismatch("vertex or edge set differs from BHn".into()));
    }
    Ok(())
}

pub fn faults_json(f: &FaultSet, seed: Option<u64>) -> FaultsJson {
    let mut faults: Vec<Edge> = f.iter().collect();
    faults.sort();
    FaultsJson { n: f.n(), faults: faults.into_iter().map(|e| EdgeJson::of(e, false)).collect(), seed }
}

pub fn faults_from_json(t: &Topology, doc: &FaultsJson) -> Result<FaultSet, IoError> {
    if doc.n != t.n() {
        return Err(IoError::Mismatch(format!("fault set is for BH{}, topology is BH{}", doc.n, t.n())));
    }
    let pairs: Vec<(Vertex, Vertex)> = doc.faults.iter().map(|e| (e.u, e.v)).collect();
    Ok(FaultSet::from_pairs(t, &pairs)?)
}

pub fn parse_faults(t: &Topology, text: &str) -> Result<(FaultSet, Option<u64>), IoError> {
    let doc: FaultsJson = serde_json::from_str(text)?;
    Ok((faults_from_json(t, &doc)?, doc.seed))
}

pub fn cycle_json(n: usize, cycle: &[Vertex], through: Option<Edge>, trace: &[&str]) -> CycleJson {
    CycleJson {
        n,
        cycle: cycle.to_vec(),
        through: through.map(|e| EdgeJson::of(e, false)),
        trace: trace.iter().map(|s| s.to_string()).collect(),
    }
}

/// Undirected DOT with the dimension on every edge and the colour on every
/// node.
pub fn topology_dot(t: &Topology) -> String {
    let mut out = format!("graph BH{} {{\n", t.n());
    for v in t.vertices_sorted() {
        let c = match v.color() {
            Color::Black => "black",
            Color::White => "white",
        };
        let _ = writeln!(out, "  \"{}\" [color={c}];", label(v));
    }
    for e in t.edges_sorted() {
        let _ = writeln!(out, "  \"{}\" -- \"{}\" [dim={}];", label(e.u()), label(e.v()), e.dim());
    }
    out.push_str("}\n");
    out
}

fn label(v: Vertex) -> String {
    v.digits().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses a vertex written as comma-separated digits, e.g. `0,1,3`.
pub fn parse_vertex(s: &str) -> Result<Vertex, IoError> {
    let digits: Vec<u8> = s
        .split(',')
        .map(|d| d.trim().parse::<u8>().map_err(|_| IoError::Mismatch(format!("bad digit in vertex '{s}'"))))
        .collect::<Result<_, _>>()?;
    Ok(Vertex::from_digits(&digits)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_def1;

    #[test]
    fn faults_round_trip() {
        let t = build_def1(2).unwrap();
        let f = crate::faults::random_conditional_faults(&t, 3, 5).unwrap();
        let text = serde_json::to_string(&faults_json(&f, Some(5))).unwrap();
        let (g, seed) = parse_faults(&t, &text).unwrap();
        assert_eq!(g, f);
        assert_eq!(seed, Some(5));
    }

    #[test]
    fn topology_document_checks_out() {
        let t = build_def1(2).unwrap();
        let doc = topology_json(&t);
        assert_eq!(doc.vertices.len(), 16);
        assert_eq!(doc.edges.len(), 32);
        check_topology_json(&t, &doc).unwrap();
        let mut bad = doc.clone();
        bad.edges.pop();
        assert!(check_topology_json(&t, &bad).is_err());
    }

    #[test]
    fn dot_lists_every_edge_once() {
        let t = build_def1(1).unwrap();
        let dot = topology_dot(&t);
        assert_eq!(dot.matches(" -- ").count(), 4);
        assert!(dot.contains("\"0\" [color=white]"));
    }

    #[test]
    fn vertex_text_form() {
        assert_eq!(parse_vertex("2,3,1").unwrap().digits(), vec![2, 3, 1]);
        assert!(parse_vertex("2,x").is_err());
    }
}
