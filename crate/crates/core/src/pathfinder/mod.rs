//! Exact-search oracles: Hamiltonian paths between opposite colours under
//! edge faults, two disjoint spanning paths, Hamiltonian paths avoiding one
//! vertex, and Hamiltonian cycles through an optional edge.

mod engine;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::faults::FaultSet;
use crate::topology::{Edge, SubCube, Topology, Vertex};
use crate::verify::{verify_cycle_on, verify_path_on, verify_path_pair_on};

pub use engine::Prunes;
use engine::{hamiltonian_path, Digraph, Outcome};

/// Environment variable overriding the default node limit.
pub const NODE_LIMIT_ENV: &str = "BHCYCLE_NODE_LIMIT";
/// Environment variable overriding the default time limit, in seconds.
pub const TIME_LIMIT_ENV: &str = "BHCYCLE_TIME_LIMIT_SECS";

const DEFAULT_NODES: u64 = 100_000_000;
const DEFAULT_SECS: u64 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub node_limit: u64,
    pub time_limit: Duration,
}

impl SearchBudget {
    pub fn new(node_limit: u64, time_limit: Duration) -> SearchBudget {
        SearchBudget { node_limit: node_limit.max(1), time_limit: time_limit.max(Duration::from_millis(1)) }
    }

    /// Defaults, overridden by the environment when set.
    pub fn from_env() -> SearchBudget {
        let nodes = std::env::var(NODE_LIMIT_ENV).ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_NODES);
        let secs = std::env::var(TIME_LIMIT_ENV).ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SECS);
        SearchBudget::new(nodes, Duration::from_secs(secs))
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::from_env()
    }
}

/// Counters accumulated over search calls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub calls: u64,
    pub nodes: u64,
    pub parity_prunes: u64,
    pub degree_prunes: u64,
    pub connectivity_prunes: u64,
    pub forced_moves: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.calls += other.calls;
        self.nodes += other.nodes;
        self.parity_prunes += other.parity_prunes;
        self.degree_prunes += other.degree_prunes;
        self.connectivity_prunes += other.connectivity_prunes;
        self.forced_moves += other.forced_moves;
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The whole search space was exhausted: no such path or cycle exists.
    #[error("exhaustive search found no solution")]
    NotFound,
    #[error("search budget exceeded")]
    BudgetExceeded,
    #[error("search result failed verification: {0}")]
    SelfCheck(String),
}

/// A path given as its vertex sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Path {
    vertices: Vec<Vertex>,
}

impl Path {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    pub fn start(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    /// Number of edges.
    pub fn length(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// A cycle given as its vertex sequence; the last vertex joins the first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HamCycle {
    vertices: Vec<Vertex>,
}

impl HamCycle {
    pub(crate) fn from_vertices(vertices: Vec<Vertex>) -> HamCycle {
        HamCycle { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Whether the cycle traverses the edge `ab`.
    pub fn uses(&self, a: Vertex, b: Vertex) -> bool {
        let len = self.vertices.len();
        (0..len).any(|i| {
            let (x, y) = (self.vertices[i], self.vertices[(i + 1) % len]);
            (x == a && y == b) || (x == b && y == a)
        })
    }
}

/// Host vertices mapped to dense indices.
struct Local {
    verts: Vec<Vertex>,
    index: Vec<u32>,
}

impl Local {
    fn id(&self, v: Vertex) -> u32 {
        self.index[v.index()]
    }

    fn lift(&self, ids: &[u32]) -> Vec<Vertex> {
        ids.iter().map(|&i| self.verts[i as usize]).collect()
    }
}

const ABSENT: u32 = u32::MAX;

/// The fault-free part of `host` without `skip`, as a symmetric digraph.
fn local_graph(t: &Topology, host: &SubCube, f: &FaultSet, skip: Option<Vertex>) -> (Local, Digraph) {
    let mut verts: Vec<Vertex> = host.vertices().iter().copied().filter(|&v| Some(v) != skip).collect();
    verts.sort();
    let mut index = vec![ABSENT; t.vertex_count()];
    for (i, v) in verts.iter().enumerate() {
        index[v.index()] = i as u32;
    }
    let mut g = Digraph::new(verts.iter().map(|v| v.digit(0) % 2 == 1).collect());
    for (i, &v) in verts.iter().enumerate() {
        for w in host.neighbors(t, v) {
            let k = index[w.index()];
            if k != ABSENT && !f.contains_pair(v, w) {
                g.add_arc(i as u32, k);
            }
        }
    }
    (Local { verts, index }, g)
}

/// Runs oracle searches with one budget and accumulates statistics.
#[derive(Clone, Debug)]
pub struct Searcher {
    pub budget: SearchBudget,
    pub prunes: Prunes,
    pub stats: SearchStats,
}

impl Default for Searcher {
    fn default() -> Self {
        Searcher::new(SearchBudget::default())
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), SearchError> {
    if cond {
        Ok(())
    } else {
        Err(SearchError::Precondition(msg()))
    }
}

impl Searcher {
    pub fn new(budget: SearchBudget) -> Searcher {
        Searcher { budget, prunes: Prunes::ALL, stats: SearchStats::default() }
    }

    pub fn with_prunes(mut self, prunes: Prunes) -> Searcher {
        self.prunes = prunes;
        self
    }

    fn run(&mut self, g: &Digraph, s: u32, target: u32) -> Result<Vec<u32>, SearchError> {
        self.stats.calls += 1;
        match hamiltonian_path(g, s, target, &self.budget, self.prunes, &mut self.stats) {
            Outcome::Found(p) => Ok(p),
            Outcome::Absent => Err(SearchError::NotFound),
            Outcome::OutOfBudget => Err(SearchError::BudgetExceeded),
        }
    }

    /// Fault-free Hamiltonian path of `host` from `s` to `end`.
    pub fn ham_path(
        &mut self,
        t: &Topology,
        host: &SubCube,
        f: &FaultSet,
        s: Vertex,
        end: Vertex,
    ) -> Result<Path, SearchError> {
        require(host.contains(s) && host.contains(end), || format!("{s} or {end} outside the host"))?;
        require(s.color() != end.color(), || format!("{s} and {end} have the same colour"))?;
        let (local, g) = local_graph(t, host, f, None);
        let ids = self.run(&g, local.id(s), local.id(end))?;
        let vertices = local.lift(&ids);
        let v = verify_path_on(t, host.vertices(), f, &vertices, s, end);
        if !v.ok {
            return Err(SearchError::SelfCheck(v.diagnostic.unwrap_or_default()));
        }
        Ok(Path { vertices })
    }

    /// Two vertex-disjoint fault-free paths `u1…v1` and `u2…v2` covering `host`.
    #[allow(clippy::too_many_arguments)]
    pub fn two_spanning_paths(
        &mut self,
        t: &Topology,
        host: &SubCube,
        f: &FaultSet,
        u1: Vertex,
        v1: Vertex,
        u2: Vertex,
        v2: Vertex,
    ) -> Result<(Path, Path), SearchError> {
        for x in [u1, v1, u2, v2] {
            require(host.contains(x), || format!("{x} outside the host"))?;
        }
        require(u1 != u2 && u1.color() == u2.color(), || {
            format!("{u1} and {u2} must be distinct and equally coloured")
        })?;
        require(v1 != v2 && v1.color() == v2.color(), || {
            format!("{v1} and {v2} must be distinct and equally coloured")
        })?;
        require(u1.color() != v1.color(), || "the two endpoint pairs must have opposite colours".into())?;
        let (local, mut g) = local_graph(t, host, f, None);
        let (a, b) = (local.id(v1), local.id(u2));
        // A one-way arc from v1 is the only way into u2: the single path
        // u1 … v1 → u2 … v2 splits into the two requested paths.
        g.remove_arcs_into(b);
        g.add_arc(a, b);
        let ids = self.run(&g, local.id(u1), local.id(v2))?;
        let cut = ids.iter().position(|&x| x == b).ok_or_else(|| SearchError::SelfCheck("u2 missing".into()))?;
        if cut == 0 || ids[cut - 1] != a {
            return Err(SearchError::SelfCheck("virtual arc not used".into()));
        }
        let p = local.lift(&ids[..cut]);
        let q = local.lift(&ids[cut..]);
        let v = verify_path_pair_on(t, host.vertices(), f, &p, &q, [(u1, v1), (u2, v2)]);
        if !v.ok {
            return Err(SearchError::SelfCheck(v.diagnostic.unwrap_or_default()));
        }
        Ok((Path { vertices: p }, Path { vertices: q }))
    }

    /// Fault-free path from `s` to `end` covering `host` without `removed`.
    pub fn hyper_ham_path(
        &mut self,
        t: &Topology,
        host: &SubCube,
        f: &FaultSet,
        removed: Vertex,
        s: Vertex,
        end: Vertex,
    ) -> Result<Path, SearchError> {
        for x in [removed, s, end] {
            require(host.contains(x), || format!("{x} outside the host"))?;
        }
        require(s != removed && end != removed, || "an endpoint is the removed vertex".into())?;
        require(s != end && s.color() == end.color(), || {
            format!("{s} and {end} must be distinct and equally coloured")
        })?;
        require(s.color() != removed.color(), || "endpoints must be coloured opposite the removed vertex".into())?;
        let (local, g) = local_graph(t, host, f, Some(removed));
        let ids = self.run(&g, local.id(s), local.id(end))?;
        let vertices = local.lift(&ids);
        let rest: Vec<Vertex> = host.vertices().iter().copied().filter(|&x| x != removed).collect();
        let v = verify_path_on(t, &rest, f, &vertices, s, end);
        if !v.ok {
            return Err(SearchError::SelfCheck(v.diagnostic.unwrap_or_default()));
        }
        Ok(Path { vertices })
    }

    /// Fault-free Hamiltonian cycle of `host`, through `through` when given.
    pub fn ham_cycle_search(
        &mut self,
        t: &Topology,
        host: &SubCube,
        f: &FaultSet,
        through: Option<Edge>,
    ) -> Result<HamCycle, SearchError> {
        let (local, mut g) = local_graph(t, host, f, None);
        let ids = match through {
            Some(e) => {
                require(host.has_edge(e), || format!("{e} is not an edge of the host"))?;
                require(!f.contains(e), || format!("{e} is faulty"))?;
                let (a, b) = (local.id(e.u()), local.id(e.v()));
                g.remove_edge(a, b);
                // A path b … a closes through the prescribed edge.
                self.run(&g, b, a)?
            }
            None => {
                // Split the first vertex into a start and a copy that ends the path.
                let start = 0u32;
                let copy = g.black.len() as u32;
                let colour = g.black[0];
                g.black.push(colour);
                g.out.push(Vec::new());
                g.inn.push(Vec::new());
                for a in g.inn[start as usize].clone() {
                    g.add_arc(a, copy);
                }
                let mut ids = self.run(&g, start, copy)?;
                ids.pop();
                ids
            }
        };
        let vertices = local.lift(&ids);
        let v = verify_cycle_on(t, host.vertices(), f, &vertices, through);
        if !v.ok {
            return Err(SearchError::SelfCheck(v.diagnostic.unwrap_or_default()));
        }
        Ok(HamCycle { vertices })
    }
}

/// [`Searcher::ham_path`] on the whole topology with a fresh searcher.
pub fn ham_path(t: &Topology, f: &FaultSet, s: Vertex, end: Vertex, budget: SearchBudget) -> Result<Path, SearchError> {
    Searcher::new(budget).ham_path(t, &t.whole(), f, s, end)
}

/// [`Searcher::two_spanning_paths`] on the whole fault-free topology.
pub fn two_spanning_paths(
    t: &Topology,
    u1: Vertex,
    v1: Vertex,
    u2: Vertex,
    v2: Vertex,
    budget: SearchBudget,
) -> Result<(Path, Path), SearchError> {
    Searcher::new(budget).two_spanning_paths(t, &t.whole(), &FaultSet::new(t), u1, v1, u2, v2)
}

/// [`Searcher::hyper_ham_path`] on the whole fault-free topology.
pub fn hyper_ham_path(
    t: &Topology,
    removed: Vertex,
    s: Vertex,
    end: Vertex,
    budget: SearchBudget,
) -> Result<Path, SearchError> {
    Searcher::new(budget).hyper_ham_path(t, &t.whole(), &FaultSet::new(t), removed, s, end)
}

/// [`Searcher::ham_cycle_search`] on the whole topology.
pub fn ham_cycle_search(
    t: &Topology,
    f: &FaultSet,
    through: Option<Edge>,
    budget: SearchBudget,
) -> Result<HamCycle, SearchError> {
    Searcher::new(budget).ham_cycle_search(t, &t.whole(), f, through)
}
