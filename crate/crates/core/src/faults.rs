//! Faulty edge sets under the conditional model, rescuability, split
//! dimension selection and rescue cross edges.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::topology::{Edge, Partition, SubCube, Topology, TopologyError, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FaultError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("fault set hosted on BH{got}, expected BH{expected}")]
    HostMismatch { got: usize, expected: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no split dimension satisfies either selection statement")]
    NoSplitDimension,
    #[error("no fault-free rescue cross edge exists for {0}")]
    NoRescueEdge(Vertex),
    #[error("rejection sampling gave up after {0} attempts")]
    RejectionBudget(usize),
}

/// A set of faulty edges with cached per-dimension and per-vertex counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSet {
    n: usize,
    faulty: BTreeSet<Edge>,
    per_dim: Vec<usize>,
    per_vertex: Vec<u16>,
}

impl FaultSet {
    pub fn new(t: &Topology) -> FaultSet {
        FaultSet { n: t.n(), faulty: BTreeSet::new(), per_dim: vec![0; t.n()], per_vertex: vec![0; t.vertex_count()] }
    }

    pub fn from_edges(t: &Topology, edges: impl IntoIterator<Item = Edge>) -> Result<FaultSet, FaultError> {
        let mut f = FaultSet::new(t);
        for e in edges {
            if !t.contains(e.u()) {
                return Err(FaultError::HostMismatch { got: e.u().dimension(), expected: t.n() });
            }
            f.insert(e);
        }
        Ok(f)
    }

    pub fn from_pairs(t: &Topology, pairs: &[(Vertex, Vertex)]) -> Result<FaultSet, FaultError> {
        let edges = pairs.iter().map(|&(a, b)| t.edge(a, b)).collect::<Result<Vec<_>, _>>()?;
        FaultSet::from_edges(t, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        if !self.faulty.insert(e) {
            return false;
        }
        self.per_dim[e.dim()] += 1;
        self.per_vertex[e.u().index()] += 1;
        self.per_vertex[e.v().index()] += 1;
        true
    }

    pub fn remove(&mut self, e: Edge) -> bool {
        if !self.faulty.remove(&e) {
            return false;
        }
        self.per_dim[e.dim()] -= 1;
        self.per_vertex[e.u().index()] -= 1;
        self.per_vertex[e.v().index()] -= 1;
        true
    }

    /// A copy with `e` no longer faulty.
    pub fn without(&self, e: Edge) -> FaultSet {
        let mut f = self.clone();
        f.remove(e);
        f
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.faulty.contains(&e)
    }

    /// Whether the pair `ab` is a faulty edge; non-adjacent pairs are never faulty.
    pub fn contains_pair(&self, a: Vertex, b: Vertex) -> bool {
        match Edge::new(a, b) {
            Ok(e) => self.faulty.contains(&e),
            Err(_) => false,
        }
    }

    pub fn len(&self) -> usize {
        self.faulty.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faulty.is_empty()
    }

    /// Faulty edges in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.faulty.iter().copied()
    }

    /// |F ∩ ∂D_d| for every d.
    pub fn per_dimension_count(&self) -> &[usize] {
        &self.per_dim
    }

    pub fn fault_degree(&self, v: Vertex) -> usize {
        self.per_vertex[v.index()] as usize
    }

    /// Number of faulty edges lying inside `c`.
    pub fn count_in(&self, c: &SubCube) -> usize {
        self.faulty.iter().filter(|&&e| c.has_edge(e)).count()
    }

    /// Faulty edges lying inside `c`.
    pub fn edges_in(&self, c: &SubCube) -> Vec<Edge> {
        self.faulty.iter().copied().filter(|&e| c.has_edge(e)).collect()
    }

    /// Recomputes the cached counts from the edge set and compares.
    pub fn summaries_consistent(&self) -> bool {
        let mut dims = vec![0usize; self.n];
        let mut verts = vec![0u16; self.per_vertex.len()];
        for e in &self.faulty {
            dims[e.dim()] += 1;
            verts[e.u().index()] += 1;
            verts[e.v().index()] += 1;
        }
        dims == self.per_dim && verts == self.per_vertex && dims.iter().sum::<usize>() == self.faulty.len()
    }
}

/// Number of fault-free neighbours of `u`, inside `restricted_to` when given.
pub fn rescuability(t: &Topology, f: &FaultSet, u: Vertex, restricted_to: Option<&SubCube>) -> usize {
    match restricted_to {
        None => t.neighbors(u).iter().filter(|&&w| !f.contains_pair(u, w)).count(),
        Some(c) => c.neighbors(t, u).filter(|&w| !f.contains_pair(u, w)).count(),
    }
}

/// Whether every vertex keeps at least two fault-free edges.
pub fn is_conditional(t: &Topology, f: &FaultSet) -> bool {
    t.vertices().all(|v| 2 * t.n() - f.fault_degree(v) >= 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    Case1,
    Case2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitChoice {
    pub kind: SplitKind,
    pub m: usize,
    pub m_prime: Option<usize>,
}

/// Minimum fault-free degree over `c` after deleting dimension `m`, and the
/// number of vertices attaining exactly one.
pub(crate) fn split_degree_profile(t: &Topology, f: &FaultSet, c: &SubCube, m: usize) -> (usize, usize) {
    let mut min = usize::MAX;
    let mut ones = 0;
    for &v in c.vertices() {
        let deg = c
            .dims()
            .iter()
            .filter(|&&d| d != m)
            .flat_map(|&d| t.dim_neighbors(v, d))
            .filter(|&w| !f.contains_pair(v, w))
            .count();
        min = min.min(deg);
        if deg == 1 {
            ones += 1;
        }
    }
    (min, ones)
}

/// Faults of `c` that lie on its m-dimension edges.
pub(crate) fn dim_faults_in(f: &FaultSet, c: &SubCube, m: usize) -> usize {
    f.iter().filter(|&e| e.dim() == m && c.has_edge(e)).count()
}

fn statement_one(t: &Topology, f: &FaultSet, c: &SubCube, m: usize) -> bool {
    dim_faults_in(f, c, m) >= 3 && split_degree_profile(t, f, c, m).0 >= 2
}

fn isolation_ok(t: &Topology, f: &FaultSet, c: &SubCube, m: usize) -> bool {
    let (min, ones) = split_degree_profile(t, f, c, m);
    min >= 1 && ones <= 1
}

/// Split selection on an arbitrary sub-cube. With a full budget of 4k−5
/// faults the choice obeys both statements exactly; with fewer faults the two-
/// dimension statement drops its fault-count requirement.
pub(crate) fn select_split_in(t: &Topology, f: &FaultSet, c: &SubCube) -> Result<SplitChoice, FaultError> {
    let k = c.level();
    let full = f.count_in(c) >= 4 * k - 5;
    let dims = c.dims();
    if let Some(&m) = dims.iter().find(|&&m| statement_one(t, f, c, m)) {
        return Ok(SplitChoice { kind: SplitKind::Case1, m, m_prime: None });
    }
    let ok: Vec<usize> =
        dims.iter().copied().filter(|&m| (!full || dim_faults_in(f, c, m) >= 2) && isolation_ok(t, f, c, m)).collect();
    if ok.len() >= 2 {
        return Ok(SplitChoice { kind: SplitKind::Case2, m: ok[0], m_prime: Some(ok[1]) });
    }
    Err(FaultError::NoSplitDimension)
}

fn check_choice(t: &Topology, f: &FaultSet, c: &SubCube, s: &SplitChoice) -> bool {
    let full = f.count_in(c) >= 4 * c.level() - 5;
    match s.kind {
        SplitKind::Case1 => s.m_prime.is_none() && statement_one(t, f, c, s.m),
        SplitKind::Case2 => match s.m_prime {
            Some(mp) if mp != s.m => {
                [s.m, mp].iter().all(|&m| (!full || dim_faults_in(f, c, m) >= 2) && isolation_ok(t, f, c, m))
            }
            _ => false,
        },
    }
}

/// Chooses the dimension to split along. CASE1 with the smallest qualifying
/// dimension wins over CASE2; the result is re-checked before it is returned.
pub fn select_split_dimension(t: &Topology, f: &FaultSet) -> Result<SplitChoice, FaultError> {
    if t.n() < 3 {
        return Err(FaultError::Precondition(format!("split selection needs n >= 3, got {}", t.n())));
    }
    if f.len() > 4 * t.n() - 5 {
        return Err(FaultError::Precondition(format!("|F| = {} exceeds 4n-5 = {}", f.len(), 4 * t.n() - 5)));
    }
    if !is_conditional(t, f) {
        return Err(FaultError::Precondition("fault set is not conditional".into()));
    }
    let whole = t.whole();
    let choice = select_split_in(t, f, &whole)?;
    if !check_choice(t, f, &whole, &choice) {
        return Err(FaultError::NoSplitDimension);
    }
    Ok(choice)
}

/// A rescue cross edge for `u`: `(v, w)` is fault-free with `w` in another
/// component and `(u, v)` an edge of u's component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RescueEdge {
    pub v: Vertex,
    pub w: Vertex,
    pub used_faulty_uv: bool,
}

pub(crate) fn rescue_candidates(t: &Topology, f: &FaultSet, c: &SubCube, j: usize, u: Vertex) -> Vec<RescueEdge> {
    let mut out = Vec::new();
    let mut vs: Vec<Vertex> = c.neighbors(t, u).collect();
    vs.sort();
    for v in vs {
        let mut ws = t.dim_neighbors(v, j);
        ws.sort();
        for w in ws {
            if !f.contains_pair(v, w) {
                out.push(RescueEdge { v, w, used_faulty_uv: f.contains_pair(u, v) });
            }
        }
    }
    out
}

/// Finds a rescue cross edge for `u`. When `prefer_faulty` is set and `u` is
/// 1-rescuable in its component, a result with `(u, v)` faulty comes first.
pub fn find_rescue_cross_edge(
    t: &Topology,
    f: &FaultSet,
    p: &Partition,
    u: Vertex,
    prefer_faulty: bool,
) -> Result<RescueEdge, FaultError> {
    if f.len() > 4 * t.n() - 5 {
        return Err(FaultError::Precondition(format!("|F| = {} exceeds 4n-5", f.len())));
    }
    let c = p.component(p.label_of(u) as usize);
    let all = rescue_candidates(t, f, c, p.split_dimension(), u);
    let one_rescuable = rescuability(t, f, u, Some(c)) == 1;
    let pick = if prefer_faulty && one_rescuable {
        all.iter().find(|r| r.used_faulty_uv).or_else(|| all.first())
    } else {
        all.first()
    };
    pick.copied().ok_or(FaultError::NoRescueEdge(u))
}

const REJECTION_ATTEMPTS: usize = 100_000;

/// A uniformly random conditional fault set of the given size.
pub fn random_conditional_faults(t: &Topology, size: usize, seed: u64) -> Result<FaultSet, FaultError> {
    let edges = t.edges_sorted();
    if size > edges.len() {
        return Err(FaultError::Precondition(format!("size {size} exceeds |E| = {}", edges.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REJECTION_ATTEMPTS {
        let picked = sample(&mut rng, edges.len(), size);
        let f = FaultSet::from_edges(t, picked.iter().map(|i| edges[i]))?;
        if is_conditional(t, &f) {
            return Ok(f);
        }
    }
    Err(FaultError::RejectionBudget(REJECTION_ATTEMPTS))
}

/// The 4n−4 fault set showing the bound is tight, with its distinguished
/// vertices.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub faults: FaultSet,
    pub u: Vertex,
    pub v: Vertex,
    pub x: Vertex,
    pub y: Vertex,
}

pub fn build_optimality_counterexample(t: &Topology) -> Result<Counterexample, FaultError> {
    let n = t.n();
    if n < 2 {
        return Err(FaultError::Precondition("the bound is stated for n >= 2".into()));
    }
    let mut digits = vec![0u8; n];
    let u = t.vertex(&digits)?;
    digits[0] = 2;
    let v = t.vertex(&digits)?;
    digits[0] = 1;
    let x = t.vertex(&digits)?;
    digits[0] = 3;
    let y = t.vertex(&digits)?;
    let mut faults = FaultSet::new(t);
    for &a in t.neighbors(u) {
        if a != x && a != y {
            faults.insert(t.edge(u, a)?);
            faults.insert(t.edge(v, a)?);
        }
    }
    Ok(Counterexample { faults, u, v, x, y })
}
