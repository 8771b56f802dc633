//! Inductive construction of a fault-free Hamiltonian cycle through a
//! prescribed edge.
//!
//! Each level pads the fault set to the full 4k−5 budget, picks a split
//! dimension, dispatches to one subcase and solves the four components by
//! recursion or by the path oracles. BH₂ is solved by exhaustive search.

mod case1;
mod case2;
mod level;
mod shared;
mod trace;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::faults::{dim_faults_in, is_conditional, select_split_in, split_degree_profile, FaultSet, SplitKind};
use crate::pathfinder::{HamCycle, SearchBudget, SearchError, SearchStats, Searcher};
use crate::topology::{Edge, SubCube, Topology, Vertex};
use crate::verify::verify_cycle_on;

use level::{min_degree, Level, Ring};

pub use trace::{guard_holds, top_level, CaseTrace, TraceEntry, CASE_LABELS, TOP_LEVEL_LABELS};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("oracle failure in subcase {label}: {detail}")]
    OracleFailure { label: String, detail: String, trace: CaseTrace },
    #[error("search budget exhausted in subcase {label}")]
    BudgetExhausted { label: String, trace: CaseTrace },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl ConstructError {
    pub fn trace(&self) -> Option<&CaseTrace> {
        match self {
            ConstructError::OracleFailure { trace, .. } | ConstructError::BudgetExhausted { trace, .. } => Some(trace),
            _ => None,
        }
    }

    fn with_trace(self, entries: &[TraceEntry]) -> ConstructError {
        let full = CaseTrace { entries: entries.to_vec() };
        match self {
            ConstructError::OracleFailure { label, detail, .. } => {
                ConstructError::OracleFailure { label, detail, trace: full }
            }
            ConstructError::BudgetExhausted { label, .. } => ConstructError::BudgetExhausted { label, trace: full },
            other => other,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StitchError {
    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),
    #[error("segments close into {0} of {1} pieces before returning")]
    NotSingleCycle(usize, usize),
    #[error("coverage gap: {0}")]
    Coverage(String),
}

fn stitch_on(
    t: &Topology,
    allowed: &[Vertex],
    f: &FaultSet,
    segments: &[Vec<Vertex>],
    links: &[(Vertex, Vertex)],
) -> Result<Vec<Vertex>, StitchError> {
    if segments.iter().any(Vec::is_empty) {
        return Err(StitchError::EndpointMismatch("empty segment".into()));
    }
    let cycle = level::assemble(segments, links).map_err(|e| match e {
        level::WalkError::Mismatch(m) => StitchError::EndpointMismatch(m),
        level::WalkError::Split(a, b) => StitchError::NotSingleCycle(a, b),
    })?;
    let v = verify_cycle_on(t, allowed, f, &cycle, None);
    if !v.ok {
        return Err(StitchError::Coverage(v.diagnostic.unwrap_or_default()));
    }
    Ok(cycle)
}

/// Joins vertex-disjoint segments into one Hamiltonian cycle of `t` using
/// the given cross edges, each of which must join two segment ends.
pub fn stitch(t: &Topology, f: &FaultSet, segments: &[Vec<Vertex>], cross: &[Edge]) -> Result<HamCycle, StitchError> {
    let all: Vec<Vertex> = t.vertices().collect();
    let links: Vec<(Vertex, Vertex)> = cross.iter().map(|e| e.endpoints()).collect();
    stitch_on(t, &all, f, segments, &links).map(HamCycle::from_vertices)
}

/// Hamiltonian cycle of BH₂ − F through `e` by exhaustive search.
pub fn base_case_bh2(t: &Topology, f: &FaultSet, e: Edge) -> Result<HamCycle, ConstructError> {
    if t.n() != 2 {
        return Err(ConstructError::Precondition(format!("base case needs BH2, got BH{}", t.n())));
    }
    check_instance(t, f, e)?;
    let mut searcher = Searcher::default();
    searcher.ham_cycle_search(t, &t.whole(), f, Some(e)).map_err(|err| match err {
        SearchError::BudgetExceeded => {
            ConstructError::BudgetExhausted { label: "base".into(), trace: CaseTrace::default() }
        }
        other => ConstructError::OracleFailure {
            label: "base".into(),
            detail: other.to_string(),
            trace: CaseTrace::default(),
        },
    })
}

fn check_instance(t: &Topology, f: &FaultSet, e: Edge) -> Result<(), ConstructError> {
    let n = t.n();
    let pre = |m: String| Err(ConstructError::Precondition(m));
    if n < 2 {
        return pre(format!("construction needs n >= 2, got {n}"));
    }
    if f.n() != n {
        return pre(format!("fault set is for BH{}, topology is BH{n}", f.n()));
    }
    if f.len() > 4 * n - 5 {
        return pre(format!("|F| = {} exceeds 4n-5 = {}", f.len(), 4 * n - 5));
    }
    if !is_conditional(t, f) {
        return pre("some vertex keeps fewer than two fault-free edges".into());
    }
    if !t.contains(e.u()) || !t.contains(e.v()) || !t.is_adjacent(e.u(), e.v()) {
        return pre(format!("{e} is not an edge of BH{n}"));
    }
    if f.contains(e) {
        return pre(format!("{e} is faulty"));
    }
    Ok(())
}

/// Fault-free Hamiltonian cycle of BHₙ − F through `e`, with the subcases
/// taken. Oracle budgets come from the environment.
pub fn construct_ham_cycle(t: &Topology, f: &FaultSet, e: Edge) -> Result<(HamCycle, CaseTrace), ConstructError> {
    Constructor::new(t, SearchBudget::from_env()).build(f, e)
}

/// The recursive constructor. Keeps the oracle searcher, so statistics
/// accumulate over calls.
pub struct Constructor<'t> {
    t: &'t Topology,
    searcher: Searcher,
    trace: Vec<TraceEntry>,
}

/// Region sub-solutions are cycles as plain vertex lists.
type Built = Result<Vec<Vertex>, ConstructError>;

impl<'t> Constructor<'t> {
    pub fn new(t: &'t Topology, budget: SearchBudget) -> Constructor<'t> {
        Constructor { t, searcher: Searcher::new(budget), trace: Vec::new() }
    }

    pub fn stats(&self) -> &SearchStats {
        &self.searcher.stats
    }

    pub fn build(&mut self, f: &FaultSet, e: Edge) -> Result<(HamCycle, CaseTrace), ConstructError> {
        check_instance(self.t, f, e)?;
        self.trace.clear();
        let whole = self.t.whole();
        match self.cycle(&whole, f, e, 0) {
            Ok(c) => {
                let all: Vec<Vertex> = self.t.vertices().collect();
                let v = verify_cycle_on(self.t, &all, f, &c, Some(e));
                if !v.ok {
                    return Err(ConstructError::Verification(v.diagnostic.unwrap_or_default()));
                }
                let trace = CaseTrace { entries: std::mem::take(&mut self.trace) };
                Ok((HamCycle::from_vertices(c), trace))
            }
            Err(err) => Err(err.with_trace(&self.trace)),
        }
    }

    /// Cycle of `cube − f` through `e`.
    fn cycle(&mut self, cube: &SubCube, f: &FaultSet, e: Edge, depth: usize) -> Built {
        let t = self.t;
        let k = cube.level();
        let entry = self.trace.len();
        self.trace.push(TraceEntry::new(depth, k));
        if k == 2 {
            self.trace[entry].label = "base";
            self.trace[entry].faults = f.count_in(cube);
            let c = self
                .searcher
                .ham_cycle_search(t, cube, f, Some(e))
                .map_err(|err| self.oracle_error(entry, "base search", err))?;
            return Ok(c.into_vertices());
        }
        let (fp, padded) = pad(t, cube, f, e);
        let choice =
            select_split_in(t, &fp, cube).map_err(|err| self.fail(entry, format!("split selection: {err}")))?;
        let mut j = choice.m;
        let mut case_two = e.dim() == j;
        if case_two {
            let (delta, _) = split_degree_profile(t, &fp, cube, j);
            if dim_faults_in(&fp, cube, j) < 3 || delta < 2 {
                match choice.m_prime {
                    Some(mp) if choice.kind == SplitKind::Case2 => {
                        j = mp;
                        case_two = false;
                    }
                    _ => return Err(self.fail(entry, "no dimension avoids the prescribed edge".into())),
                }
            }
        }
        let parts = cube.split(j).map_err(|err| self.fail(entry, err.to_string()))?;
        let lvl = Level { t, cube: cube.clone(), f: fp, e, j, parts, k, depth, entry };
        {
            let (delta, _) = split_degree_profile(t, &lvl.f, cube, j);
            let te = &mut self.trace[entry];
            te.split_dim = Some(j);
            te.edge_crosses = case_two;
            te.padded = padded;
            te.faults = lvl.f.count_in(cube);
            te.cross_faults = lvl.cross_faults();
            te.split_min_degree = delta;
        }
        let c = if case_two { case2::run(self, &lvl)? } else { case1::run(self, &lvl)? };
        let v = verify_cycle_on(t, cube.vertices(), &lvl.f, &c, Some(e));
        if !v.ok {
            let label = self.trace[entry].label;
            return Err(ConstructError::Verification(format!("subcase {label}: {}", v.diagnostic.unwrap_or_default())));
        }
        Ok(c)
    }

    /// Records the subcase and the component loads in ring order.
    fn mark(&mut self, lvl: &Level, label: &'static str, r: &Ring) {
        debug_assert!(CASE_LABELS.contains(&label));
        let te = &mut self.trace[lvl.entry];
        te.label = label;
        te.component_faults = lvl.loads(r);
    }

    fn note(&mut self, lvl: &Level, msg: String) {
        log::debug!("level {} depth {}: {msg}", lvl.k, lvl.depth);
        self.trace[lvl.entry].notes.push(msg);
    }

    fn fail(&self, entry: usize, detail: String) -> ConstructError {
        ConstructError::OracleFailure {
            label: self.trace[entry].label.to_string(),
            detail,
            trace: CaseTrace::default(),
        }
    }

    fn no_choice(&self, lvl: &Level, what: &str) -> ConstructError {
        self.fail(lvl.entry, format!("no admissible choice for {what}"))
    }

    fn oracle_error(&self, entry: usize, what: &str, err: SearchError) -> ConstructError {
        match err {
            SearchError::BudgetExceeded => ConstructError::BudgetExhausted {
                label: self.trace[entry].label.to_string(),
                trace: CaseTrace::default(),
            },
            other => self.fail(entry, format!("{what}: {other}")),
        }
    }

    /// Whether the induction hypothesis applies to `part − f` through `e`.
    fn ind_ready(&self, part: &SubCube, f: &FaultSet, e: Edge) -> bool {
        let k = part.level();
        part.has_edge(e) && !f.contains(e) && f.count_in(part) <= 4 * k - 5 && min_degree(self.t, part, f) >= 2
    }

    /// Recursive call on a component.
    fn ind(&mut self, lvl: &Level, part: &SubCube, f: &FaultSet, e: Edge) -> Built {
        if !self.ind_ready(part, f, e) {
            return Err(self.fail(lvl.entry, format!("induction hypothesis fails on {part:?} through {e}")));
        }
        self.cycle(part, f, e, lvl.depth + 1)
    }

    /// Hamiltonian path of a component with at most 2k−2 faults.
    fn lace(&mut self, lvl: &Level, part: &SubCube, f: &FaultSet, s: Vertex, end: Vertex) -> Built {
        let k = part.level();
        let load = f.count_in(part);
        if load > 2 * k - 2 {
            self.note(lvl, format!("path oracle called with {load} faults, budget {}", 2 * k - 2));
        }
        match self.searcher.ham_path(self.t, part, f, s, end) {
            Ok(p) => Ok(p.into_vertices()),
            Err(err) => Err(self.oracle_error(lvl.entry, "Hamiltonian path", err)),
        }
    }

    /// Two disjoint paths covering a fault-free component.
    fn two_paths(
        &mut self,
        lvl: &Level,
        part: &SubCube,
        p: (Vertex, Vertex),
        q: (Vertex, Vertex),
    ) -> Result<(Vec<Vertex>, Vec<Vertex>), ConstructError> {
        let load = lvl.f.count_in(part);
        if load > 0 {
            self.note(lvl, format!("two-path oracle called on a component with {load} faults"));
        }
        match self.searcher.two_spanning_paths(self.t, part, &lvl.f, p.0, p.1, q.0, q.1) {
            Ok((a, b)) => Ok((a.into_vertices(), b.into_vertices())),
            Err(err) => Err(self.oracle_error(lvl.entry, "two spanning paths", err)),
        }
    }

    /// Path covering a fault-free component minus one vertex.
    fn avoiding(&mut self, lvl: &Level, part: &SubCube, removed: Vertex, s: Vertex, end: Vertex) -> Built {
        let load = lvl.f.count_in(part);
        if load > 0 {
            self.note(lvl, format!("vertex-deleted path oracle called on a component with {load} faults"));
        }
        match self.searcher.hyper_ham_path(self.t, part, &lvl.f, removed, s, end) {
            Ok(p) => Ok(p.into_vertices()),
            Err(err) => Err(self.oracle_error(lvl.entry, "vertex-deleted path", err)),
        }
    }

    /// Joins segments of the level's region into its cycle.
    fn join(&self, lvl: &Level, segments: &[Vec<Vertex>], links: &[(Vertex, Vertex)]) -> Built {
        stitch_on(self.t, lvl.cube.vertices(), &lvl.f, segments, links)
            .map_err(|err| self.fail(lvl.entry, format!("stitch: {err}")))
    }
}

/// Adds faults up to 4k−5 inside `cube`, preferring edges of one dimension
/// other than e's whose endpoints carry no fault yet.
fn pad(t: &Topology, cube: &SubCube, f: &FaultSet, e: Edge) -> (FaultSet, usize) {
    let k = cube.level();
    let have = f.count_in(cube);
    let target = 4 * k - 5;
    if have >= target {
        return (f.clone(), 0);
    }
    let mut fp = f.clone();
    let mut touched: BTreeSet<Vertex> = f.edges_in(cube).iter().flat_map(|x| [x.u(), x.v()]).collect();
    touched.insert(e.u());
    touched.insert(e.v());
    let mut dims: Vec<usize> = cube.dims().iter().copied().filter(|&d| d != e.dim()).collect();
    dims.sort_by_key(|&d| (std::cmp::Reverse(dim_faults_in(f, cube, d)), d));
    dims.push(e.dim());
    let edges = cube.edges(t);
    let mut added = 0;
    'fill: for &d in &dims {
        for &x in edges.iter().filter(|x| x.dim() == d) {
            if added == target - have {
                break 'fill;
            }
            if !fp.contains(x) && !touched.contains(&x.u()) && !touched.contains(&x.v()) {
                fp.insert(x);
                touched.insert(x.u());
                touched.insert(x.v());
                added += 1;
            }
        }
    }
    if added < target - have {
        // Second pass: any edge that leaves both ends three free edges.
        for &x in &edges {
            if added == target - have {
                break;
            }
            let free = |v: Vertex| cube.neighbors(t, v).filter(|&w| !fp.contains_pair(v, w)).count();
            if x != e && !fp.contains(x) && free(x.u()) >= 4 && free(x.v()) >= 4 {
                fp.insert(x);
                added += 1;
            }
        }
    }
    (fp, added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_def1;

    fn v(d: &[u8]) -> Vertex {
        Vertex::from_digits(d).unwrap()
    }

    #[test]
    fn stitch_joins_four_edges_of_an_eight_cycle() {
        let t = build_def1(2).unwrap();
        let f = FaultSet::new(&t);
        let c = crate::pathfinder::ham_cycle_search(&t, &f, None, SearchBudget::default()).unwrap();
        let vs = c.vertices();
        let segs: Vec<Vec<Vertex>> = vs.chunks(4).map(|s| s.to_vec()).collect();
        let cross: Vec<Edge> = (0..4).map(|i| t.edge(segs[i][3], segs[(i + 1) % 4][0]).unwrap()).collect();
        let out = stitch(&t, &f, &segs, &cross).unwrap();
        assert_eq!(out.len(), 16);
    }

    #[test]
    fn stitch_rejects_swapped_endpoints() {
        let t = build_def1(2).unwrap();
        let f = FaultSet::new(&t);
        let c = crate::pathfinder::ham_cycle_search(&t, &f, None, SearchBudget::default()).unwrap();
        let vs = c.vertices();
        let segs: Vec<Vec<Vertex>> = vs.chunks(4).map(|s| s.to_vec()).collect();
        let mut cross: Vec<Edge> = (0..4).map(|i| t.edge(segs[i][3], segs[(i + 1) % 4][0]).unwrap()).collect();
        cross[0] = t.edge(vs[1], vs[2]).unwrap();
        let bad = stitch(&t, &f, &segs, &cross);
        assert!(matches!(bad, Err(StitchError::EndpointMismatch(_))));
    }

    #[test]
    fn base_case_on_fault_free_bh2() {
        let t = build_def1(2).unwrap();
        let f = FaultSet::new(&t);
        let e = t.edge(v(&[0, 0]), v(&[1, 0])).unwrap();
        let c = base_case_bh2(&t, &f, e).unwrap();
        assert_eq!(c.len(), 16);
        assert!(c.uses(e.u(), e.v()));
    }

    #[test]
    fn padding_reaches_the_budget_and_stays_conditional() {
        let t = build_def1(3).unwrap();
        let f = FaultSet::new(&t);
        let e = t.edge(v(&[0, 0, 0]), v(&[1, 0, 0])).unwrap();
        let (fp, added) = pad(&t, &t.whole(), &f, e);
        assert_eq!(added, 7);
        assert_eq!(fp.len(), 7);
        assert!(is_conditional(&t, &fp));
        assert!(!fp.contains(e));
    }
}
