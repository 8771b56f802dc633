//! Independent checkers. Nothing here calls the searcher or the
//! constructor; the only shared pieces are the topology and fault types.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::faults::FaultSet;
use crate::topology::{build_def1, build_def2, Edge, Partition, Topology, Vertex};

/// Outcome of a structural check with the first violation found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub diagnostic: Option<String>,
}

impl Verdict {
    fn pass() -> Verdict {
        Verdict { ok: true, diagnostic: None }
    }

    fn fail(msg: impl Into<String>) -> Verdict {
        Verdict { ok: false, diagnostic: Some(msg.into()) }
    }
}

fn step_ok(t: &Topology, f: &FaultSet, a: Vertex, b: Vertex) -> Result<(), String> {
    if !t.neighbors(a).contains(&b) {
        return Err(format!("{a} and {b} are not adjacent"));
    }
    if f.contains_pair(a, b) {
        return Err(format!("faulty edge used: {a}-{b}"));
    }
    Ok(())
}

fn coverage(t: &Topology, allowed: &[Vertex], seq: &[Vertex]) -> Result<(), String> {
    let mut want = vec![false; t.vertex_count()];
    for &v in allowed {
        if !t.contains(v) {
            return Err(format!("{v} is not a vertex of BH{}", t.n()));
        }
        want[v.index()] = true;
    }
    let mut seen = vec![false; t.vertex_count()];
    for &v in seq {
        if !t.contains(v) || !want[v.index()] {
            return Err(format!("{v} lies outside the host"));
        }
        if seen[v.index()] {
            return Err(format!("{v} visited twice"));
        }
        seen[v.index()] = true;
    }
    if seq.len() != allowed.len() {
        let missing = allowed.iter().find(|v| !seen[v.index()]).map(|v| v.to_string()).unwrap_or_default();
        return Err(format!("{} of {} vertices covered, {missing} missing", seq.len(), allowed.len()));
    }
    Ok(())
}

/// Checks a cyclic sequence covering exactly `allowed`.
pub fn verify_cycle_on(
    t: &Topology,
    allowed: &[Vertex],
    f: &FaultSet,
    cycle: &[Vertex],
    through: Option<Edge>,
) -> Verdict {
    if cycle.len() < 4 {
        return Verdict::fail(format!("cycle of length {} is too short", cycle.len()));
    }
    if let Err(msg) = coverage(t, allowed, cycle) {
        return Verdict::fail(msg);
    }
    let len = cycle.len();
    let mut hit = through.is_none();
    for i in 0..len {
        let (a, b) = (cycle[i], cycle[(i + 1) % len]);
        if let Err(msg) = step_ok(t, f, a, b) {
            return Verdict::fail(msg);
        }
        if let Some(e) = through {
            hit |= e.joins(a, b);
        }
    }
    if !hit {
        return Verdict::fail(format!("prescribed edge {} not traversed", through.unwrap()));
    }
    Verdict::pass()
}

/// Checks a Hamiltonian cycle of the whole topology.
pub fn verify_ham_cycle(t: &Topology, f: &FaultSet, cycle: &[Vertex], through: Option<Edge>) -> Verdict {
    let all: Vec<Vertex> = t.vertices().collect();
    verify_cycle_on(t, &all, f, cycle, through)
}

/// Checks a path covering exactly `allowed` that runs from `s` to `end`.
pub fn verify_path_on(
    t: &Topology,
    allowed: &[Vertex],
    f: &FaultSet,
    path: &[Vertex],
    s: Vertex,
    end: Vertex,
) -> Verdict {
    if path.first() != Some(&s) || path.last() != Some(&end) {
        return Verdict::fail(format!("path does not run from {s} to {end}"));
    }
    if let Err(msg) = coverage(t, allowed, path) {
        return Verdict::fail(msg);
    }
    for w in path.windows(2) {
        if let Err(msg) = step_ok(t, f, w[0], w[1]) {
            return Verdict::fail(msg);
        }
    }
    Verdict::pass()
}

/// Checks two vertex-disjoint paths that jointly cover `allowed`.
pub fn verify_path_pair_on(
    t: &Topology,
    allowed: &[Vertex],
    f: &FaultSet,
    p: &[Vertex],
    q: &[Vertex],
    ends: [(Vertex, Vertex); 2],
) -> Verdict {
    for (path, (s, e)) in [(p, ends[0]), (q, ends[1])] {
        if path.first() != Some(&s) || path.last() != Some(&e) {
            return Verdict::fail(format!("path does not run from {s} to {e}"));
        }
        for w in path.windows(2) {
            if let Err(msg) = step_ok(t, f, w[0], w[1]) {
                return Verdict::fail(msg);
            }
        }
    }
    let joined: Vec<Vertex> = p.iter().chain(q.iter()).copied().collect();
    match coverage(t, allowed, &joined) {
        Ok(()) => Verdict::pass(),
        Err(msg) => Verdict::fail(msg),
    }
}

/// Whether both constructions give the same edge set.
pub fn verify_defs_equivalent(n: usize) -> bool {
    match (build_def1(n), build_def2(n)) {
        (Ok(a), Ok(b)) => a.edges_sorted() == b.edges_sorted(),
        _ => false,
    }
}

/// A small undirected graph on 0..len.
struct Small {
    adj: Vec<Vec<usize>>,
}

impl Small {
    fn has(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }
}

/// Stable colour refinement run jointly on two graphs so colours are comparable.
fn refine(g: &Small, h: &Small) -> (Vec<usize>, Vec<usize>) {
    let mut cg: Vec<usize> = g.adj.iter().map(Vec::len).collect();
    let mut ch: Vec<usize> = h.adj.iter().map(Vec::len).collect();
    loop {
        let sig = |c: &Vec<usize>, gr: &Small, v: usize| {
            let mut ns: Vec<usize> = gr.adj[v].iter().map(|&w| c[w]).collect();
            ns.sort_unstable();
            (c[v], ns)
        };
        let mut table: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let sg: Vec<_> = (0..g.adj.len()).map(|v| sig(&cg, g, v)).collect();
        let sh: Vec<_> = (0..h.adj.len()).map(|v| sig(&ch, h, v)).collect();
        for s in sg.iter().chain(sh.iter()) {
            let next = table.len();
            table.entry(s.clone()).or_insert(next);
        }
        let ng: Vec<usize> = sg.iter().map(|s| table[s]).collect();
        let nh: Vec<usize> = sh.iter().map(|s| table[s]).collect();
        let classes = |c: &Vec<usize>| c.iter().collect::<std::collections::BTreeSet<_>>().len();
        let stable = classes(&ng) == classes(&cg) && classes(&nh) == classes(&ch);
        cg = ng;
        ch = nh;
        if stable {
            return (cg, ch);
        }
    }
}

/// An isomorphism from `g` onto `h`, found by colour refinement and
/// backtracking in breadth-first order of `g`.
fn isomorphism(g: &Small, h: &Small) -> Option<Vec<usize>> {
    let len = g.adj.len();
    if len != h.adj.len() {
        return None;
    }
    let edges = |s: &Small| s.adj.iter().map(Vec::len).sum::<usize>();
    if edges(g) != edges(h) {
        return None;
    }
    let (cg, ch) = refine(g, h);
    let mut hist_g = cg.clone();
    let mut hist_h = ch.clone();
    hist_g.sort_unstable();
    hist_h.sort_unstable();
    if hist_g != hist_h {
        return None;
    }
    let mut order = Vec::with_capacity(len);
    let mut seen = vec![false; len];
    for root in 0..len {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &w in &g.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    let mut map = vec![usize::MAX; len];
    let mut used = vec![false; len];
    #[allow(clippy::too_many_arguments)]
    fn extend(
        k: usize,
        order: &[usize],
        g: &Small,
        h: &Small,
        cg: &[usize],
        ch: &[usize],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let v = order[k];
        // A mapped neighbour narrows the candidates to its image's neighbours.
        let anchor = g.adj[v].iter().find(|&&w| map[w] != usize::MAX).map(|&w| map[w]);
        let cands: Vec<usize> = match anchor {
            Some(a) => h.adj[a].clone(),
            None => (0..h.adj.len()).collect(),
        };
        for x in cands {
            if used[x] || cg[v] != ch[x] {
                continue;
            }
            let consistent = order[..k].iter().all(|&w| g.has(v, w) == h.has(x, map[w]));
            if !consistent {
                continue;
            }
            map[v] = x;
            used[x] = true;
            if extend(k + 1, order, g, h, cg, ch, map, used) {
                return true;
            }
            map[v] = usize::MAX;
            used[x] = false;
        }
        false
    }
    if extend(0, &order, g, h, &cg, &ch, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

fn connected(s: &Small) -> bool {
    if s.adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; s.adj.len()];
    seen[0] = true;
    let mut stack = vec![0];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &s.adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == s.adj.len()
}

/// Checks the four components: sizes, a true partition of V, connectivity,
/// an explicit isomorphism onto BH_{n−1}, and the cross-edge map.
pub fn verify_partition(t: &Topology, p: &Partition) -> Verdict {
    let n = t.n();
    if n < 2 {
        return Verdict::fail("partition needs n >= 2");
    }
    let j = p.split_dimension();
    let reference = match build_def1(n - 1) {
        Ok(r) => r,
        Err(e) => return Verdict::fail(e.to_string()),
    };
    let ref_small = Small {
        adj: reference.vertices().map(|v| reference.neighbors(v).iter().map(|w| w.index()).collect()).collect(),
    };
    let mut owner = vec![usize::MAX; t.vertex_count()];
    for (i, comp) in p.components().iter().enumerate() {
        if comp.len() != t.vertex_count() / 4 {
            return Verdict::fail(format!("component {i} has {} vertices", comp.len()));
        }
        for &v in comp.vertices() {
            if !t.contains(v) {
                return Verdict::fail(format!("{v} is not a vertex of the host"));
            }
            if owner[v.index()] != usize::MAX {
                return Verdict::fail(format!("{v} lies in two components"));
            }
            owner[v.index()] = i;
        }
    }
    for (i, comp) in p.components().iter().enumerate() {
        let local: BTreeMap<Vertex, usize> = comp.vertices().iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut adj = vec![Vec::new(); comp.len()];
        for (&v, &k) in &local {
            for (w, d) in t.neighbors_with_dim(v) {
                if d == j {
                    continue;
                }
                match local.get(&w) {
                    Some(&kw) => adj[k].push(kw),
                    None => return Verdict::fail(format!("{v}-{w} leaves component {i} off dimension {j}")),
                }
            }
        }
        let small = Small { adj };
        if !connected(&small) {
            return Verdict::fail(format!("component {i} is disconnected"));
        }
        if isomorphism(&small, &ref_small).is_none() {
            return Verdict::fail(format!("component {i} is not isomorphic to BH{}", n - 1));
        }
    }
    let expected: Vec<Edge> = t.edges_of_dim(j).to_vec();
    let mut got: Vec<Edge> = p.cross_edges().iter().map(|c| c.edge).collect();
    got.sort();
    if got != expected {
        return Verdict::fail("cross edges differ from the dimension's edge set");
    }
    for c in p.cross_edges() {
        let (a, b) = (owner[c.edge.u().index()], owner[c.edge.v().index()]);
        if (a as u8, b as u8) != c.labels {
            return Verdict::fail(format!("cross edge {} carries wrong labels", c.edge));
        }
        let diff = (a + 4 - b) % 4;
        if diff != 1 && diff != 3 {
            return Verdict::fail(format!("cross edge {} joins components {a} and {b}", c.edge));
        }
    }
    Verdict::pass()
}

/// Result of trying to certify that no fault-free Hamiltonian cycle exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AbsenceVerdict {
    /// Exhaustive search found nothing.
    ConclusiveAbsent,
    /// Two same-colour vertices share the same two fault-free neighbours,
    /// which would close a 4-cycle inside any Hamiltonian cycle.
    StructuralAbsent {
        u: Vertex,
        v: Vertex,
        x: Vertex,
        y: Vertex,
    },
    /// A cycle exists; one is attached.
    Present {
        cycle: Vec<Vertex>,
    },
    Inconclusive,
}

const EXHAUSTIVE_LIMIT: usize = 16;

pub fn certify_no_ham_cycle(t: &Topology, f: &FaultSet) -> AbsenceVerdict {
    if t.vertex_count() <= EXHAUSTIVE_LIMIT {
        return match exhaustive_cycle(t, f) {
            Some(cycle) => AbsenceVerdict::Present { cycle },
            None => AbsenceVerdict::ConclusiveAbsent,
        };
    }
    let mut by_nbhd: BTreeMap<(Vertex, Vertex), Vec<Vertex>> = BTreeMap::new();
    for v in t.vertices() {
        let free: Vec<Vertex> = t.neighbors(v).iter().copied().filter(|&w| !f.contains_pair(v, w)).collect();
        if free.len() == 2 {
            let key = if free[0] < free[1] { (free[0], free[1]) } else { (free[1], free[0]) };
            by_nbhd.entry(key).or_default().push(v);
        }
    }
    for ((x, y), vs) in by_nbhd {
        if vs.len() >= 2 {
            let mut vs = vs;
            vs.sort();
            return AbsenceVerdict::StructuralAbsent { u: vs[0], v: vs[1], x, y };
        }
    }
    AbsenceVerdict::Inconclusive
}

/// Plain backtracking over the fault-free graph starting at the smallest vertex.
fn exhaustive_cycle(t: &Topology, f: &FaultSet) -> Option<Vec<Vertex>> {
    let adj: Vec<Vec<Vertex>> =
        t.vertices().map(|v| t.neighbors(v).iter().copied().filter(|&w| !f.contains_pair(v, w)).collect()).collect();
    if adj.iter().any(|a| a.len() < 2) {
        return None;
    }
    let start = t.vertices().min()?;
    let mut path = vec![start];
    let mut on = vec![false; t.vertex_count()];
    on[start.index()] = true;
    fn go(adj: &[Vec<Vertex>], start: Vertex, path: &mut Vec<Vertex>, on: &mut [bool]) -> bool {
        let head = *path.last().unwrap();
        if path.len() == adj.len() {
            return adj[head.index()].contains(&start);
        }
        for &w in &adj[head.index()] {
            if on[w.index()] {
                continue;
            }
            on[w.index()] = true;
            path.push(w);
            if go(adj, start, path, on) {
                return true;
            }
            path.pop();
            on[w.index()] = false;
        }
        false
    }
    if go(&adj, start, &mut path, &mut on) {
        Some(path)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faults::build_optimality_counterexample;
    use crate::topology::partition_by_dimension;

    fn bh1_cycle(t: &Topology) -> Vec<Vertex> {
        (0..4).map(|i| Vertex::from_index(1, i)).filter(|v| t.contains(*v)).collect()
    }

    #[test]
    fn bh1_cycle_checks() {
        let t = build_def1(1).unwrap();
        let c = bh1_cycle(&t);
        assert!(verify_ham_cycle(&t, &FaultSet::new(&t), &c, None).ok);
        let f = FaultSet::from_pairs(&t, &[(c[1], c[2])]).unwrap();
        let v = verify_ham_cycle(&t, &f, &c, None);
        assert!(!v.ok);
        assert!(v.diagnostic.unwrap().contains("faulty edge used"));
    }

    #[test]
    fn missing_through_edge_is_reported() {
        let t = build_def1(1).unwrap();
        let c = bh1_cycle(&t);
        let e = t.edge(c[0], c[1]).unwrap();
        assert!(verify_ham_cycle(&t, &FaultSet::new(&t), &c, Some(e)).ok);
        let short = &c[..3];
        assert!(!verify_ham_cycle(&t, &FaultSet::new(&t), short, Some(e)).ok);
    }

    #[test]
    fn definitions_agree() {
        for n in 1..=4 {
            assert!(verify_defs_equivalent(n), "n = {n}");
        }
    }

    #[test]
    fn partitions_check_out() {
        for n in 2..=3 {
            let t = build_def1(n).unwrap();
            for j in 0..n {
                let p = partition_by_dimension(&t, j).unwrap();
                let v = verify_partition(&t, &p);
                assert!(v.ok, "n={n} j={j}: {:?}", v.diagnostic);
            }
        }
    }

    #[test]
    fn isomorphism_rejects_a_path() {
        let cycle = Small { adj: vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![2, 0]] };
        let path = Small { adj: vec![vec![1], vec![0, 2], vec![1, 3], vec![2]] };
        assert!(isomorphism(&cycle, &path).is_none());
        assert!(isomorphism(&cycle, &cycle).is_some());
    }

    #[test]
    fn counterexample_verdicts() {
        let t2 = build_def1(2).unwrap();
        let ce = build_optimality_counterexample(&t2).unwrap();
        assert_eq!(certify_no_ham_cycle(&t2, &ce.faults), AbsenceVerdict::ConclusiveAbsent);
        assert!(matches!(certify_no_ham_cycle(&t2, &FaultSet::new(&t2)), AbsenceVerdict::Present { .. }));
        let t3 = build_def1(3).unwrap();
        let ce3 = build_optimality_counterexample(&t3).unwrap();
        match certify_no_ham_cycle(&t3, &ce3.faults) {
            AbsenceVerdict::StructuralAbsent { u, v, .. } => {
                assert_eq!((u, v), (ce3.u, ce3.v));
            }
            other => panic!("unexpected verdict {other:?}"),
        }
        assert_eq!(certify_no_ham_cycle(&t3, &FaultSet::new(&t3)), AbsenceVerdict::Inconclusive);
    }
}
