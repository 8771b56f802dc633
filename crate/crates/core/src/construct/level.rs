//! One level of the induction: the region being solved, its four-way split
//! and the helpers every subcase shares.

use std::collections::HashMap;

use crate::faults::{split_degree_profile, FaultSet};
use crate::topology::{split_label, white_step, Color, Edge, SubCube, Topology, Vertex};

/// The four components arranged as K₀ → K₁ → K₂ → K₃ → K₀.
///
/// A vertex whose colour is `fwd` has its two split edges going to the next
/// component of the ring; the other colour goes back to the previous one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) struct Ring {
    base: u8,
    step: u8,
    pub fwd: Color,
}

impl Ring {
    pub fn new(j: usize, base: u8, fwd: Color) -> Ring {
        let w = white_step(j);
        let step = if fwd == Color::White { w } else { (4 - w) % 4 };
        Ring { base, step, fwd }
    }

    /// Split label of Kₖ.
    pub fn label(&self, k: usize) -> u8 {
        (self.base + self.step * (k % 4) as u8) % 4
    }

    /// Ring position of the component with this split label.
    pub fn offset(&self, label: u8) -> usize {
        // step is 1 or 3, its own inverse mod 4
        (((label + 4 - self.base) % 4) * self.step % 4) as usize
    }

    pub fn forward(&self, v: Vertex) -> bool {
        v.color() == self.fwd
    }
}

pub(super) struct Level<'t> {
    pub t: &'t Topology,
    pub cube: SubCube,
    /// Faults after padding.
    pub f: FaultSet,
    pub e: Edge,
    pub j: usize,
    pub parts: [SubCube; 4],
    pub k: usize,
    pub depth: usize,
    pub entry: usize,
}

impl<'t> Level<'t> {
    pub fn label(&self, v: Vertex) -> u8 {
        split_label(v, self.j)
    }

    pub fn part_of(&self, v: Vertex) -> &SubCube {
        &self.parts[self.label(v) as usize]
    }

    pub fn comp(&self, r: &Ring, k: usize) -> &SubCube {
        &self.parts[r.label(k) as usize]
    }

    pub fn offset(&self, r: &Ring, v: Vertex) -> usize {
        r.offset(self.label(v))
    }

    pub fn ring(&self, base_vertex: Vertex, fwd: Color) -> Ring {
        Ring::new(self.j, self.label(base_vertex), fwd)
    }

    pub fn edge(&self, a: Vertex, b: Vertex) -> Edge {
        self.t.edge(a, b).expect("construction only pairs adjacent vertices")
    }

    pub fn faulty(&self, a: Vertex, b: Vertex) -> bool {
        self.f.contains_pair(a, b)
    }

    /// Fault-free split-dimension neighbours, sorted.
    pub fn free_cross(&self, v: Vertex) -> Vec<Vertex> {
        let mut out: Vec<Vertex> =
            self.t.dim_neighbors(v, self.j).into_iter().filter(|&w| !self.faulty(v, w)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Neighbours of `v` inside its component, sorted.
    pub fn inner(&self, v: Vertex) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.part_of(v).neighbors(self.t, v).collect();
        out.sort();
        out
    }

    pub fn inner_free(&self, f: &FaultSet, v: Vertex) -> Vec<Vertex> {
        self.inner(v).into_iter().filter(|&w| !f.contains_pair(v, w)).collect()
    }

    pub fn inner_faulty(&self, v: Vertex) -> Vec<Vertex> {
        self.inner(v).into_iter().filter(|&w| self.faulty(v, w)).collect()
    }

    /// In-component neighbours of `v` paired with their free split edges.
    pub fn rescue(&self, v: Vertex) -> Vec<(Vertex, Vertex)> {
        self.inner(v).into_iter().flat_map(|nb| self.free_cross(nb).into_iter().map(move |x| (nb, x))).collect()
    }

    pub fn load(&self, p: &SubCube) -> usize {
        self.f.count_in(p)
    }

    pub fn loads(&self, r: &Ring) -> [usize; 4] {
        std::array::from_fn(|k| self.load(self.comp(r, k)))
    }

    pub fn cross_faults(&self) -> usize {
        self.f.iter().filter(|e| e.dim() == self.j && self.cube.has_edge(*e)).count()
    }

    /// Minimum fault-free degree inside the components and the vertices
    /// that keep exactly one.
    pub fn profile(&self) -> (usize, Vec<Vertex>) {
        let (min, _) = split_degree_profile(self.t, &self.f, &self.cube, self.j);
        let mut ones: Vec<Vertex> =
            self.cube.vertices().iter().copied().filter(|&v| self.inner_free(&self.f, v).len() == 1).collect();
        ones.sort();
        (min, ones)
    }

    /// Free split edges from Kₖ to Kₖ₊₁ as (tail in Kₖ, head in Kₖ₊₁).
    pub fn cross_pairs(&self, r: &Ring, k: usize) -> Vec<(Vertex, Vertex)> {
        let mut tails: Vec<Vertex> = self.comp(r, k).vertices().iter().copied().filter(|&x| r.forward(x)).collect();
        tails.sort();
        tails.into_iter().flat_map(|x| self.free_cross(x).into_iter().map(move |y| (x, y))).collect()
    }

    /// First free split edge from Kₖ to Kₖ₊₁ avoiding the given vertices.
    pub fn cross_pair(&self, r: &Ring, k: usize, avoid: &[Vertex]) -> Option<(Vertex, Vertex)> {
        self.cross_pairs(r, k).into_iter().find(|(x, y)| !avoid.contains(x) && !avoid.contains(y))
    }

    /// Faulty edges of a component usable as a virtual edge: both ends keep
    /// a free split edge and restoring the edge leaves minimum degree ≥ 2.
    pub fn virtual_candidates(&self, p: &SubCube) -> Vec<Edge> {
        self.f
            .edges_in(p)
            .into_iter()
            .filter(|ev| !self.free_cross(ev.u()).is_empty() && !self.free_cross(ev.v()).is_empty())
            .filter(|&ev| min_degree(self.t, p, &self.f.without(ev)) >= 2)
            .collect()
    }
}

/// Minimum fault-free degree of a region.
pub(super) fn min_degree(t: &Topology, p: &SubCube, f: &FaultSet) -> usize {
    p.vertices().iter().map(|&v| p.neighbors(t, v).filter(|&w| !f.contains_pair(v, w)).count()).min().unwrap_or(0)
}

pub(super) fn position(cycle: &[Vertex], v: Vertex) -> Option<usize> {
    cycle.iter().position(|&x| x == v)
}

/// The two neighbours of `v` on a cycle.
pub(super) fn cycle_nbrs(cycle: &[Vertex], v: Vertex) -> [Vertex; 2] {
    let len = cycle.len();
    let i = position(cycle, v).expect("vertex on cycle");
    [cycle[(i + len - 1) % len], cycle[(i + 1) % len]]
}

pub(super) fn on_cycle(cycle: &[Vertex], a: Vertex, b: Vertex) -> bool {
    position(cycle, a).is_some() && cycle_nbrs(cycle, a).contains(&b)
}

/// Consecutive pairs of a cycle, wraparound included.
pub(super) fn cycle_edges(cycle: &[Vertex]) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
    let len = cycle.len();
    (0..len).map(move |i| (cycle[i], cycle[(i + 1) % len]))
}

/// The path `from … to` left after deleting the cycle edge between them.
pub(super) fn open_cycle(cycle: &[Vertex], from: Vertex, to: Vertex) -> Option<Vec<Vertex>> {
    let len = cycle.len();
    let i = position(cycle, from)?;
    if cycle[(i + 1) % len] == to {
        Some((0..len).map(|s| cycle[(i + len - s) % len]).collect())
    } else if cycle[(i + len - 1) % len] == to {
        Some((0..len).map(|s| cycle[(i + s) % len]).collect())
    } else {
        None
    }
}

/// Pieces left after deleting the given cycle edges, in cycle order.
pub(super) fn cut_cycle(cycle: &[Vertex], cuts: &[(Vertex, Vertex)]) -> Option<Vec<Vec<Vertex>>> {
    let len = cycle.len();
    let is_cut = |i: usize| {
        let (a, b) = (cycle[i], cycle[(i + 1) % len]);
        cuts.iter().any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    };
    let marks: Vec<usize> = (0..len).filter(|&i| is_cut(i)).collect();
    if marks.len() != cuts.len() || marks.is_empty() {
        return None;
    }
    let mut pieces = Vec::with_capacity(marks.len());
    for (n, &m) in marks.iter().enumerate() {
        let next = marks[(n + 1) % marks.len()];
        let mut piece = Vec::new();
        let mut i = (m + 1) % len;
        loop {
            piece.push(cycle[i]);
            if i == next {
                break;
            }
            i = (i + 1) % len;
        }
        pieces.push(piece);
    }
    Some(pieces)
}

/// Endpoints of a segment.
pub(super) fn ends(seg: &[Vertex]) -> (Vertex, Vertex) {
    (seg[0], seg[seg.len() - 1])
}

#[derive(Debug)]
pub(super) enum WalkError {
    Mismatch(String),
    Split(usize, usize),
}

/// Order and direction in which segments are traversed when their
/// endpoints are joined by `links`.
pub(super) fn walk(segs: &[(Vertex, Vertex)], links: &[(Vertex, Vertex)]) -> Result<Vec<(usize, bool)>, WalkError> {
    if segs.is_empty() {
        return Err(WalkError::Mismatch("no segments".into()));
    }
    let mut owner: HashMap<Vertex, usize> = HashMap::new();
    for (i, &(s, e)) in segs.iter().enumerate() {
        for x in [s, e] {
            if let Some(&o) = owner.get(&x) {
                if o != i {
                    return Err(WalkError::Mismatch(format!("{x} ends two segments")));
                }
            }
            owner.insert(x, i);
        }
    }
    let mut at: HashMap<Vertex, Vec<usize>> = HashMap::new();
    for (l, &(a, b)) in links.iter().enumerate() {
        for x in [a, b] {
            if !owner.contains_key(&x) {
                return Err(WalkError::Mismatch(format!("link end {x} is not a segment end")));
            }
            at.entry(x).or_default().push(l);
        }
    }
    for &(s, e) in segs {
        let want = |x: Vertex, n: usize| at.get(&x).map_or(0, |v| v.len()) == n;
        let ok = if s == e { want(s, 2) } else { want(s, 1) && want(e, 1) };
        if !ok {
            return Err(WalkError::Mismatch(format!("segment {s}…{e} is not linked exactly once at each end")));
        }
    }
    let mut used = vec![false; links.len()];
    let mut seen = vec![false; segs.len()];
    let mut order = Vec::with_capacity(segs.len());
    let (mut cur, mut fwd, mut entry) = (0usize, true, None::<usize>);
    loop {
        seen[cur] = true;
        order.push((cur, fwd));
        let (s, e) = segs[cur];
        let out = if fwd { e } else { s };
        let l = *at[&out].iter().find(|&&l| Some(l) != entry).expect("two links at a single vertex");
        if used[l] {
            return Err(WalkError::Mismatch("link used twice".into()));
        }
        used[l] = true;
        let (a, b) = links[l];
        let next_v = if a == out { b } else { a };
        let next = owner[&next_v];
        if next == 0 && next_v == segs[0].0 && seen[0] {
            break;
        }
        if seen[next] {
            return Err(WalkError::Split(order.len(), segs.len()));
        }
        fwd = segs[next].0 == next_v;
        entry = Some(l);
        cur = next;
    }
    if order.len() != segs.len() {
        return Err(WalkError::Split(order.len(), segs.len()));
    }
    Ok(order)
}

/// Whether the segments and links close into one cycle.
pub(super) fn closes(segs: &[(Vertex, Vertex)], links: &[(Vertex, Vertex)]) -> bool {
    walk(segs, links).is_ok()
}

/// Concatenates segments along a successful walk.
pub(super) fn assemble(segs: &[Vec<Vertex>], links: &[(Vertex, Vertex)]) -> Result<Vec<Vertex>, WalkError> {
    let endpoints: Vec<(Vertex, Vertex)> = segs.iter().map(|s| ends(s)).collect();
    let order = walk(&endpoints, links)?;
    let mut out = Vec::with_capacity(segs.iter().map(Vec::len).sum());
    for (i, fwd) in order {
        if fwd {
            out.extend_from_slice(&segs[i]);
        } else {
            out.extend(segs[i].iter().rev());
        }
    }
    Ok(out)
}

/// The two ways to pair entries with exits inside one component.
pub(super) fn pairings(entries: [Vertex; 2], exits: [Vertex; 2]) -> [[(Vertex, Vertex); 2]; 2] {
    [[(entries[0], exits[0]), (entries[1], exits[1])], [(entries[0], exits[1]), (entries[1], exits[0])]]
}
