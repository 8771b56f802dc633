//! Choices and stitching patterns used by several subcases.

use crate::faults::FaultSet;
use crate::topology::{Edge, SubCube, Vertex};

use super::level::{closes, cycle_edges, pairings, Level, Ring};
use super::{ConstructError, Constructor};

/// A component traversed by two disjoint strands, each running from an
/// entry to an exit.
pub(super) struct Double<'a> {
    pub part: &'a SubCube,
    pub entries: [Vertex; 2],
    pub exits: [Vertex; 2],
}

/// Picks, per double component, which entry goes with which exit so that
/// everything closes into one cycle.
pub(super) fn choose_pairings(
    fixed: &[(Vertex, Vertex)],
    doubles: &[Double],
    links: &[(Vertex, Vertex)],
) -> Option<Vec<[(Vertex, Vertex); 2]>> {
    for mask in 0..(1usize << doubles.len()) {
        let mut segs = fixed.to_vec();
        let mut chosen = Vec::with_capacity(doubles.len());
        for (i, d) in doubles.iter().enumerate() {
            let p = pairings(d.entries, d.exits)[(mask >> i) & 1];
            segs.extend_from_slice(&p);
            chosen.push(p);
        }
        if closes(&segs, links) {
            return Some(chosen);
        }
    }
    None
}

/// Runs the two-path oracle for every double component.
pub(super) fn realize(
    b: &mut Constructor,
    lvl: &Level,
    doubles: &[Double],
    chosen: &[[(Vertex, Vertex); 2]],
) -> Result<Vec<Vec<Vertex>>, ConstructError> {
    let mut out = Vec::with_capacity(2 * doubles.len());
    for (d, p) in doubles.iter().zip(chosen) {
        let (x, y) = b.two_paths(lvl, d.part, p[0], p[1])?;
        out.push(x);
        out.push(y);
    }
    Ok(out)
}

/// Endpoints of owned segments.
pub(super) fn seg_ends(segs: &[Vec<Vertex>]) -> Vec<(Vertex, Vertex)> {
    segs.iter().map(|s| (s[0], s[s.len() - 1])).collect()
}

/// Edges of a K₀ cycle other than `e` whose forward end has a free split
/// edge into K₁ and whose other end has one into K₃, as
/// (forward end, other end, K₁ vertex, K₃ vertex).
pub(super) fn cut_candidates(lvl: &Level, r: &Ring, c0: &[Vertex]) -> Vec<(Vertex, Vertex, Vertex, Vertex)> {
    let mut out = Vec::new();
    for (p, q) in cycle_edges(c0) {
        if lvl.e.joins(p, q) {
            continue;
        }
        let (x, y) = if r.forward(p) { (p, q) } else { (q, p) };
        for b1 in lvl.free_cross(x) {
            for a3 in lvl.free_cross(y) {
                out.push((x, y, b1, a3));
            }
        }
    }
    out
}

/// Two vertex-disjoint free split edges from Kₖ to Kₖ₊₁.
pub(super) fn two_pairs(lvl: &Level, r: &Ring, k: usize, avoid: &[Vertex]) -> Option<[(Vertex, Vertex); 2]> {
    let all: Vec<(Vertex, Vertex)> =
        lvl.cross_pairs(r, k).into_iter().filter(|(x, y)| !avoid.contains(x) && !avoid.contains(y)).collect();
    let p = *all.first()?;
    let q = *all.iter().find(|(x, y)| *x != p.0 && *y != p.1)?;
    Some([p, q])
}

/// Vertex-disjoint pairs of faulty edges of a component whose four ends
/// all keep a free split edge.
pub(super) fn disjoint_fault_pairs(lvl: &Level, p: &SubCube) -> Vec<(Edge, Edge)> {
    let cands: Vec<Edge> = lvl
        .f
        .edges_in(p)
        .into_iter()
        .filter(|x| !lvl.free_cross(x.u()).is_empty() && !lvl.free_cross(x.v()).is_empty())
        .collect();
    let mut out = Vec::new();
    for (i, &x) in cands.iter().enumerate() {
        for &y in &cands[i + 1..] {
            if !x.has(y.u()) && !x.has(y.v()) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Adds every in-component edge at `z` except those to `keep`, so that a
/// cycle through z must use exactly the kept two.
pub(super) fn force(lvl: &Level, f: &FaultSet, z: Vertex, keep: [Vertex; 2]) -> FaultSet {
    let mut out = f.clone();
    for x in lvl.inner(z) {
        if !keep.contains(&x) {
            out.insert(lvl.edge(z, x));
        }
    }
    out
}

/// Forward end first.
pub(super) fn oriented(r: &Ring, e: Edge) -> (Vertex, Vertex) {
    if r.forward(e.u()) {
        (e.u(), e.v())
    } else {
        (e.v(), e.u())
    }
}

/// Two distinct picks, one from each list.
pub(super) fn distinct_pair(xs: &[Vertex], ys: &[Vertex]) -> Vec<(Vertex, Vertex)> {
    let mut out = Vec::new();
    for &x in xs {
        for &y in ys {
            if x != y {
                out.push((x, y));
            }
        }
    }
    out
}
