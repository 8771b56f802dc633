//! The prescribed edge lies inside a component; that component is K₀.

use std::collections::BTreeSet;

use crate::faults::FaultSet;
use crate::topology::{Color, Edge, Vertex};

use super::level::{cut_cycle, cycle_nbrs, on_cycle, open_cycle, Level, Ring};
use super::shared::{
    choose_pairings, cut_candidates, disjoint_fault_pairs, distinct_pair, force, oriented, realize, seg_ends,
    two_pairs, Double,
};
use super::{Built, ConstructError, Constructor};

pub(super) fn run(b: &mut Constructor, lvl: &Level) -> Built {
    let k = lvl.k;
    let white = lvl.ring(lvl.e.u(), Color::White);
    let loads = lvl.loads(&white);
    let max = *loads.iter().max().unwrap();
    let heavy = loads.iter().position(|&l| l == max).unwrap();
    if max <= 4 * k - 9 {
        let (delta, ones) = lvl.profile();
        if delta >= 2 {
            return c112(b, lvl);
        }
        if ones.len() != 1 {
            b.note(lvl, format!("{} vertices keep a single free edge", ones.len()));
        }
        let w = ones[0];
        let r = lvl.ring(lvl.e.u(), w.color());
        match lvl.offset(&r, w) {
            0 => c1111(b, lvl, r, w),
            1 => c1112(b, lvl, r, w),
            2 => c1113(b, lvl, r, w),
            _ => c1112m(b, lvl, r, w),
        }
    } else if max == 4 * k - 8 {
        match heavy {
            0 => c121(b, lvl),
            2 => c123(b, lvl),
            _ => c122(b, lvl, heavy_at_one(lvl, white.label(heavy))),
        }
    } else if max == 4 * k - 7 {
        let (delta, ones) = lvl.profile();
        if delta >= 2 {
            match heavy {
                0 => c1311(b, lvl),
                2 => c1313(b, lvl),
                _ => c1312(b, lvl, heavy_at_one(lvl, white.label(heavy))),
            }
        } else {
            c132(b, lvl, ones[0])
        }
    } else {
        Err(b.fail(lvl.entry, format!("component loads {loads:?} leave fewer than two split faults")))
    }
}

/// The orientation that puts the component with this label at K₁.
fn heavy_at_one(lvl: &Level, label: u8) -> Ring {
    [Color::White, Color::Black]
        .into_iter()
        .map(|c| lvl.ring(lvl.e.u(), c))
        .find(|r| r.offset(label) == 1)
        .expect("a neighbouring component is K1 in one orientation")
}

fn missing(b: &Constructor, lvl: &Level, what: &str) -> ConstructError {
    b.fail(lvl.entry, format!("{what} is not on the component cycle"))
}

/// Three laceable paths around a K₀ segment: K₀ leaves at `a0` and returns at `b0`.
#[allow(clippy::too_many_arguments)]
fn ring_of_paths(
    b: &mut Constructor,
    lvl: &Level,
    r: &Ring,
    h0: Vec<Vertex>,
    a0: Vertex,
    b0: Vertex,
    b1: Vertex,
    a3: Vertex,
) -> Built {
    let (a1, b2) = lvl.cross_pair(r, 1, &[b1]).ok_or_else(|| b.no_choice(lvl, "split edge K1-K2"))?;
    let (a2, b3) = lvl.cross_pair(r, 2, &[a3]).ok_or_else(|| b.no_choice(lvl, "split edge K2-K3"))?;
    let h1 = b.lace(lvl, lvl.comp(r, 1), &lvl.f, b1, a1)?;
    let h2 = b.lace(lvl, lvl.comp(r, 2), &lvl.f, b2, a2)?;
    let h3 = b.lace(lvl, lvl.comp(r, 3), &lvl.f, b3, a3)?;
    b.join(lvl, &[h0, h1, h2, h3], &[(a0, b1), (a1, b2), (a2, b3), (a3, b0)])
}

fn c1111(b: &mut Constructor, lvl: &Level, r: Ring, w: Vertex) -> Built {
    b.mark(lvl, "1.1.1.1", &r);
    let k0 = lvl.comp(&r, 0);
    let plan = 'p: {
        for b0 in lvl.inner_faulty(w) {
            let f0 = lvl.f.without(lvl.edge(w, b0));
            if !b.ind_ready(k0, &f0, lvl.e) {
                continue;
            }
            for a3 in lvl.free_cross(b0) {
                if let Some(&b1) = lvl.free_cross(w).first() {
                    break 'p Some((b0, a3, b1, f0));
                }
            }
        }
        None
    };
    let (b0, a3, b1, f0) = plan.ok_or_else(|| b.no_choice(lvl, "rescue edge at the weak vertex"))?;
    let c0 = b.ind(lvl, k0, &f0, lvl.e)?;
    let h0 = open_cycle(&c0, b0, w).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    ring_of_paths(b, lvl, &r, h0, w, b0, b1, a3)
}

/// Weak vertex in K₁ with its split edges into K₂.
fn c1112(b: &mut Constructor, lvl: &Level, r: Ring, w: Vertex) -> Built {
    let (k0, k1, k2, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 1), lvl.comp(&r, 2), lvl.comp(&r, 3));
    let e = lvl.e;
    // X: K₀ vertices with a free split edge to a faulty neighbour of w.
    let mut xpairs: Vec<(Vertex, Vertex)> = Vec::new();
    for b1 in lvl.inner_faulty(w) {
        for x in lvl.free_cross(b1) {
            xpairs.push((x, b1));
        }
    }
    let xs: BTreeSet<Vertex> = xpairs.iter().map(|p| p.0).collect();
    let b2 = *lvl.free_cross(w).first().ok_or_else(|| b.no_choice(lvl, "split edge at the weak vertex"))?;
    let one_in_e = xs.len() == 1 && e.has(*xs.iter().next().unwrap());
    if one_in_e {
        b.mark(lvl, "1.1.1.2.1", &r);
        let (x, b1) = xpairs[0];
        let ew = lvl.edge(w, b1);
        let f1 = lvl.f.without(ew);
        let c0 = b.ind(lvl, k0, &lvl.f, e)?;
        let b0 = cycle_nbrs(&c0, x).into_iter().find(|&y| y != e.other(x)).unwrap();
        let a3 = *lvl.free_cross(b0).first().ok_or_else(|| b.no_choice(lvl, "split edge K0-K3"))?;
        let (a2, b3) = lvl.cross_pair(&r, 2, &[a3]).ok_or_else(|| b.no_choice(lvl, "split edge K2-K3"))?;
        let c1 = b.ind(lvl, k1, &f1, ew)?;
        let h1 = open_cycle(&c1, b1, w).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
        let h0 = open_cycle(&c0, b0, x).ok_or_else(|| missing(b, lvl, "cut edge"))?;
        let h2 = b.lace(lvl, k2, &lvl.f, b2, a2)?;
        let h3 = b.lace(lvl, k3, &lvl.f, b3, a3)?;
        return b.join(lvl, &[h0, h1, h2, h3], &[(x, b1), (w, b2), (a2, b3), (a3, b0)]);
    }
    // Prefer exits away from the prescribed edge.
    xpairs.sort_by_key(|&(x, b1)| (e.has(x), x, b1));
    let fc = lvl.cross_faults();
    let (h0, a0, b0, b1, a3) = if fc <= 3 {
        b.mark(lvl, "1.1.1.2.2(a)", &r);
        let c0 = b.ind(lvl, k0, &lvl.f, e)?;
        let plan = 'p: {
            for &(a0, b1) in &xpairs {
                if !b.ind_ready(k1, &lvl.f.without(lvl.edge(w, b1)), lvl.edge(w, b1)) {
                    continue;
                }
                for b0 in cycle_nbrs(&c0, a0) {
                    if e.joins(a0, b0) {
                        continue;
                    }
                    if let Some(&a3) = lvl.free_cross(b0).first() {
                        break 'p Some((a0, b0, b1, a3));
                    }
                }
            }
            None
        };
        let (a0, b0, b1, a3) = plan.ok_or_else(|| b.no_choice(lvl, "exit from K0"))?;
        (open_cycle(&c0, b0, a0).ok_or_else(|| missing(b, lvl, "cut edge"))?, a0, b0, b1, a3)
    } else {
        b.mark(lvl, "1.1.1.2.2(b)", &r);
        let plan = 'p: {
            for &(a0, b1) in &xpairs {
                if !b.ind_ready(k1, &lvl.f.without(lvl.edge(w, b1)), lvl.edge(w, b1)) {
                    continue;
                }
                for z in [e.u(), e.v()] {
                    if z == a0 {
                        continue;
                    }
                    let p = e.other(z);
                    for alpha in lvl.inner_free(&lvl.f, z) {
                        if alpha == p {
                            continue;
                        }
                        let t = force(lvl, &lvl.f, z, [p, alpha]);
                        for (b0, a3) in lvl.rescue(a0) {
                            let cut = lvl.edge(a0, b0);
                            if cut == e {
                                continue;
                            }
                            let f0 = t.without(cut);
                            if lvl.inner_free(&f0, z).len() != 2 || !b.ind_ready(k0, &f0, cut) {
                                continue;
                            }
                            break 'p Some((a0, b0, b1, a3, f0));
                        }
                    }
                }
            }
            None
        };
        let (a0, b0, b1, a3, f0) = plan.ok_or_else(|| b.no_choice(lvl, "forced cycle in K0"))?;
        let c0 = b.ind(lvl, k0, &f0, lvl.edge(a0, b0))?;
        if !on_cycle(&c0, e.u(), e.v()) {
            return Err(missing(b, lvl, "prescribed edge"));
        }
        (open_cycle(&c0, b0, a0).ok_or_else(|| missing(b, lvl, "cut edge"))?, a0, b0, b1, a3)
    };
    let ew = lvl.edge(w, b1);
    let (a2, b3) = lvl.cross_pair(&r, 2, &[a3]).ok_or_else(|| b.no_choice(lvl, "split edge K2-K3"))?;
    let c1 = b.ind(lvl, k1, &lvl.f.without(ew), ew)?;
    let h1 = open_cycle(&c1, b1, w).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let h2 = b.lace(lvl, k2, &lvl.f, b2, a2)?;
    let h3 = b.lace(lvl, k3, &lvl.f, b3, a3)?;
    b.join(lvl, &[h0, h1, h2, h3], &[(a0, b1), (w, b2), (a2, b3), (a3, b0)])
}

/// Weak vertex in K₃ with its split edges into K₀.
fn c1112m(b: &mut Constructor, lvl: &Level, r: Ring, w: Vertex) -> Built {
    let (k0, k1, k2, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 1), lvl.comp(&r, 2), lvl.comp(&r, 3));
    let e = lvl.e;
    b.mark(lvl, "1.1.1.2m(a)", &r);
    let plan3 = 'p: {
        for b3 in lvl.inner_faulty(w) {
            let ew = lvl.edge(w, b3);
            if !b.ind_ready(k3, &lvl.f.without(ew), ew) {
                continue;
            }
            if let Some(&a2) = lvl.free_cross(b3).first() {
                break 'p Some((b3, a2));
            }
        }
        None
    };
    let (b3, a2) = plan3.ok_or_else(|| b.no_choice(lvl, "rescue edge at the weak vertex"))?;
    let (a1, b2) = lvl.cross_pair(&r, 1, &[a2]).ok_or_else(|| b.no_choice(lvl, "split edge K1-K2"))?;
    let ys = lvl.free_cross(w);
    let c0 = b.ind(lvl, k0, &lvl.f, e)?;
    let plain = 'p: {
        for &y in &ys {
            for a0 in cycle_nbrs(&c0, y) {
                if e.joins(y, a0) {
                    continue;
                }
                if let Some(&b1) = lvl.free_cross(a0).first() {
                    break 'p Some((y, a0, b1));
                }
            }
        }
        None
    };
    let (h0, y, a0, b1) = match plain {
        Some((y, a0, b1)) => (open_cycle(&c0, y, a0).ok_or_else(|| missing(b, lvl, "cut edge"))?, y, a0, b1),
        None => {
            b.mark(lvl, "1.1.1.2m(b)", &r);
            let (y, a0, b1, f0, through) =
                forced_entry(b, lvl, &ys).ok_or_else(|| b.no_choice(lvl, "forced cycle in K0"))?;
            let c0 = b.ind(lvl, k0, &f0, through)?;
            if !on_cycle(&c0, e.u(), e.v()) || !on_cycle(&c0, y, a0) {
                return Err(missing(b, lvl, "forced edge"));
            }
            (open_cycle(&c0, y, a0).ok_or_else(|| missing(b, lvl, "cut edge"))?, y, a0, b1)
        }
    };
    let ew = lvl.edge(w, b3);
    let c3 = b.ind(lvl, k3, &lvl.f.without(ew), ew)?;
    let h3 = open_cycle(&c3, b3, w).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let h1 = b.lace(lvl, k1, &lvl.f, b1, a1)?;
    let h2 = b.lace(lvl, k2, &lvl.f, b2, a2)?;
    b.join(lvl, &[h0, h1, h2, h3], &[(a0, b1), (a1, b2), (a2, b3), (w, y)])
}

/// A K₀ fault set under which every cycle through the returned edge uses
/// both e and an edge (y, a₀) with y entering from the weak vertex and a₀
/// leaving for K₁. One vertex is pinned to two edges.
fn forced_entry(b: &Constructor, lvl: &Level, ys: &[Vertex]) -> Option<(Vertex, Vertex, Vertex, FaultSet, Edge)> {
    let e = lvl.e;
    let k0 = lvl.part_of(e.u());
    for &y in ys {
        for a0 in lvl.inner(y) {
            let ey = lvl.edge(y, a0);
            if ey == e {
                continue;
            }
            for b1 in lvl.free_cross(a0) {
                // Pin y, then a₀, then an end of e.
                let mut options: Vec<(FaultSet, Edge, Vertex)> = Vec::new();
                for z in [y, a0] {
                    let partner = if z == y { a0 } else { y };
                    let keepers: Vec<Vertex> = if e.has(z) {
                        vec![e.other(z)]
                    } else {
                        lvl.inner_free(&lvl.f, z).into_iter().filter(|&x| x != partner).collect()
                    };
                    for keep in keepers {
                        options.push((force(lvl, &lvl.f, z, [partner, keep]).without(ey), e, z));
                    }
                }
                for z in [e.u(), e.v()] {
                    if z == y || z == a0 {
                        continue;
                    }
                    for keep in lvl.inner_free(&lvl.f, z) {
                        if keep != e.other(z) {
                            options.push((force(lvl, &lvl.f, z, [e.other(z), keep]).without(ey), ey, z));
                        }
                    }
                }
                for (f0, through, z) in options {
                    if lvl.inner_free(&f0, z).len() == 2 && b.ind_ready(k0, &f0, through) {
                        return Some((y, a0, b1, f0, through));
                    }
                }
            }
        }
    }
    None
}

fn c1113(b: &mut Constructor, lvl: &Level, r: Ring, w: Vertex) -> Built {
    b.mark(lvl, "1.1.1.3", &r);
    let (k0, k1, k2, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 1), lvl.comp(&r, 2), lvl.comp(&r, 3));
    let plan = 'p: {
        for b2 in lvl.inner_faulty(w) {
            let ew = lvl.edge(w, b2);
            if !b.ind_ready(k2, &lvl.f.without(ew), ew) {
                continue;
            }
            if let Some(&a1) = lvl.free_cross(b2).first() {
                break 'p Some((b2, a1));
            }
        }
        None
    };
    let (b2, a1) = plan.ok_or_else(|| b.no_choice(lvl, "rescue edge at the weak vertex"))?;
    let b3 = *lvl.free_cross(w).first().ok_or_else(|| b.no_choice(lvl, "split edge at the weak vertex"))?;
    let c0 = b.ind(lvl, k0, &lvl.f, lvl.e)?;
    let (x, y, b1, a3) = cut_candidates(lvl, &r, &c0)
        .into_iter()
        .find(|&(_, _, b1, a3)| b1 != a1 && a3 != b3)
        .ok_or_else(|| b.no_choice(lvl, "cut edge in K0"))?;
    let h0 = open_cycle(&c0, y, x).ok_or_else(|| missing(b, lvl, "cut edge"))?;
    let ew = lvl.edge(w, b2);
    let c2 = b.ind(lvl, k2, &lvl.f.without(ew), ew)?;
    let h2 = open_cycle(&c2, b2, w).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let h1 = b.lace(lvl, k1, &lvl.f, b1, a1)?;
    let h3 = b.lace(lvl, k3, &lvl.f, b3, a3)?;
    b.join(lvl, &[h0, h1, h2, h3], &[(x, b1), (a1, b2), (w, b3), (a3, y)])
}

fn c112(b: &mut Constructor, lvl: &Level) -> Built {
    let budget = 2 * lvl.k - 4;
    let r = [Color::White, Color::Black]
        .into_iter()
        .map(|c| lvl.ring(lvl.e.u(), c))
        .find(|r| lvl.load(lvl.comp(r, 1)) <= budget)
        .unwrap_or_else(|| lvl.ring(lvl.e.u(), Color::White));
    b.mark(lvl, "1.1.2", &r);
    let (k0, k1, k2, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 1), lvl.comp(&r, 2), lvl.comp(&r, 3));
    let c0 = b.ind(lvl, k0, &lvl.f, lvl.e)?;
    let plan = 'p: {
        for (x, y, b1, a3) in cut_candidates(lvl, &r, &c0) {
            for (b3, a2) in lvl.rescue(a3) {
                let e3 = lvl.edge(a3, b3);
                if !b.ind_ready(k3, &lvl.f.without(e3), e3) {
                    continue;
                }
                for (b2, a1) in lvl.rescue(a2) {
                    let e2 = lvl.edge(a2, b2);
                    if a1 != b1 && b.ind_ready(k2, &lvl.f.without(e2), e2) {
                        break 'p Some((x, y, b1, a1, b2, a2, b3, a3));
                    }
                }
            }
        }
        None
    };
    let (x, y, b1, a1, b2, a2, b3, a3) = plan.ok_or_else(|| b.no_choice(lvl, "rescue chain K3-K2-K1"))?;
    let h0 = open_cycle(&c0, y, x).ok_or_else(|| missing(b, lvl, "cut edge"))?;
    let h1 = b.lace(lvl, k1, &lvl.f, b1, a1)?;
    let e2 = lvl.edge(a2, b2);
    let c2 = b.ind(lvl, k2, &lvl.f.without(e2), e2)?;
    let h2 = open_cycle(&c2, b2, a2).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let e3 = lvl.edge(a3, b3);
    let c3 = b.ind(lvl, k3, &lvl.f.without(e3), e3)?;
    let h3 = open_cycle(&c3, b3, a3).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    b.join(lvl, &[h0, h1, h2, h3], &[(x, b1), (a1, b2), (a2, b3), (a3, y)])
}

fn c121(b: &mut Constructor, lvl: &Level) -> Built {
    let r = lvl.ring(lvl.e.u(), Color::White);
    b.mark(lvl, "1.2.1", &r);
    let k0 = lvl.comp(&r, 0);
    let ev = lvl
        .virtual_candidates(k0)
        .into_iter()
        .find(|&ev| b.ind_ready(k0, &lvl.f.without(ev), lvl.e))
        .ok_or_else(|| b.no_choice(lvl, "virtual edge in K0"))?;
    let c0 = b.ind(lvl, k0, &lvl.f.without(ev), lvl.e)?;
    let used = on_cycle(&c0, ev.u(), ev.v()).then_some(ev);
    finish_heavy0(b, lvl, "1.2.1", c0, used)
}

/// K₀'s cycle is known; cut it at `cut` (or at a suitable edge) and go
/// once around the other three components.
fn finish_heavy0(b: &mut Constructor, lvl: &Level, label: &'static str, c0: Vec<Vertex>, cut: Option<Edge>) -> Built {
    let r = lvl.ring(lvl.e.u(), Color::White);
    b.mark(lvl, label, &r);
    let (a0, b0, b1, a3) = match cut {
        Some(ev) => {
            let (a0, b0) = oriented(&r, ev);
            let b1 = lvl.free_cross(a0).first().copied();
            let a3 = lvl.free_cross(b0).first().copied();
            match (b1, a3) {
                (Some(b1), Some(a3)) => (a0, b0, b1, a3),
                _ => return Err(b.no_choice(lvl, "split edges at the virtual edge")),
            }
        }
        None => *cut_candidates(lvl, &r, &c0).first().ok_or_else(|| b.no_choice(lvl, "cut edge in K0"))?,
    };
    let h0 = open_cycle(&c0, b0, a0).ok_or_else(|| missing(b, lvl, "cut edge"))?;
    ring_of_paths(b, lvl, &r, h0, a0, b0, b1, a3)
}

fn c122(b: &mut Constructor, lvl: &Level, r: Ring) -> Built {
    b.mark(lvl, "1.2.2", &r);
    let k1 = lvl.comp(&r, 1);
    let ev = lvl
        .virtual_candidates(k1)
        .into_iter()
        .find(|&ev| b.ind_ready(k1, &lvl.f.without(ev), ev))
        .ok_or_else(|| b.no_choice(lvl, "virtual edge in K1"))?;
    let c1 = b.ind(lvl, k1, &lvl.f.without(ev), ev)?;
    finish_heavy1(b, lvl, r, "1.2.2", c1, ev)
}

/// K₁'s cycle through the virtual edge `ev` is known. K₀ is pinned at the
/// vertex that receives ev's entry end so its cycle exits there.
fn finish_heavy1(b: &mut Constructor, lvl: &Level, r: Ring, label: &'static str, c1: Vec<Vertex>, ev: Edge) -> Built {
    b.mark(lvl, label, &r);
    let (k0, k2, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 2), lvl.comp(&r, 3));
    let e = lvl.e;
    let (a1, b1) = oriented(&r, ev);
    let h1 = open_cycle(&c1, b1, a1).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let plan = 'p: {
        for a0 in lvl.free_cross(b1) {
            for b2 in lvl.free_cross(a1) {
                for b0 in lvl.inner_free(&lvl.f, a0) {
                    if e.joins(a0, b0) {
                        continue;
                    }
                    let seconds = if e.has(a0) { vec![e.other(a0)] } else { lvl.inner_free(&lvl.f, a0) };
                    for d0 in seconds {
                        if d0 == b0 {
                            continue;
                        }
                        let f0 = force(lvl, &lvl.f, a0, [b0, d0]);
                        if !b.ind_ready(k0, &f0, e) {
                            continue;
                        }
                        for a3 in lvl.free_cross(b0) {
                            if let Some((a2, b3)) = lvl.cross_pair(&r, 2, &[b2, a3]) {
                                break 'p Some((a0, b0, f0, b2, a2, b3, a3));
                            }
                        }
                    }
                }
            }
        }
        None
    };
    let (a0, b0, f0, b2, a2, b3, a3) = plan.ok_or_else(|| b.no_choice(lvl, "pinned exit in K0"))?;
    let c0 = b.ind(lvl, k0, &f0, e)?;
    let h0 = open_cycle(&c0, b0, a0).ok_or_else(|| missing(b, lvl, "pinned edge"))?;
    let h2 = b.lace(lvl, k2, &lvl.f, b2, a2)?;
    let h3 = b.lace(lvl, k3, &lvl.f, b3, a3)?;
    b.join(lvl, &[h0, h1, h2, h3], &[(a0, b1), (a1, b2), (a2, b3), (a3, b0)])
}

fn c123(b: &mut Constructor, lvl: &Level) -> Built {
    let r = lvl.ring(lvl.e.u(), Color::White);
    b.mark(lvl, "1.2.3", &r);
    let k2 = lvl.comp(&r, 2);
    let ev = lvl
        .virtual_candidates(k2)
        .into_iter()
        .find(|&ev| b.ind_ready(k2, &lvl.f.without(ev), ev))
        .ok_or_else(|| b.no_choice(lvl, "virtual edge in K2"))?;
    let c2 = b.ind(lvl, k2, &lvl.f.without(ev), ev)?;
    finish_heavy2(b, lvl, r, "1.2.3", c2, ev)
}

/// K₂'s cycle through the virtual edge `ev` is known.
fn finish_heavy2(b: &mut Constructor, lvl: &Level, r: Ring, label: &'static str, c2: Vec<Vertex>, ev: Edge) -> Built {
    b.mark(lvl, label, &r);
    let (k0, k1, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 1), lvl.comp(&r, 3));
    let (a2, b2) = oriented(&r, ev);
    let h2 = open_cycle(&c2, b2, a2).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let b3 = *lvl.free_cross(a2).first().ok_or_else(|| b.no_choice(lvl, "split edge K2-K3"))?;
    let a1 = *lvl.free_cross(b2).first().ok_or_else(|| b.no_choice(lvl, "split edge K1-K2"))?;
    let c0 = b.ind(lvl, k0, &lvl.f, lvl.e)?;
    let (x, y, b1, a3) = cut_candidates(lvl, &r, &c0)
        .into_iter()
        .find(|&(_, _, b1, a3)| b1 != a1 && a3 != b3)
        .ok_or_else(|| b.no_choice(lvl, "cut edge in K0"))?;
    let h0 = open_cycle(&c0, y, x).ok_or_else(|| missing(b, lvl, "cut edge"))?;
    let h1 = b.lace(lvl, k1, &lvl.f, b1, a1)?;
    let h3 = b.lace(lvl, k3, &lvl.f, b3, a3)?;
    b.join(lvl, &[h0, h1, h2, h3], &[(x, b1), (a1, b2), (a2, b3), (a3, y)])
}

/// Picks the first pair of virtual edges in `part` the induction accepts
/// with `through` (or the first of the pair when `through` is `None`).
fn virtual_pair(
    b: &Constructor,
    lvl: &Level,
    part: &crate::topology::SubCube,
    through: Option<Edge>,
) -> Option<(Edge, Edge, FaultSet)> {
    disjoint_fault_pairs(lvl, part).into_iter().find_map(|(x, y)| {
        let f = lvl.f.without(x).without(y);
        b.ind_ready(part, &f, through.unwrap_or(x)).then_some((x, y, f))
    })
}

fn c1311(b: &mut Constructor, lvl: &Level) -> Built {
    let r = lvl.ring(lvl.e.u(), Color::White);
    b.mark(lvl, "1.3.1.1", &r);
    let k0 = lvl.comp(&r, 0);
    let (ev1, ev2, f0) =
        virtual_pair(b, lvl, k0, Some(lvl.e)).ok_or_else(|| b.no_choice(lvl, "virtual edge pair in K0"))?;
    let c0 = b.ind(lvl, k0, &f0, lvl.e)?;
    let used: Vec<Edge> = [ev1, ev2].into_iter().filter(|x| on_cycle(&c0, x.u(), x.v())).collect();
    if used.len() <= 1 {
        b.note(lvl, "at most one virtual edge used; finished as 1.2.1".into());
        return finish_heavy0(b, lvl, "1.3.1.1", c0, used.first().copied());
    }
    let pieces = cut_cycle(&c0, &[ev1.endpoints(), ev2.endpoints()]).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let (a0, b0) = oriented(&r, ev1);
    let (c0v, d0) = oriented(&r, ev2);
    let plan = 'p: {
        for (b1, d1) in distinct_pair(&lvl.free_cross(a0), &lvl.free_cross(c0v)) {
            for (a3, c3) in distinct_pair(&lvl.free_cross(b0), &lvl.free_cross(d0)) {
                let Some([p1, q1]) = two_pairs(lvl, &r, 1, &[]) else { continue };
                let Some([p2, q2]) = two_pairs(lvl, &r, 2, &[]) else { continue };
                let doubles = [
                    Double { part: lvl.comp(&r, 1), entries: [b1, d1], exits: [p1.0, q1.0] },
                    Double { part: lvl.comp(&r, 2), entries: [p1.1, q1.1], exits: [p2.0, q2.0] },
                    Double { part: lvl.comp(&r, 3), entries: [p2.1, q2.1], exits: [a3, c3] },
                ];
                let links = vec![(a0, b1), (c0v, d1), p1, q1, p2, q2, (a3, b0), (c3, d0)];
                if let Some(chosen) = choose_pairings(&seg_ends(&pieces), &doubles, &links) {
                    break 'p Some((doubles, chosen, links));
                }
            }
        }
        None
    };
    let (doubles, chosen, links) = plan.ok_or_else(|| b.no_choice(lvl, "disjoint split edges"))?;
    let mut segs = pieces;
    segs.extend(realize(b, lvl, &doubles, &chosen)?);
    b.join(lvl, &segs, &links)
}

fn c1312(b: &mut Constructor, lvl: &Level, r: Ring) -> Built {
    b.mark(lvl, "1.3.1.2", &r);
    let e = lvl.e;
    let (k0, k1) = (lvl.comp(&r, 0), lvl.comp(&r, 1));
    let (ev1, ev2, f1) = virtual_pair(b, lvl, k1, None).ok_or_else(|| b.no_choice(lvl, "virtual edge pair in K1"))?;
    let c1 = b.ind(lvl, k1, &f1, ev1)?;
    if !on_cycle(&c1, ev2.u(), ev2.v()) {
        b.note(lvl, "second virtual edge unused; finished as 1.2.2".into());
        return finish_heavy1(b, lvl, r, "1.3.1.2", c1, ev1);
    }
    let pieces1 = cut_cycle(&c1, &[ev1.endpoints(), ev2.endpoints()]).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let (a1, b1) = oriented(&r, ev1);
    let (c1v, d1) = oriented(&r, ev2);
    let entry = distinct_pair(&lvl.free_cross(b1), &lvl.free_cross(d1))
        .into_iter()
        .next()
        .zip(distinct_pair(&lvl.free_cross(a1), &lvl.free_cross(c1v)).into_iter().next())
        .map(|((a0, c0v), (b2, d2))| (a0, c0v, b2, d2));
    let (a0, c0v, b2, d2) = entry.ok_or_else(|| b.no_choice(lvl, "disjoint split edges at K1"))?;
    // Keep a K₀ cycle from running a0 or c0 into vertices without free
    // split edges.
    let pin = if e.has(c0v) { a0 } else { c0v };
    let blocked: Vec<Vertex> = k0.vertices().iter().copied().filter(|&x| lvl.free_cross(x).is_empty()).collect();
    let mut f0 = lvl.f.clone();
    if let Some(&x0) = blocked.first() {
        for z in [a0, c0v] {
            if lvl.t.is_adjacent(z, x0) && k0.has_edge(lvl.edge(z, x0)) && !e.joins(z, x0) {
                f0.insert(lvl.edge(z, x0));
            }
        }
    } else {
        for alpha in lvl.inner(pin) {
            if lvl.free_cross(alpha).len() < 2 && !e.joins(pin, alpha) {
                f0.insert(lvl.edge(pin, alpha));
            }
        }
    }
    if !b.ind_ready(k0, &f0, e) {
        b.note(lvl, "extra K0 faults break the induction hypothesis; dropped".into());
        f0 = lvl.f.clone();
    }
    let c0 = b.ind(lvl, k0, &f0, e)?;
    let plan = 'p: {
        for b0 in cycle_nbrs(&c0, a0) {
            for d0 in cycle_nbrs(&c0, c0v) {
                if b0 == d0 || e.joins(a0, b0) || e.joins(c0v, d0) {
                    continue;
                }
                let Some(pieces0) = cut_cycle(&c0, &[(a0, b0), (c0v, d0)]) else { continue };
                for (a3, c3) in distinct_pair(&lvl.free_cross(b0), &lvl.free_cross(d0)) {
                    let Some([p2, q2]) = two_pairs(lvl, &r, 2, &[]) else { continue };
                    let doubles = [
                        Double { part: lvl.comp(&r, 2), entries: [b2, d2], exits: [p2.0, q2.0] },
                        Double { part: lvl.comp(&r, 3), entries: [p2.1, q2.1], exits: [a3, c3] },
                    ];
                    let links = vec![(a0, b1), (c0v, d1), (a1, b2), (c1v, d2), p2, q2, (a3, b0), (c3, d0)];
                    let mut fixed = seg_ends(&pieces0);
                    fixed.extend(seg_ends(&pieces1));
                    if let Some(chosen) = choose_pairings(&fixed, &doubles, &links) {
                        break 'p Some((pieces0, doubles, chosen, links));
                    }
                }
            }
        }
        None
    };
    let (pieces0, doubles, chosen, links) = plan.ok_or_else(|| b.no_choice(lvl, "cut edges in K0"))?;
    let mut segs = pieces0;
    segs.extend(pieces1);
    segs.extend(realize(b, lvl, &doubles, &chosen)?);
    b.join(lvl, &segs, &links)
}

fn c1313(b: &mut Constructor, lvl: &Level) -> Built {
    let r = lvl.ring(lvl.e.u(), Color::White);
    b.mark(lvl, "1.3.1.3", &r);
    let e = lvl.e;
    let (k0, k2) = (lvl.comp(&r, 0), lvl.comp(&r, 2));
    let (ev1, ev2, f2) = virtual_pair(b, lvl, k2, None).ok_or_else(|| b.no_choice(lvl, "virtual edge pair in K2"))?;
    let c2 = b.ind(lvl, k2, &f2, ev1)?;
    if !on_cycle(&c2, ev2.u(), ev2.v()) {
        b.note(lvl, "second virtual edge unused; finished as 1.2.3".into());
        return finish_heavy2(b, lvl, r, "1.3.1.3", c2, ev1);
    }
    let pieces2 = cut_cycle(&c2, &[ev1.endpoints(), ev2.endpoints()]).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let (a2, b2) = oriented(&r, ev1);
    let (c2v, d2) = oriented(&r, ev2);
    let ends = distinct_pair(&lvl.free_cross(b2), &lvl.free_cross(d2))
        .into_iter()
        .next()
        .zip(distinct_pair(&lvl.free_cross(a2), &lvl.free_cross(c2v)).into_iter().next())
        .map(|((a1, c1), (b3, d3))| (a1, c1, b3, d3));
    let (a1, c1, b3, d3) = ends.ok_or_else(|| b.no_choice(lvl, "disjoint split edges at K2"))?;
    let c0 = b.ind(lvl, k0, &lvl.f, e)?;
    let cuts = cut_candidates(lvl, &r, &c0);
    let plan = 'p: {
        for (i, &(x0, y0, b1, a3)) in cuts.iter().enumerate() {
            for &(z0, w0, d1, c3) in &cuts[i + 1..] {
                if [x0, y0].contains(&z0) || [x0, y0].contains(&w0) || b1 == d1 || a3 == c3 {
                    continue;
                }
                let Some(pieces0) = cut_cycle(&c0, &[(x0, y0), (z0, w0)]) else { continue };
                let doubles = [
                    Double { part: lvl.comp(&r, 1), entries: [b1, d1], exits: [a1, c1] },
                    Double { part: lvl.comp(&r, 3), entries: [b3, d3], exits: [a3, c3] },
                ];
                let links = vec![(x0, b1), (z0, d1), (a1, b2), (c1, d2), (a2, b3), (c2v, d3), (a3, y0), (c3, w0)];
                let mut fixed = seg_ends(&pieces0);
                fixed.extend(seg_ends(&pieces2));
                if let Some(chosen) = choose_pairings(&fixed, &doubles, &links) {
                    break 'p Some((pieces0, doubles, chosen, links));
                }
            }
        }
        None
    };
    let (pieces0, doubles, chosen, links) = plan.ok_or_else(|| b.no_choice(lvl, "cut edges in K0"))?;
    let mut segs = pieces0;
    segs.extend(pieces2);
    segs.extend(realize(b, lvl, &doubles, &chosen)?);
    b.join(lvl, &segs, &links)
}

/// Pairs of faulty edges at the weak vertex whose far ends reach two
/// different vertices by free split edges.
fn weak_pairs(lvl: &Level, w: Vertex) -> Vec<(Vertex, Vertex)> {
    let nbs: Vec<Vertex> = lvl.inner_faulty(w).into_iter().filter(|&x| !lvl.free_cross(x).is_empty()).collect();
    let mut out = Vec::new();
    for (i, &x) in nbs.iter().enumerate() {
        for &y in &nbs[i + 1..] {
            if !distinct_pair(&lvl.free_cross(x), &lvl.free_cross(y)).is_empty() {
                out.push((x, y));
            }
        }
    }
    out
}

fn c132(b: &mut Constructor, lvl: &Level, w: Vertex) -> Built {
    let r = lvl.ring(lvl.e.u(), w.color());
    if lvl.offset(&r, w) == 0 {
        c1321(b, lvl, r, w)
    } else {
        c1322(b, lvl, w)
    }
}

fn c1321(b: &mut Constructor, lvl: &Level, r: Ring, w: Vertex) -> Built {
    b.mark(lvl, "1.3.2.1", &r);
    let e = lvl.e;
    let k0 = lvl.comp(&r, 0);
    let (b0, d0, f0) = weak_pairs(lvl, w)
        .into_iter()
        .find_map(|(x, y)| {
            let f0 = lvl.f.without(lvl.edge(w, x)).without(lvl.edge(w, y));
            b.ind_ready(k0, &f0, e).then_some((x, y, f0))
        })
        .ok_or_else(|| b.no_choice(lvl, "virtual edges at the weak vertex"))?;
    let c0 = b.ind(lvl, k0, &f0, e)?;
    let used: Vec<Edge> = [b0, d0].into_iter().filter(|&x| on_cycle(&c0, w, x)).map(|x| lvl.edge(w, x)).collect();
    if used.len() <= 1 {
        b.note(lvl, "at most one virtual edge used; finished as 1.2.1".into());
        return finish_heavy0(b, lvl, "1.3.2.1", c0, used.first().copied());
    }
    let wc = lvl.free_cross(w);
    let (p1, q1) = match two_pairs(lvl, &r, 1, &[]) {
        Some([p, q]) => (p, q),
        None => return Err(b.no_choice(lvl, "split edges K1-K2")),
    };
    let (p2, q2) = match two_pairs(lvl, &r, 2, &[]) {
        Some([p, q]) => (p, q),
        None => return Err(b.no_choice(lvl, "split edges K2-K3")),
    };
    if wc.len() >= 2 {
        b.note(lvl, "(a) two free split edges at the weak vertex".into());
        let pieces = cut_cycle(&c0, &[(b0, w), (w, d0)]).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
        let plan = 'p: {
            for (a3, c3) in distinct_pair(&lvl.free_cross(b0), &lvl.free_cross(d0)) {
                let doubles = [
                    Double { part: lvl.comp(&r, 1), entries: [wc[0], wc[1]], exits: [p1.0, q1.0] },
                    Double { part: lvl.comp(&r, 2), entries: [p1.1, q1.1], exits: [p2.0, q2.0] },
                    Double { part: lvl.comp(&r, 3), entries: [p2.1, q2.1], exits: [a3, c3] },
                ];
                let links = vec![(w, wc[0]), (w, wc[1]), p1, q1, p2, q2, (a3, b0), (c3, d0)];
                if let Some(chosen) = choose_pairings(&seg_ends(&pieces), &doubles, &links) {
                    break 'p Some((doubles, chosen, links));
                }
            }
            None
        };
        let (doubles, chosen, links) = plan.ok_or_else(|| b.no_choice(lvl, "strand pairing"))?;
        let mut segs = pieces;
        segs.extend(realize(b, lvl, &doubles, &chosen)?);
        return b.join(lvl, &segs, &links);
    }
    b.note(lvl, "(b) one free split edge at the weak vertex".into());
    let b1 = wc[0];
    let beta = *lvl.inner_free(&lvl.f, w).first().ok_or_else(|| b.no_choice(lvl, "free edge at the weak vertex"))?;
    for gamma in cycle_nbrs(&c0, beta) {
        if e.joins(beta, gamma) {
            continue;
        }
        let Some(pieces) = cut_cycle(&c0, &[(b0, w), (w, d0), (beta, gamma)]) else { continue };
        for (a3, c3) in distinct_pair(&lvl.free_cross(b0), &lvl.free_cross(d0)) {
            let gc: Vec<Vertex> = lvl.free_cross(gamma).into_iter().filter(|&x| x != b1).collect();
            if let Some(&d1) = gc.first() {
                let doubles = [
                    Double { part: lvl.comp(&r, 1), entries: [b1, d1], exits: [p1.0, q1.0] },
                    Double { part: lvl.comp(&r, 2), entries: [p1.1, q1.1], exits: [p2.0, q2.0] },
                    Double { part: lvl.comp(&r, 3), entries: [p2.1, q2.1], exits: [a3, c3] },
                ];
                let links = vec![(beta, w), (w, b1), (gamma, d1), p1, q1, p2, q2, (a3, b0), (c3, d0)];
                if let Some(chosen) = choose_pairings(&seg_ends(&pieces), &doubles, &links) {
                    let mut segs = pieces;
                    segs.extend(realize(b, lvl, &doubles, &chosen)?);
                    return b.join(lvl, &segs, &links);
                }
            } else if lvl.free_cross(gamma).contains(&b1) {
                // b¹ is entered from w and left towards γ; K₁ − b¹ is one path.
                let doubles = [
                    Double { part: lvl.comp(&r, 2), entries: [p1.1, q1.1], exits: [p2.0, q2.0] },
                    Double { part: lvl.comp(&r, 3), entries: [p2.1, q2.1], exits: [a3, c3] },
                ];
                let links = vec![(beta, w), (w, b1), (b1, gamma), p1, q1, p2, q2, (a3, b0), (c3, d0)];
                let mut fixed = seg_ends(&pieces);
                fixed.push((b1, b1));
                fixed.push((p1.0, q1.0));
                if let Some(chosen) = choose_pairings(&fixed, &doubles, &links) {
                    b.note(lvl, "K1 entered and left at one vertex".into());
                    let h1 = b.avoiding(lvl, lvl.comp(&r, 1), b1, p1.0, q1.0)?;
                    let mut segs = pieces;
                    segs.push(vec![b1]);
                    segs.push(h1);
                    segs.extend(realize(b, lvl, &doubles, &chosen)?);
                    return b.join(lvl, &segs, &links);
                }
            }
        }
    }
    Err(b.no_choice(lvl, "detour around the weak vertex"))
}

fn c1322(b: &mut Constructor, lvl: &Level, w: Vertex) -> Built {
    let ki = lvl.part_of(w);
    let white = lvl.ring(lvl.e.u(), Color::White);
    b.mark(lvl, "1.3.2.2", &white);
    let beta = *lvl.inner_free(&lvl.f, w).first().ok_or_else(|| b.no_choice(lvl, "free edge at the weak vertex"))?;
    let eb = lvl.edge(w, beta);
    let (bi, di, fi) = weak_pairs(lvl, w)
        .into_iter()
        .find_map(|(x, y)| {
            let f = lvl.f.without(lvl.edge(w, x)).without(lvl.edge(w, y));
            b.ind_ready(ki, &f, eb).then_some((x, y, f))
        })
        .ok_or_else(|| b.no_choice(lvl, "virtual edges at the weak vertex"))?;
    let ci = b.ind(lvl, ki, &fi, eb)?;
    let other = [bi, di].into_iter().find(|&x| on_cycle(&ci, w, x)).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let ev = lvl.edge(w, other);
    if white.offset(lvl.label(w)) == 2 {
        b.note(lvl, "finished as 1.2.3".into());
        finish_heavy2(b, lvl, white, "1.3.2.2", ci, ev)
    } else {
        b.note(lvl, "finished as 1.2.2".into());
        finish_heavy1(b, lvl, heavy_at_one(lvl, lvl.label(w)), "1.3.2.2", ci, ev)
    }
}
