//! The prescribed edge lies on the split dimension. Its end `u` is in K₀
//! and the other end `v` in K₁.

use crate::topology::{Edge, Vertex};

use super::level::{cut_cycle, cycle_nbrs, on_cycle, open_cycle, Level, Ring};
use super::shared::{choose_pairings, oriented, realize, seg_ends, two_pairs, Double};
use super::{Built, ConstructError, Constructor};

pub(super) fn run(b: &mut Constructor, lvl: &Level) -> Built {
    let k = lvl.k;
    let (p, q) = (lvl.e.u(), lvl.e.v());
    let rp = lvl.ring(p, p.color());
    let loads = lvl.loads(&rp);
    let max = *loads.iter().max().unwrap();
    if max <= 4 * k - 9 {
        let u = if loads[0] <= 2 * k - 4 { p } else { q };
        c21(b, lvl, u)
    } else if max == 4 * k - 8 {
        match loads.iter().position(|&l| l == max).unwrap() {
            0 => c221(b, lvl, p),
            1 => c221(b, lvl, q),
            2 => c222(b, lvl, p),
            _ => c222(b, lvl, q),
        }
    } else {
        Err(b.fail(lvl.entry, format!("component loads {loads:?} exceed 4k-8 with the edge on the split")))
    }
}

fn missing(b: &Constructor, lvl: &Level, what: &str) -> ConstructError {
    b.fail(lvl.entry, format!("{what} is not on the component cycle"))
}

fn setup(lvl: &Level, u: Vertex) -> (Ring, Vertex) {
    (lvl.ring(u, u.color()), lvl.e.other(u))
}

fn c21(b: &mut Constructor, lvl: &Level, u: Vertex) -> Built {
    let (r, v) = setup(lvl, u);
    b.mark(lvl, "2.1", &r);
    let (k0, k1, k2, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 1), lvl.comp(&r, 2), lvl.comp(&r, 3));
    let ready = |b: &Constructor, part, x: Vertex, y: Vertex| {
        let ev = lvl.edge(x, y);
        b.ind_ready(part, &lvl.f.without(ev), ev)
    };
    let plan = 'p: {
        for (a1, b2) in lvl.rescue(v) {
            if !ready(b, k1, v, a1) {
                continue;
            }
            for (a2, b3) in lvl.rescue(b2) {
                if !ready(b, k2, b2, a2) {
                    continue;
                }
                for (a3, b0) in lvl.rescue(b3) {
                    if b0 != u && ready(b, k3, b3, a3) {
                        break 'p Some((a1, b2, a2, b3, a3, b0));
                    }
                }
            }
        }
        None
    };
    let (a1, b2, a2, b3, a3, b0) = plan.ok_or_else(|| b.no_choice(lvl, "rescue chain K1-K2-K3"))?;
    let h0 = b.lace(lvl, k0, &lvl.f, b0, u)?;
    let mut segs = vec![h0];
    for (part, s, t) in [(k1, v, a1), (k2, b2, a2), (k3, b3, a3)] {
        let ev = lvl.edge(s, t);
        let c = b.ind(lvl, part, &lvl.f.without(ev), ev)?;
        segs.push(open_cycle(&c, s, t).ok_or_else(|| missing(b, lvl, "virtual edge"))?);
    }
    b.join(lvl, &segs, &[(u, v), (a1, b2), (a2, b3), (a3, b0)])
}

/// Laceable paths through K₁, K₂, K₃ entered at `v` and left at `a3`.
fn around(
    b: &mut Constructor,
    lvl: &Level,
    r: &Ring,
    v: Vertex,
    a3: Vertex,
) -> Result<Vec<Vec<Vertex>>, ConstructError> {
    let (a1, b2) = lvl.cross_pair(r, 1, &[v]).ok_or_else(|| b.no_choice(lvl, "split edge K1-K2"))?;
    let (a2, b3) = lvl.cross_pair(r, 2, &[a3]).ok_or_else(|| b.no_choice(lvl, "split edge K2-K3"))?;
    Ok(vec![
        b.lace(lvl, lvl.comp(r, 1), &lvl.f, v, a1)?,
        b.lace(lvl, lvl.comp(r, 2), &lvl.f, b2, a2)?,
        b.lace(lvl, lvl.comp(r, 3), &lvl.f, b3, a3)?,
    ])
}

fn around_links(lvl: &Level, r: &Ring, u: Vertex, v: Vertex, b0: Vertex, a3: Vertex) -> Vec<(Vertex, Vertex)> {
    let (a1, b2) = lvl.cross_pair(r, 1, &[v]).unwrap();
    let (a2, b3) = lvl.cross_pair(r, 2, &[a3]).unwrap();
    vec![(u, v), (a1, b2), (a2, b3), (a3, b0)]
}

/// K₀ carries 4k−8 faults; one of them is restored for the recursion.
fn c221(b: &mut Constructor, lvl: &Level, u: Vertex) -> Built {
    let (r, v) = setup(lvl, u);
    let k0 = lvl.comp(&r, 0);
    b.mark(lvl, "2.2.1.1", &r);
    let direct = 'p: {
        for b0 in lvl.inner_faulty(u) {
            let eu = lvl.edge(u, b0);
            if !b.ind_ready(k0, &lvl.f.without(eu), eu) {
                continue;
            }
            if let Some(&a3) = lvl.free_cross(b0).first() {
                break 'p Some((b0, a3));
            }
        }
        None
    };
    if let Some((b0, a3)) = direct {
        let eu = lvl.edge(u, b0);
        let c0 = b.ind(lvl, k0, &lvl.f.without(eu), eu)?;
        let h0 = open_cycle(&c0, b0, u).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
        let mut segs = vec![h0];
        segs.extend(around(b, lvl, &r, v, a3)?);
        return b.join(lvl, &segs, &around_links(lvl, &r, u, v, b0, a3));
    }
    // Restore a fault away from u and cut the K₀ cycle twice.
    let faults: Vec<Edge> = lvl.f.edges_in(k0).into_iter().filter(|x| !x.has(u)).collect();
    for &ev in &faults {
        let f0 = lvl.f.without(ev);
        let (c0v, d0) = oriented(&r, ev);
        let d1s: Vec<Vertex> = lvl.free_cross(c0v).into_iter().filter(|&x| x != v).collect();
        if d1s.is_empty() {
            if lvl.free_cross(c0v) == [v] {
                if let Some(c) = c2212(b, lvl, &r, u, ev, &f0)? {
                    return Ok(c);
                }
            }
            continue;
        }
        if let Some(c) = c2211a(b, lvl, &r, u, ev, &f0, &d1s)? {
            return Ok(c);
        }
        if lvl.free_cross(d0).is_empty() {
            if let Some(c) = c2211b(b, lvl, &r, u, ev, &f0, &d1s)? {
                return Ok(c);
            }
        }
    }
    Err(b.no_choice(lvl, "restorable fault in K0"))
}

type Try = Result<Option<Vec<Vertex>>, ConstructError>;
type Plan<'a> = (Vec<Double<'a>>, Vec<(Vertex, Vertex)>);

/// Doubles for K₁ entered at `v` and `d1`, K₂, and K₃ left at `a3`, `c3`.
fn doubles<'a>(lvl: &'a Level, r: &Ring, k1_entries: [Vertex; 2], k3_exits: [Vertex; 2]) -> Option<Plan<'a>> {
    let [p1, q1] = two_pairs(lvl, r, 1, &[])?;
    let [p2, q2] = two_pairs(lvl, r, 2, &[])?;
    let ds = vec![
        Double { part: lvl.comp(r, 1), entries: k1_entries, exits: [p1.0, q1.0] },
        Double { part: lvl.comp(r, 2), entries: [p1.1, q1.1], exits: [p2.0, q2.0] },
        Double { part: lvl.comp(r, 3), entries: [p2.1, q2.1], exits: k3_exits },
    ];
    Some((ds, vec![p1, q1, p2, q2]))
}

fn c2211a(
    b: &mut Constructor,
    lvl: &Level,
    r: &Ring,
    u: Vertex,
    ev: Edge,
    f0: &crate::faults::FaultSet,
    d1s: &[Vertex],
) -> Try {
    let k0 = lvl.comp(r, 0);
    let v = lvl.e.other(u);
    let (c0v, d0) = oriented(r, ev);
    let plan = 'p: {
        for (b0, a3) in lvl.rescue(u) {
            let eu = lvl.edge(u, b0);
            if !b.ind_ready(k0, f0, eu) {
                continue;
            }
            for c3 in lvl.free_cross(d0) {
                if c3 != a3 {
                    break 'p Some((b0, a3, c3));
                }
            }
        }
        None
    };
    let Some((b0, a3, c3)) = plan else { return Ok(None) };
    b.mark(lvl, "2.2.1.2.1(a)", r);
    let eu = lvl.edge(u, b0);
    let c0 = b.ind(lvl, k0, f0, eu)?;
    if !on_cycle(&c0, ev.u(), ev.v()) {
        b.note(lvl, "restored edge unused; finished as 2.2.1.1".into());
        let h0 = open_cycle(&c0, b0, u).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
        let mut segs = vec![h0];
        segs.extend(around(b, lvl, r, v, a3)?);
        return b.join(lvl, &segs, &around_links(lvl, r, u, v, b0, a3)).map(Some);
    }
    let pieces = cut_cycle(&c0, &[(u, b0), ev.endpoints()]).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    for &d1 in d1s {
        let Some((ds, mut links)) = doubles(lvl, r, [v, d1], [a3, c3]) else { continue };
        links.extend([(u, v), (c0v, d1), (a3, b0), (c3, d0)]);
        if let Some(chosen) = choose_pairings(&seg_ends(&pieces), &ds, &links) {
            let mut segs = pieces;
            segs.extend(realize(b, lvl, &ds, &chosen)?);
            return b.join(lvl, &segs, &links).map(Some);
        }
    }
    Err(b.no_choice(lvl, "strand pairing"))
}

/// The restored edge's back end has no free split edge; K₀ is left instead
/// through a detour at one of its free neighbours.
fn c2211b(
    b: &mut Constructor,
    lvl: &Level,
    r: &Ring,
    u: Vertex,
    ev: Edge,
    f0: &crate::faults::FaultSet,
    d1s: &[Vertex],
) -> Try {
    let k0 = lvl.comp(r, 0);
    let v = lvl.e.other(u);
    let (c0v, d0) = oriented(r, ev);
    if !b.ind_ready(k0, f0, ev) {
        return Ok(None);
    }
    b.mark(lvl, "2.2.1.2.1(b)", r);
    let c0 = b.ind(lvl, k0, f0, ev)?;
    for alpha in lvl.inner_free(&lvl.f, d0) {
        if on_cycle(&c0, d0, alpha) {
            continue;
        }
        for beta in cycle_nbrs(&c0, u) {
            for gamma in cycle_nbrs(&c0, alpha) {
                let Some(pieces) = cut_cycle(&c0, &[(u, beta), ev.endpoints(), (gamma, alpha)]) else { continue };
                for &d1 in d1s {
                    for c3 in lvl.free_cross(beta) {
                        for a3 in lvl.free_cross(gamma) {
                            if a3 == c3 {
                                continue;
                            }
                            let Some((ds, mut links)) = doubles(lvl, r, [v, d1], [a3, c3]) else { continue };
                            links.extend([(u, v), (c0v, d1), (d0, alpha), (c3, beta), (a3, gamma)]);
                            if let Some(chosen) = choose_pairings(&seg_ends(&pieces), &ds, &links) {
                                let mut segs = pieces;
                                segs.extend(realize(b, lvl, &ds, &chosen)?);
                                return b.join(lvl, &segs, &links).map(Some);
                            }
                        }
                    }
                }
            }
        }
    }
    Err(b.no_choice(lvl, "detour at the restored edge"))
}

/// The restored edge's forward end reaches K₁ only at `v`: v is entered
/// from u, left towards it, and K₁ − v is covered by one path.
fn c2212(b: &mut Constructor, lvl: &Level, r: &Ring, u: Vertex, ev: Edge, f0: &crate::faults::FaultSet) -> Try {
    let k0 = lvl.comp(r, 0);
    let v = lvl.e.other(u);
    let (c0v, d0) = oriented(r, ev);
    if !b.ind_ready(k0, f0, ev) || lvl.faulty(v, c0v) {
        return Ok(None);
    }
    b.mark(lvl, "2.2.1.2.2", r);
    let c0 = b.ind(lvl, k0, f0, ev)?;
    let [p1, q1] = two_pairs(lvl, r, 1, &[v]).ok_or_else(|| b.no_choice(lvl, "split edges K1-K2"))?;
    let [p2, q2] = two_pairs(lvl, r, 2, &[]).ok_or_else(|| b.no_choice(lvl, "split edges K2-K3"))?;
    for b0 in cycle_nbrs(&c0, u) {
        let Some(pieces) = cut_cycle(&c0, &[(u, b0), ev.endpoints()]) else { continue };
        for a3 in lvl.free_cross(b0) {
            for c3 in lvl.free_cross(d0) {
                if a3 == c3 {
                    continue;
                }
                let ds = vec![
                    Double { part: lvl.comp(r, 2), entries: [p1.1, q1.1], exits: [p2.0, q2.0] },
                    Double { part: lvl.comp(r, 3), entries: [p2.1, q2.1], exits: [a3, c3] },
                ];
                let links = vec![(u, v), (v, c0v), p1, q1, p2, q2, (a3, b0), (c3, d0)];
                let mut fixed = seg_ends(&pieces);
                fixed.push((v, v));
                fixed.push((p1.0, q1.0));
                if let Some(chosen) = choose_pairings(&fixed, &ds, &links) {
                    let h1 = b.avoiding(lvl, lvl.comp(r, 1), v, p1.0, q1.0)?;
                    let mut segs = pieces;
                    segs.push(vec![v]);
                    segs.push(h1);
                    segs.extend(realize(b, lvl, &ds, &chosen)?);
                    return b.join(lvl, &segs, &links).map(Some);
                }
            }
        }
    }
    Err(b.no_choice(lvl, "cut at u"))
}

/// K₂ carries 4k−8 faults.
fn c222(b: &mut Constructor, lvl: &Level, u: Vertex) -> Built {
    let (r, v) = setup(lvl, u);
    b.mark(lvl, "2.2.2", &r);
    let (k0, k1, k2, k3) = (lvl.comp(&r, 0), lvl.comp(&r, 1), lvl.comp(&r, 2), lvl.comp(&r, 3));
    let plan = 'p: {
        for ev in lvl.virtual_candidates(k2) {
            if !b.ind_ready(k2, &lvl.f.without(ev), ev) {
                continue;
            }
            let (a2, b2) = oriented(&r, ev);
            for b3 in lvl.free_cross(a2) {
                for a1 in lvl.free_cross(b2) {
                    if let Some((a3, b0)) = lvl.cross_pair(&r, 3, &[b3, u]) {
                        break 'p Some((ev, a1, b2, a2, b3, a3, b0));
                    }
                }
            }
        }
        None
    };
    let (ev, a1, b2, a2, b3, a3, b0) = plan.ok_or_else(|| b.no_choice(lvl, "virtual edge in K2"))?;
    let c2 = b.ind(lvl, k2, &lvl.f.without(ev), ev)?;
    let h2 = open_cycle(&c2, b2, a2).ok_or_else(|| missing(b, lvl, "virtual edge"))?;
    let h0 = b.lace(lvl, k0, &lvl.f, b0, u)?;
    let h1 = b.lace(lvl, k1, &lvl.f, v, a1)?;
    let h3 = b.lace(lvl, k3, &lvl.f, b3, a3)?;
    b.join(lvl, &[h0, h1, h2, h3], &[(u, v), (a1, b2), (a2, b3), (a3, b0)])
}
