use std::collections::BTreeMap;
use std::time::Duration;

use bhcycle::construct::{base_case_bh2, top_level};
use bhcycle::faults::{is_conditional, random_conditional_faults};
use bhcycle::pathfinder::ham_cycle_search;
use bhcycle::stress::{find_targeted, free_edges, trial_seed};
use bhcycle::topology::{build_def1, split_label, Edge, Topology};
use bhcycle::verify::verify_ham_cycle;
use bhcycle::{construct_ham_cycle, ConstructError, FaultSet, SearchBudget, Vertex};

fn budget() -> SearchBudget {
    SearchBudget::new(100_000_000, Duration::from_secs(60))
}

/// Three-fault configurations of BH₂ split along dimension 1, assuming at
/// least as many faults on dimension 1 as on dimension 0. Returns `None`
/// for every other instance.
fn configuration(t: &Topology, f: &FaultSet, e: Edge) -> Option<&'static str> {
    let comp = |x: Vertex| split_label(x, 1);
    let cross: Vec<Edge> = f.iter().filter(|x| x.dim() == 1).collect();
    let inner: Vec<Edge> = f.iter().filter(|x| x.dim() == 0).collect();
    match (cross.len(), inner.len()) {
        (3, 0) => return Some(if e.dim() == 0 { "three cross, edge inside" } else { "three cross, edge across" }),
        (2, 1) => {}
        _ => return None,
    }
    let bad = inner[0];
    let k = comp(bad.u());
    if e.dim() == 0 {
        let c = comp(e.u());
        return Some(match (k + 4 - c) % 4 {
            0 => "edge inside, inner fault beside it",
            2 => "edge inside, inner fault opposite",
            _ => {
                // A faulty cross edge from the faulty inner edge back into
                // e's component, landing off e.
                let hooked = cross.iter().any(|x| {
                    [bad.u(), bad.v()].into_iter().filter(|&y| x.has(y)).any(|y| {
                        let o = x.other(y);
                        comp(o) == c && !e.has(o)
                    })
                });
                if hooked {
                    "edge inside, inner fault adjacent, hooked"
                } else {
                    "edge inside, inner fault adjacent, free"
                }
            }
        });
    }
    let (p, q) = e.endpoints();
    let (x, y) = if comp(p) == k {
        (p, q)
    } else if comp(q) == k {
        (q, p)
    } else {
        return Some("edge across, inner fault away");
    };
    if bad.has(x) {
        return Some("edge across, inner fault at endpoint");
    }
    let doubled = t.vertices().any(|z| t.dim_neighbors(z, 1).iter().all(|&w| f.contains_pair(z, w)));
    if doubled {
        return Some("edge across, inner fault off endpoint, doubled cross");
    }
    let c = if bad.u().color() == x.color() { bad.u() } else { bad.v() };
    let other = t.dim_neighbors(c, 1).into_iter().find(|&w| w != y).unwrap();
    assert_eq!(comp(other), comp(y));
    Some(if f.contains_pair(c, other) {
        "edge across, inner fault off endpoint, far cross faulty"
    } else {
        "edge across, inner fault off endpoint, far cross free"
    })
}

#[test]
fn every_three_fault_configuration_of_bh2_occurs_and_constructs() {
    let t = build_def1(2).unwrap();
    let edges = t.edges_sorted();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in 0..edges.len() {
        for b in a + 1..edges.len() {
            for c in b + 1..edges.len() {
                let f = FaultSet::from_edges(&t, [edges[a], edges[b], edges[c]]).unwrap();
                if !is_conditional(&t, &f) {
                    continue;
                }
                for e in free_edges(&t, &f) {
                    let Some(name) = configuration(&t, &f, e) else { continue };
                    let cyc = base_case_bh2(&t, &f, e).unwrap_or_else(|err| panic!("{name}: {err}, F={f:?}, e={e}"));
                    assert!(verify_ham_cycle(&t, &f, cyc.vertices(), Some(e)).ok, "{name}");
                    *counts.entry(name).or_default() += 1;
                }
            }
        }
    }
    for (name, n) in &counts {
        println!("{name}: {n}");
    }
    assert_eq!(counts.len(), 11, "{counts:?}");
}

#[test]
fn construction_agrees_with_direct_search_at_n3() {
    let t = build_def1(3).unwrap();
    for i in 0..500u64 {
        let seed = trial_seed(500, i);
        let f = random_conditional_faults(&t, 7, seed).unwrap();
        let free = free_edges(&t, &f);
        let e = free[(seed % free.len() as u64) as usize];
        let built = construct_ham_cycle(&t, &f, e);
        let searched = ham_cycle_search(&t, &f, Some(e), budget());
        assert!(built.is_ok(), "seed {seed}: {}", built.unwrap_err());
        assert!(searched.is_ok(), "seed {seed}: {}", searched.unwrap_err());
        assert!(verify_ham_cycle(&t, &f, searched.unwrap().vertices(), Some(e)).ok);
    }
}

#[test]
fn heavy_component_with_a_weak_vertex_is_reachable() {
    let t = build_def1(3).unwrap();
    for label in ["1.3.2.1", "1.3.2.2"] {
        let (_, _, inst) =
            find_targeted(&t, label, 3, 20_000, budget()).unwrap_or_else(|| panic!("no instance for {label}"));
        let (c, trace) = construct_ham_cycle(&t, &inst.faults, inst.edge).unwrap();
        assert!(verify_ham_cycle(&t, &inst.faults, c.vertices(), Some(inst.edge)).ok);
        assert!(trace.labels().contains(&label));
        assert_eq!(trace.entries[0].component_faults.iter().max(), Some(&5));
        assert_eq!(top_level(label), Some("1.3.*"));
    }
}

#[test]
fn preconditions_are_enforced() {
    let t = build_def1(3).unwrap();
    let f = random_conditional_faults(&t, 8, 1).unwrap();
    let e = free_edges(&t, &f)[0];
    assert!(matches!(construct_ham_cycle(&t, &f, e), Err(ConstructError::Precondition(_))));

    let f = random_conditional_faults(&t, 7, 1).unwrap();
    let bad = f.iter().next().unwrap();
    assert!(matches!(construct_ham_cycle(&t, &f, bad), Err(ConstructError::Precondition(_))));

    let x = Vertex::from_digits(&[0, 0, 0]).unwrap();
    let mut g = FaultSet::new(&t);
    for &w in &t.neighbors(x)[..5] {
        g.insert(t.edge(x, w).unwrap());
    }
    let e = free_edges(&t, &g)[0];
    assert!(matches!(construct_ham_cycle(&t, &g, e), Err(ConstructError::Precondition(_))));

    let t1 = build_def1(1).unwrap();
    let e = t1.edges_sorted()[0];
    assert!(matches!(construct_ham_cycle(&t1, &FaultSet::new(&t1), e), Err(ConstructError::Precondition(_))));
}

#[test]
fn seeded_instances_at_n4() {
    let t = build_def1(4).unwrap();
    for i in 0..20u64 {
        let seed = trial_seed(4, i);
        let f = random_conditional_faults(&t, 11, seed).unwrap();
        let free = free_edges(&t, &f);
        let e = free[(seed % free.len() as u64) as usize];
        let (c, trace) = construct_ham_cycle(&t, &f, e).unwrap_or_else(|err| panic!("seed {seed}: {err}"));
        assert_eq!(c.len(), 256);
        assert!(verify_ham_cycle(&t, &f, c.vertices(), Some(e)).ok);
        trace.check().unwrap();
        assert_eq!(trace.max_depth(), 2);
    }
}
