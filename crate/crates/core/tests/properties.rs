use std::collections::BTreeSet;

use proptest::prelude::*;

use bhcycle::construct::CASE_LABELS;
use bhcycle::faults::{
    find_rescue_cross_edge, is_conditional, random_conditional_faults, rescuability, select_split_dimension, SplitKind,
};
use bhcycle::io::{faults_json, parse_faults};
use bhcycle::stress::free_edges;
use bhcycle::topology::{build_def1, edge_dimension, partition_by_dimension, Topology};
use bhcycle::verify::{verify_ham_cycle, verify_partition};
use bhcycle::{construct_ham_cycle, FaultSet, Vertex};

fn topo(n: usize) -> Topology {
    build_def1(n).unwrap()
}

/// Fault-free degree of `v` once every m-dimension edge is deleted.
fn degree_without(t: &Topology, f: &FaultSet, v: Vertex, m: usize) -> usize {
    t.neighbors_with_dim(v).filter(|&(w, d)| d != m && !f.contains_pair(v, w)).count()
}

fn dim_count(f: &FaultSet, m: usize) -> usize {
    f.iter().filter(|e| e.dim() == m).count()
}

proptest! {
    #[test]
    fn vertex_index_round_trip(n in 1usize..=5, raw in any::<u32>()) {
        let i = raw as usize % (1 << (2 * n));
        let x = Vertex::from_index(n, i);
        prop_assert_eq!(x.index(), i);
        prop_assert_eq!(Vertex::from_digits(&x.digits()).unwrap(), x);
    }

    #[test]
    fn adjacency_is_symmetric_and_dimensioned(n in 1usize..=4, raw in any::<u32>()) {
        let t = topo(n);
        let x = Vertex::from_index(n, raw as usize % t.vertex_count());
        prop_assert_eq!(t.neighbors(x).len(), 2 * n);
        let distinct: BTreeSet<Vertex> = t.neighbors(x).iter().copied().collect();
        prop_assert_eq!(distinct.len(), 2 * n);
        for (w, d) in t.neighbors_with_dim(x) {
            prop_assert!(t.neighbors(w).contains(&x));
            prop_assert_ne!(w.color(), x.color());
            prop_assert_eq!(edge_dimension(x, w).unwrap(), d);
            prop_assert_eq!(t.edge(x, w).unwrap(), t.edge(w, x).unwrap());
        }
    }

    #[test]
    fn fault_summaries_follow_inserts_and_removes(ops in prop::collection::vec((any::<bool>(), 0usize..192), 0..60)) {
        let t = topo(3);
        let edges = t.edges_sorted();
        let mut f = FaultSet::new(&t);
        let mut model = BTreeSet::new();
        for (add, i) in ops {
            if add {
                prop_assert_eq!(f.insert(edges[i]), model.insert(i));
            } else {
                prop_assert_eq!(f.remove(edges[i]), model.remove(&i));
            }
            prop_assert!(f.summaries_consistent());
        }
        prop_assert_eq!(f.len(), model.len());
        prop_assert_eq!(f.per_dimension_count().iter().sum::<usize>(), model.len());
        for x in t.vertices() {
            let direct = model.iter().filter(|&&i| edges[i].has(x)).count();
            prop_assert_eq!(f.fault_degree(x), direct);
            prop_assert_eq!(rescuability(&t, &f, x, None), 2 * t.n() - direct);
        }
    }

    #[test]
    fn random_fault_sets_are_conditional_and_reproducible(n in 2usize..=4, extra in 0usize..4, seed in any::<u64>()) {
        let t = topo(n);
        let size = (4 * n - 5).saturating_sub(extra);
        let f = random_conditional_faults(&t, size, seed).unwrap();
        prop_assert_eq!(f.len(), size);
        prop_assert!(is_conditional(&t, &f));
        prop_assert_eq!(random_conditional_faults(&t, size, seed).unwrap(), f);
    }

    #[test]
    fn partitions_always_verify(n in 2usize..=4, j in 0usize..4) {
        prop_assume!(j < n);
        let t = topo(n);
        let p = partition_by_dimension(&t, j).unwrap();
        let v = verify_partition(&t, &p);
        prop_assert!(v.ok, "{:?}", v.diagnostic);
    }

    #[test]
    fn fault_json_round_trip(n in 2usize..=4, seed in any::<u64>()) {
        let t = topo(n);
        let f = random_conditional_faults(&t, 4 * n - 5, seed).unwrap();
        let text = serde_json::to_string(&faults_json(&f, Some(seed))).unwrap();
        let (g, s) = parse_faults(&t, &text).unwrap();
        prop_assert_eq!(g, f);
        prop_assert_eq!(s, Some(seed));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_choice_satisfies_its_statement(n in 3usize..=4, short in 0usize..3, seed in any::<u64>()) {
        let t = topo(n);
        let size = 4 * n - 5 - short;
        let f = random_conditional_faults(&t, size, seed).unwrap();
        let c = select_split_dimension(&t, &f).unwrap();
        let min_and_ones = |m: usize| {
            let degs: Vec<usize> = t.vertices().map(|x| degree_without(&t, &f, x, m)).collect();
            (*degs.iter().min().unwrap(), degs.iter().filter(|&&d| d == 1).count())
        };
        match c.kind {
            SplitKind::Case1 => {
                prop_assert!(c.m_prime.is_none());
                prop_assert!(dim_count(&f, c.m) >= 3);
                prop_assert!(min_and_ones(c.m).0 >= 2);
                // Smallest qualifying dimension wins.
                for m in 0..c.m {
                    prop_assert!(!(dim_count(&f, m) >= 3 && min_and_ones(m).0 >= 2));
                }
            }
            SplitKind::Case2 => {
                let mp = c.m_prime.unwrap();
                prop_assert_ne!(c.m, mp);
                for m in [c.m, mp] {
                    if size == 4 * n - 5 {
                        prop_assert!(dim_count(&f, m) >= 2);
                    }
                    let (min, ones) = min_and_ones(m);
                    prop_assert!(min >= 1 && ones <= 1);
                }
            }
        }
    }

    #[test]
    fn construction_at_n2_verifies(size in 0usize..=3, seed in any::<u64>(), pick in any::<usize>()) {
        let t = topo(2);
        let f = random_conditional_faults(&t, size, seed).unwrap();
        let free = free_edges(&t, &f);
        let e = free[pick % free.len()];
        let (c, trace) = construct_ham_cycle(&t, &f, e).unwrap();
        prop_assert!(verify_ham_cycle(&t, &f, c.vertices(), Some(e)).ok);
        prop_assert_eq!(trace.labels(), vec!["base"]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn construction_at_n3_verifies_with_a_valid_trace(size in 0usize..=7, seed in any::<u64>(), pick in any::<usize>()) {
        let t = topo(3);
        let f = random_conditional_faults(&t, size, seed).unwrap();
        let free = free_edges(&t, &f);
        let e = free[pick % free.len()];
        let (c, trace) = construct_ham_cycle(&t, &f, e).unwrap();
        prop_assert_eq!(c.len(), 64);
        prop_assert!(verify_ham_cycle(&t, &f, c.vertices(), Some(e)).ok);
        prop_assert!(trace.check().is_ok(), "{:?}", trace.check());
        prop_assert!(trace.labels().iter().all(|l| CASE_LABELS.contains(l)));
        prop_assert_eq!(trace.entries[0].level, 3);
        prop_assert!(trace.entries.iter().all(|x| x.level + x.depth == 3));
    }
}

#[test]
fn rescue_edges_exist_for_a_thousand_seeds() {
    let t = topo(3);
    for seed in 0..1000u64 {
        let f = random_conditional_faults(&t, 7, seed).unwrap();
        let j = (seed % 3) as usize;
        let p = partition_by_dimension(&t, j).unwrap();
        let u = Vertex::from_index(3, (seed as usize * 37) % 64);
        for prefer in [false, true] {
            let r = find_rescue_cross_edge(&t, &f, &p, u, prefer).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert_eq!(edge_dimension(r.v, r.w).unwrap(), j, "seed {seed}");
            assert!(!f.contains_pair(r.v, r.w), "seed {seed}");
            assert!(t.is_adjacent(u, r.v) && edge_dimension(u, r.v).unwrap() != j, "seed {seed}");
            assert_eq!(r.used_faulty_uv, f.contains_pair(u, r.v));
        }
    }
}

#[test]
fn one_rescuable_vertex_gets_a_faulty_first_step_on_request() {
    let t = topo(3);
    let p = partition_by_dimension(&t, 2).unwrap();
    let u = Vertex::from_digits(&[0, 0, 0]).unwrap();
    let mut f = FaultSet::new(&t);
    let inner: Vec<Vertex> = t.neighbors_with_dim(u).filter(|&(_, d)| d != 2).map(|(w, _)| w).collect();
    for &w in &inner[..3] {
        f.insert(t.edge(u, w).unwrap());
    }
    assert!(is_conditional(&t, &f));
    let c = p.component(p.label_of(u) as usize);
    assert_eq!(rescuability(&t, &f, u, Some(c)), 1);
    let r = find_rescue_cross_edge(&t, &f, &p, u, true).unwrap();
    assert!(r.used_faulty_uv);
    assert!(!f.contains_pair(r.v, r.w));
    assert!(f.contains_pair(u, r.v));
}
