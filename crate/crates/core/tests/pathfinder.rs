use std::time::Duration;

use bhcycle::faults::{build_optimality_counterexample, random_conditional_faults};
use bhcycle::pathfinder::{ham_cycle_search, ham_path, hyper_ham_path, two_spanning_paths, Prunes};
use bhcycle::stress::trial_seed;
use bhcycle::topology::{build_def1, Color, Topology};
use bhcycle::verify::{verify_cycle_on, verify_path_on, verify_path_pair_on};
use bhcycle::{FaultSet, SearchBudget, SearchError, Searcher, Vertex};

fn budget() -> SearchBudget {
    SearchBudget::new(50_000_000, Duration::from_secs(60))
}

fn v(d: &[u8]) -> Vertex {
    Vertex::from_digits(d).unwrap()
}

/// Held–Karp style reachability over subsets: is there a fault-free
/// Hamiltonian s–t path? Independent of the backtracking engine.
fn dp_ham_path(t: &Topology, f: &FaultSet, s: Vertex, end: Vertex) -> bool {
    let n = t.vertex_count();
    assert!(n <= 16);
    let adj: Vec<u32> = (0..n)
        .map(|i| {
            let a = Vertex::from_index(t.n(), i);
            t.neighbors(a).iter().filter(|&&b| !f.contains_pair(a, b)).fold(0u32, |m, b| m | 1 << b.index())
        })
        .collect();
    let full = (1u32 << n) - 1;
    let mut reach = vec![0u32; 1 << n];
    reach[1 << s.index()] = 1 << s.index();
    for mask in 1..=full {
        let ends = reach[mask as usize];
        if ends == 0 {
            continue;
        }
        for (a, &nbrs) in adj.iter().enumerate() {
            if ends & (1 << a) == 0 {
                continue;
            }
            let mut next = nbrs & !mask;
            while next != 0 {
                let b = next.trailing_zeros();
                next &= next - 1;
                reach[(mask | 1 << b) as usize] |= 1 << b;
            }
        }
    }
    reach[full as usize] & (1 << end.index()) != 0
}

fn outcome(r: Result<bhcycle::Path, SearchError>) -> Option<bool> {
    match r {
        Ok(_) => Some(true),
        Err(SearchError::NotFound) => Some(false),
        Err(e) => panic!("unexpected search outcome: {e}"),
    }
}

#[test]
fn bh1_examples() {
    let t = build_def1(1).unwrap();
    let f = FaultSet::new(&t);
    let p = ham_path(&t, &f, v(&[0]), v(&[1]), budget()).unwrap();
    assert_eq!(p.vertices(), &[v(&[0]), v(&[3]), v(&[2]), v(&[1])]);

    let h = hyper_ham_path(&t, v(&[0]), v(&[1]), v(&[3]), budget()).unwrap();
    assert_eq!(h.vertices(), &[v(&[1]), v(&[2]), v(&[3])]);

    let (a, b) = two_spanning_paths(&t, v(&[0]), v(&[1]), v(&[2]), v(&[3]), budget()).unwrap();
    assert_eq!(a.length() + b.length() + 2, 4);

    let c = ham_cycle_search(&t, &f, None, budget()).unwrap();
    assert_eq!(c.len(), 4);
}

#[test]
fn precondition_errors() {
    let t = build_def1(2).unwrap();
    let f = FaultSet::new(&t);
    let (w, b) = (v(&[0, 0]), v(&[1, 0]));
    assert!(matches!(ham_path(&t, &f, w, v(&[2, 0]), budget()), Err(SearchError::Precondition(_))));
    assert!(matches!(two_spanning_paths(&t, w, b, w, v(&[3, 0]), budget()), Err(SearchError::Precondition(_))));
    assert!(matches!(hyper_ham_path(&t, w, w, v(&[2, 0]), budget()), Err(SearchError::Precondition(_))));
}

#[test]
fn pruned_and_unpruned_agree_with_subset_dp() {
    let t1 = build_def1(1).unwrap();
    let t2 = build_def1(2).unwrap();
    let mut found = [0usize; 2];
    for (t, sizes) in [(&t1, &[0usize, 1][..]), (&t2, &[0, 2, 4, 6, 8][..])] {
        for &size in sizes {
            for seed in 0..6u64 {
                let f = match random_conditional_faults(t, size, seed) {
                    Ok(f) => f,
                    Err(_) => continue,
                };
                for s in t.vertices().filter(|x| x.color() == Color::White) {
                    for end in t.vertices().filter(|x| x.color() == Color::Black).step_by(3) {
                        let host = t.whole();
                        let pruned = outcome(Searcher::new(budget()).ham_path(t, &host, &f, s, end));
                        let plain =
                            outcome(Searcher::new(budget()).with_prunes(Prunes::NONE).ham_path(t, &host, &f, s, end));
                        let dp = dp_ham_path(t, &f, s, end);
                        assert_eq!(pruned, Some(dp), "pruned search vs DP, F={f:?} {s}->{end}");
                        assert_eq!(plain, Some(dp), "unpruned search vs DP, F={f:?} {s}->{end}");
                        found[dp as usize] += 1;
                    }
                }
            }
        }
    }
    // Both answers must actually occur for the comparison to mean anything.
    assert!(found[0] > 0 && found[1] > 0, "{found:?}");
}

#[test]
fn single_prunes_preserve_answers() {
    let t = build_def1(2).unwrap();
    let singles = [
        Prunes { parity: true, ..Prunes::NONE },
        Prunes { degree: true, ..Prunes::NONE },
        Prunes { connectivity: true, ..Prunes::NONE },
        Prunes { ordering: true, ..Prunes::NONE },
    ];
    for seed in 0..20u64 {
        let f = random_conditional_faults(&t, 5, seed).unwrap();
        let s = v(&[0, 0]);
        for end in t.vertices().filter(|x| x.color() == Color::Black) {
            let dp = dp_ham_path(&t, &f, s, end);
            for p in singles {
                let got = outcome(Searcher::new(budget()).with_prunes(p).ham_path(&t, &t.whole(), &f, s, end));
                assert_eq!(got, Some(dp), "{p:?} F={f:?} {s}->{end}");
            }
        }
    }
}

#[test]
fn laceable_paths_for_seeded_fault_sets() {
    let t = build_def1(2).unwrap();
    for seed in 0..200u64 {
        let f = random_conditional_faults(&t, 2, trial_seed(2, seed)).unwrap();
        for s in t.vertices().filter(|x| x.color() == Color::White) {
            for end in t.vertices().filter(|x| x.color() == Color::Black) {
                let p = ham_path(&t, &f, s, end, budget()).unwrap();
                let all: Vec<Vertex> = t.vertices().collect();
                assert!(verify_path_on(&t, &all, &f, p.vertices(), s, end).ok);
            }
        }
    }
}

#[test]
fn disjoint_paths_for_all_tuples_with_fixed_first_endpoint() {
    let t = build_def1(2).unwrap();
    let f = FaultSet::new(&t);
    let all: Vec<Vertex> = t.vertices().collect();
    let whites: Vec<Vertex> = t.vertices().filter(|x| x.color() == Color::White).collect();
    let blacks: Vec<Vertex> = t.vertices().filter(|x| x.color() == Color::Black).collect();
    let u1 = whites[0];
    let mut count = 0;
    for &u2 in &whites[1..] {
        for &v1 in &blacks {
            for &v2 in blacks.iter().filter(|&&x| x != v1) {
                let (p, q) = two_spanning_paths(&t, u1, v1, u2, v2, budget()).unwrap();
                assert!(verify_path_pair_on(&t, &all, &f, p.vertices(), q.vertices(), [(u1, v1), (u2, v2)]).ok);
                count += 1;
            }
        }
    }
    assert_eq!(count, 7 * 8 * 7);
}

#[test]
fn avoiding_paths_for_every_white_removed_and_black_pair() {
    let t = build_def1(2).unwrap();
    let f = FaultSet::new(&t);
    for w in t.vertices().filter(|x| x.color() == Color::White) {
        let rest: Vec<Vertex> = t.vertices().filter(|&x| x != w).collect();
        let blacks: Vec<Vertex> = t.vertices().filter(|x| x.color() == Color::Black).collect();
        for (i, &s) in blacks.iter().enumerate() {
            for &end in &blacks[i + 1..] {
                let p = hyper_ham_path(&t, w, s, end, budget()).unwrap();
                assert!(verify_path_on(&t, &rest, &f, p.vertices(), s, end).ok);
            }
        }
    }
}

#[test]
fn cycle_through_every_edge_of_fault_free_bh2() {
    let t = build_def1(2).unwrap();
    let f = FaultSet::new(&t);
    let all: Vec<Vertex> = t.vertices().collect();
    for e in t.edges_sorted() {
        let c = ham_cycle_search(&t, &f, Some(e), budget()).unwrap();
        assert!(verify_cycle_on(&t, &all, &f, c.vertices(), Some(e)).ok);
    }
}

#[test]
fn counterexample_is_conclusively_absent() {
    let t = build_def1(2).unwrap();
    let c = build_optimality_counterexample(&t).unwrap();
    assert_eq!(ham_cycle_search(&t, &c.faults, None, budget()).unwrap_err(), SearchError::NotFound);
}

#[test]
fn tiny_budget_is_inconclusive_not_absent() {
    let t = build_def1(3).unwrap();
    let f = FaultSet::new(&t);
    let r = ham_path(&t, &f, v(&[0, 0, 0]), v(&[1, 1, 1]), SearchBudget::new(1, Duration::from_secs(5)));
    assert_eq!(r.unwrap_err(), SearchError::BudgetExceeded);
}
