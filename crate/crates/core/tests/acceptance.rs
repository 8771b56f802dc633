//! One line per acceptance criterion, then a single assertion over all of
//! them so every line is printed even when one fails. Run with
//! `cargo test -p bhcycle --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bhcycle::construct::{top_level, CASE_LABELS, TOP_LEVEL_LABELS};
use bhcycle::faults::{build_optimality_counterexample, is_conditional};
use bhcycle::pathfinder::{ham_path, hyper_ham_path, two_spanning_paths};
use bhcycle::stress::{free_edges, run_stress, StressConfig, StressReport};
use bhcycle::topology::{build_def1, partition_by_dimension, Color, Topology};
use bhcycle::verify::{
    certify_no_ham_cycle, verify_defs_equivalent, verify_ham_cycle, verify_partition, verify_path_on,
    verify_path_pair_on, AbsenceVerdict,
};
use bhcycle::{construct_ham_cycle, FaultSet, SearchBudget, Vertex};

struct Outcome {
    pass: bool,
    detail: String,
}

fn budget() -> SearchBudget {
    SearchBudget::new(100_000_000, Duration::from_secs(120))
}

/// Every subset of `edges` with at most `k` members.
fn subsets_up_to(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&x| x + 1);
            for i in start..len {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn exhaustive_bh2() -> Outcome {
    let t = build_def1(2).unwrap();
    let edges = t.edges_sorted();
    let subsets = subsets_up_to(edges.len(), 3);
    let results: Vec<(bool, usize, usize)> = subsets
        .par_iter()
        .map(|s| {
            let f = FaultSet::from_edges(&t, s.iter().map(|&i| edges[i])).unwrap();
            if !is_conditional(&t, &f) {
                return (false, 0, 0);
            }
            let mut bad = 0;
            let free = free_edges(&t, &f);
            for &e in &free {
                match construct_ham_cycle(&t, &f, e) {
                    Ok((c, _)) if c.len() == 16 && verify_ham_cycle(&t, &f, c.vertices(), Some(e)).ok => {}
                    _ => bad += 1,
                }
            }
            (true, free.len(), bad)
        })
        .collect();
    let conditional = results.iter().filter(|r| r.0).count();
    let runs: usize = results.iter().map(|r| r.1).sum();
    let failures: usize = results.iter().map(|r| r.2).sum();
    Outcome {
        pass: subsets.len() == 5489 && failures == 0,
        detail: format!(
            "{} subsets, {conditional} conditional, {runs} constructions, {failures} failures",
            subsets.len()
        ),
    }
}

fn stress(n: usize, trials: u64, edges: usize, seed: u64) -> StressReport {
    let t = build_def1(n).unwrap();
    let cfg = StressConfig {
        n,
        trials,
        fault_size: 4 * n - 5,
        edges_per_trial: edges,
        seed,
        biased: false,
        target_attempts: 0,
        budget: budget(),
    };
    run_stress(&t, &cfg)
}

fn tier(report: &StressReport, want: usize) -> Outcome {
    let mut detail = format!(
        "{}/{} verified {}-vertex cycles, {} failures",
        report.passed,
        report.constructions,
        1usize << (2 * report.n),
        report.failures.len()
    );
    if let Some(f) = report.failures.first() {
        detail.push_str(&format!("; first: trial {:?} seed {} {:?}", f.trial, f.seed, f.error));
    }
    Outcome { pass: report.constructions == want && report.passed == want, detail }
}

fn optimality() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in 2..=4 {
        let t = build_def1(n).unwrap();
        let c = build_optimality_counterexample(&t).unwrap();
        let cond = is_conditional(&t, &c.faults);
        let verdict = certify_no_ham_cycle(&t, &c.faults);
        let (name, ok) = match verdict {
            AbsenceVerdict::ConclusiveAbsent => ("CONCLUSIVE_ABSENT", n == 2),
            AbsenceVerdict::StructuralAbsent { .. } => ("STRUCTURAL_ABSENT", n >= 3),
            AbsenceVerdict::Present { .. } => ("PRESENT", false),
            AbsenceVerdict::Inconclusive => ("INCONCLUSIVE", false),
        };
        pass &= ok && cond && c.faults.len() == 4 * n - 4;
        parts.push(format!("n={n} |F|={} conditional={cond} {name}", c.faults.len()));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn definitions() -> Outcome {
    let verdicts: Vec<bool> = (1..=4).map(verify_defs_equivalent).collect();
    Outcome { pass: verdicts.iter().all(|&b| b), detail: format!("n=1..4 equivalent: {verdicts:?}") }
}

fn partitions() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (n, dims) in [(2, vec![0, 1]), (3, vec![0, 1, 2]), (4, vec![0, 3])] {
        let t = build_def1(n).unwrap();
        for j in dims {
            let v = verify_partition(&t, &partition_by_dimension(&t, j).unwrap());
            checked += 1;
            if !v.ok {
                bad.push(format!("n={n} j={j}: {}", v.diagnostic.unwrap_or_default()));
            }
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{checked} (n, j) splits checked, {} bad {bad:?}", bad.len()) }
}

fn colour_class(t: &Topology, c: Color) -> Vec<Vertex> {
    t.vertices().filter(|v| v.color() == c).collect()
}

fn laceability_oracle() -> Outcome {
    let t = build_def1(2).unwrap();
    let edges = t.edges_sorted();
    let all: Vec<Vertex> = t.vertices().collect();
    let (whites, blacks) = (colour_class(&t, Color::White), colour_class(&t, Color::Black));
    let sets: Vec<FaultSet> = subsets_up_to(edges.len(), 2)
        .into_iter()
        .map(|s| FaultSet::from_edges(&t, s.iter().map(|&i| edges[i])).unwrap())
        .filter(|f| is_conditional(&t, f))
        .collect();
    let failures: usize = sets
        .par_iter()
        .map(|f| {
            let mut bad = 0;
            for &s in &whites {
                for &e in &blacks {
                    match ham_path(&t, f, s, e, budget()) {
                        Ok(p) if verify_path_on(&t, &all, f, p.vertices(), s, e).ok => {}
                        _ => bad += 1,
                    }
                }
            }
            bad
        })
        .sum();
    Outcome {
        pass: failures == 0,
        detail: format!(
            "{} conditional sets x 64 pairs = {} searches, {failures} failures",
            sets.len(),
            sets.len() * 64
        ),
    }
}

fn disjoint_and_hyper_oracles() -> Outcome {
    let t = build_def1(2).unwrap();
    let f = FaultSet::new(&t);
    let all: Vec<Vertex> = t.vertices().collect();
    let (whites, blacks) = (colour_class(&t, Color::White), colour_class(&t, Color::Black));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut two_ok, mut hyper_ok) = (0, 0);
    for _ in 0..200 {
        let u: Vec<Vertex> = whites.choose_multiple(&mut rng, 2).copied().collect();
        let v: Vec<Vertex> = blacks.choose_multiple(&mut rng, 2).copied().collect();
        let (u, v) = if rand::Rng::random_bool(&mut rng, 0.5) { (u, v) } else { (v, u) };
        if let Ok((p, q)) = two_spanning_paths(&t, u[0], v[0], u[1], v[1], budget()) {
            if verify_path_pair_on(&t, &all, &f, p.vertices(), q.vertices(), [(u[0], v[0]), (u[1], v[1])]).ok {
                two_ok += 1;
            }
        }
    }
    for _ in 0..200 {
        let (rc, sc) = if rand::Rng::random_bool(&mut rng, 0.5) { (&whites, &blacks) } else { (&blacks, &whites) };
        let removed = *rc.choose(&mut rng).unwrap();
        let ends: Vec<Vertex> = sc.choose_multiple(&mut rng, 2).copied().collect();
        let rest: Vec<Vertex> = all.iter().copied().filter(|&x| x != removed).collect();
        if let Ok(p) = hyper_ham_path(&t, removed, ends[0], ends[1], budget()) {
            if verify_path_on(&t, &rest, &f, p.vertices(), ends[0], ends[1]).ok {
                hyper_ok += 1;
            }
        }
    }
    Outcome {
        pass: two_ok == 200 && hyper_ok == 200,
        detail: format!("two disjoint spanning paths {two_ok}/200, hyper-Hamiltonian paths {hyper_ok}/200"),
    }
}

fn coverage(reports: &[&StressReport]) -> Outcome {
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for r in reports {
        for (&l, &c) in &r.label_histogram {
            *labels.entry(l).or_default() += c;
        }
    }
    let groups: Vec<&str> = labels.keys().filter_map(|l| top_level(l)).collect();
    let missing_groups: Vec<&str> = TOP_LEVEL_LABELS.iter().copied().filter(|g| !groups.contains(g)).collect();
    let unreached: Vec<&str> = CASE_LABELS.iter().copied().filter(|l| !labels.contains_key(l)).collect();
    let failures: usize = reports.iter().map(|r| r.failures.len()).sum();
    Outcome {
        pass: missing_groups.is_empty() && failures == 0,
        detail: format!(
            "{} of {} top-level groups reached (missing {missing_groups:?}), {} of {} leaves, unreached leaves {unreached:?}, {failures} failures",
            TOP_LEVEL_LABELS.len() - missing_groups.len(),
            TOP_LEVEL_LABELS.len(),
            CASE_LABELS.len() - unreached.len(),
            CASE_LABELS.len()
        ),
    }
}

fn run(lines: &mut Vec<(usize, Outcome)>, id: usize, name: &str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = f();
    let word = if o.pass { "PASS" } else { "FAIL" };
    println!("[{word}] {id}. {name}: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
    lines.push((id, o));
}

#[test]
fn acceptance() {
    println!();
    let mut lines = Vec::new();
    let (mut r3, mut r4) = (None, None);
    run(&mut lines, 1, "construction at n=2, exhaustive", exhaustive_bh2);
    run(&mut lines, 2, "construction at n=3, 1000 x 10", || {
        let r = stress(3, 1000, 10, 2);
        let o = tier(&r, 10_000);
        r3 = Some(r);
        o
    });
    run(&mut lines, 3, "construction at n=4, 100 x 5", || {
        let r = stress(4, 100, 5, 3);
        let o = tier(&r, 500);
        r4 = Some(r);
        o
    });
    run(&mut lines, 4, "optimality counterexample", optimality);
    run(&mut lines, 5, "definition equivalence", definitions);
    run(&mut lines, 6, "four-way partitions", partitions);
    run(&mut lines, 7, "fault-tolerant laceability oracle at n=2, exhaustive", laceability_oracle);
    run(&mut lines, 8, "disjoint-path and hyper-Hamiltonian oracles at n=2", disjoint_and_hyper_oracles);
    run(&mut lines, 9, "case coverage over tiers 2-3 and targeted stress", || {
        let t = build_def1(3).unwrap();
        let cfg = StressConfig {
            n: 3,
            trials: 2000,
            fault_size: 7,
            edges_per_trial: 1,
            seed: 9,
            biased: true,
            target_attempts: 20_000,
            budget: budget(),
        };
        let targeted = run_stress(&t, &cfg);
        coverage(&[r3.as_ref().unwrap(), r4.as_ref().unwrap(), &targeted])
    });

    let failed: Vec<usize> = lines.iter().filter(|l| !l.1.pass).map(|l| l.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
