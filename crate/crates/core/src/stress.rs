//! Seeded stress runs and fault generators aimed at the rarer subcases.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construct::{top_level, ConstructError, Constructor, CASE_LABELS, TOP_LEVEL_LABELS};
use crate::faults::{is_conditional, random_conditional_faults, FaultSet};
use crate::pathfinder::{SearchBudget, SearchStats};
use crate::topology::{Edge, Topology, Vertex};
use crate::verify::verify_ham_cycle;

/// Seed of trial `i` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add((i + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A fault set and a prescribed edge.
#[derive(Clone, Debug)]
pub struct Instance {
    pub faults: FaultSet,
    pub edge: Edge,
}

/// Fault-free edges in canonical order.
pub fn free_edges(t: &Topology, f: &FaultSet) -> Vec<Edge> {
    t.edges_sorted().into_iter().filter(|&e| !f.contains(e)).collect()
}

fn fits(t: &Topology, f: &FaultSet, e: Edge) -> bool {
    !f.contains(e) && [e.u(), e.v()].iter().all(|&x| 2 * t.n() - f.fault_degree(x) > 2)
}

/// Adds edges from `pool` in random order while every vertex keeps two
/// fault-free edges, until `f` holds `target` faults or the pool runs out.
fn fill(t: &Topology, f: &mut FaultSet, pool: &[Edge], target: usize, keep: Edge, rng: &mut ChaCha8Rng) {
    let mut pool = pool.to_vec();
    pool.shuffle(rng);
    for e in pool {
        if f.len() >= target {
            return;
        }
        if e != keep && fits(t, f, e) {
            f.insert(e);
        }
    }
}

/// A full-size (4n−5) conditional fault set drawn from a mixture that
/// concentrates faults at one vertex or in one component of a random split,
/// with a prescribed edge placed near the concentration or on the split.
pub fn biased_instance(t: &Topology, seed: u64) -> Instance {
    let n = t.n();
    let target = 4 * n - 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let whole = t.whole();
    let j = rng.random_range(0..n);
    let parts = whole.split(j).expect("n >= 2");
    let part = &parts[rng.random_range(0..4)];
    let inner: Vec<Edge> = part.edges(t);
    let cross: Vec<Edge> = t.edges_of_dim(j).to_vec();
    let all = t.edges_sorted();
    let verts = part.vertices();
    let w: Vertex = *verts.choose(&mut rng).unwrap();
    let at_w: Vec<Edge> = inner.iter().copied().filter(|e| e.has(w)).collect();

    // The prescribed edge: inside the loaded component, on the split, or
    // anywhere.
    let leaving: Vec<Edge> = cross.iter().copied().filter(|e| part.contains(e.u()) || part.contains(e.v())).collect();
    let pool = match rng.random_range(0..4) {
        0 => &at_w,
        1 => &inner,
        2 => &leaving,
        _ => &all,
    };
    let edge = *pool.choose(&mut rng).unwrap();

    let mut f = FaultSet::new(t);
    let mode = rng.random_range(0..5);
    let weak = 2 * n - 3;
    let load = match mode {
        0 => weak,
        1 => 4 * n - 8,
        2 | 3 => 4 * n - 7,
        _ => 0,
    };
    if mode == 0 || mode == 3 {
        fill(t, &mut f, &at_w, weak, edge, &mut rng);
    }
    if mode == 4 {
        f = random_conditional_faults(t, target, seed).expect("rejection sampling at theorem size");
        if f.contains(edge) {
            let free = free_edges(t, &f);
            let e = *free.choose(&mut rng).unwrap();
            return Instance { faults: f, edge: e };
        }
        return Instance { faults: f, edge };
    }
    fill(t, &mut f, &inner, load, edge, &mut rng);
    let crossing = rng.random_range(2..=4).min(target - f.len());
    let goal = f.len() + crossing;
    fill(t, &mut f, &cross, goal, edge, &mut rng);
    let rest: Vec<Edge> = all.iter().copied().filter(|e| !part.has_edge(*e) && e.dim() != j).collect();
    fill(t, &mut f, &rest, target, edge, &mut rng);
    fill(t, &mut f, &all, target, edge, &mut rng);
    Instance { faults: f, edge }
}

/// Outcome of one construction as recorded in reports.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Attempt {
    pub edge: [Vec<u8>; 2],
    pub ok: bool,
    pub labels: Vec<&'static str>,
    pub error: Option<String>,
    /// 2 precondition, 3 verification, 4 exhausted budget, 1 oracle failure.
    pub error_kind: Option<u8>,
}

pub fn error_kind(err: &ConstructError) -> u8 {
    match err {
        ConstructError::Precondition(_) => 2,
        ConstructError::Verification(_) => 3,
        ConstructError::BudgetExhausted { .. } => 4,
        ConstructError::OracleFailure { .. } => 1,
    }
}

/// Runs the constructor, re-verifies the cycle, and records the labels.
pub fn attempt(t: &Topology, f: &FaultSet, e: Edge, budget: SearchBudget, stats: &mut SearchStats) -> Attempt {
    let mut b = Constructor::new(t, budget);
    let res = b.build(f, e);
    stats.absorb(b.stats());
    let edge = [e.u().digits(), e.v().digits()];
    match res {
        Ok((c, trace)) => {
            let v = verify_ham_cycle(t, f, c.vertices(), Some(e));
            let guards = trace.check();
            let ok = v.ok && c.len() == t.vertex_count() && guards.is_ok();
            let error = if !v.ok { v.diagnostic } else { guards.err() };
            Attempt { edge, ok, labels: trace.labels(), error, error_kind: (!ok).then_some(3) }
        }
        Err(err) => Attempt {
            edge,
            ok: false,
            labels: err.trace().map(|t| t.labels()).unwrap_or_default(),
            error: Some(err.to_string()),
            error_kind: Some(error_kind(&err)),
        },
    }
}

/// Top-level label the constructor takes on an instance, if it gets that far.
pub fn classify(t: &Topology, inst: &Instance, budget: SearchBudget) -> Option<&'static str> {
    let a = attempt(t, &inst.faults, inst.edge, budget, &mut SearchStats::default());
    a.labels.first().copied()
}

/// A weak vertex `w` whose faulty in-component neighbours reach the next
/// component only at one vertex `x`, with the prescribed edge at `x`.
/// Biased sampling almost never produces this shape.
pub fn single_exit_instance(t: &Topology, seed: u64) -> Option<Instance> {
    let n = t.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = rng.random_range(0..n);
    let w = *t.vertices_sorted().choose(&mut rng)?;
    let mut inner: Vec<Vertex> = t.neighbors_with_dim(w).filter(|&(_, d)| d != j).map(|(x, _)| x).collect();
    inner.shuffle(&mut rng);
    let mut f = FaultSet::new(t);
    let weak = &inner[..2 * n - 3];
    for &b in weak {
        f.insert(t.edge(w, b).ok()?);
    }
    let mut exits: Vec<(Vertex, Vertex)> = weak.iter().flat_map(|&b| t.dim_neighbors(b, j).map(|x| (b, x))).collect();
    exits.sort();
    exits.dedup();
    let x = exits.choose(&mut rng)?.1;
    for &(b, y) in &exits {
        if y != x {
            f.insert(t.edge(b, y).ok()?);
        }
    }
    let at_x: Vec<Edge> =
        t.neighbors_with_dim(x).filter(|&(_, d)| d != j).filter_map(|(y, _)| t.edge(x, y).ok()).collect();
    let edge = *at_x.choose(&mut rng)?;
    fill(t, &mut f, &t.edges_sorted(), 4 * n - 5, edge, &mut rng);
    (f.len() == 4 * n - 5 && is_conditional(t, &f) && !f.contains(edge)).then_some(Instance { faults: f, edge })
}

/// Random walk from biased instances in the label's top-level group: swap
/// one fault (and sometimes the edge) while the group is kept, until the
/// label itself is reached. `budget_calls` bounds the constructions run.
pub fn walk_to_label(
    t: &Topology,
    label: &str,
    seed: u64,
    budget_calls: u64,
    budget: SearchBudget,
) -> Option<(u64, Instance)> {
    let group = top_level(label)?;
    let all = t.edges_sorted();
    let mut calls = 0u64;
    for i in 0.. {
        if calls >= budget_calls {
            return None;
        }
        let s = trial_seed(seed ^ 0x5eed, i);
        let mut cur = biased_instance(t, s);
        calls += 1;
        if classify(t, &cur, budget).and_then(top_level) != Some(group) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        for _ in 0..WALK_STEPS {
            let mut f = cur.faults.clone();
            let out: Vec<Edge> = f.iter().collect();
            f.remove(*out.choose(&mut rng)?);
            let add = *all.choose(&mut rng)?;
            let edge = if rng.random_range(0..4) == 0 { *all.choose(&mut rng)? } else { cur.edge };
            if f.contains(add) || add == edge || f.contains(edge) {
                continue;
            }
            f.insert(add);
            if !is_conditional(t, &f) {
                continue;
            }
            let cand = Instance { faults: f, edge };
            calls += 1;
            let got = classify(t, &cand, budget);
            if got == Some(label) {
                return Some((s, cand));
            }
            if got.and_then(top_level) == Some(group) {
                cur = cand;
            }
        }
    }
    None
}

const WALK_STEPS: usize = 300;

/// How a targeted instance was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Generator {
    Biased,
    SingleExit,
    Walk,
}

/// An instance whose top-level label is `label` (a leaf label or a group
/// such as "1.3.*"): biased sampling first, then the sculpted shape, then a
/// walk. Each stage runs at most `attempts` constructions.
pub fn find_targeted(
    t: &Topology,
    label: &str,
    seed: u64,
    attempts: u64,
    budget: SearchBudget,
) -> Option<(Generator, u64, Instance)> {
    let hit =
        |inst: &Instance| classify(t, inst, budget).is_some_and(|got| got == label || top_level(got) == Some(label));
    let seeds = || (0..attempts).map(|i| trial_seed(seed, i));
    if let Some((s, inst)) = seeds().map(|s| (s, biased_instance(t, s))).find(|(_, inst)| hit(inst)) {
        return Some((Generator::Biased, s, inst));
    }
    if let Some((s, inst)) = seeds().filter_map(|s| Some((s, single_exit_instance(t, s)?))).find(|(_, inst)| hit(inst))
    {
        return Some((Generator::SingleExit, s, inst));
    }
    if CASE_LABELS.contains(&label) {
        return walk_to_label(t, label, seed, attempts, budget).map(|(s, inst)| (Generator::Walk, s, inst));
    }
    None
}

#[derive(Clone, Debug)]
pub struct StressConfig {
    pub n: usize,
    pub trials: u64,
    pub fault_size: usize,
    pub edges_per_trial: usize,
    pub seed: u64,
    /// Draw fault sets from the biased mixture instead of uniformly.
    pub biased: bool,
    /// After the trials, search for an instance of every leaf label not yet
    /// reached, running at most this many constructions per stage (0 = off).
    pub target_attempts: u64,
    pub budget: SearchBudget,
}

/// A leaf label sought by the targeted pass.
#[derive(Clone, Debug, Serialize)]
pub struct TargetedRecord {
    pub label: &'static str,
    pub generator: Option<Generator>,
    pub seed: Option<u64>,
    pub attempt: Option<Attempt>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub faults: usize,
    pub attempts: Vec<Attempt>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StressReport {
    pub n: usize,
    pub seed: u64,
    pub trials: u64,
    pub fault_size: usize,
    pub edges_per_trial: usize,
    pub biased: bool,
    pub target_attempts: u64,
    pub constructions: usize,
    pub passed: usize,
    pub failures: Vec<Failure>,
    /// Occurrences of every label over all levels of all traces.
    pub label_histogram: BTreeMap<&'static str, usize>,
    /// Occurrences of each top-level group at the outermost level.
    pub top_level_histogram: BTreeMap<&'static str, usize>,
    pub unreached_top_level: Vec<&'static str>,
    pub unreached_leaves: Vec<&'static str>,
    pub stats: SearchStats,
    pub records: Vec<TrialRecord>,
    pub targeted: Vec<TargetedRecord>,
}

/// The (seed, trial) pair that reproduces a failure.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    /// `None` for an instance of the targeted pass.
    pub trial: Option<u64>,
    pub seed: u64,
    pub edge: [Vec<u8>; 2],
    pub error: Option<String>,
    pub error_kind: Option<u8>,
}

/// Fault set and edges of one trial, as a function of its seed alone.
pub fn trial_instances(t: &Topology, cfg: &StressConfig, seed: u64) -> Result<(FaultSet, Vec<Edge>), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f, first) = if cfg.biased {
        let inst = biased_instance(t, seed);
        (inst.faults, Some(inst.edge))
    } else {
        (random_conditional_faults(t, cfg.fault_size, seed).map_err(|e| e.to_string())?, None)
    };
    let free = free_edges(t, &f);
    let mut edges: Vec<Edge> = first.into_iter().collect();
    let extra = cfg.edges_per_trial.saturating_sub(edges.len()).min(free.len());
    edges.extend(free.choose_multiple(&mut rng, extra).copied());
    edges.truncate(cfg.edges_per_trial.max(1));
    Ok((f, edges))
}

/// Runs the trials in parallel; the report depends only on the config.
pub fn run_stress(t: &Topology, cfg: &StressConfig) -> StressReport {
    let mut out: Vec<(TrialRecord, SearchStats)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(cfg.seed, i);
            let mut stats = SearchStats::default();
            let attempts = match trial_instances(t, cfg, seed) {
                Ok((f, edges)) => edges.into_iter().map(|e| attempt(t, &f, e, cfg.budget, &mut stats)).collect(),
                Err(msg) => vec![Attempt {
                    edge: [vec![], vec![]],
                    ok: false,
                    labels: vec![],
                    error: Some(msg),
                    error_kind: Some(2),
                }],
            };
            let faults = if cfg.biased { 4 * cfg.n - 5 } else { cfg.fault_size };
            (TrialRecord { trial: i, seed, faults, attempts }, stats)
        })
        .collect();
    out.sort_by_key(|(r, _)| r.trial);
    let mut report = summarize(cfg, out);
    if cfg.target_attempts > 0 {
        targeted_pass(t, cfg, &mut report);
    }
    report
}

fn targeted_pass(t: &Topology, cfg: &StressConfig, report: &mut StressReport) {
    let missing: Vec<&'static str> = report.unreached_leaves.iter().copied().filter(|&l| l != "base").collect();
    let found: Vec<(TargetedRecord, SearchStats)> = missing
        .par_iter()
        .map(|&label| {
            let mut stats = SearchStats::default();
            match find_targeted(t, label, cfg.seed, cfg.target_attempts, cfg.budget) {
                Some((g, seed, inst)) => {
                    let a = attempt(t, &inst.faults, inst.edge, cfg.budget, &mut stats);
                    (TargetedRecord { label, generator: Some(g), seed: Some(seed), attempt: Some(a) }, stats)
                }
                None => (TargetedRecord { label, generator: None, seed: None, attempt: None }, stats),
            }
        })
        .collect();
    for (rec, s) in found {
        report.stats.absorb(&s);
        if let Some(a) = &rec.attempt {
            report.constructions += 1;
            if a.ok {
                report.passed += 1;
                for &l in &a.labels {
                    *report.label_histogram.entry(l).or_default() += 1;
                }
                if let Some(g) = a.labels.first().and_then(|l| top_level(l)) {
                    *report.top_level_histogram.entry(g).or_default() += 1;
                }
            } else {
                report.failures.push(Failure {
                    trial: None,
                    seed: rec.seed.unwrap_or_default(),
                    edge: a.edge.clone(),
                    error: a.error.clone(),
                    error_kind: a.error_kind,
                });
            }
        }
        report.targeted.push(rec);
    }
    report.refresh_coverage();
}

impl StressReport {
    fn refresh_coverage(&mut self) {
        let reached: Vec<&str> = self.label_histogram.keys().filter_map(|l| top_level(l)).collect();
        self.unreached_top_level = TOP_LEVEL_LABELS.iter().copied().filter(|g| !reached.contains(g)).collect();
        self.unreached_leaves = CASE_LABELS.iter().copied().filter(|l| !self.label_histogram.contains_key(l)).collect();
    }

    /// Process exit code: 0 when every construction passed, otherwise the
    /// code of the first failure.
    pub fn exit_code(&self) -> u8 {
        self.failures.first().map_or(0, |f| f.error_kind.unwrap_or(1))
    }
}

fn summarize(cfg: &StressConfig, out: Vec<(TrialRecord, SearchStats)>) -> StressReport {
    let mut stats = SearchStats::default();
    let mut label_histogram: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut top_level_histogram: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    let (mut constructions, mut passed) = (0, 0);
    let mut records = Vec::with_capacity(out.len());
    for (r, s) in out {
        stats.absorb(&s);
        for a in &r.attempts {
            constructions += 1;
            if a.ok {
                passed += 1;
                for &l in &a.labels {
                    *label_histogram.entry(l).or_default() += 1;
                }
                if let Some(g) = a.labels.first().and_then(|l| top_level(l)) {
                    *top_level_histogram.entry(g).or_default() += 1;
                }
            } else {
                failures.push(Failure {
                    trial: Some(r.trial),
                    seed: r.seed,
                    edge: a.edge.clone(),
                    error: a.error.clone(),
                    error_kind: a.error_kind,
                });
            }
        }
        records.push(r);
    }
    let mut report = StressReport {
        n: cfg.n,
        seed: cfg.seed,
        trials: cfg.trials,
        fault_size: cfg.fault_size,
        edges_per_trial: cfg.edges_per_trial,
        biased: cfg.biased,
        target_attempts: cfg.target_attempts,
        constructions,
        passed,
        failures,
        label_histogram,
        top_level_histogram,
        unreached_top_level: Vec::new(),
        unreached_leaves: Vec::new(),
        stats,
        records,
        targeted: Vec::new(),
    };
    report.refresh_coverage();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faults::is_conditional;
    use crate::topology::build_def1;

    #[test]
    fn biased_instances_are_full_and_conditional() {
        let t = build_def1(3).unwrap();
        for s in 0..200 {
            let inst = biased_instance(&t, s);
            assert_eq!(inst.faults.len(), 7, "seed {s}");
            assert!(is_conditional(&t, &inst.faults));
            assert!(!inst.faults.contains(inst.edge));
        }
    }

    #[test]
    fn single_exit_instances_reach_their_subcase() {
        let t = build_def1(3).unwrap();
        let hit = (0..50)
            .filter_map(|s| single_exit_instance(&t, s))
            .any(|inst| classify(&t, &inst, SearchBudget::default()) == Some("1.1.1.2.1"));
        assert!(hit);
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
