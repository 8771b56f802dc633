//! Directed Hamiltonian s–t path search by pruned depth-first backtracking.

use std::time::Instant;

use super::{SearchBudget, SearchStats};

/// Which prunes are active. All on by default; the unpruned setting exists
/// to cross-check completeness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prunes {
    pub parity: bool,
    pub degree: bool,
    pub connectivity: bool,
    pub ordering: bool,
}

impl Prunes {
    pub const ALL: Prunes = Prunes { parity: true, degree: true, connectivity: true, ordering: true };
    pub const NONE: Prunes = Prunes { parity: false, degree: false, connectivity: false, ordering: false };
}

impl Default for Prunes {
    fn default() -> Self {
        Prunes::ALL
    }
}

/// A digraph on 0..len with a two-colouring used by the parity prune.
pub(crate) struct Digraph {
    pub out: Vec<Vec<u32>>,
    pub inn: Vec<Vec<u32>>,
    pub black: Vec<bool>,
}

impl Digraph {
    pub fn new(black: Vec<bool>) -> Digraph {
        let len = black.len();
        Digraph { out: vec![Vec::new(); len], inn: vec![Vec::new(); len], black }
    }

    pub fn add_arc(&mut self, a: u32, b: u32) {
        if !self.out[a as usize].contains(&b) {
            self.out[a as usize].push(b);
            self.inn[b as usize].push(a);
        }
    }

    pub fn remove_arcs_into(&mut self, b: u32) {
        for a in std::mem::take(&mut self.inn[b as usize]) {
            self.out[a as usize].retain(|&x| x != b);
        }
    }

    pub fn remove_edge(&mut self, a: u32, b: u32) {
        self.out[a as usize].retain(|&x| x != b);
        self.out[b as usize].retain(|&x| x != a);
        self.inn[a as usize].retain(|&x| x != b);
        self.inn[b as usize].retain(|&x| x != a);
    }

    fn len(&self) -> usize {
        self.black.len()
    }

    fn bipartite(&self) -> bool {
        self.out.iter().enumerate().all(|(a, outs)| outs.iter().all(|&b| self.black[a] != self.black[b as usize]))
    }
}

pub(crate) enum Outcome {
    Found(Vec<u32>),
    Absent,
    OutOfBudget,
}

struct Search<'g> {
    g: &'g Digraph,
    target: u32,
    prunes: Prunes,
    parity: bool,
    visited: Vec<bool>,
    path: Vec<u32>,
    // Unvisited vertices per colour (index 1 = black).
    left: [usize; 2],
    stats: SearchStats,
    node_limit: u64,
    deadline: Instant,
    out_of_budget: bool,
    mark: Vec<u32>,
    stamp: u32,
    stack: Vec<u32>,
    salt: u64,
}

/// Node cap of the first attempt; each restart doubles it.
const FIRST_ATTEMPT_NODES: u64 = 20_000;

/// Searches for a directed Hamiltonian path from `s` to `target`.
pub(crate) fn hamiltonian_path(
    g: &Digraph,
    s: u32,
    target: u32,
    budget: &SearchBudget,
    prunes: Prunes,
    stats: &mut SearchStats,
) -> Outcome {
    let len = g.len();
    if len == 0 || (s == target && len > 1) {
        return Outcome::Absent;
    }
    let mut left = [0usize; 2];
    for &b in &g.black {
        left[b as usize] += 1;
    }
    let deadline = Instant::now() + budget.time_limit;
    let parity = prunes.parity && g.bipartite();
    let mut spent = 0u64;
    let mut cap = FIRST_ATTEMPT_NODES;
    let mut salt = 0u64;
    loop {
        // Without the ordering heuristic a restart would repeat itself.
        let last = !prunes.ordering || spent + 2 * cap >= budget.node_limit;
        let limit = if last { budget.node_limit - spent } else { cap };
        let mut search = Search {
            g,
            target,
            prunes,
            parity,
            visited: vec![false; len],
            path: Vec::with_capacity(len),
            left,
            stats: SearchStats::default(),
            node_limit: limit,
            deadline,
            out_of_budget: false,
            mark: vec![0; len],
            stamp: 0,
            stack: Vec::with_capacity(len),
            salt,
        };
        search.push(s);
        let found = search.extend();
        stats.absorb(&search.stats);
        spent += search.stats.nodes;
        if found {
            return Outcome::Found(search.path);
        }
        // A search that ran to completion proves absence whatever its order.
        if !search.out_of_budget {
            return Outcome::Absent;
        }
        if last || Instant::now() >= deadline {
            return Outcome::OutOfBudget;
        }
        cap *= 2;
        salt += 1;
    }
}

/// Tie-break key; salt 0 keeps the natural order.
fn mix(x: u32, salt: u64) -> u64 {
    if salt == 0 {
        return x as u64;
    }
    let mut z = (x as u64).wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Search<'_> {
    fn push(&mut self, v: u32) {
        self.visited[v as usize] = true;
        self.left[self.g.black[v as usize] as usize] -= 1;
        self.path.push(v);
    }

    fn pop(&mut self) {
        let v = self.path.pop().unwrap();
        self.visited[v as usize] = false;
        self.left[self.g.black[v as usize] as usize] += 1;
    }

    fn remaining(&self) -> usize {
        self.left[0] + self.left[1]
    }

    fn extend(&mut self) -> bool {
        self.stats.nodes += 1;
        if self.stats.nodes >= self.node_limit || (self.stats.nodes & 0xfff == 0 && Instant::now() >= self.deadline) {
            self.out_of_budget = true;
            return false;
        }
        let head = *self.path.last().unwrap();
        let rem = self.remaining();
        if rem == 0 {
            return head == self.target;
        }
        if head == self.target {
            return false;
        }
        if self.parity && !self.parity_ok(head, rem) {
            self.stats.parity_prunes += 1;
            return false;
        }
        let forced = if self.prunes.degree {
            match self.degree_scan(head, rem) {
                Err(()) => {
                    self.stats.degree_prunes += 1;
                    return false;
                }
                Ok(f) => f,
            }
        } else {
            None
        };
        if self.prunes.connectivity && !self.reachable_all(head, rem) {
            self.stats.connectivity_prunes += 1;
            return false;
        }
        let mut cands: Vec<(usize, u64, u32)> = match forced {
            Some(x) => {
                self.stats.forced_moves += 1;
                vec![(0, 0, x)]
            }
            None => self.g.out[head as usize]
                .iter()
                .copied()
                .filter(|&x| !self.visited[x as usize] && (x != self.target || rem == 1))
                .map(|x| (self.onward(x), mix(x, self.salt), x))
                .collect(),
        };
        if self.prunes.ordering {
            cands.sort_unstable();
        }
        for (_, _, x) in cands {
            self.push(x);
            if self.extend() {
                return true;
            }
            self.pop();
            if self.out_of_budget {
                return false;
            }
        }
        false
    }

    fn onward(&self, x: u32) -> usize {
        self.g.out[x as usize].iter().filter(|&&y| !self.visited[y as usize]).count()
    }

    // Vertices still to come must alternate colours starting opposite the head.
    fn parity_ok(&self, head: u32, rem: usize) -> bool {
        let hb = self.g.black[head as usize] as usize;
        let opposite = self.left[1 - hb];
        if opposite != rem.div_ceil(2) {
            return false;
        }
        let tb = self.g.black[self.target as usize] as usize;
        (tb != hb) == (rem % 2 == 1)
    }

    /// Fails when an unvisited vertex cannot be entered or left; returns a
    /// vertex that must come right after the head, if any.
    fn degree_scan(&self, head: u32, rem: usize) -> Result<Option<u32>, ()> {
        let mut forced = None;
        for x in 0..self.g.len() as u32 {
            if self.visited[x as usize] {
                continue;
            }
            let mut ins = 0;
            let mut head_in = false;
            for &y in &self.g.inn[x as usize] {
                if y == head {
                    ins += 1;
                    head_in = true;
                } else if !self.visited[y as usize] && y != self.target {
                    ins += 1;
                }
            }
            if ins == 0 {
                return Err(());
            }
            let must_follow_head = if x == self.target {
                if ins == 1 && head_in && rem > 1 {
                    return Err(());
                }
                false
            } else {
                let mut outs = 0;
                let mut distinct = ins;
                for &y in &self.g.out[x as usize] {
                    if !self.visited[y as usize] {
                        outs += 1;
                        let counted = y == head || (y != self.target && self.g.inn[x as usize].contains(&y));
                        if !counted {
                            distinct += 1;
                        }
                    }
                }
                if outs == 0 || distinct < 2 {
                    return Err(());
                }
                // Only the head can enter x, or x has exactly two usable
                // neighbours and one of them is the head, which cannot follow x.
                head_in && (ins == 1 || distinct == 2)
            };
            if must_follow_head {
                if forced.is_some_and(|f| f != x) {
                    return Err(());
                }
                forced = Some(x);
            }
        }
        Ok(forced)
    }

    /// Every unvisited vertex must be reachable from the head through
    /// unvisited vertices.
    fn reachable_all(&mut self, head: u32, rem: usize) -> bool {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        self.stack.clear();
        self.stack.push(head);
        let mut reached = 0;
        while let Some(v) = self.stack.pop() {
            for i in 0..self.g.out[v as usize].len() {
                let w = self.g.out[v as usize][i];
                if self.visited[w as usize] || self.mark[w as usize] == stamp {
                    continue;
                }
                self.mark[w as usize] = stamp;
                reached += 1;
                // The target ends the path, so nothing is reached through it.
                if w != self.target {
                    self.stack.push(w);
                }
            }
        }
        reached == rem
    }
}
