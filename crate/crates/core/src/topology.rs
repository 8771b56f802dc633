//! Balanced hypercube construction, edge dimensions and the four-way split
//! along one dimension.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Largest dimension accepted by the builders. Memory grows as n·4ⁿ.
pub const MAX_DIMENSION: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("dimension {0} outside the accepted range 1..={MAX_DIMENSION}")]
    DimensionOutOfRange(usize),
    #[error("digit {0} is not in 0..=3")]
    InvalidDigit(u8),
    #[error("label has {got} digits, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(Vertex, Vertex),
    #[error("cannot split: {0}")]
    BadSplit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::White => "white",
            Color::Black => "black",
        })
    }
}

/// A vertex label (a₀,…,a_{n−1}) packed two bits per digit, a₀ lowest.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    code: u16,
    n: u8,
}

impl Vertex {
    pub fn from_digits(digits: &[u8]) -> Result<Vertex, TopologyError> {
        if digits.is_empty() || digits.len() > MAX_DIMENSION {
            return Err(TopologyError::DimensionOutOfRange(digits.len()));
        }
        let mut code = 0u32;
        for (i, &d) in digits.iter().enumerate() {
            if d > 3 {
                return Err(TopologyError::InvalidDigit(d));
            }
            code |= (d as u32) << (2 * i);
        }
        Ok(Vertex { code: code as u16, n: digits.len() as u8 })
    }

    /// The vertex whose packed code is `index` in a topology of dimension `n`.
    pub fn from_index(n: usize, index: usize) -> Vertex {
        debug_assert!((1..=MAX_DIMENSION).contains(&n) && index < 1 << (2 * n));
        Vertex { code: index as u16, n: n as u8 }
    }

    pub fn index(self) -> usize {
        self.code as usize
    }

    pub fn dimension(self) -> usize {
        self.n as usize
    }

    pub fn digit(self, i: usize) -> u8 {
        debug_assert!(i < self.n as usize);
        ((self.code >> (2 * i)) & 3) as u8
    }

    pub fn with_digit(self, i: usize, d: u8) -> Vertex {
        let shift = 2 * i;
        let code = (self.code & !(3 << shift)) | (((d & 3) as u16) << shift);
        Vertex { code, n: self.n }
    }

    pub fn digits(self) -> Vec<u8> {
        (0..self.n as usize).map(|i| self.digit(i)).collect()
    }

    pub fn color(self) -> Color {
        if self.digit(0) & 1 == 1 {
            Color::Black
        } else {
            Color::White
        }
    }

    // Digits reversed so that integer order is lexicographic order from a₀.
    fn lex_key(self) -> u32 {
        let mut key = 0u32;
        for i in 0..self.n as usize {
            key = (key << 2) | self.digit(i) as u32;
        }
        key
    }
}

/// Free-function form of [`Vertex::color`].
pub fn color(v: Vertex) -> Color {
    v.color()
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.lex_key()).cmp(&(other.n, other.lex_key()))
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for i in 0..self.n as usize {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", self.digit(i))?;
        }
        f.write_str(")")
    }
}

impl serde::Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.digits().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Vertex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let digits = Vec::<u8>::deserialize(d)?;
        Vertex::from_digits(&digits).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Dimension of the edge `uv`, or an error when the two labels are not
/// adjacent.
///
/// Adjacency: a₀ changes by ±1 and either nothing else changes (dimension 0)
/// or exactly one a_i changes by (−1)^{a₀} read from the white endpoint.
pub fn edge_dimension(u: Vertex, v: Vertex) -> Result<usize, TopologyError> {
    if u.n != v.n {
        return Err(TopologyError::NotAdjacent(u, v));
    }
    let n = u.n as usize;
    let step = (u.digit(0) + 4 - v.digit(0)) % 4;
    if step != 1 && step != 3 {
        return Err(TopologyError::NotAdjacent(u, v));
    }
    let (white, black) = if u.color() == Color::White { (u, v) } else { (v, u) };
    let mut changed = None;
    for i in 1..n {
        if u.digit(i) != v.digit(i) {
            if changed.is_some() || black.digit(i) != (white.digit(i) + 1) % 4 {
                return Err(TopologyError::NotAdjacent(u, v));
            }
            changed = Some(i);
        }
    }
    Ok(changed.unwrap_or(0))
}

/// An edge stored with its lexicographically smaller endpoint first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    u: Vertex,
    v: Vertex,
    dim: u8,
}

impl Edge {
    pub fn new(a: Vertex, b: Vertex) -> Result<Edge, TopologyError> {
        let dim = edge_dimension(a, b)?;
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Ok(Edge { u, v, dim: dim as u8 })
    }

    pub fn u(self) -> Vertex {
        self.u
    }

    pub fn v(self) -> Vertex {
        self.v
    }

    pub fn dim(self) -> usize {
        self.dim as usize
    }

    pub fn endpoints(self) -> (Vertex, Vertex) {
        (self.u, self.v)
    }

    pub fn has(self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint other than `x`.
    pub fn other(self, x: Vertex) -> Vertex {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn joins(self, a: Vertex, b: Vertex) -> bool {
        (self.u == a && self.v == b) || (self.u == b && self.v == a)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}[{}]", self.u, self.v, self.dim)
    }
}

/// An immutable BHₙ.
#[derive(Clone)]
pub struct Topology {
    n: usize,
    // 2n neighbours per vertex, ordered by dimension (a₀+1 side first).
    nbrs: Vec<Vertex>,
    by_dim: Vec<Vec<Edge>>,
}

impl fmt::Debug for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Topology(BH{})", self.n)
    }
}

fn check_dimension(n: usize) -> Result<(), TopologyError> {
    if (1..=MAX_DIMENSION).contains(&n) {
        Ok(())
    } else {
        Err(TopologyError::DimensionOutOfRange(n))
    }
}

/// The two neighbours of `v` along dimension `d` under the direct rule.
fn def1_pair(v: Vertex, d: usize) -> [Vertex; 2] {
    let a0 = v.digit(0);
    let up = v.with_digit(0, (a0 + 1) % 4);
    let down = v.with_digit(0, (a0 + 3) % 4);
    if d == 0 {
        return [up, down];
    }
    let shifted = if a0.is_multiple_of(2) { (v.digit(d) + 1) % 4 } else { (v.digit(d) + 3) % 4 };
    [up.with_digit(d, shifted), down.with_digit(d, shifted)]
}

/// BHₙ from the direct adjacency rule.
pub fn build_def1(n: usize) -> Result<Topology, TopologyError> {
    check_dimension(n)?;
    let count = 1usize << (2 * n);
    let mut nbrs = Vec::with_capacity(count * 2 * n);
    for idx in 0..count {
        let v = Vertex::from_index(n, idx);
        for d in 0..n {
            nbrs.extend_from_slice(&def1_pair(v, d));
        }
    }
    Ok(Topology::assemble(n, nbrs))
}

/// BHₙ from the four-copy recursion starting at the 4-cycle.
pub fn build_def2(n: usize) -> Result<Topology, TopologyError> {
    check_dimension(n)?;
    // Edge list over packed codes of the current level.
    let mut edges: Vec<(usize, usize)> = vec![(0, 1), (1, 2), (2, 3), (3, 0)];
    for level in 2..=n {
        let top = level - 1;
        let copy = 1usize << (2 * top);
        let mut next = Vec::with_capacity(edges.len() * 4 + copy * 8);
        for i in 0..4 {
            for &(a, b) in &edges {
                next.push((a + i * copy, b + i * copy));
            }
        }
        for i in 0..4usize {
            for low in 0..copy {
                let a0 = low & 3;
                let target = if a0.is_multiple_of(2) { (i + 1) % 4 } else { (i + 3) % 4 };
                for a0n in [(a0 + 1) % 4, (a0 + 3) % 4] {
                    let other = (low & !3) | a0n;
                    let (x, y) = (low + i * copy, other + target * copy);
                    // Each extra edge is produced from both ends; keep the white one.
                    if a0.is_multiple_of(2) {
                        next.push((x, y));
                    }
                }
            }
        }
        edges = next;
    }
    let count = 1usize << (2 * n);
    let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); count];
    for &(a, b) in &edges {
        lists[a].push(Vertex::from_index(n, b));
        lists[b].push(Vertex::from_index(n, a));
    }
    let mut nbrs = Vec::with_capacity(count * 2 * n);
    for (idx, list) in lists.into_iter().enumerate() {
        let v = Vertex::from_index(n, idx);
        if list.len() != 2 * n {
            return Err(TopologyError::BadSplit(format!("recursion gave {v} degree {}", list.len())));
        }
        // Re-order into the dimension-major layout shared with build_def1.
        let mut slots: Vec<Option<Vertex>> = vec![None; 2 * n];
        for w in list {
            let d = edge_dimension(v, w)?;
            let side = if (w.digit(0) + 4 - v.digit(0)) % 4 == 1 { 0 } else { 1 };
            if slots[2 * d + side].replace(w).is_some() {
                return Err(TopologyError::BadSplit(format!("parallel edge at {v}")));
            }
        }
        for s in slots {
            nbrs.push(s.expect("every slot filled when the degree is 2n"));
        }
    }
    Ok(Topology::assemble(n, nbrs))
}

impl Topology {
    fn assemble(n: usize, nbrs: Vec<Vertex>) -> Topology {
        let mut by_dim = vec![Vec::with_capacity(1 << (2 * n)); n];
        let count = 1usize << (2 * n);
        for idx in 0..count {
            let v = Vertex::from_index(n, idx);
            for d in 0..n {
                for &w in &nbrs[idx * 2 * n + 2 * d..idx * 2 * n + 2 * d + 2] {
                    if v < w {
                        by_dim[d].push(Edge { u: v, v: w, dim: d as u8 });
                    }
                }
            }
        }
        for list in &mut by_dim {
            list.sort();
        }
        Topology { n, nbrs, by_dim }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn edge_count(&self) -> usize {
        self.by_dim.iter().map(Vec::len).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count()).map(move |i| Vertex::from_index(self.n, i))
    }

    /// Vertices in lexicographic digit order.
    pub fn vertices_sorted(&self) -> Vec<Vertex> {
        let mut vs: Vec<Vertex> = self.vertices().collect();
        vs.sort();
        vs
    }

    /// The 2n neighbours of `v`; entries 2d and 2d+1 are its d-dimension neighbours.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let i = v.index() * 2 * self.n;
        &self.nbrs[i..i + 2 * self.n]
    }

    pub fn dim_neighbors(&self, v: Vertex, d: usize) -> [Vertex; 2] {
        let i = v.index() * 2 * self.n + 2 * d;
        [self.nbrs[i], self.nbrs[i + 1]]
    }

    /// Neighbours of `v` with the dimension of the joining edge.
    pub fn neighbors_with_dim(&self, v: Vertex) -> impl Iterator<Item = (Vertex, usize)> + '_ {
        self.neighbors(v).iter().enumerate().map(|(k, &w)| (w, k / 2))
    }

    pub fn is_adjacent(&self, a: Vertex, b: Vertex) -> bool {
        a.n as usize == self.n && self.neighbors(a).contains(&b)
    }

    /// The edge `ab` of this topology.
    pub fn edge(&self, a: Vertex, b: Vertex) -> Result<Edge, TopologyError> {
        if !self.contains(a) || !self.contains(b) || !self.is_adjacent(a, b) {
            return Err(TopologyError::NotAdjacent(a, b));
        }
        Edge::new(a, b)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.n as usize == self.n
    }

    pub fn vertex(&self, digits: &[u8]) -> Result<Vertex, TopologyError> {
        if digits.len() != self.n {
            return Err(TopologyError::WrongLength { got: digits.len(), expected: self.n });
        }
        Vertex::from_digits(digits)
    }

    /// ∂D_d in canonical order.
    pub fn edges_of_dim(&self, d: usize) -> &[Edge] {
        &self.by_dim[d]
    }

    /// All edges, grouped by dimension and canonically ordered inside each group.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.by_dim.iter().flatten().copied()
    }

    /// All edges in canonical order.
    pub fn edges_sorted(&self) -> Vec<Edge> {
        let mut es: Vec<Edge> = self.edges().collect();
        es.sort();
        es
    }

    /// BHₙ as a sub-cube with every dimension active.
    pub fn whole(&self) -> SubCube {
        SubCube { n: self.n, fixed: Vec::new(), dims: (0..self.n).collect(), vertices: self.vertices().collect() }
    }
}

/// Label of `v` in the split along dimension `j`: a_j for j ≥ 1, and for
/// j = 0 the value (a₁+…+a_{n−1} − [a₀ odd]) mod 4, which is constant on
/// the components of BHₙ − ∂D_0.
pub fn split_label(v: Vertex, j: usize) -> u8 {
    if j > 0 {
        return v.digit(j);
    }
    let sum: u32 = (1..v.dimension()).map(|i| v.digit(i) as u32).sum();
    let odd = (v.digit(0) & 1) as u32;
    ((sum + 4 - odd) % 4) as u8
}

/// Label step taken by a j-dimension edge leaving a white vertex.
pub fn white_step(j: usize) -> u8 {
    if j == 0 {
        3
    } else {
        1
    }
}

/// A component obtained from BHₙ by deleting the edges of some dimensions.
///
/// `fixed` lists the deleted dimensions together with the split label this
/// component carries for each; `dims` are the dimensions still present.
#[derive(Clone, PartialEq, Eq)]
pub struct SubCube {
    n: usize,
    fixed: Vec<(usize, u8)>,
    dims: Vec<usize>,
    vertices: Vec<Vertex>,
}

impl fmt::Debug for SubCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubCube(level {}, fixed {:?})", self.level(), self.fixed)
    }
}

impl SubCube {
    /// Number of active dimensions; the component is a BH of this dimension.
    pub fn level(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn fixed(&self) -> &[(usize, u8)] {
        &self.fixed
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.dimension() == self.n && self.fixed.iter().all(|&(d, l)| split_label(v, d) == l)
    }

    /// Whether the edge lies inside this component.
    pub fn has_edge(&self, e: Edge) -> bool {
        self.dims.contains(&e.dim()) && self.contains(e.u()) && self.contains(e.v())
    }

    /// Neighbours of `v` inside the component.
    pub fn neighbors<'a>(&'a self, t: &'a Topology, v: Vertex) -> impl Iterator<Item = Vertex> + 'a {
        self.dims.iter().flat_map(move |&d| t.dim_neighbors(v, d))
    }

    /// Edges inside the component, canonical order.
    pub fn edges(&self, t: &Topology) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.len() * self.level());
        for &v in &self.vertices {
            for &d in &self.dims {
                for w in t.dim_neighbors(v, d) {
                    if v < w {
                        out.push(Edge { u: v, v: w, dim: d as u8 });
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// The four components left after deleting dimension `j`, indexed by split label.
    pub fn split(&self, j: usize) -> Result<[SubCube; 4], TopologyError> {
        if self.level() < 2 {
            return Err(TopologyError::BadSplit("a BH1 has no split".into()));
        }
        if !self.dims.contains(&j) {
            return Err(TopologyError::BadSplit(format!("dimension {j} is not active")));
        }
        let dims: Vec<usize> = self.dims.iter().copied().filter(|&d| d != j).collect();
        let mut parts: [Vec<Vertex>; 4] = Default::default();
        for &v in &self.vertices {
            parts[split_label(v, j) as usize].push(v);
        }
        Ok(std::array::from_fn(|i| {
            let mut fixed = self.fixed.clone();
            fixed.push((j, i as u8));
            SubCube { n: self.n, fixed, dims: dims.clone(), vertices: std::mem::take(&mut parts[i]) }
        }))
    }
}

/// A cross edge of a partition together with the labels of the components
/// it joins (label of `edge.u()` first).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossEdge {
    pub edge: Edge,
    pub labels: (u8, u8),
}

/// The split of BHₙ along dimension `j` into four copies of BH_{n−1}.
#[derive(Clone, Debug)]
pub struct Partition {
    j: usize,
    parts: [SubCube; 4],
    cross: Vec<CrossEdge>,
}

impl Partition {
    pub fn split_dimension(&self) -> usize {
        self.j
    }

    pub fn component(&self, i: usize) -> &SubCube {
        &self.parts[i]
    }

    pub fn components(&self) -> &[SubCube; 4] {
        &self.parts
    }

    pub fn cross_edges(&self) -> &[CrossEdge] {
        &self.cross
    }

    /// Label of the component holding `v`.
    pub fn label_of(&self, v: Vertex) -> u8 {
        split_label(v, self.j)
    }
}

pub fn partition_by_dimension(t: &Topology, j: usize) -> Result<Partition, TopologyError> {
    if t.n() < 2 {
        return Err(TopologyError::BadSplit("n must be at least 2".into()));
    }
    if j >= t.n() {
        return Err(TopologyError::BadSplit(format!("dimension {j} out of range for n = {}", t.n())));
    }
    let parts = t.whole().split(j)?;
    let cross = t
        .edges_of_dim(j)
        .iter()
        .map(|&edge| CrossEdge { edge, labels: (split_label(edge.u(), j), split_label(edge.v(), j)) })
        .collect();
    Ok(Partition { j, parts, cross })
}
