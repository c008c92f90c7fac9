//! Immutable vertex-indexed graphs with cached distances, distance
//! regularity checks, and graph6 / CSV / JSON export.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf::Field;
use crate::subspace::{Subspace, SubspaceRows};

/// Version tag of the canonical vertex ordering, written into every report.
pub const ORDERING_VERSION: &str = "rref-lex/1";

/// Distance tables are cached up to this many vertices.
pub const DISTANCE_CACHE_LIMIT: usize = 5000;

const UNREACHABLE: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex index {0} out of range for a graph on {1} vertices")]
    BadIndex(usize, usize),
    #[error("vertices {0} and {1} are in different components")]
    Unreachable(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("not distance-regular: pair ({u}, {v}) at distance {distance} has (c, a, b) = {got:?}, expected {expected:?}")]
    NotDistanceRegular {
        u: usize,
        v: usize,
        distance: usize,
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("vertex {v} has degree {got}, expected {expected}")]
    NotRegular { v: usize, expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    neighbors: Vec<Vec<usize>>,
    distances: Option<Vec<u8>>,
}

impl FiniteGraph {
    /// Builds from per-vertex neighbor lists; lists are sorted and the
    /// distance cache is filled when the graph is small enough.
    pub fn from_neighbors(mut neighbors: Vec<Vec<usize>>) -> Self {
        for ns in &mut neighbors {
            ns.sort_unstable();
            ns.dedup();
        }
        let mut g = FiniteGraph { neighbors, distances: None };
        if g.order() <= DISTANCE_CACHE_LIMIT {
            let n = g.order();
            let rows: Vec<Vec<u8>> = (0..n).into_par_iter().map(|s| g.bfs_row(s)).collect();
            g.distances = Some(rows.concat());
        }
        g
    }

    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Self {
        let mut neighbors = vec![Vec::new(); order];
        for &(u, v) in edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        Self::from_neighbors(neighbors)
    }

    /// Graph on `order` vertices where `adjacent(i, j)` is evaluated for
    /// every `i < j`, in parallel over `i`.
    pub fn from_predicate<F>(order: usize, adjacent: F) -> Self
    where
        F: Fn(usize, usize) -> bool + Sync,
    {
        let upper: Vec<Vec<usize>> = (0..order)
            .into_par_iter()
            .map(|i| (i + 1..order).filter(|&j| adjacent(i, j)).collect())
            .collect();
        let mut neighbors = vec![Vec::new(); order];
        for (i, js) in upper.into_iter().enumerate() {
            for j in js {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
        Self::from_neighbors(neighbors)
    }

    pub fn order(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, ns) in self.neighbors.iter().enumerate() {
            out.extend(ns.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn has_distance_cache(&self) -> bool {
        self.distances.is_some()
    }

    fn bfs_row(&self, source: usize) -> Vec<u8> {
        let mut dist = vec![UNREACHABLE; self.order()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.neighbors[u] {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Distances from `source` to every vertex (`None` = unreachable).
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let row = match &self.distances {
            Some(d) => d[source * self.order()..(source + 1) * self.order()].to_vec(),
            None => self.bfs_row(source),
        };
        row.into_iter().map(|d| (d != UNREACHABLE).then_some(d as usize)).collect()
    }

    /// Shortest-path length, from the cache when present and BFS otherwise.
    pub fn distance(&self, a: usize, b: usize) -> Result<usize, GraphError> {
        let n = self.order();
        for x in [a, b] {
            if x >= n {
                return Err(GraphError::BadIndex(x, n));
            }
        }
        let d = match &self.distances {
            Some(d) => d[a * n + b],
            None => self.bfs_row(a)[b],
        };
        if d == UNREACHABLE {
            Err(GraphError::Unreachable(a, b))
        } else {
            Ok(d as usize)
        }
    }

    /// Cached distance lookup; panics without a cache.
    #[inline]
    pub fn cached_distance(&self, a: usize, b: usize) -> u8 {
        self.distances.as_ref().expect("distance cache")[a * self.order() + b]
    }

    pub fn is_connected(&self) -> bool {
        self.order() == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    pub fn diameter(&self) -> Result<usize, GraphError> {
        let mut best = 0;
        for s in 0..self.order() {
            for d in self.distances_from(s) {
                best = best.max(d.ok_or(GraphError::Disconnected)?);
            }
        }
        Ok(best)
    }

    /// Subgraph induced on `vertices` (re-indexed in the given order).
    pub fn induced(&self, vertices: &[usize]) -> FiniteGraph {
        let index: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let neighbors = vertices
            .iter()
            .map(|v| self.neighbors[*v].iter().filter_map(|w| index.get(w).copied()).collect())
            .collect();
        FiniteGraph::from_neighbors(neighbors)
    }

    pub fn complete(order: usize) -> FiniteGraph {
        FiniteGraph::from_predicate(order, |_, _| true)
    }

    pub fn path(order: usize) -> FiniteGraph {
        let edges: Vec<_> = (1..order).map(|i| (i - 1, i)).collect();
        FiniteGraph::from_edges(order, &edges)
    }
}

/// Unweighted shortest-path distance, always by a fresh BFS.
pub fn bfs_distance(g: &FiniteGraph, a: usize, b: usize) -> Result<usize, GraphError> {
    let n = g.order();
    for x in [a, b] {
        if x >= n {
            return Err(GraphError::BadIndex(x, n));
        }
    }
    match g.bfs_row(a)[b] {
        UNREACHABLE => Err(GraphError::Unreachable(a, b)),
        d => Ok(d as usize),
    }
}

/// Empirical intersection numbers of a distance-regular graph.
///
/// `rows[i] = (c_i, a_i, b_i)` for `1 <= i <= diameter`; `degree = b_0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionNumbers {
    pub degree: usize,
    pub diameter: usize,
    pub rows: BTreeMap<usize, (usize, usize, usize)>,
}

impl IntersectionNumbers {
    /// The intersection array `{b_0, ..., b_{D-1}; c_1, ..., c_D}`.
    pub fn intersection_array(&self) -> (Vec<usize>, Vec<usize>) {
        let mut bs = vec![self.degree];
        bs.extend((1..self.diameter).map(|i| self.rows[&i].2));
        let cs = (1..=self.diameter).map(|i| self.rows[&i].0).collect();
        (bs, cs)
    }
}

/// Counts, for every ordered pair `(u, v)` at distance `i`, the neighbours of
/// `v` at distance `i-1`, `i`, `i+1` from `u`. Succeeds iff these counts
/// depend on `i` alone.
pub fn intersection_numbers(g: &FiniteGraph) -> Result<IntersectionNumbers, GraphError> {
    let n = g.order();
    if n == 0 {
        return Ok(IntersectionNumbers { degree: 0, diameter: 0, rows: BTreeMap::new() });
    }
    let degree = g.degree(0);
    if let Some(v) = (0..n).find(|&v| g.degree(v) != degree) {
        return Err(GraphError::NotRegular { v, expected: degree, got: g.degree(v) });
    }
    // per source: first violation or the observed table; scanned in order
    let per_source: Vec<Result<BTreeMap<usize, ((usize, usize, usize), usize)>, GraphError>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let dist = g.distances_from(u);
            let mut seen: BTreeMap<usize, ((usize, usize, usize), usize)> = BTreeMap::new();
            for v in 0..n {
                let i = dist[v].ok_or(GraphError::Disconnected)?;
                if i == 0 {
                    continue;
                }
                let mut counts = (0, 0, 0);
                for &w in g.neighbors(v) {
                    let dw = dist[w].expect("neighbour of a reachable vertex");
                    if dw + 1 == i {
                        counts.0 += 1;
                    } else if dw == i {
                        counts.1 += 1;
                    } else {
                        counts.2 += 1;
                    }
                }
                match seen.get(&i) {
                    None => {
                        seen.insert(i, (counts, v));
                    }
                    Some(&(expected, _)) if expected != counts => {
                        return Err(GraphError::NotDistanceRegular { u, v, distance: i, expected, got: counts });
                    }
                    Some(_) => {}
                }
            }
            Ok(seen)
        })
        .collect();

    let mut rows: BTreeMap<usize, (usize, usize, usize)> = BTreeMap::new();
    for (u, table) in per_source.into_iter().enumerate() {
        for (i, (counts, v)) in table? {
            match rows.get(&i) {
                None => {
                    rows.insert(i, counts);
                }
                Some(&expected) if expected != counts => {
                    return Err(GraphError::NotDistanceRegular { u, v, distance: i, expected, got: counts });
                }
                Some(_) => {}
            }
        }
    }
    let diameter = rows.keys().next_back().copied().unwrap_or(0);
    Ok(IntersectionNumbers { degree, diameter, rows })
}

fn graph6_size(n: usize, out: &mut Vec<u8>) {
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
}

/// graph6 encoding: size prefix, then the upper triangle of the adjacency
/// matrix column by column (`x(0,1), x(0,2), x(1,2), x(0,3), ...`) packed
/// six bits per byte, each byte offset by 63. No trailing newline.
pub fn to_graph6(g: &FiniteGraph) -> String {
    let n = g.order();
    let mut out = Vec::new();
    graph6_size(n, &mut out);
    let mut acc = 0u8;
    let mut bits = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | g.is_adjacent(i, j) as u8;
            bits += 1;
            if bits == 6 {
                out.push(acc + 63);
                acc = 0;
                bits = 0;
            }
        }
    }
    if bits > 0 {
        out.push((acc << (6 - bits)) + 63);
    }
    String::from_utf8(out).expect("graph6 is printable ASCII")
}

/// Edge list with header `u,v`, one edge per line, `u < v`.
pub fn to_edge_csv(g: &FiniteGraph) -> String {
    let mut s = String::from("u,v\n");
    for (u, v) in g.edges() {
        s.push_str(&format!("{u},{v}\n"));
    }
    s
}

/// A graph whose vertices are subspaces, listed in canonical order.
#[derive(Debug, Clone)]
pub struct SubspaceGraph {
    vertices: Vec<Subspace>,
    index: HashMap<Subspace, usize>,
    graph: FiniteGraph,
}

impl SubspaceGraph {
    /// Vertices must already be sorted canonically; `adjacent` is
    /// `dim(A ∩ B) = dim - 1`.
    pub fn new(field: &Field, vertices: Vec<Subspace>) -> Self {
        let graph = FiniteGraph::from_predicate(vertices.len(), |i, j| {
            let a = &vertices[i];
            a.meet_dim(field, &vertices[j]) + 1 == a.dim()
        });
        Self::with_graph(vertices, graph)
    }

    pub fn with_graph(vertices: Vec<Subspace>, graph: FiniteGraph) -> Self {
        let index = vertices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        SubspaceGraph { vertices, index, graph }
    }

    pub fn vertices(&self) -> &[Subspace] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Subspace {
        &self.vertices[i]
    }

    pub fn index_of(&self, s: &Subspace) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            ordering_version: ORDERING_VERSION,
            order: self.order(),
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(index, s)| VertexJson { index, basis: s.into() })
                .collect(),
            adjacency: (0..self.order()).map(|v| self.graph.neighbors(v).to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexJson {
    pub index: usize,
    pub basis: SubspaceRows,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphJson {
    pub ordering_version: &'static str,
    pub order: usize,
    pub vertices: Vec<VertexJson>,
    pub adjacency: Vec<Vec<usize>>,
}
