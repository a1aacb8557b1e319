//! Graph and matching primitives: bitset-backed graphs over a canonical
//! edge index, canonical matchings, reproducible G(n,p) / G(n,m) samplers.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = u32;
/// Undirected edge stored as (min, max).
pub type Edge = (Vertex, Vertex);

/// Number of edge slots C(n,2).
pub fn edge_slots(n: u32) -> u64 {
    let n = n as u64;
    n * (n - 1) / 2
}

/// Canonical edge index: e(u,v) = u*n - u(u+1)/2 + (v-u-1) for u < v.
/// Bijection onto 0..C(n,2)-1, ascending in (u, v).
pub fn edge_index(n: u32, u: Vertex, v: Vertex) -> u64 {
    debug_assert!(u < v && v < n);
    let (n, u, v) = (n as u64, u as u64, v as u64);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Inverse of [`edge_index`].
pub fn edge_from_index(n: u32, idx: u64) -> Edge {
    debug_assert!(idx < edge_slots(n));
    let nn = n as u64;
    // Row u starts at offset u*n - u(u+1)/2; scan rows (n is small).
    let mut u = 0u64;
    let mut row_start = 0u64;
    loop {
        let row_len = nn - u - 1;
        if idx < row_start + row_len {
            let v = u + 1 + (idx - row_start);
            return (u as Vertex, v as Vertex);
        }
        row_start += row_len;
        u += 1;
    }
}

fn normalize_edge(u: Vertex, v: Vertex) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Simple graph on vertices {0..n-1}, edges stored as a bit array over the
/// canonical edge index. Immutable by convention after construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    n: u32,
    bits: Vec<u64>,
    m: usize,
}

impl Graph {
    pub fn empty(n: u32) -> Self {
        assert!(n >= 1, "graph needs at least one vertex");
        let words = (edge_slots(n) as usize + 63) / 64;
        Graph {
            n,
            bits: vec![0; words.max(1)],
            m: 0,
        }
    }

    /// All C(n,2) edges present.
    pub fn complete(n: u32) -> Self {
        let mut g = Graph::empty(n);
        for idx in 0..edge_slots(n) {
            g.set_index(idx);
        }
        g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    fn set_index(&mut self, idx: u64) {
        let w = (idx / 64) as usize;
        let b = idx % 64;
        if self.bits[w] & (1 << b) == 0 {
            self.bits[w] |= 1 << b;
            self.m += 1;
        }
    }

    fn has_index(&self, idx: u64) -> bool {
        let w = (idx / 64) as usize;
        self.bits[w] & (1 << (idx % 64)) != 0
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        if u == v {
            return Err(Error::invalid(format!("loop at vertex {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!(
                "edge ({u},{v}) out of range for n={}",
                self.n
            )));
        }
        let (u, v) = normalize_edge(u, v);
        self.set_index(edge_index(self.n, u, v));
        Ok(())
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        if u == v || u >= self.n || v >= self.n {
            return false;
        }
        let (u, v) = normalize_edge(u, v);
        self.has_index(edge_index(self.n, u, v))
    }

    /// Edges in ascending canonical index order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.m);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as u64;
                out.push(edge_from_index(self.n, w as u64 * 64 + b));
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n as usize];
        for (u, v) in self.edges() {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    /// Per-vertex neighbour bitmask; requires n <= 64.
    pub fn adjacency_masks(&self) -> Result<Vec<u64>> {
        if self.n > 64 {
            return Err(Error::cap(format!(
                "adjacency bitmasks need n <= 64, got n={}",
                self.n
            )));
        }
        let mut adj = vec![0u64; self.n as usize];
        for (u, v) in self.edges() {
            adj[u as usize] |= 1 << v;
            adj[v as usize] |= 1 << u;
        }
        Ok(adj)
    }

    /// Text format: first line "n m", then m lines "u v" (u < v) in
    /// ascending edge-index order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, self.m);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty graph file"))?;
        let mut it = header.split_whitespace();
        let n: u32 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::invalid("bad graph header: expected \"n m\""))?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::invalid("bad graph header: expected \"n m\""))?;
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut g = Graph::empty(n);
        for line in lines {
            let mut it = line.split_whitespace();
            let u: u32 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::invalid(format!("bad edge line: {line:?}")))?;
            let v: u32 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::invalid(format!("bad edge line: {line:?}")))?;
            if u >= v {
                return Err(Error::invalid(format!(
                    "edge line must have u < v: {line:?}"
                )));
            }
            g.add_edge(u, v)?;
        }
        if g.edge_count() != m {
            return Err(Error::invalid(format!(
                "header claims {m} edges, file has {}",
                g.edge_count()
            )));
        }
        Ok(g)
    }
}

/// Seed for a reproducible random stream. (seed, stream) -> generator is a
/// pure function; distinct streams are independent, so parallel trials can
/// each own a stream and results do not depend on scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        SeedSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

pub fn complete_graph(n: u32) -> Graph {
    Graph::complete(n)
}

/// G(n,p): every edge slot filled independently with probability p.
pub fn gnp_sample(n: u32, p: f64, seed: &SeedSpec) -> Graph {
    assert!((0.0..=1.0).contains(&p), "p must be in [0,1]");
    let mut rng = seed.rng();
    let mut g = Graph::empty(n);
    for idx in 0..edge_slots(n) {
        if rng.gen_bool(p) {
            g.set_index(idx);
        }
    }
    g
}

/// G(n,m): uniformly random m-subset of edge slots, by partial
/// Fisher-Yates over edge indices (exact uniformity, O(m) memory).
pub fn gnm_sample(n: u32, m: u64, seed: &SeedSpec) -> Result<Graph> {
    let slots = edge_slots(n);
    if m > slots {
        return Err(Error::invalid(format!("m={m} exceeds C({n},2)={slots}")));
    }
    let mut rng = seed.rng();
    let mut g = Graph::empty(n);
    let mut perm: HashMap<u64, u64> = HashMap::new();
    for i in 0..m {
        let j = rng.gen_range(i..slots);
        let pick = *perm.get(&j).unwrap_or(&j);
        let at_i = *perm.get(&i).unwrap_or(&i);
        perm.insert(j, at_i);
        g.set_index(pick);
    }
    Ok(g)
}

/// Matching: pairwise vertex-disjoint edges, each stored (min,max), the
/// list sorted lexicographically. Canonical form makes equality of
/// matchings equal to representation equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn new(edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        let mut norm: Vec<Edge> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::invalid(format!("loop at vertex {u}")));
            }
            norm.push(normalize_edge(u, v));
        }
        norm.sort_unstable();
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &norm {
            if !seen.insert(u) || !seen.insert(v) {
                return Err(Error::invalid(format!(
                    "edges are not vertex-disjoint at ({u},{v})"
                )));
            }
        }
        Ok(Matching { edges: norm })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.binary_search(&normalize_edge(u, v)).is_ok()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.edges.iter().flat_map(|&(u, v)| [u, v])
    }

    pub fn max_vertex(&self) -> Option<Vertex> {
        self.edges.iter().map(|&(_, v)| v).max()
    }

    /// Partner of w, if w is covered.
    pub fn partner(&self, w: Vertex) -> Option<Vertex> {
        self.edges.iter().find_map(|&(u, v)| {
            if u == w {
                Some(v)
            } else if v == w {
                Some(u)
            } else {
                None
            }
        })
    }

    pub fn covers(&self, w: Vertex) -> bool {
        self.partner(w).is_some()
    }

    pub fn is_subgraph_of(&self, g: &Graph) -> bool {
        self.edges.iter().all(|&(u, v)| g.has_edge(u, v))
    }

    /// Number of edges shared with another matching.
    pub fn shared_edges(&self, other: &Matching) -> usize {
        // both lists sorted
        let (mut i, mut j, mut c) = (0, 0, 0);
        while i < self.edges.len() && j < other.edges.len() {
            match self.edges[i].cmp(&other.edges[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    }
}

/// Joint incidence profile of an ordered pair of l-matchings on {0..n-1}:
/// i shared edges, n2 vertices covered by both, n1 by exactly one, n0 by
/// neither; always n0 + n1 + n2 = n and n1 = 4l - 2*n2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairProfile {
    pub shared_edges: usize,
    pub n2: u32,
    pub n1: u32,
    pub n0: u32,
    pub union_edge_count: usize,
}

pub fn pair_profile(a: &Matching, b: &Matching, n: u32) -> Result<PairProfile> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "matchings must have equal size, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    for m in [a, b] {
        if let Some(maxv) = m.max_vertex() {
            if maxv >= n {
                return Err(Error::invalid(format!(
                    "matching vertex {maxv} out of range for n={n}"
                )));
            }
        }
    }
    let l = a.len();
    let i = a.shared_edges(b);
    let mut in_a = vec![false; n as usize];
    for v in a.vertices() {
        in_a[v as usize] = true;
    }
    let mut n2 = 0u32;
    for v in b.vertices() {
        if in_a[v as usize] {
            n2 += 1;
        }
    }
    let n1 = 4 * l as u32 - 2 * n2;
    let n0 = n + n2 - 4 * l as u32;
    Ok(PairProfile {
        shared_edges: i,
        n2,
        n1,
        n0,
        union_edge_count: 2 * l - i,
    })
}
