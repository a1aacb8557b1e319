//! Exact matching counts: closed forms for complete graphs, a memoized
//! polynomial kernel for arbitrary graphs (n <= cap), and a sparse kernel
//! for small matching sizes on large graphs. Everything in this module is
//! exact big-integer arithmetic.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// n! as a big integer.
pub fn factorial_big(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// C(n, k) as a big integer; 0 when k > n.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// m!! = m (m-2) (m-4) ... down to 1 or 2, with (-1)!! = 0!! = 1 by the
/// empty-product extension.
pub fn double_factorial(m: i64) -> Result<BigUint> {
    if m < -1 {
        return Err(Error::invalid(format!("double factorial needs m >= -1, got {m}")));
    }
    let mut acc = BigUint::one();
    let mut i = m;
    while i >= 2 {
        acc *= i as u64;
        i -= 2;
    }
    Ok(acc)
}

/// Number of l-matchings in the complete graph K_n:
/// C(n, 2l) * (2l-1)!! = C(n, 2l) * (2l)! / (2^l l!).
pub fn matchings_complete(n: u64, l: u64) -> Result<BigUint> {
    if 2 * l > n {
        return Err(Error::invalid(format!(
            "matching size l={l} needs 2l <= n={n}"
        )));
    }
    Ok(binomial_big(n, 2 * l) * double_factorial(2 * l as i64 - 1)?)
}

/// Number of l-matchings of K_n containing a given fixed r-matching:
/// C(n-2r, 2l-2r) * (2l-2r-1)!!.
pub fn matchings_containing(n: u64, l: u64, r: u64) -> Result<BigUint> {
    if r > l || 2 * l > n {
        return Err(Error::invalid(format!(
            "need r <= l and 2l <= n, got n={n} l={l} r={r}"
        )));
    }
    Ok(binomial_big(n - 2 * r, 2 * (l - r)) * double_factorial(2 * (l - r) as i64 - 1)?)
}

/// Exact counts m_k of k-matchings for k = 0..floor(n/2).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CountVector {
    n: u32,
    counts: Vec<BigUint>,
}

impl CountVector {
    pub fn new(n: u32, mut counts: Vec<BigUint>) -> Self {
        let len = n as usize / 2 + 1;
        counts.resize(len, BigUint::zero());
        CountVector { n, counts }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// m_k; zero beyond floor(n/2).
    pub fn get(&self, k: usize) -> BigUint {
        self.counts.get(k).cloned().unwrap_or_else(BigUint::zero)
    }

    /// Count vector of the disjoint union of two graphs: the convolution
    /// of the parts' vectors.
    pub fn convolve(&self, other: &CountVector) -> CountVector {
        let counts = convolve(&self.counts, &other.counts);
        CountVector::new(self.n + other.n, counts)
    }
}

fn convolve(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Memo table for the polynomial kernel, keyed by the surviving-vertex
/// bitmask within a fixed ambient graph.
#[derive(Default, Debug)]
pub struct MemoCache {
    map: HashMap<u64, Vec<BigUint>>,
    pub hits: u64,
    pub misses: u64,
}

impl MemoCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Exact m_k for all k via the vertex recursion
/// M(G) = M(G - v) + sum_{u ~ v} x * M(G - u - v),
/// with connected-component factorization and bitmask memoization.
/// Branch vertex: surviving vertex of maximum surviving degree.
pub fn count_matchings(g: &Graph, n_cap: u32) -> Result<CountVector> {
    let mut memo = MemoCache::new();
    count_matchings_with_cache(g, n_cap, &mut memo)
}

pub fn count_matchings_with_cache(
    g: &Graph,
    n_cap: u32,
    memo: &mut MemoCache,
) -> Result<CountVector> {
    if g.n() > n_cap {
        return Err(Error::cap(format!(
            "polynomial kernel capped at n <= {n_cap}, got n={}",
            g.n()
        )));
    }
    let adj = g.adjacency_masks()?;
    let full: u64 = if g.n() == 64 {
        u64::MAX
    } else {
        (1u64 << g.n()) - 1
    };
    let poly = poly_for_mask(&adj, full, memo);
    Ok(CountVector::new(g.n(), poly))
}

fn poly_for_mask(adj: &[u64], mask: u64, memo: &mut MemoCache) -> Vec<BigUint> {
    let mut acc = vec![BigUint::one()];
    let mut rest = mask;
    while rest != 0 {
        let start = rest.trailing_zeros();
        let comp = component_mask(adj, rest, start);
        rest &= !comp;
        let p = component_poly(adj, comp, memo);
        acc = convolve(&acc, &p);
    }
    acc
}

fn component_mask(adj: &[u64], mask: u64, start: u32) -> u64 {
    let mut comp = 1u64 << start;
    let mut frontier = comp;
    while frontier != 0 {
        let v = frontier.trailing_zeros();
        frontier &= frontier - 1;
        let nbrs = adj[v as usize] & mask & !comp;
        comp |= nbrs;
        frontier |= nbrs;
    }
    comp
}

fn component_poly(adj: &[u64], comp: u64, memo: &mut MemoCache) -> Vec<BigUint> {
    let size = comp.count_ones();
    if size <= 1 {
        return vec![BigUint::one()];
    }
    if let Some(p) = memo.map.get(&comp) {
        memo.hits += 1;
        return p.clone();
    }
    memo.misses += 1;

    // branch on the surviving vertex of maximum surviving degree
    let mut best_v = 0u32;
    let mut best_d = -1i64;
    let mut scan = comp;
    while scan != 0 {
        let v = scan.trailing_zeros();
        scan &= scan - 1;
        let d = (adj[v as usize] & comp).count_ones() as i64;
        if d > best_d {
            best_d = d;
            best_v = v;
        }
    }
    let v = best_v;
    let rest = comp & !(1u64 << v);

    // v unmatched
    let mut poly = poly_for_mask(adj, rest, memo);
    // v matched to each surviving neighbour u: one edge consumed
    let mut nbrs = adj[v as usize] & comp;
    while nbrs != 0 {
        let u = nbrs.trailing_zeros();
        nbrs &= nbrs - 1;
        let sub = poly_for_mask(adj, rest & !(1u64 << u), memo);
        if poly.len() < sub.len() + 1 {
            poly.resize(sub.len() + 1, BigUint::zero());
        }
        for (k, c) in sub.iter().enumerate() {
            poly[k + 1] += c;
        }
    }
    memo.map.insert(comp, poly.clone());
    poly
}

/// Exact number of l-matchings for small l on arbitrary graphs (large n
/// allowed). l = 2 and l = 3 use subgraph-count identities; l = 4 uses
/// pruned enumeration over edge combinations. Equals count_matchings[l]
/// on any graph where both kernels apply.
pub fn count_l_matchings_sparse(g: &Graph, l: usize) -> Result<BigUint> {
    match l {
        0 => Ok(BigUint::one()),
        1 => Ok(BigUint::from(g.edge_count())),
        2 => Ok(count_two_matchings(g)),
        3 => Ok(count_three_matchings(g)),
        4 => Ok(count_by_enumeration(g, 4)),
        _ => Err(Error::invalid(format!(
            "sparse kernel supports l <= 4, got l={l}"
        ))),
    }
}

/// m_2 = C(m,2) - #(adjacent edge pairs) = C(m,2) - sum_v C(d_v, 2).
fn count_two_matchings(g: &Graph) -> BigUint {
    let m = g.edge_count() as u64;
    let mut adjacent_pairs = BigUint::zero();
    for d in g.degrees() {
        adjacent_pairs += binomial_big(d as u64, 2);
    }
    let total = binomial_big(m, 2);
    total - adjacent_pairs
}

/// m_3 by inclusion-exclusion over the conflict structure of edge triples:
/// C(m,3) - (m-2)*P2 + P3 + 2*T + 2*S3, where P2 = #2-paths, P3 = #3-edge
/// paths, T = #triangles, S3 = #3-stars. Triples with exactly two
/// conflicting pairs are 3-edge paths; with three, triangles or 3-stars.
fn count_three_matchings(g: &Graph) -> BigUint {
    let n = g.n() as usize;
    let m = g.edge_count() as u64;
    let deg = g.degrees();
    let words = (n + 63) / 64;
    let mut rows = vec![vec![0u64; words]; n];
    for (u, v) in g.edges() {
        rows[u as usize][v as usize / 64] |= 1 << (v % 64);
        rows[v as usize][u as usize / 64] |= 1 << (u % 64);
    }

    let mut p2 = BigUint::zero(); // 2-paths: pairs of adjacent edges
    let mut s3 = BigUint::zero(); // 3-stars
    for &d in &deg {
        p2 += binomial_big(d as u64, 2);
        s3 += binomial_big(d as u64, 3);
    }

    let mut tri3 = 0u128; // 3 * #triangles
    let mut p3_mid = 0u128; // sum over edges of (d_u - 1)(d_v - 1)
    for (u, v) in g.edges() {
        let (u, v) = (u as usize, v as usize);
        let mut common = 0u32;
        for w in 0..words {
            common += (rows[u][w] & rows[v][w]).count_ones();
        }
        tri3 += common as u128;
        p3_mid += (deg[u] as u128 - 1) * (deg[v] as u128 - 1);
    }
    let t = BigUint::from(tri3 / 3);
    let p3 = BigUint::from(p3_mid) - BigUint::from(tri3); // paths of 3 edges

    let total = binomial_big(m, 3);
    let two = BigUint::from(2u32);
    // m >= 3 whenever any of the subtracted terms is nonzero
    let with_conflict = if m >= 2 {
        BigUint::from(m - 2) * &p2 - &p3 - &two * &t - &two * &s3
    } else {
        BigUint::zero()
    };
    total - with_conflict
}

/// Pruned enumeration of edge combinations in ascending index order; each
/// matching is visited exactly once.
fn count_by_enumeration(g: &Graph, l: usize) -> BigUint {
    let edges = g.edges();
    let mut count: u128 = 0;
    let mut chosen: Vec<(u32, u32)> = Vec::with_capacity(l);
    fn rec(
        edges: &[(u32, u32)],
        start: usize,
        chosen: &mut Vec<(u32, u32)>,
        l: usize,
        count: &mut u128,
    ) {
        if chosen.len() == l {
            *count += 1;
            return;
        }
        let need = l - chosen.len();
        if start + need > edges.len() {
            return;
        }
        for i in start..=edges.len() - need {
            let (u, v) = edges[i];
            if chosen
                .iter()
                .all(|&(a, b)| a != u && a != v && b != u && b != v)
            {
                chosen.push((u, v));
                rec(edges, i + 1, chosen, l, count);
                chosen.pop();
            }
        }
    }
    rec(&edges, 0, &mut chosen, l, &mut count);
    BigUint::from(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, gnp_sample, Graph, SeedSpec};

    /// Independent oracle: enumerate all k-subsets of the edge list and
    /// keep those that are matchings.
    pub fn brute_force_counts(g: &Graph) -> Vec<BigUint> {
        let edges = g.edges();
        let kmax = g.n() as usize / 2;
        let mut counts = vec![0u64; kmax + 1];
        counts[0] = 1;
        fn rec(
            edges: &[(u32, u32)],
            start: usize,
            used: &mut Vec<(u32, u32)>,
            counts: &mut [u64],
        ) {
            for i in start..edges.len() {
                let (u, v) = edges[i];
                let disjoint = used
                    .iter()
                    .all(|&(a, b)| a != u && a != v && b != u && b != v);
                if disjoint {
                    used.push((u, v));
                    if used.len() < counts.len() {
                        counts[used.len()] += 1;
                        rec(edges, i + 1, used, counts);
                    }
                    used.pop();
                }
            }
        }
        rec(&edges, 0, &mut Vec::new(), &mut counts);
        counts.into_iter().map(BigUint::from).collect()
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(5).unwrap(), BigUint::from(15u32));
        assert_eq!(double_factorial(6).unwrap(), BigUint::from(48u32));
        assert_eq!(double_factorial(-1).unwrap(), BigUint::one());
        assert_eq!(double_factorial(0).unwrap(), BigUint::one());
        assert!(double_factorial(-2).is_err());
    }

    #[test]
    fn matchings_complete_values() {
        assert_eq!(matchings_complete(6, 3).unwrap(), BigUint::from(15u32));
        assert_eq!(matchings_complete(4, 2).unwrap(), BigUint::from(3u32));
        // frozen from the brute-force oracle on K_8
        let k8 = brute_force_counts(&complete_graph(8));
        assert_eq!(k8[2], BigUint::from(210u32));
        assert_eq!(matchings_complete(8, 2).unwrap(), k8[2]);
        assert!(matchings_complete(4, 3).is_err());
    }

    #[test]
    fn matchings_containing_values() {
        // r = l: only the matching itself
        assert_eq!(matchings_containing(10, 3, 3).unwrap(), BigUint::one());
        // r = 0: all l-matchings
        assert_eq!(
            matchings_containing(9, 2, 0).unwrap(),
            matchings_complete(9, 2).unwrap()
        );
        // n=8, l=2, r=1: frozen from brute force over K_8 (fix edge (0,1),
        // count 2-matchings containing it)
        let g = complete_graph(8);
        let edges = g.edges();
        let mut cnt = 0u32;
        for &(u, v) in &edges {
            if (u, v) != (0, 1) && u != 0 && u != 1 && v != 0 && v != 1 {
                cnt += 1;
            }
        }
        assert_eq!(cnt, 15);
        assert_eq!(matchings_containing(8, 2, 1).unwrap(), BigUint::from(15u32));
    }

    #[test]
    fn four_cycle_counts() {
        let mut g = Graph::empty(4);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            g.add_edge(u, v).unwrap();
        }
        let cv = count_matchings(&g, 28).unwrap();
        assert_eq!(cv.counts()[0], BigUint::one());
        assert_eq!(cv.counts()[1], BigUint::from(4u32));
        assert_eq!(cv.counts()[2], BigUint::from(2u32));
    }

    #[test]
    fn empty_graph_counts() {
        let cv = count_matchings(&Graph::empty(5), 28).unwrap();
        assert_eq!(cv.get(0), BigUint::one());
        assert_eq!(cv.get(1), BigUint::zero());
        assert_eq!(cv.get(2), BigUint::zero());
    }

    #[test]
    fn k6_counts() {
        let cv = count_matchings(&complete_graph(6), 28).unwrap();
        assert_eq!(cv.get(1), BigUint::from(15u32));
        assert_eq!(cv.get(2), BigUint::from(45u32));
        assert_eq!(cv.get(3), BigUint::from(15u32));
    }

    #[test]
    fn cap_enforced() {
        assert!(count_matchings(&Graph::empty(29), 28).is_err());
    }

    #[test]
    fn kernels_agree_random_graphs() {
        for t in 0..40 {
            let n = 5 + (t % 6) as u32; // 5..10
            let p = [0.2, 0.5, 0.8][t % 3];
            let g = gnp_sample(n, p, &SeedSpec::new(1234, t as u64));
            let brute = brute_force_counts(&g);
            let poly = count_matchings(&g, 28).unwrap();
            for (k, b) in brute.iter().enumerate() {
                assert_eq!(&poly.get(k), b, "poly vs brute at n={n} k={k}");
            }
            for l in 0..=4.min(n as usize / 2) {
                let sparse = count_l_matchings_sparse(&g, l).unwrap();
                assert_eq!(sparse, brute[l], "sparse vs brute at n={n} l={l}");
            }
        }
    }

    #[test]
    fn sparse_cross_kernel_on_n12() {
        for t in 0..50u64 {
            let g = gnp_sample(12, 0.5, &SeedSpec::new(777, t));
            let poly = count_matchings(&g, 28).unwrap();
            assert_eq!(count_l_matchings_sparse(&g, 3).unwrap(), poly.get(3));
        }
    }

    #[test]
    fn sparse_trivial_cases() {
        let g = gnp_sample(40, 0.3, &SeedSpec::new(5, 5));
        assert_eq!(
            count_l_matchings_sparse(&g, 1).unwrap(),
            BigUint::from(g.edge_count())
        );
        let mut two = Graph::empty(4);
        two.add_edge(0, 1).unwrap();
        two.add_edge(2, 3).unwrap();
        assert_eq!(count_l_matchings_sparse(&two, 2).unwrap(), BigUint::one());
        assert!(count_l_matchings_sparse(&two, 5).is_err());
    }

    #[test]
    fn complete_graph_consistency() {
        for n in 1..=14u32 {
            let cv = count_matchings(&complete_graph(n), 28).unwrap();
            for l in 0..=(n as u64 / 2) {
                assert_eq!(cv.get(l as usize), matchings_complete(n as u64, l).unwrap());
            }
        }
    }

    #[test]
    fn component_multiplicativity() {
        // two disjoint 4-cycles on 8 vertices
        let mut g = Graph::empty(8);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 3), (4, 5), (5, 6), (6, 7), (4, 7)] {
            g.add_edge(u, v).unwrap();
        }
        let mut c4 = Graph::empty(4);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            c4.add_edge(u, v).unwrap();
        }
        let whole = count_matchings(&g, 28).unwrap();
        let part = count_matchings(&c4, 28).unwrap();
        let conv = part.convolve(&part);
        assert_eq!(whole.counts(), conv.counts());
    }

    #[test]
    fn edge_recursion_identity() {
        // m_k(G) = m_k(G - e) + m_{k-1}(G - u - v)
        for t in 0..20u64 {
            let g = gnp_sample(9, 0.5, &SeedSpec::new(31, t));
            let edges = g.edges();
            if edges.is_empty() {
                continue;
            }
            let (u, v) = edges[t as usize % edges.len()];
            let mut without_e = Graph::empty(9);
            let mut contracted = Graph::empty(9);
            for &(a, b) in &edges {
                if (a, b) != (u, v) {
                    without_e.add_edge(a, b).unwrap();
                    if a != u && a != v && b != u && b != v {
                        contracted.add_edge(a, b).unwrap();
                    }
                }
            }
            let full = count_matchings(&g, 28).unwrap();
            let minus_e = count_matchings(&without_e, 28).unwrap();
            let minus_uv = count_matchings(&contracted, 28).unwrap();
            for k in 1..=4usize {
                assert_eq!(full.get(k), minus_e.get(k) + minus_uv.get(k - 1));
            }
        }
    }

    #[test]
    fn memo_cache_counters_move() {
        let mut memo = MemoCache::new();
        let g = gnp_sample(14, 0.5, &SeedSpec::new(8, 8));
        let fresh = count_matchings_with_cache(&g, 28, &mut memo).unwrap();
        assert!(memo.misses > 0);
        let before = memo.misses;
        let cached = count_matchings_with_cache(&g, 28, &mut memo).unwrap();
        assert_eq!(memo.misses, before); // second run fully cached
        assert!(memo.hits > 0);
        assert_eq!(fresh, cached); // cached values equal recomputation
    }
}
