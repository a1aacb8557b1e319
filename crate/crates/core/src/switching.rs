//! Executable switching operations on pairs and tuples of matchings, with
//! exact applicable-move counting. Each forward/inverse generator lists
//! every labeled move; summing move counts over a source class and its
//! target class from both sides yields an integer double-counting
//! identity that must hold exactly.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::census::{classify_tuple, enumerate_matchings};
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::graph::{edge_slots, pair_profile, Edge, Matching, Vertex};
use crate::logreal::LogReal;

/// A labeled switching move. Vertex labels follow the construction order
/// of the corresponding operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SwitchMove {
    /// Decrease the number of shared edges: x is a shared edge (labels
    /// 1,2), y in M\M' (labels 3,4), z in M'\M (labels 5,6), y and z
    /// disjoint. x,y are replaced by {1,3},{2,4} in M; x,z by {1,5},{2,6}
    /// in M'.
    SharedEdgeDecrease { x: Edge, y: Edge, z: Edge },
    /// Increase the number of shared edges: two 2-paths (3,1,5) and
    /// (4,2,6) with {3,1},{4,2} in Q and {1,5},{2,6} in Q', all six
    /// vertices distinct, {3,4} not in Q', {5,6} not in Q. Replaces
    /// {3,1},{4,2} by {3,4},{1,2} in Q and {1,5},{2,6} by {1,2},{5,6}
    /// in Q'.
    SharedEdgeIncrease {
        first: (Vertex, Vertex, Vertex),
        second: (Vertex, Vertex, Vertex),
    },
    /// Decrease the number of shared vertices: v covered by both with
    /// distinct edges (a,v) in M and (b,v) in M', u uncovered by both;
    /// (a,v) becomes (a,u) in M.
    SharedVertexDecrease { v: Vertex, a: Vertex, b: Vertex, u: Vertex },
    /// Increase the number of shared vertices: u covered only by M with
    /// (a,u) in M, v covered only by M' with (b,v) in M', a != b; (a,u)
    /// becomes (a,v) in M.
    SharedVertexIncrease { u: Vertex, a: Vertex, v: Vertex, b: Vertex },
}

fn edge_orientations(e: Edge) -> [(Vertex, Vertex); 2] {
    [(e.0, e.1), (e.1, e.0)]
}

fn edges_minus(a: &Matching, b: &Matching) -> Vec<Edge> {
    a.edges()
        .iter()
        .copied()
        .filter(|&(u, v)| !b.contains_edge(u, v))
        .collect()
}

fn shared(a: &Matching, b: &Matching) -> Vec<Edge> {
    a.edges()
        .iter()
        .copied()
        .filter(|&(u, v)| b.contains_edge(u, v))
        .collect()
}

fn disjoint(a: Edge, b: Edge) -> bool {
    a.0 != b.0 && a.0 != b.1 && a.1 != b.0 && a.1 != b.1
}

/// All moves taking a pair sharing i >= 1 edges to one sharing i-1, in
/// lexicographic payload order.
pub fn shared_edge_decrease_moves(a: &Matching, b: &Matching) -> Vec<SwitchMove> {
    let mut out = Vec::new();
    let only_a = edges_minus(a, b);
    let only_b = edges_minus(b, a);
    for x in shared(a, b) {
        for (v1, v2) in edge_orientations(x) {
            for &y in &only_a {
                for (v3, v4) in edge_orientations(y) {
                    for &z in &only_b {
                        if !disjoint(y, z) {
                            continue;
                        }
                        for (v5, v6) in edge_orientations(z) {
                            out.push(SwitchMove::SharedEdgeDecrease {
                                x: (v1, v2),
                                y: (v3, v4),
                                z: (v5, v6),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Vertices covered by both matchings through two distinct edges.
fn doubly_covered_off_shared(a: &Matching, b: &Matching) -> Vec<(Vertex, Vertex, Vertex)> {
    // (v, partner in a, partner in b)
    let mut out = Vec::new();
    for &(u, w) in a.edges() {
        for v in [u, w] {
            if let Some(pb) = b.partner(v) {
                let pa = a.partner(v).expect("v lies on an edge of a");
                if pa != pb {
                    out.push((v, pa, pb));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// All moves taking a pair sharing i-1 edges to one sharing i (the
/// inverse direction of [`shared_edge_decrease_moves`]).
pub fn shared_edge_increase_moves(q: &Matching, qp: &Matching) -> Vec<SwitchMove> {
    let centers = doubly_covered_off_shared(q, qp);
    let mut out = Vec::new();
    for &(c1, v3, v5) in &centers {
        for &(c2, v4, v6) in &centers {
            if c1 == c2 {
                continue;
            }
            let six = [v3, c1, v5, v4, c2, v6];
            let distinct = (0..6).all(|i| (i + 1..6).all(|j| six[i] != six[j]));
            if !distinct {
                continue;
            }
            // the rebuilt edges {3,4} / {5,6} must not already be present
            // in the other matching, else an extra shared edge appears
            if qp.contains_edge(v3, v4) || q.contains_edge(v5, v6) {
                continue;
            }
            out.push(SwitchMove::SharedEdgeIncrease {
                first: (v3, c1, v5),
                second: (v4, c2, v6),
            });
        }
    }
    out
}

/// All moves taking a pair in class (i, n2) to (i, n2 - 1); there are
/// exactly (n2 - 2i) * n0 of them.
pub fn shared_vertex_decrease_moves(a: &Matching, b: &Matching, n: u32) -> Vec<SwitchMove> {
    let mut covered = vec![false; n as usize];
    for w in a.vertices().chain(b.vertices()) {
        covered[w as usize] = true;
    }
    let free: Vec<Vertex> = (0..n).filter(|&w| !covered[w as usize]).collect();
    let mut out = Vec::new();
    for (v, pa, pb) in doubly_covered_off_shared(a, b) {
        for &u in &free {
            out.push(SwitchMove::SharedVertexDecrease { v, a: pa, b: pb, u });
        }
    }
    out
}

/// All moves taking a pair in class (i, n2 - 1) to (i, n2).
pub fn shared_vertex_increase_moves(a: &Matching, b: &Matching) -> Vec<SwitchMove> {
    let mut out = Vec::new();
    for &(x, y) in a.edges() {
        for u in [x, y] {
            if b.covers(u) {
                continue;
            }
            let pa = if u == x { y } else { x };
            for &(s, t) in b.edges() {
                for v in [s, t] {
                    if a.covers(v) {
                        continue;
                    }
                    let pb = if v == s { t } else { s };
                    if pa != pb {
                        out.push(SwitchMove::SharedVertexIncrease { u, a: pa, v, b: pb });
                    }
                }
            }
        }
    }
    out.sort_unstable_by_key(|mv| match *mv {
        SwitchMove::SharedVertexIncrease { u, a, v, b } => (u, a, v, b),
        _ => unreachable!(),
    });
    out
}

fn replace_edges(m: &Matching, remove: &[Edge], add: &[Edge]) -> Result<Matching> {
    let mut edges: Vec<Edge> = m.edges().to_vec();
    for &(u, v) in remove {
        let before = edges.len();
        edges.retain(|&e| e != (u.min(v), u.max(v)));
        if edges.len() == before {
            return Err(Error::invalid(format!(
                "edge ({u},{v}) not present in matching"
            )));
        }
    }
    edges.extend(add.iter().copied());
    Matching::new(edges)
}

/// Apply a move to an ordered pair, producing the switched pair.
pub fn apply_move(a: &Matching, b: &Matching, mv: &SwitchMove) -> Result<(Matching, Matching)> {
    match *mv {
        SwitchMove::SharedEdgeDecrease { x, y, z } => {
            let (v1, v2) = x;
            let (v3, v4) = y;
            let (v5, v6) = z;
            if !(a.contains_edge(v1, v2) && b.contains_edge(v1, v2)) {
                return Err(Error::invalid("x must be a shared edge"));
            }
            let na = replace_edges(a, &[x, y], &[(v1, v3), (v2, v4)])?;
            let nb = replace_edges(b, &[x, z], &[(v1, v5), (v2, v6)])?;
            Ok((na, nb))
        }
        SwitchMove::SharedEdgeIncrease { first, second } => {
            let (v3, c1, v5) = first;
            let (v4, c2, v6) = second;
            let na = replace_edges(a, &[(v3, c1), (v4, c2)], &[(v3, v4), (c1, c2)])?;
            let nb = replace_edges(b, &[(c1, v5), (c2, v6)], &[(c1, c2), (v5, v6)])?;
            Ok((na, nb))
        }
        SwitchMove::SharedVertexDecrease { v, a: pa, u, .. } => {
            let na = replace_edges(a, &[(pa, v)], &[(pa, u)])?;
            Ok((na, b.clone()))
        }
        SwitchMove::SharedVertexIncrease { u, a: pa, v, .. } => {
            let na = replace_edges(a, &[(pa, u)], &[(pa, v)])?;
            Ok((na, b.clone()))
        }
    }
}

/// Which class-to-class transition a double count inspects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Transition {
    /// F(i) -> F(i-1) via shared-edge moves.
    SharedEdge { i: usize },
    /// F(i, n2) -> F(i, n2-1) via shared-vertex moves.
    SharedVertex { i: usize, n2: usize },
}

#[derive(Clone, Debug)]
pub struct DoubleCountOutcome {
    pub transition: Transition,
    /// Total forward moves out of the source class.
    pub lhs: BigUint,
    /// Total inverse moves out of the target class.
    pub rhs: BigUint,
    pub source_size: BigUint,
    pub target_size: BigUint,
    /// moves-per-state histogram over the source class.
    pub fwd_histogram: BTreeMap<u64, u64>,
    /// moves-per-state histogram over the target class.
    pub inv_histogram: BTreeMap<u64, u64>,
}

impl DoubleCountOutcome {
    pub fn is_equal(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Count forward moves over the source class and inverse moves over the
/// target class by full enumeration of ordered pairs of l-matchings of
/// K_n. Both totals count the edges of the same bipartite move graph, so
/// they must agree exactly.
pub fn double_count_check(
    n: u32,
    l: usize,
    transition: Transition,
    caps: &Caps,
) -> Result<DoubleCountOutcome> {
    match transition {
        Transition::SharedEdge { i } if i < 1 || i > l => {
            return Err(Error::invalid(format!("shared-edge transition needs 1 <= i <= l, got i={i}")));
        }
        Transition::SharedVertex { i, n2 } if n2 < 2 * i + 1 || n2 > 2 * l => {
            return Err(Error::invalid(format!(
                "shared-vertex transition needs 2i < n2 <= 2l, got i={i} n2={n2}"
            )));
        }
        _ => {}
    }
    let set = enumerate_matchings(n, l, caps.enum_cap)?;
    let s = set.len() as u64;
    if s.saturating_mul(s) > caps.pair_cap {
        return Err(Error::cap(format!(
            "{s}^2 ordered pairs exceed cap {}",
            caps.pair_cap
        )));
    }

    let per_first: Vec<(u64, u64, u64, u64, Vec<(u64, u64)>, Vec<(u64, u64)>)> = set
        .par_iter()
        .map(|a| {
            let mut lhs = 0u64;
            let mut rhs = 0u64;
            let mut source = 0u64;
            let mut target = 0u64;
            let mut fwd_hist: Vec<(u64, u64)> = Vec::new();
            let mut inv_hist: Vec<(u64, u64)> = Vec::new();
            for b in &set {
                let prof = pair_profile(a, b, n).expect("enumerated matchings are valid");
                let (in_source, in_target) = match transition {
                    Transition::SharedEdge { i } => {
                        (prof.shared_edges == i, prof.shared_edges == i - 1)
                    }
                    Transition::SharedVertex { i, n2 } => (
                        prof.shared_edges == i && prof.n2 as usize == n2,
                        prof.shared_edges == i && prof.n2 as usize == n2 - 1,
                    ),
                };
                if in_source {
                    source += 1;
                    let c = match transition {
                        Transition::SharedEdge { .. } => {
                            shared_edge_decrease_moves(a, b).len() as u64
                        }
                        Transition::SharedVertex { .. } => {
                            shared_vertex_decrease_moves(a, b, n).len() as u64
                        }
                    };
                    lhs += c;
                    fwd_hist.push((c, 1));
                }
                if in_target {
                    target += 1;
                    let c = match transition {
                        Transition::SharedEdge { .. } => {
                            shared_edge_increase_moves(a, b).len() as u64
                        }
                        Transition::SharedVertex { .. } => {
                            shared_vertex_increase_moves(a, b).len() as u64
                        }
                    };
                    rhs += c;
                    inv_hist.push((c, 1));
                }
            }
            (lhs, rhs, source, target, fwd_hist, inv_hist)
        })
        .collect();

    let mut outcome = DoubleCountOutcome {
        transition,
        lhs: BigUint::zero(),
        rhs: BigUint::zero(),
        source_size: BigUint::zero(),
        target_size: BigUint::zero(),
        fwd_histogram: BTreeMap::new(),
        inv_histogram: BTreeMap::new(),
    };
    for (lhs, rhs, source, target, fwd, inv) in per_first {
        outcome.lhs += lhs;
        outcome.rhs += rhs;
        outcome.source_size += source;
        outcome.target_size += target;
        for (c, k) in fwd {
            *outcome.fwd_histogram.entry(c).or_insert(0) += k;
        }
        for (c, k) in inv {
            *outcome.inv_histogram.entry(c).or_insert(0) += k;
        }
    }
    Ok(outcome)
}

/// Per-step selections for [`switch_to_leading`].
#[derive(Clone, Debug, Default)]
pub struct LeadingSwitchChoices {
    /// Step 2: for each tuple position j, the |I_j| - 1 refill edges, in
    /// the order they are added.
    pub fill_edges: Vec<Vec<Edge>>,
    /// Step 3: a perfect matching on the tuple positions 0..k-1.
    pub pairing: Vec<(usize, usize)>,
    /// Step 4: one fresh shared edge per pair of the pairing, in the
    /// pairing's canonical order (sorted by smaller endpoint).
    pub shared_edges: Vec<Edge>,
}

fn step_err(step: usize, constraint: impl Into<String>) -> Error {
    Error::SwitchChoice {
        step,
        constraint: constraint.into(),
    }
}

/// Forward switching for even k: converts a linked tuple that is not yet
/// leading into a tuple whose components are exactly k/2 edge-disjoint
/// kissing pairs. Every choice is validated against its step constraint.
pub fn switch_to_leading(
    tuple: &[&Matching],
    n: u32,
    choices: &LeadingSwitchChoices,
) -> Result<Vec<Matching>> {
    let k = tuple.len();
    if k == 0 || k % 2 != 0 {
        return Err(Error::invalid(format!("even tuple length required, got k={k}")));
    }
    let l = tuple[0].len();
    if tuple.iter().any(|m| m.len() != l) {
        return Err(Error::invalid("tuple members must have equal size"));
    }
    let class = classify_tuple(tuple, n)?;
    if !class.in_linked {
        return Err(Error::invalid("tuple must be linked (no isolated member)"));
    }
    if class.in_leading {
        return Err(Error::invalid("tuple is already leading"));
    }

    // Step 1: delete the shared edges.
    let mut partial: Vec<Vec<Edge>> = Vec::with_capacity(k);
    let mut shared_sizes = Vec::with_capacity(k);
    for (j, m) in tuple.iter().enumerate() {
        let kept: Vec<Edge> = m
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| {
                !tuple
                    .iter()
                    .enumerate()
                    .any(|(jj, other)| jj != j && other.contains_edge(u, v))
            })
            .collect();
        shared_sizes.push(l - kept.len());
        partial.push(kept);
    }

    // Step 2: refill each matching to size l - 1 with globally fresh edges.
    if choices.fill_edges.len() != k {
        return Err(step_err(2, format!("need fill edges for all {k} positions")));
    }
    let mut used: std::collections::HashSet<Edge> = partial
        .iter()
        .flat_map(|es| es.iter().copied())
        .collect();
    for j in 0..k {
        let need = shared_sizes[j] - 1;
        let fills = &choices.fill_edges[j];
        if fills.len() != need {
            return Err(step_err(
                2,
                format!(
                    "position {j} shares {} edges and needs exactly {need} refill edges, got {}",
                    shared_sizes[j],
                    fills.len()
                ),
            ));
        }
        for &(u, v) in fills {
            if u == v || u >= n || v >= n {
                return Err(step_err(2, format!("({u},{v}) is not an edge of K_n")));
            }
            let e = (u.min(v), u.max(v));
            if used.contains(&e) {
                return Err(step_err(
                    2,
                    format!("refill edge ({},{}) reuses a forbidden edge", e.0, e.1),
                ));
            }
            let clash = partial[j]
                .iter()
                .any(|&(a, b)| a == e.0 || a == e.1 || b == e.0 || b == e.1);
            if clash {
                return Err(step_err(
                    2,
                    format!("refill edge ({},{}) is not vertex-disjoint within position {j}", e.0, e.1),
                ));
            }
            partial[j].push(e);
            used.insert(e);
        }
        debug_assert_eq!(partial[j].len(), l - 1);
    }

    // Step 3: a perfect matching on the positions.
    let mut pairing: Vec<(usize, usize)> = choices
        .pairing
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    pairing.sort_unstable();
    let mut seen = vec![false; k];
    if pairing.len() != k / 2 {
        return Err(step_err(3, format!("pairing must have k/2 = {} pairs", k / 2)));
    }
    for &(a, b) in &pairing {
        if a == b || b >= k || seen[a] || seen[b] {
            return Err(step_err(3, "pairing must be a perfect matching on the positions"));
        }
        seen[a] = true;
        seen[b] = true;
    }

    // Step 4: one fresh shared edge per pair.
    if choices.shared_edges.len() != k / 2 {
        return Err(step_err(4, format!("need one shared edge per pair ({})", k / 2)));
    }
    for (r, (&(j, jp), &(u, v))) in pairing.iter().zip(&choices.shared_edges).enumerate() {
        if u == v || u >= n || v >= n {
            return Err(step_err(4, format!("({u},{v}) is not an edge of K_n")));
        }
        let e = (u.min(v), u.max(v));
        if used.contains(&e) {
            return Err(step_err(
                4,
                format!("shared edge ({},{}) for pair {r} reuses a forbidden edge", e.0, e.1),
            ));
        }
        for pos in [j, jp] {
            let clash = partial[pos]
                .iter()
                .any(|&(a, b)| a == e.0 || a == e.1 || b == e.0 || b == e.1);
            if clash {
                return Err(step_err(
                    4,
                    format!(
                        "shared edge ({},{}) is not vertex-disjoint within position {pos}",
                        e.0, e.1
                    ),
                ));
            }
        }
        partial[j].push(e);
        partial[jp].push(e);
        used.insert(e);
    }

    // Step 5: rebuild and verify the target class.
    let result: Vec<Matching> = partial
        .into_iter()
        .map(Matching::new)
        .collect::<Result<_>>()?;
    let refs: Vec<&Matching> = result.iter().collect();
    let out_class = classify_tuple(&refs, n)?;
    if !out_class.in_leading {
        return Err(step_err(5, "switched tuple failed leading-class validation"));
    }
    Ok(result)
}

/// Edge-multiplicity vector of a k-tuple: counts[j-1] = number of edges
/// appearing in exactly j members. Admissible vectors satisfy
/// sum j*x_j = k*l and sum_{j>=2} j*x_j >= k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XVector {
    pub counts: Vec<u64>,
}

impl XVector {
    pub fn new(counts: Vec<u64>) -> Self {
        XVector { counts }
    }

    pub fn validate(&self, l: u64, k: usize) -> Result<()> {
        if self.counts.len() != k {
            return Err(Error::invalid(format!(
                "x-vector must have k={k} entries, got {}",
                self.counts.len()
            )));
        }
        let weighted: u64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(idx, &x)| (idx as u64 + 1) * x)
            .sum();
        if weighted != k as u64 * l {
            return Err(Error::invalid(format!(
                "x-vector needs sum j*x_j = k*l = {}, got {weighted}",
                k as u64 * l
            )));
        }
        let tail: u64 = self
            .counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, &x)| (idx as u64 + 1) * x)
            .sum();
        if tail < k as u64 {
            return Err(Error::invalid(format!(
                "x-vector needs sum_{{j>=2}} j*x_j >= k = {k}, got {tail}"
            )));
        }
        Ok(())
    }

    pub fn x1(&self) -> u64 {
        self.counts.first().copied().unwrap_or(0)
    }

    /// Total number of distinct edges in the union.
    pub fn total_edges(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of distinct edges shared by at least two members.
    pub fn shared_edge_kinds(&self) -> u64 {
        self.counts.iter().skip(1).sum()
    }
}

/// Lower bound on the number of applicable forward switchings for any
/// tuple in the class of x: (C(n,2)/2)^e with e = kl - x1 - k/2 for even
/// k and e = kl - x1 - (k+1)/2 for odd k.
pub fn forward_move_lower_bound(x: &XVector, n: u64, l: u64, k: usize) -> Result<LogReal> {
    x.validate(l, k)?;
    let deficit = k as u64 * l - x.x1();
    let half_k = if k % 2 == 0 {
        k as u64 / 2
    } else {
        (k as u64 + 1) / 2
    };
    let e = deficit - half_k;
    let half_slots = edge_slots(n as u32) as f64 / 2.0;
    Ok(LogReal::exp_ln(e as f64 * half_slots.ln()))
}

/// Upper bound on the number of applicable inverse switchings for any
/// leading tuple (even k):
/// (kl-x1)^(k-1) l^(kl-x1-k) C(n,2)^(sum_{r>=2} x_r) beta^(kl-x1), where
/// beta = ((kl-x1)! / (floor((kl-x1)/k)!)^k)^(1/(kl-x1)).
pub fn inverse_move_upper_bound(x: &XVector, n: u64, l: u64, k: usize) -> Result<LogReal> {
    if k % 2 != 0 {
        return Err(Error::invalid("inverse-move bound is defined for even k"));
    }
    x.validate(l, k)?;
    let t = k as u64 * l - x.x1();
    let ln_beta = (ln_gamma(t as f64 + 1.0) - k as f64 * ln_gamma((t / k as u64) as f64 + 1.0))
        / t as f64;
    let slots = edge_slots(n as u32) as f64;
    let ln = (k as f64 - 1.0) * (t as f64).ln()
        + (t - k as u64) as f64 * (l as f64).ln()
        + x.shared_edge_kinds() as f64 * slots.ln()
        + t as f64 * ln_beta;
    Ok(LogReal::exp_ln(ln))
}

/// Bound on the weight ratio between the class of x and the leading
/// class (even k): p^(sum_r x_r) / (p^(kl - k/2) (1-p)^(k/2)).
pub fn weight_ratio_bound(x: &XVector, l: u64, p: f64, k: usize) -> Result<LogReal> {
    if k % 2 != 0 {
        return Err(Error::invalid("weight ratio bound is defined for even k"));
    }
    x.validate(l, k)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("need 0 < p < 1, got {p}")));
    }
    let ln = x.total_edges() as f64 * p.ln()
        - ((k as u64 * l - k as u64 / 2) as f64 * p.ln() + k as f64 / 2.0 * (1.0 - p).ln());
    Ok(LogReal::exp_ln(ln))
}
