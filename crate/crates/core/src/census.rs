//! Exhaustive enumeration and classification of pairs and k-tuples of
//! l-matchings of K_n at small n: shared-edge/shared-vertex pair tables,
//! component structure of tuples (kissing pairs, chained triples,
//! flowers), exact centered-product expectations, and exact central
//! moments as tuple sums.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Caps;
use crate::count::matchings_complete;
use crate::error::{Error, Result};
use crate::graph::{edge_index, edge_slots, Matching, Vertex};

/// Largest n for which an edge set fits a u128 mask.
const MASK_N_CAP: u32 = 16;

fn check_mask_cap(n: u32) -> Result<()> {
    if n > MASK_N_CAP || edge_slots(n) > 128 {
        return Err(Error::cap(format!(
            "census kernels use 128-bit edge masks and need n <= {MASK_N_CAP}, got n={n}"
        )));
    }
    Ok(())
}

/// Edge-index bitmask of a matching within K_n.
pub fn matching_edge_mask(m: &Matching, n: u32) -> Result<u128> {
    check_mask_cap(n)?;
    let mut mask = 0u128;
    for &(u, v) in m.edges() {
        if v >= n {
            return Err(Error::invalid(format!(
                "matching vertex {v} out of range for n={n}"
            )));
        }
        mask |= 1 << edge_index(n, u, v);
    }
    Ok(mask)
}

fn vertex_mask(m: &Matching) -> u64 {
    let mut mask = 0u64;
    for v in m.vertices() {
        mask |= 1 << v;
    }
    mask
}

/// All l-matchings of K_n in canonical (lexicographic) order.
pub fn enumerate_matchings(n: u32, l: usize, cap: u64) -> Result<Vec<Matching>> {
    if 2 * l as u64 > n as u64 {
        return Err(Error::invalid(format!("need 2l <= n, got n={n} l={l}")));
    }
    let expected = matchings_complete(n as u64, l as u64)?;
    if expected > BigUint::from(cap) {
        return Err(Error::cap(format!(
            "enumeration of {expected} matchings exceeds cap {cap}"
        )));
    }
    let mut edges = Vec::with_capacity(edge_slots(n) as usize);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    let mut out = Vec::new();
    let mut chosen: Vec<(Vertex, Vertex)> = Vec::with_capacity(l);
    fn rec(
        edges: &[(Vertex, Vertex)],
        start: usize,
        l: usize,
        used: u64,
        chosen: &mut Vec<(Vertex, Vertex)>,
        out: &mut Vec<Matching>,
    ) {
        if chosen.len() == l {
            out.push(Matching::new(chosen.clone()).expect("disjoint by construction"));
            return;
        }
        for i in start..edges.len() {
            let (u, v) = edges[i];
            let bits = (1u64 << u) | (1u64 << v);
            if used & bits == 0 {
                chosen.push((u, v));
                rec(edges, i + 1, l, used | bits, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(&edges, 0, l, 0, &mut chosen, &mut out);
    debug_assert_eq!(BigUint::from(out.len()), expected);
    Ok(out)
}

/// Exact table f(i, n2) over ordered pairs of l-matchings of K_n:
/// i shared edges, n2 shared vertices.
#[derive(Clone, Debug)]
pub struct PairCensusTable {
    pub n: u32,
    pub l: usize,
    pub s: BigUint,
    table: Vec<Vec<BigUint>>,
    marginals: Vec<BigUint>,
}

impl PairCensusTable {
    /// f(i, n2); zero outside the table.
    pub fn get(&self, i: usize, n2: usize) -> BigUint {
        self.table
            .get(i)
            .and_then(|row| row.get(n2))
            .cloned()
            .unwrap_or_else(BigUint::zero)
    }

    /// Marginal f_i = sum_{n2} f(i, n2).
    pub fn marginal(&self, i: usize) -> BigUint {
        self.marginals.get(i).cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn marginals(&self) -> &[BigUint] {
        &self.marginals
    }

    pub fn total(&self) -> BigUint {
        self.marginals.iter().sum()
    }

    /// (i, n2, count) rows with nonzero count, in ascending order.
    pub fn rows(&self) -> Vec<(usize, usize, BigUint)> {
        let mut out = Vec::new();
        for (i, row) in self.table.iter().enumerate() {
            for (n2, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    out.push((i, n2, c.clone()));
                }
            }
        }
        out
    }
}

pub fn pair_census(n: u32, l: usize, caps: &Caps) -> Result<PairCensusTable> {
    let set = enumerate_matchings(n, l, caps.enum_cap)?;
    let s = set.len() as u64;
    if s.saturating_mul(s) > caps.pair_cap {
        return Err(Error::cap(format!(
            "pair census of {s}^2 ordered pairs exceeds cap {}",
            caps.pair_cap
        )));
    }
    let emasks: Vec<u128> = set
        .iter()
        .map(|m| matching_edge_mask(m, n))
        .collect::<Result<_>>()?;
    let vmasks: Vec<u64> = set.iter().map(vertex_mask).collect();

    // partition by leading index; per-partition tables merge by addition
    let counts = (0..set.len())
        .into_par_iter()
        .fold(
            || vec![vec![0u64; 2 * l + 1]; l + 1],
            |mut acc, a| {
                let ea = emasks[a];
                let va = vmasks[a];
                for b in 0..set.len() {
                    let i = (ea & emasks[b]).count_ones() as usize;
                    let n2 = (va & vmasks[b]).count_ones() as usize;
                    acc[i][n2] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![vec![0u64; 2 * l + 1]; l + 1],
            |mut x, y| {
                for (rx, ry) in x.iter_mut().zip(y) {
                    for (cx, cy) in rx.iter_mut().zip(ry) {
                        *cx += cy;
                    }
                }
                x
            },
        );
    let table: Vec<Vec<BigUint>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| BigUint::from(c)).collect())
        .collect();
    let marginals = table
        .iter()
        .map(|row: &Vec<BigUint>| row.iter().sum())
        .collect();
    Ok(PairCensusTable {
        n,
        l,
        s: BigUint::from(s),
        table,
        marginals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StructureTag {
    KissingPair,
    ChainedTriple,
    Flower(usize),
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LeadingVariant {
    /// The odd component is a flower with 3 petals.
    Flower,
    /// The odd component is a chained triple.
    ChainedTriple,
}

/// One component of the intersection graph restricted to a tuple:
/// positions are adjacent when their matchings share an edge.
#[derive(Clone, Debug, Serialize)]
pub struct TupleComponent {
    /// Tuple positions in this component (repeats in the tuple occupy
    /// distinct positions).
    pub members: Vec<usize>,
    /// Number of member positions, counting repetitions.
    pub n_tilde: usize,
    /// Number of distinct edges in the union of member matchings.
    pub m_tilde: usize,
    pub tag: StructureTag,
}

/// Component decomposition and class membership of a k-tuple.
#[derive(Clone, Debug, Serialize)]
pub struct TupleClass {
    pub k: usize,
    pub components: Vec<TupleComponent>,
    /// x_j = number of edges appearing in exactly j tuple members.
    pub x_vector: Vec<u64>,
    /// Every component has at least two members.
    pub in_linked: bool,
    /// floor(k/2) components, all kissing pairs except (for odd k) one
    /// chained triple or flower with 3 petals.
    pub in_leading: bool,
    /// Which odd structure realizes membership, for odd k.
    pub leading_variant: Option<LeadingVariant>,
}

fn components_of(masks: &[u128]) -> Vec<Vec<usize>> {
    let k = masks.len();
    let mut comp_id: Vec<Option<usize>> = vec![None; k];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in 0..k {
        if comp_id[start].is_some() {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![start];
        comp_id[start] = Some(id);
        let mut members = vec![start];
        while let Some(a) = stack.pop() {
            for b in 0..k {
                if comp_id[b].is_none() && masks[a] & masks[b] != 0 {
                    comp_id[b] = Some(id);
                    stack.push(b);
                    members.push(b);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

fn tag_component(members: &[usize], masks: &[u128]) -> StructureTag {
    match members.len() {
        0 | 1 => StructureTag::Other,
        2 => {
            let shared = masks[members[0]] & masks[members[1]];
            if shared.count_ones() == 1 {
                StructureTag::KissingPair
            } else {
                StructureTag::Other
            }
        }
        t => {
            // flower: all pairwise intersections equal the same single edge
            let first = masks[members[0]] & masks[members[1]];
            let is_flower = first.count_ones() == 1
                && members.iter().enumerate().all(|(ai, &a)| {
                    members[ai + 1..]
                        .iter()
                        .all(|&b| masks[a] & masks[b] == first)
                });
            if is_flower {
                return StructureTag::Flower(t);
            }
            if t == 3 {
                // chained triple: one disjoint pair, two pairs sharing one edge
                let s01 = (masks[members[0]] & masks[members[1]]).count_ones();
                let s02 = (masks[members[0]] & masks[members[2]]).count_ones();
                let s12 = (masks[members[1]] & masks[members[2]]).count_ones();
                let mut sizes = [s01, s02, s12];
                sizes.sort_unstable();
                if sizes == [0, 1, 1] {
                    return StructureTag::ChainedTriple;
                }
            }
            StructureTag::Other
        }
    }
}

/// Classify a k-tuple of l-matchings on {0..n-1}.
pub fn classify_tuple(tuple: &[&Matching], n: u32) -> Result<TupleClass> {
    let k = tuple.len();
    if k == 0 {
        return Err(Error::invalid("tuple must be non-empty"));
    }
    let l = tuple[0].len();
    if tuple.iter().any(|m| m.len() != l) {
        return Err(Error::invalid("tuple members must have equal size"));
    }
    let masks: Vec<u128> = tuple
        .iter()
        .map(|m| matching_edge_mask(m, n))
        .collect::<Result<_>>()?;

    let mut x_vector = vec![0u64; k];
    let mut union = 0u128;
    for &m in &masks {
        union |= m;
    }
    let mut bits = union;
    while bits != 0 {
        let low = bits & bits.wrapping_neg();
        bits ^= low;
        let mult = masks.iter().filter(|&&m| m & low != 0).count();
        x_vector[mult - 1] += 1;
    }

    let comps = components_of(&masks);
    let components: Vec<TupleComponent> = comps
        .iter()
        .map(|members| {
            let mut u = 0u128;
            for &j in members {
                u |= masks[j];
            }
            TupleComponent {
                members: members.clone(),
                n_tilde: members.len(),
                m_tilde: u.count_ones() as usize,
                tag: tag_component(members, &masks),
            }
        })
        .collect();

    let in_linked = components.iter().all(|c| c.n_tilde >= 2);
    let in_leading = in_linked
        && components.len() == k / 2
        && components.iter().all(|c| match c.n_tilde {
            2 => c.tag == StructureTag::KissingPair,
            3 => matches!(c.tag, StructureTag::ChainedTriple | StructureTag::Flower(3)),
            _ => false,
        });
    let leading_variant = if in_leading && k % 2 == 1 {
        components.iter().find_map(|c| match c.tag {
            StructureTag::Flower(3) => Some(LeadingVariant::Flower),
            StructureTag::ChainedTriple => Some(LeadingVariant::ChainedTriple),
            _ => None,
        })
    } else {
        None
    };

    Ok(TupleClass {
        k,
        components,
        x_vector,
        in_linked,
        in_leading,
        leading_variant,
    })
}

/// E[prod_j (X_j - p^l)] over the tuple, by the 2^k-term
/// inclusion-exclusion over union edge counts; exact in a rational p.
pub fn centered_product_expectation(
    tuple: &[&Matching],
    n: u32,
    p: &BigRational,
) -> Result<BigRational> {
    let k = tuple.len();
    if k == 0 || k > 6 {
        return Err(Error::invalid(format!(
            "centered product expectation supports 1 <= k <= 6, got k={k}"
        )));
    }
    let l = tuple[0].len();
    if tuple.iter().any(|m| m.len() != l) {
        return Err(Error::invalid("tuple members must have equal size"));
    }
    let masks: Vec<u128> = tuple
        .iter()
        .map(|m| matching_edge_mask(m, n))
        .collect::<Result<_>>()?;
    Ok(centered_expectation_from_masks(&masks, l, p))
}

fn centered_expectation_from_masks(masks: &[u128], l: usize, p: &BigRational) -> BigRational {
    let k = masks.len();
    let mut acc = BigRational::zero();
    for subset in 0u32..(1 << k) {
        let mut union = 0u128;
        for (j, &m) in masks.iter().enumerate() {
            if subset & (1 << j) != 0 {
                union |= m;
            }
        }
        let absent = k - subset.count_ones() as usize;
        let exponent = l as u64 * absent as u64 + union.count_ones() as u64;
        let term = crate::formulas::pow_rational(p, exponent);
        if absent % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Per-component weight bound and its verification for a tuple:
/// weight = p^m_tilde - p^(n_tilde * l) when n_tilde <= 2 (zero for a
/// singleton), p^m_tilde otherwise; |E Y_C| <= 2^n_tilde * weight.
#[derive(Clone, Debug)]
pub struct ComponentWeight {
    pub members: Vec<usize>,
    pub n_tilde: usize,
    pub m_tilde: usize,
    pub weight: BigRational,
    pub expectation: BigRational,
    pub bound_holds: bool,
}

#[derive(Clone, Debug)]
pub struct ComponentWeights {
    pub per_component: Vec<ComponentWeight>,
    /// Product of the per-component weights.
    pub product: BigRational,
}

pub fn component_weights(
    tuple: &[&Matching],
    n: u32,
    p: &BigRational,
) -> Result<ComponentWeights> {
    let class = classify_tuple(tuple, n)?;
    let l = tuple[0].len();
    let masks: Vec<u128> = tuple
        .iter()
        .map(|m| matching_edge_mask(m, n))
        .collect::<Result<_>>()?;
    let mut per_component = Vec::new();
    let mut product = BigRational::one();
    for comp in &class.components {
        let weight = component_weight_value(comp.n_tilde, comp.m_tilde, l, p);
        let member_masks: Vec<u128> = comp.members.iter().map(|&j| masks[j]).collect();
        let expectation = centered_expectation_from_masks(&member_masks, l, p);
        let two_pow = BigRational::from_integer(BigInt::from(1u64 << comp.n_tilde));
        let bound_holds = expectation.abs() <= &two_pow * &weight;
        product *= &weight;
        per_component.push(ComponentWeight {
            members: comp.members.clone(),
            n_tilde: comp.n_tilde,
            m_tilde: comp.m_tilde,
            weight,
            expectation,
            bound_holds,
        });
    }
    Ok(ComponentWeights {
        per_component,
        product,
    })
}

fn component_weight_value(n_tilde: usize, m_tilde: usize, l: usize, p: &BigRational) -> BigRational {
    use crate::formulas::pow_rational;
    if n_tilde <= 2 {
        pow_rational(p, m_tilde as u64) - pow_rational(p, (n_tilde * l) as u64)
    } else {
        pow_rational(p, m_tilde as u64)
    }
}

struct TupleScan {
    set_len: usize,
    emasks: Vec<u128>,
    adj: Vec<Vec<bool>>,
}

impl TupleScan {
    fn new(n: u32, l: usize, k: usize, caps: &Caps) -> Result<(Vec<Matching>, TupleScan)> {
        let set = enumerate_matchings(n, l, caps.enum_cap)?;
        let s = set.len();
        let tuples = (s as u128).checked_pow(k as u32);
        match tuples {
            Some(t) if t <= caps.tuple_cap as u128 => {}
            _ => {
                return Err(Error::cap(format!(
                    "{s}^{k} tuples exceed cap {}",
                    caps.tuple_cap
                )))
            }
        }
        let emasks: Vec<u128> = set
            .iter()
            .map(|m| matching_edge_mask(m, n))
            .collect::<Result<_>>()?;
        let mut adj = vec![vec![false; s]; s];
        for a in 0..s {
            for b in 0..s {
                adj[a][b] = emasks[a] & emasks[b] != 0;
            }
        }
        Ok((
            set,
            TupleScan {
                set_len: s,
                emasks,
                adj,
            },
        ))
    }

    /// Walk all tuples in [s]^k, calling the visitor with the index tuple.
    fn for_each<F: FnMut(&[usize])>(&self, k: usize, mut visit: F) {
        let s = self.set_len;
        let mut idx = vec![0usize; k];
        loop {
            visit(&idx);
            let mut pos = k;
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < s {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    /// True when every member shares an edge with some other member.
    fn is_linked(&self, idx: &[usize]) -> bool {
        idx.iter().enumerate().all(|(a, &ia)| {
            idx.iter()
                .enumerate()
                .any(|(b, &ib)| a != b && self.adj[ia][ib])
        })
    }

    /// Component partition of the tuple positions (small k).
    fn components(&self, idx: &[usize], comp_buf: &mut [usize]) -> usize {
        let k = idx.len();
        for slot in comp_buf.iter_mut().take(k) {
            *slot = usize::MAX;
        }
        let mut n_comps = 0;
        for start in 0..k {
            if comp_buf[start] != usize::MAX {
                continue;
            }
            let id = n_comps;
            n_comps += 1;
            comp_buf[start] = id;
            // fixed-point expansion; k <= 6 so this is cheap
            let mut changed = true;
            while changed {
                changed = false;
                for a in 0..k {
                    if comp_buf[a] != id {
                        continue;
                    }
                    for b in 0..k {
                        if comp_buf[b] == usize::MAX && self.adj[idx[a]][idx[b]] {
                            comp_buf[b] = id;
                            changed = true;
                        }
                    }
                }
            }
        }
        n_comps
    }
}

/// Exact k-th central moment of the l-matching count under G(n,p), summed
/// over all linked k-tuples of matchings; exact rational in p.
pub fn central_moment_tuple_sum(
    n: u32,
    l: usize,
    p: &BigRational,
    k: usize,
    caps: &Caps,
) -> Result<BigRational> {
    if k == 0 || k > 6 {
        return Err(Error::invalid(format!("tuple sum supports 1 <= k <= 6, got k={k}")));
    }
    let (_, scan) = TupleScan::new(n, l, k, caps)?;

    // Everything is accumulated as integers over the fixed denominator
    // b^(l*k), where p = a/b: each component expectation times b^(l*t)
    // is an integer.
    let a = p.numer().clone();
    let b = p.denom().clone();
    let max_pow = l * k;
    let mut a_pows = vec![BigInt::one()];
    let mut b_pows = vec![BigInt::one()];
    for i in 1..=max_pow {
        a_pows.push(&a_pows[i - 1] * &a);
        b_pows.push(&b_pows[i - 1] * &b);
    }

    // cache: union-size signature of a component -> scaled expectation
    let mut cache: HashMap<Vec<u8>, BigInt> = HashMap::new();
    let mut acc = BigInt::zero();
    let mut comp_buf = [usize::MAX; 6];
    let mut member_buf: Vec<usize> = Vec::with_capacity(k);

    scan.for_each(k, |idx| {
        if !scan.is_linked(idx) {
            return;
        }
        let n_comps = scan.components(idx, &mut comp_buf);
        let mut tuple_term = BigInt::one();
        for comp in 0..n_comps {
            member_buf.clear();
            member_buf.extend((0..k).filter(|&j| comp_buf[j] == comp));
            let t = member_buf.len();
            let mut sig = Vec::with_capacity(1 << t);
            for subset in 0u32..(1 << t) {
                let mut union = 0u128;
                for (bit, &j) in member_buf.iter().enumerate() {
                    if subset & (1 << bit) != 0 {
                        union |= scan.emasks[idx[j]];
                    }
                }
                sig.push(union.count_ones() as u8);
            }
            let scaled = cache
                .entry(sig)
                .or_insert_with_key(|sig| scaled_component_expectation(sig, l, &a_pows, &b_pows));
            tuple_term *= &*scaled;
        }
        acc += tuple_term;
    });

    Ok(BigRational::new(acc, b_pows[max_pow].clone()))
}

/// Component expectation times b^(l*t), from the union-size signature:
/// sum over subsets S of +-(a^e(S) b^(l*t - e(S))) with
/// e(S) = l*(t-|S|) + |union(S)|.
fn scaled_component_expectation(
    sig: &[u8],
    l: usize,
    a_pows: &[BigInt],
    b_pows: &[BigInt],
) -> BigInt {
    let t = sig.len().trailing_zeros() as usize;
    let lt = l * t;
    let mut acc = BigInt::zero();
    for (subset, &u) in sig.iter().enumerate() {
        let absent = t - (subset as u32).count_ones() as usize;
        let e = l * absent + u as usize;
        let term = &a_pows[e] * &b_pows[lt - e];
        if absent % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Result of sweeping the component weight bound over every tuple.
#[derive(Clone, Copy, Debug)]
pub struct WeightBoundScan {
    pub tuples_checked: u64,
    pub components_checked: u64,
    pub all_hold: bool,
}

/// Verify |E Y_C| <= 2^n_tilde * weight for every component of every
/// k-tuple of l-matchings of K_n, with exact rational comparisons.
/// Distinct component shapes are checked once and cached.
pub fn verify_weight_bounds(
    n: u32,
    l: usize,
    k: usize,
    p: &BigRational,
    caps: &Caps,
) -> Result<WeightBoundScan> {
    if k == 0 || k > 6 {
        return Err(Error::invalid(format!("bound scan supports 1 <= k <= 6, got k={k}")));
    }
    let (_, scan) = TupleScan::new(n, l, k, caps)?;
    let a = p.numer().clone();
    let b = p.denom().clone();
    let max_pow = l * k;
    let mut a_pows = vec![BigInt::one()];
    let mut b_pows = vec![BigInt::one()];
    for i in 1..=max_pow {
        a_pows.push(&a_pows[i - 1] * &a);
        b_pows.push(&b_pows[i - 1] * &b);
    }

    let mut cache: HashMap<Vec<u8>, bool> = HashMap::new();
    let mut tuples_checked = 0u64;
    let mut components_checked = 0u64;
    let mut all_hold = true;
    let mut comp_buf = [usize::MAX; 6];
    let mut member_buf: Vec<usize> = Vec::with_capacity(k);

    scan.for_each(k, |idx| {
        tuples_checked += 1;
        let n_comps = scan.components(idx, &mut comp_buf);
        for comp in 0..n_comps {
            member_buf.clear();
            member_buf.extend((0..k).filter(|&j| comp_buf[j] == comp));
            let t = member_buf.len();
            let mut sig = Vec::with_capacity(1 << t);
            for subset in 0u32..(1 << t) {
                let mut union = 0u128;
                for (bit, &j) in member_buf.iter().enumerate() {
                    if subset & (1 << bit) != 0 {
                        union |= scan.emasks[idx[j]];
                    }
                }
                sig.push(union.count_ones() as u8);
            }
            components_checked += 1;
            let holds = *cache.entry(sig).or_insert_with_key(|sig| {
                let t = sig.len().trailing_zeros() as usize;
                let m_tilde = sig[sig.len() - 1] as usize;
                let ey = scaled_component_expectation(sig, l, &a_pows, &b_pows);
                // weight scaled by b^(l*t)
                let lt = l * t;
                let weight = if t <= 2 {
                    &a_pows[m_tilde] * &b_pows[lt - m_tilde] - &a_pows[lt]
                } else {
                    &a_pows[m_tilde] * &b_pows[lt - m_tilde]
                };
                ey.abs() <= BigInt::from(1u64 << t) * weight
            });
            all_hold &= holds;
        }
    });
    Ok(WeightBoundScan {
        tuples_checked,
        components_checked,
        all_hold,
    })
}

/// |K| for the given k: number of k-tuples in which every member shares
/// an edge with some other member.
pub fn count_linked_tuples(n: u32, l: usize, k: usize, caps: &Caps) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let (_, scan) = TupleScan::new(n, l, k, caps)?;
    let mut count = 0u64;
    scan.for_each(k, |idx| {
        if scan.is_linked(idx) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// |K'| for the given k: number of k-tuples whose components are exactly
/// floor(k/2) leading structures.
pub fn count_leading_tuples(n: u32, l: usize, k: usize, caps: &Caps) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let (set, scan) = TupleScan::new(n, l, k, caps)?;
    let refs: Vec<&Matching> = set.iter().collect();
    let mut count = 0u64;
    scan.for_each(k, |idx| {
        // cheap pre-filter before full classification
        if !scan.is_linked(idx) {
            return;
        }
        let tuple: Vec<&Matching> = idx.iter().map(|&i| refs[i]).collect();
        let class = classify_tuple(&tuple, n).expect("enumerated matchings are valid");
        if class.in_leading {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// |T| for even k: ordered (k/2)-tuples of ordered kissing pairs, each
/// pair edge-disjoint from all earlier members.
pub fn count_disjoint_pair_sequences(n: u32, l: usize, k: usize, caps: &Caps) -> Result<BigUint> {
    if k == 0 || k % 2 != 0 {
        return Err(Error::invalid(format!(
            "pair-sequence count is defined for even k, got k={k}"
        )));
    }
    let set = enumerate_matchings(n, l, caps.enum_cap)?;
    let emasks: Vec<u128> = set
        .iter()
        .map(|m| matching_edge_mask(m, n))
        .collect::<Result<_>>()?;
    // ordered kissing pairs and the mask of their union
    let mut pairs: Vec<u128> = Vec::new();
    for a in 0..set.len() {
        for b in 0..set.len() {
            if (emasks[a] & emasks[b]).count_ones() == 1 {
                pairs.push(emasks[a] | emasks[b]);
            }
        }
    }
    if (pairs.len() as u128).pow(k as u32 / 2) > caps.tuple_cap as u128 {
        return Err(Error::cap(format!(
            "{}^{} pair sequences exceed cap {}",
            pairs.len(),
            k / 2,
            caps.tuple_cap
        )));
    }
    fn rec(pairs: &[u128], depth: usize, used: u128, total: &mut u64) {
        if depth == 0 {
            *total += 1;
            return;
        }
        for &pm in pairs {
            if pm & used == 0 {
                rec(pairs, depth - 1, used | pm, total);
            }
        }
    }
    let mut total = 0u64;
    rec(&pairs, k / 2, 0, &mut total);
    Ok(BigUint::from(total))
}
