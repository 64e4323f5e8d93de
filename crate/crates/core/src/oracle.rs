//! Exhaustive solvers used as ground truth in tests.
//!
//! Everything here enumerates vertex subsets as bitmasks and is exponential
//! by design. Each entry point takes an explicit vertex cap and refuses
//! larger graphs with [`OracleError::CapExceeded`].

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::bcd::Packing;
use crate::graph::{components_of_subset, VertexId, VertexSet, WeightedGraph};
use crate::kernels::{Instance, KernelOutcome, Problem, ReduciblePair, Verdict};
use crate::maxflow::FlowNetwork;

/// Default vertex cap for the subset solvers.
pub const DEFAULT_CAP: usize = 14;
/// Default vertex cap for the reducible pair search.
pub const PAIR_CAP: usize = 10;
/// Environment variable overriding [`DEFAULT_CAP`].
pub const CAP_ENV: &str = "CROWNKERNEL_ORACLE_CAP";
/// Masks are `u64`, and 2^30 subsets is already far beyond desk scale.
const HARD_CAP: usize = 30;

/// The cap from [`CAP_ENV`], or [`DEFAULT_CAP`] when unset or unparsable.
pub fn cap_from_env() -> usize {
    std::env::var(CAP_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_CAP)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {n} vertices, oracle cap is {cap}")]
    CapExceeded { n: usize, cap: usize },
}

/// Exact answer for one instance.
///
/// `optimum` is the least integrity (`w(S) + heaviest component`) for the
/// integrity problems and the least separator size or weight for the
/// connectivity problems. `p_ell` is only set for yes-instances of the
/// integrity problems: the lightest possible heaviest component over all
/// solutions of cost at most `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub answer: bool,
    pub optimum: Option<u64>,
    pub witness: Option<VertexSet>,
    pub p_ell: Option<u64>,
}

/// Bitmask view of a small graph; bit `i` is the `i`-th smallest id.
struct Masks {
    ids: Vec<VertexId>,
    adj: Vec<u64>,
    weight: Vec<u64>,
}

impl Masks {
    fn new(g: &WeightedGraph, cap: usize) -> Result<Self, OracleError> {
        let n = g.vertex_count();
        let cap = cap.min(HARD_CAP);
        if n > cap {
            return Err(OracleError::CapExceeded { n, cap });
        }
        let ids: Vec<VertexId> = g.vertices().collect();
        let pos: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adj = ids.iter().map(|&v| g.neighbors(v).iter().fold(0u64, |m, u| m | 1 << pos[u])).collect();
        let weight = ids.iter().map(|&v| g.weight(v)).collect();
        Ok(Masks { ids, adj, weight })
    }

    fn full(&self) -> u64 {
        if self.ids.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.ids.len()) - 1
        }
    }

    fn size(&self, mask: u64, unit: bool) -> u64 {
        if unit {
            mask.count_ones() as u64
        } else {
            bits(mask).map(|i| self.weight[i]).sum()
        }
    }

    /// Component of `start` inside `within`.
    fn component(&self, start: usize, within: u64) -> u64 {
        let mut comp = 1u64 << start;
        let mut frontier = comp;
        while frontier != 0 {
            let i = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = self.adj[i] & within & !comp;
            comp |= new;
            frontier |= new;
        }
        comp
    }

    fn components(&self, within: u64) -> Vec<u64> {
        let mut left = within;
        let mut out = Vec::new();
        while left != 0 {
            let c = self.component(left.trailing_zeros() as usize, within);
            out.push(c);
            left &= !c;
        }
        out
    }

    fn heaviest(&self, within: u64, unit: bool) -> u64 {
        self.components(within).into_iter().map(|c| self.size(c, unit)).max().unwrap_or(0)
    }

    fn is_connected(&self, mask: u64) -> bool {
        mask != 0 && self.component(mask.trailing_zeros() as usize, mask) == mask
    }

    fn set(&self, mask: u64) -> VertexSet {
        bits(mask).map(|i| self.ids[i]).collect()
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            i
        })
    })
}

/// Ordering key for ties: fewer vertices first, then lexicographically
/// smaller id lists.
fn tie_key(mask: u64) -> (u32, Vec<usize>) {
    (mask.count_ones(), bits(mask).collect())
}

fn integrity(g: &WeightedGraph, p: u64, unit: bool, cap: usize) -> Result<OracleResult, OracleError> {
    let m = Masks::new(g, cap)?;
    let full = m.full();
    let mut best: Option<(u64, (u32, Vec<usize>), u64)> = None;
    let mut p_ell: Option<u64> = None;
    for s in 0..=full {
        let heavy = m.heaviest(full & !s, unit);
        let cost = m.size(s, unit) + heavy;
        if cost <= p {
            p_ell = Some(p_ell.map_or(heavy, |x| x.min(heavy)));
        }
        let key = (cost, tie_key(s), s);
        if best.as_ref().is_none_or(|b| (key.0, &key.1) < (b.0, &b.1)) {
            best = Some(key);
        }
    }
    let (opt, _, s) = best.expect("at least the empty set");
    Ok(OracleResult { answer: opt <= p, optimum: Some(opt), witness: Some(m.set(s)), p_ell })
}

fn connectivity(g: &WeightedGraph, k: u64, w: u64, unit: bool, cap: usize) -> Result<OracleResult, OracleError> {
    let m = Masks::new(g, cap)?;
    let full = m.full();
    let mut best: Option<(u64, (u32, Vec<usize>), u64)> = None;
    for s in 0..=full {
        if m.heaviest(full & !s, unit) > w {
            continue;
        }
        let key = (m.size(s, unit), tie_key(s), s);
        if best.as_ref().is_none_or(|b| (key.0, &key.1) < (b.0, &b.1)) {
            best = Some(key);
        }
    }
    let (opt, _, s) = best.expect("removing everything is always feasible");
    Ok(OracleResult { answer: opt <= k, optimum: Some(opt), witness: Some(m.set(s)), p_ell: None })
}

/// Vertex integrity: is there `S` with `|S|` plus the largest component of
/// `G - S` at most `p`?
pub fn brute_vi(g: &WeightedGraph, p: u64, cap: usize) -> Result<OracleResult, OracleError> {
    integrity(g, p, true, cap)
}

/// Weighted vertex integrity.
pub fn brute_wvi(g: &WeightedGraph, p: u64, cap: usize) -> Result<OracleResult, OracleError> {
    integrity(g, p, false, cap)
}

/// Component order connectivity: at most `k` deletions leaving components
/// of at most `w` vertices.
pub fn brute_coc(g: &WeightedGraph, k: u64, w: u64, cap: usize) -> Result<OracleResult, OracleError> {
    connectivity(g, k, w, true, cap)
}

/// Weighted component order connectivity.
pub fn brute_wcoc(g: &WeightedGraph, k: u64, w: u64, cap: usize) -> Result<OracleResult, OracleError> {
    connectivity(g, k, w, false, cap)
}

/// Solve any instance by its problem.
pub fn brute_solve(inst: &Instance, cap: usize) -> Result<OracleResult, OracleError> {
    let g = &inst.graph;
    match inst.problem {
        Problem::Vi => brute_vi(g, inst.budget, cap),
        Problem::Wvi => brute_wvi(g, inst.budget, cap),
        Problem::Coc => brute_coc(g, inst.budget, inst.cap, cap),
        Problem::Wcoc => brute_wcoc(g, inst.budget, inst.cap, cap),
    }
}

/// A maximum packing of disjoint connected sets of weight at least `lambda`.
///
/// Only inclusion-minimal connected sets need to be considered, and a set is
/// minimal exactly when dropping any vertex that keeps it connected takes it
/// below `lambda`.
pub fn brute_max_packing(g: &WeightedGraph, lambda: u64, cap: usize) -> Result<Packing, OracleError> {
    let m = Masks::new(g, cap)?;
    let full = m.full();
    let mut minimal: Vec<Vec<u64>> = vec![Vec::new(); m.ids.len()];
    for s in 1..=full {
        let w = m.size(s, false);
        if w < lambda || !m.is_connected(s) {
            continue;
        }
        let is_min = bits(s).all(|i| {
            let t = s & !(1 << i);
            t == 0 || !m.is_connected(t) || w - m.weight[i] < lambda
        });
        if is_min {
            minimal[s.trailing_zeros() as usize].push(s);
        }
    }
    fn best(avail: u64, minimal: &[Vec<u64>], memo: &mut HashMap<u64, Vec<u64>>) -> Vec<u64> {
        if avail == 0 {
            return Vec::new();
        }
        if let Some(r) = memo.get(&avail) {
            return r.clone();
        }
        let low = avail.trailing_zeros() as usize;
        let mut out = best(avail & !(1 << low), minimal, memo);
        for &s in &minimal[low] {
            if s & !avail == 0 {
                let mut with = best(avail & !s, minimal, memo);
                if with.len() + 1 > out.len() {
                    with.push(s);
                    out = with;
                }
            }
        }
        memo.insert(avail, out.clone());
        out
    }
    let parts = best(full, &minimal, &mut HashMap::new());
    let mut parts: Vec<VertexSet> = parts.into_iter().map(|s| m.set(s)).collect();
    parts.sort();
    Ok(Packing { parts, threshold: lambda })
}

/// A minimal strictly reducible pair, or `None` if the graph has none.
///
/// Head sets are tried by increasing size, each with the largest admissible
/// crown side: all components of `G - A` with at most `w` vertices. Since a
/// larger crown side only helps, the first head set that works cannot
/// contain a smaller working one, so the pair returned is minimal.
pub fn brute_strict_pair(g: &WeightedGraph, w: u64, cap: usize) -> Result<Option<ReduciblePair>, OracleError> {
    let m = Masks::new(g, cap)?;
    let full = m.full();
    let mut order: Vec<u64> = (1..=full).collect();
    order.sort_by_key(|&s| tie_key(s));
    for a in order {
        let rest = full & !a;
        let b: u64 = m.components(rest).into_iter().filter(|&c| c.count_ones() as u64 <= w).fold(0, |x, c| x | c);
        if (b.count_ones() as u64) < (2 * w - 1) * a.count_ones() as u64 + 1 {
            continue;
        }
        let (a_set, b_set) = (m.set(a), m.set(b));
        for witness in a_set.iter().copied() {
            if let Some(g_map) = assignment(g, &a_set, &b_set, w, witness) {
                return Ok(Some(ReduciblePair { a: a_set, b: b_set, g: g_map, strict_witness: Some(witness) }));
            }
        }
    }
    Ok(None)
}

/// A mass assignment giving every head `2w - 1` and `witness` one more, if
/// the flow network admits one.
fn assignment(
    g: &WeightedGraph,
    a: &VertexSet,
    b: &VertexSet,
    w: u64,
    witness: VertexId,
) -> Option<BTreeMap<(usize, VertexId), u64>> {
    let comps = components_of_subset(g, b);
    let heads: Vec<VertexId> = a.iter().copied().collect();
    let mut net = FlowNetwork::new(2 + heads.len() + comps.len(), 0, 1);
    let head_node = |i: usize| 2 + i;
    let mut arcs = Vec::new();
    for (qi, q) in comps.iter().enumerate() {
        let node = 2 + heads.len() + qi;
        net.add_arc(0, node, q.len() as u64);
        let n = g.neighborhood(q);
        for (hi, h) in heads.iter().enumerate() {
            if n.contains(h) {
                arcs.push((qi, *h, net.add_arc(node, head_node(hi), q.len() as u64)));
            }
        }
    }
    let mut need = 0;
    for (hi, &h) in heads.iter().enumerate() {
        let d = if h == witness { 2 * w } else { 2 * w - 1 };
        need += d;
        net.add_arc(head_node(hi), 1, d);
    }
    if net.max_flow() < need {
        return None;
    }
    Some(
        arcs.into_iter()
            .map(|(qi, h, arc)| ((qi, h), net.arc(arc).flow))
            .filter(|&(_, f)| f > 0)
            .collect(),
    )
}

/// Oracle answers for an input and for what a kernelization run made of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub original: bool,
    pub kernel: bool,
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        self.original == self.kernel
    }
}

/// Compare the oracle answer on `orig` with the outcome. A decided verdict
/// stands for its answer; otherwise the kernel instance is solved.
pub fn check_equivalence(orig: &Instance, out: &KernelOutcome, cap: usize) -> Result<Equivalence, OracleError> {
    let original = brute_solve(orig, cap)?.answer;
    let kernel = match out.verdict {
        Verdict::DecidedYes => true,
        Verdict::DecidedNo => false,
        Verdict::Reduced | Verdict::AlreadySmall => brute_solve(&out.instance, cap)?.answer,
    };
    Ok(Equivalence { original, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: u32) -> WeightedGraph {
        let e: Vec<_> = (2..=leaves + 1).map(|v| (1, v)).collect();
        WeightedGraph::from_edges(leaves + 1, &e).unwrap()
    }

    fn path(n: u32) -> WeightedGraph {
        let e: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        WeightedGraph::from_edges(n, &e).unwrap()
    }

    fn complete(n: u32) -> WeightedGraph {
        let mut e = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                e.push((i, j));
            }
        }
        WeightedGraph::from_edges(n, &e).unwrap()
    }

    fn cycle(n: u32) -> WeightedGraph {
        let mut e: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        e.push((1, n));
        WeightedGraph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn vi_examples() {
        let r = brute_vi(&star(3), 2, DEFAULT_CAP).unwrap();
        assert!(r.answer);
        assert_eq!(r.p_ell, Some(1));
        assert_eq!(r.witness, Some(VertexSet::from([1])));
        assert!(!brute_vi(&complete(4), 2, DEFAULT_CAP).unwrap().answer);
        let empty = brute_vi(&WeightedGraph::new(), 0, DEFAULT_CAP).unwrap();
        assert!(empty.answer);
        assert_eq!(empty.optimum, Some(0));
    }

    #[test]
    fn coc_examples() {
        let r = brute_coc(&path(3), 1, 1, DEFAULT_CAP).unwrap();
        assert!(r.answer);
        assert_eq!(r.witness, Some(VertexSet::from([2])));
        assert!(!brute_coc(&cycle(5), 2, 1, DEFAULT_CAP).unwrap().answer);
        assert_eq!(brute_coc(&cycle(5), 2, 1, DEFAULT_CAP).unwrap().optimum, Some(3));
        assert!(brute_coc(&star(4), 1, 2, DEFAULT_CAP).unwrap().answer);
    }

    #[test]
    fn weighted_separator_counts_weight() {
        let mut g = path(3);
        g.set_weight(2, 5).unwrap();
        let r = brute_wcoc(&g, 4, 5, DEFAULT_CAP).unwrap();
        // Deleting the middle costs 5; deleting both ends costs 2 and leaves 5.
        assert_eq!(r.optimum, Some(2));
        assert_eq!(r.witness, Some(VertexSet::from([1, 3])));
    }

    #[test]
    fn packing_examples() {
        assert_eq!(brute_max_packing(&path(6), 2, DEFAULT_CAP).unwrap().parts.len(), 3);
        assert_eq!(brute_max_packing(&complete(3), 2, DEFAULT_CAP).unwrap().parts.len(), 1);
        let mut two = complete(3);
        for v in 4..=6 {
            two.add_vertex(v, 1).unwrap();
        }
        two.add_edge(4, 5).unwrap();
        two.add_edge(5, 6).unwrap();
        two.add_edge(4, 6).unwrap();
        assert_eq!(brute_max_packing(&two, 4, DEFAULT_CAP).unwrap().parts.len(), 0);
    }

    #[test]
    fn strict_pair_examples() {
        let p = brute_strict_pair(&star(3), 1, PAIR_CAP).unwrap().unwrap();
        assert_eq!(p.a, VertexSet::from([1]));
        assert_eq!(p.b, VertexSet::from([2, 3, 4]));
        p.verify(&star(3), 1).unwrap();
        assert_eq!(brute_strict_pair(&complete(2), 1, PAIR_CAP).unwrap(), None);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            brute_vi(&path(5), 3, 4),
            Err(OracleError::CapExceeded { n: 5, cap: 4 })
        );
    }
}
