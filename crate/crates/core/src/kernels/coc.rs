//! Component order connectivity: `2kW` vertex kernels built from reducible
//! pairs.
//!
//! A reducible pair `(A, B)` is a crown-like structure: `A` separates `B`,
//! the components of `G[B]` have at most `W` vertices, and a fractional
//! assignment gives each vertex of `A` at least `2W - 1` vertices of `B`.
//! Some optimal solution then contains `A`, so `A ∪ B` can be deleted at a
//! cost of `|A|`. Both algorithms below grow a working set `S` of suspected
//! head vertices and ask a demanded balanced expansion from `S` (plus the
//! current BCD heads) into the small components around it whether a pair
//! has appeared.
//!
//! The FPT search branches on every candidate vertex, the second algorithm
//! takes all candidates at once and relies on a decomposition that never
//! offers a crown vertex as a candidate. That is guaranteed for `W = 1` by
//! seeding the decomposition with a maximum matching and for claw-free
//! graphs by carving connected pieces.

use std::collections::{BTreeMap, HashSet};

use crate::bcd::{clawfree_bcd, compute_bcd, compute_bcd_seeded, maximum_matching, Bcd};
use crate::dbe::{compute_fractional_dbe, round_fractional, uniform_demands};
use crate::graph::{components_of_subset, connected_components, is_claw_free, VertexId, VertexSet, WeightedGraph};

use super::{
    check_problem, check_unit, exhaust, Instance, KernelError, KernelOptions, KernelOutcome, Problem,
    ReductionRecord, Run, Step,
};

/// A (possibly strictly) reducible pair.
///
/// `g` maps `(i, a)` to the mass that the `i`-th component of `G[B]` (in the
/// order of [`components_of_subset`]) gives to head `a`; absent keys are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduciblePair {
    pub a: VertexSet,
    pub b: VertexSet,
    pub g: BTreeMap<(usize, VertexId), u64>,
    pub strict_witness: Option<VertexId>,
}

impl ReduciblePair {
    /// Mass received by head `a`.
    pub fn received(&self, a: VertexId) -> u64 {
        self.g.iter().filter(|((_, h), _)| *h == a).map(|(_, m)| m).sum()
    }

    /// Check every defining condition against `graph` and the bound `w`.
    pub fn verify(&self, graph: &WeightedGraph, w: u64) -> Result<(), String> {
        if !self.a.is_disjoint(&self.b) {
            return Err("A and B overlap".into());
        }
        if !graph.neighborhood(&self.b).is_subset(&self.a) {
            return Err("B has a neighbour outside A".into());
        }
        let comps = components_of_subset(graph, &self.b);
        for (i, q) in comps.iter().enumerate() {
            if q.len() as u64 > w {
                return Err(format!("component {i} of G[B] has more than {w} vertices"));
            }
            let n = graph.neighborhood(q);
            let mut out = 0;
            for (&(j, a), &m) in self.g.range((i, 0)..=(i, VertexId::MAX)) {
                debug_assert_eq!(j, i);
                if m > 0 && !n.contains(&a) {
                    return Err(format!("component {i} gives mass to non-neighbour {a}"));
                }
                out += m;
            }
            if out > q.len() as u64 {
                return Err(format!("component {i} gives away more than its size"));
            }
        }
        if let Some(&(i, _)) = self.g.keys().find(|(i, _)| *i >= comps.len()) {
            return Err(format!("assignment names component {i}, which does not exist"));
        }
        for &a in &self.a {
            if self.received(a) < 2 * w - 1 {
                return Err(format!("head {a} receives less than 2W - 1"));
            }
        }
        if let Some(s) = self.strict_witness {
            if !self.a.contains(&s) || self.received(s) < 2 * w {
                return Err(format!("witness {s} does not receive 2W"));
            }
        }
        Ok(())
    }
}

/// The only vertex whose removal leaves components of at most `w` vertices
/// in the connected graph `g_r`, provided `g_r` has more than `2w` vertices.
pub fn unique_w_separator(g_r: &WeightedGraph, w: u64) -> Option<VertexId> {
    if g_r.vertex_count() as u64 <= 2 * w {
        return None;
    }
    g_r.vertices().find(|&v| {
        let rest: VertexSet = g_r.vertices().filter(|&u| u != v).collect();
        components_of_subset(g_r, &rest).iter().all(|c| c.len() as u64 <= w)
    })
}

/// The parts of `b` with more than `2w` vertices and a single-vertex
/// `w`-separator, and the union of those separators.
pub fn compute_r_prime(g: &WeightedGraph, b: &Bcd, w: u64) -> (Vec<VertexSet>, VertexSet) {
    let mut parts = Vec::new();
    let mut seps = VertexSet::new();
    for r in &b.parts {
        if let Some(v) = unique_w_separator(&g.induced(r), w) {
            parts.push(r.clone());
            seps.insert(v);
        }
    }
    (parts, seps)
}

/// Look for a reducible pair with heads in `S ∪ H`.
///
/// `g` must have no component with `w` vertices or fewer and `b` must be a
/// `w`-BCD of the components of `G - S` with more than `w` vertices. The
/// crown side is `C` together with the small components of `G - S`.
pub fn find_reducible_structure(
    g: &WeightedGraph,
    s: &VertexSet,
    b: &Bcd,
    w: u64,
) -> Result<Option<ReduciblePair>, KernelError> {
    let mut run = Run::new(&KernelOptions::default());
    pair_search(g, s, b, w, &mut run)
}

fn pair_search(
    g: &WeightedGraph,
    s: &VertexSet,
    b: &Bcd,
    w: u64,
    run: &mut Run,
) -> Result<Option<ReduciblePair>, KernelError> {
    let mut a_side = s.clone();
    a_side.extend(&b.head);
    let mut b_side = b.crown.clone();
    for q in connected_components(&g.without(s)) {
        if q.len() as u64 <= w {
            b_side.extend(q);
        }
    }
    if b_side.is_empty() || a_side.is_empty() {
        return Ok(None);
    }
    let demands = uniform_demands(&a_side, 2 * w - 1);
    let fr = compute_fractional_dbe(g, &a_side, &b_side, &demands, w)?;
    let dbe = run.dbe(g, &a_side, &b_side, round_fractional(g, &fr));
    if dbe.a1.is_empty() {
        return Ok(None);
    }
    let crown = dbe.preimage(&dbe.a1);
    // Heads in A₁ have a saturated sink arc, so the fractional flow into them
    // is exactly 2W - 1 each. That flow only comes from components that see
    // no A₂ head, which the rounding hands to A₁ as well.
    let index: BTreeMap<VertexId, usize> = components_of_subset(g, &crown)
        .iter()
        .enumerate()
        .map(|(i, q)| (*q.first().unwrap(), i))
        .collect();
    let mut assignment = BTreeMap::new();
    for (q, mass) in fr.components.iter().zip(&fr.mass) {
        for (&a, &m) in mass {
            if m > 0 && dbe.a1.contains(&a) {
                let i = *index.get(q.first().unwrap()).ok_or_else(|| {
                    KernelError::Internal("component with flow into A1 left out of the crown".into())
                })?;
                assignment.insert((i, a), m);
            }
        }
    }
    Ok(Some(ReduciblePair { a: dbe.a1, b: crown, g: assignment, strict_witness: None }))
}

fn record(p: ReduciblePair) -> ReductionRecord {
    let decrement = p.a.len() as u64;
    ReductionRecord { head: p.a, crown: p.b, decrement, gadget: None }
}

/// Rules shared by both algorithms. Small components go first (they never
/// need a deletion), an empty graph is a yes, a non-empty one with `k = 0`
/// a no, and at most `2kW` vertices is already a kernel.
fn cleanup(inst: &Instance) -> Option<Step> {
    let (k, w) = (inst.budget, inst.cap);
    let g = &inst.graph;
    let light: VertexSet =
        connected_components(g).into_iter().filter(|c| c.len() as u64 <= w).flatten().collect();
    if !light.is_empty() {
        return Some(Step::Reduce(
            ReductionRecord { head: VertexSet::new(), crown: light, decrement: 0, gadget: None },
            None,
        ));
    }
    if g.is_empty() {
        return Some(Step::Yes);
    }
    if k == 0 {
        return Some(Step::No);
    }
    if g.vertex_count() as u64 <= 2 * k * w {
        return Some(Step::Small(None));
    }
    None
}

fn check_coc(inst: &Instance) -> Result<(), KernelError> {
    check_problem(inst, Problem::Coc)?;
    check_unit(inst)?;
    if inst.cap == 0 {
        return Err(KernelError::ZeroCap);
    }
    Ok(())
}

/// Large components of `G - S`.
fn big_rest(g: &WeightedGraph, s: &VertexSet, w: u64) -> WeightedGraph {
    let rest = g.without(s);
    let small: VertexSet =
        connected_components(&rest).into_iter().filter(|c| c.len() as u64 <= w).flatten().collect();
    rest.without(&small)
}

/// Bounded search tree over the working set `S`, repeated until the
/// instance has at most `2kW` vertices or is decided.
pub fn kernelize_coc_fpt(inst: &Instance, opts: &KernelOptions) -> Result<KernelOutcome, KernelError> {
    check_coc(inst)?;
    exhaust(inst, opts, inst.graph.vertex_count() + 2, fpt_round)
}

/// What a subtree of the search found.
enum Found {
    Decided(Step),
    Nothing,
}

struct Search<'a> {
    g: &'a WeightedGraph,
    k: u64,
    w: u64,
    max_depth: usize,
    seen: HashSet<VertexSet>,
}

impl Search<'_> {
    fn node(&mut self, s: &VertexSet, run: &mut Run) -> Result<Found, KernelError> {
        run.stats.nodes += 1;
        let rest = big_rest(self.g, s, self.w);
        if rest.is_empty() {
            // |S| is at most the depth cap, which is at most k.
            return Ok(Found::Decided(Step::Yes));
        }
        let b = run.bcd(&rest, compute_bcd(&rest, self.w)?);
        if b.packing_size() as u64 > self.k {
            return Ok(Found::Decided(Step::No));
        }
        if let Some(p) = pair_search(self.g, s, &b, self.w, run)? {
            return Ok(Found::Decided(Step::Reduce(record(p), None)));
        }
        if s.len() >= self.max_depth {
            return Ok(Found::Nothing);
        }
        let (_, seps) = compute_r_prime(&rest, &b, self.w);
        let mut candidates = b.head.clone();
        candidates.extend(seps);
        for v in candidates {
            let mut child = s.clone();
            child.insert(v);
            if !self.seen.insert(child.clone()) {
                continue;
            }
            if let Found::Decided(step) = self.node(&child, run)? {
                return Ok(Found::Decided(step));
            }
        }
        Ok(Found::Nothing)
    }
}

/// `Σ_{d ≤ depth} k^d`, saturating.
fn tree_bound(k: u64, depth: usize) -> u64 {
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for _ in 0..=depth {
        total = total.saturating_add(level);
        level = level.saturating_mul(k.max(1));
    }
    total
}

fn fpt_round(inst: &Instance, run: &mut Run) -> Result<Step, KernelError> {
    if let Some(step) = cleanup(inst) {
        return Ok(step);
    }
    let (k, w) = (inst.budget, inst.cap);
    let g = &inst.graph;
    let first = run.bcd(g, compute_bcd(g, w)?);
    let t = first.packing_size() as u64;
    if t > k {
        return Ok(Step::No);
    }
    let max_depth = (3 * t).min(k) as usize;
    // Every node branches on at most |H| + |ℜ'| <= k candidates.
    run.stats.node_bound = run.stats.node_bound.saturating_add(tree_bound(k, max_depth));
    let mut search = Search { g, k, w, max_depth, seen: HashSet::from([VertexSet::new()]) };
    match search.node(&VertexSet::new(), run)? {
        Found::Decided(step) => Ok(step),
        // Only the whole tree running dry proves a no-instance.
        Found::Nothing => Ok(Step::No),
    }
}

/// How AlgCOC-2 builds its decompositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coc2Mode {
    /// A 1-BCD seeded with a maximum matching; needs `W = 1`.
    MatchingSeeded,
    /// Carved connected pieces with empty crown and head; needs a claw-free graph.
    Clawfree,
}

/// The polynomial variant of the search, repeated until the instance has at
/// most `2kW` vertices or is decided.
pub fn kernelize_coc2(inst: &Instance, mode: Coc2Mode, opts: &KernelOptions) -> Result<KernelOutcome, KernelError> {
    check_coc(inst)?;
    match mode {
        Coc2Mode::MatchingSeeded if inst.cap != 1 => {
            return Err(KernelError::ModePrecondition(format!("matching-seeded mode needs W = 1, got {}", inst.cap)));
        }
        Coc2Mode::Clawfree if !is_claw_free(&inst.graph) => {
            return Err(KernelError::ModePrecondition("clawfree mode needs a claw-free graph".into()));
        }
        _ => {}
    }
    exhaust(inst, opts, inst.graph.vertex_count() + 2, |i, run| coc2_round(i, mode, run))
}

fn mode_bcd(g: &WeightedGraph, w: u64, mode: Coc2Mode) -> Result<Bcd, KernelError> {
    Ok(match mode {
        Coc2Mode::MatchingSeeded => compute_bcd_seeded(g, 1, &maximum_matching(g))?,
        Coc2Mode::Clawfree => {
            let mut all =
                Bcd { lambda: w, crown: VertexSet::new(), head: VertexSet::new(), parts: Vec::new(), crown_components: Vec::new() };
            for c in connected_components(g) {
                all.parts.extend(clawfree_bcd(&g.induced(&c), w)?.parts);
            }
            all
        }
    })
}

fn coc2_round(inst: &Instance, mode: Coc2Mode, run: &mut Run) -> Result<Step, KernelError> {
    if let Some(step) = cleanup(inst) {
        return Ok(step);
    }
    let (k, w) = (inst.budget, inst.cap);
    let g = &inst.graph;
    let mut s = VertexSet::new();
    let mut rest = g.clone();
    while !rest.is_empty() {
        run.stats.nodes += 1;
        let b = run.bcd(&rest, mode_bcd(&rest, w, mode)?);
        let (r_prime, seps) = compute_r_prime(&rest, &b, w);
        if b.packing_size() as u64 > k || (r_prime.is_empty() && b.head.is_empty()) {
            return Ok(Step::No);
        }
        s.extend(&seps);
        s.extend(&b.head);
        if let Some(p) = pair_search(g, &s, &b, w, run)? {
            return Ok(Step::Reduce(record(p), None));
        }
        rest = big_rest(g, &s, w);
    }
    // Everything left after removing S is small, so S itself decides.
    Ok(if s.len() as u64 <= k { Step::Yes } else { Step::No })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{replay, Verdict};

    fn star(leaves: u32) -> WeightedGraph {
        let e: Vec<_> = (2..=leaves + 1).map(|v| (1, v)).collect();
        WeightedGraph::from_edges(leaves + 1, &e).unwrap()
    }

    fn path(n: u32) -> WeightedGraph {
        let e: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        WeightedGraph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn separator_of_a_path_is_its_middle() {
        assert_eq!(unique_w_separator(&path(5), 2), Some(3));
        assert_eq!(unique_w_separator(&path(4), 2), None);
        assert_eq!(unique_w_separator(&star(4), 1), Some(1));
    }

    #[test]
    fn r_prime_skips_small_parts() {
        let g = path(5);
        let b = Bcd {
            lambda: 2,
            crown: VertexSet::new(),
            head: VertexSet::new(),
            parts: vec![g.vertex_set()],
            crown_components: Vec::new(),
        };
        assert_eq!(compute_r_prime(&g, &b, 2), (vec![g.vertex_set()], VertexSet::from([3])));
        let tri = WeightedGraph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        let b = Bcd { parts: vec![tri.vertex_set()], ..b };
        assert_eq!(compute_r_prime(&tri, &b, 2), (vec![], VertexSet::new()));
    }

    #[test]
    fn star_centre_is_a_reducible_head() {
        let g = star(3);
        let b = compute_bcd(&g, 1).unwrap();
        let p = find_reducible_structure(&g, &VertexSet::new(), &b, 1).unwrap().unwrap();
        assert_eq!(p.a, VertexSet::from([1]));
        assert_eq!(p.b, VertexSet::from([2, 3, 4]));
        p.verify(&g, 1).unwrap();
    }

    #[test]
    fn fpt_star_reduces_to_empty() {
        let inst = Instance::coc(star(3), 1, 1);
        let out = kernelize_coc_fpt(&inst, &Default::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Reduced);
        assert!(out.instance.graph.is_empty());
        assert_eq!(out.instance.budget, 0);
        assert_eq!(out.certificate[0].head, VertexSet::from([1]));
        assert_eq!(replay(&inst, &out.certificate).unwrap(), out.instance);
    }

    #[test]
    fn two_triangles_with_one_deletion_is_no() {
        let g = WeightedGraph::from_edges(6, &[(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6)]).unwrap();
        let out = kernelize_coc_fpt(&Instance::coc(g, 1, 1), &Default::default()).unwrap();
        assert_eq!(out.verdict, Verdict::DecidedNo);
    }

    #[test]
    fn odd_cycle_needs_three() {
        let mut e: Vec<_> = (1..5).map(|i| (i, i + 1)).collect();
        e.push((1, 5));
        let g = WeightedGraph::from_edges(5, &e).unwrap();
        let out = kernelize_coc2(&Instance::coc(g, 2, 1), Coc2Mode::MatchingSeeded, &Default::default()).unwrap();
        assert_eq!(out.verdict, Verdict::DecidedNo);
    }

    #[test]
    fn coc2_star() {
        let inst = Instance::coc(star(3), 1, 1);
        let out = kernelize_coc2(&inst, Coc2Mode::MatchingSeeded, &Default::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Reduced);
    }

    #[test]
    fn mode_preconditions_are_checked() {
        let inst = Instance::coc(star(3), 1, 2);
        assert!(matches!(
            kernelize_coc2(&inst, Coc2Mode::MatchingSeeded, &Default::default()),
            Err(KernelError::ModePrecondition(_))
        ));
        assert!(matches!(
            kernelize_coc2(&inst, Coc2Mode::Clawfree, &Default::default()),
            Err(KernelError::ModePrecondition(_))
        ));
    }
}
