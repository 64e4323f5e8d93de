//! Vertex integrity: a kernel with at most `3p²` vertices.
//!
//! One round looks at three decompositions. A `p`-BCD whose packing exceeds
//! `p` proves a no-instance. A `1`-BCD with a packing of at most `p` yields
//! a `(p, 1)` crown. Failing both, a binary search finds λ where the
//! λ-BCD packing is too large but the `(λ+1)`-BCD packing is not; the first
//! fact shows that every solution leaves a component bigger than λ, so the
//! crown of the second decomposition (components of size at most λ+1) can
//! go.

use crate::graph::{connected_components, VertexSet, WeightedGraph};

use super::{
    bcd_above, check_problem, check_unit, crown_dbe, exhaust, heaviest_assigned, integrity_record, light_removal,
    Bcd, Instance, KernelError, KernelOptions, KernelOutcome, Problem, Run, Step,
};

/// Apply the VI round until it decides or the graph has at most `3p²` vertices.
pub fn kernelize_vi(inst: &Instance, opts: &KernelOptions) -> Result<KernelOutcome, KernelError> {
    check_problem(inst, Problem::Vi)?;
    check_unit(inst)?;
    exhaust(inst, opts, inst.graph.vertex_count() + 2, round)
}

/// Answers that need no decomposition. Every component of size at most `p`
/// means the empty set is a solution. Otherwise some vertex must stay in a
/// component of size more than `p` or be paid for, so a vertex of size `p`
/// or more rules out every solution. Deleting part of a clique leaves a
/// clique, so any solution pays the full size of every clique component,
/// and one of size more than `p` is a no as well.
pub(crate) fn trivial_integrity(inst: &Instance) -> Option<Step> {
    let p = inst.budget;
    let g = &inst.graph;
    let comps = connected_components(g);
    if comps.iter().all(|c| inst.size_of(c) <= p) {
        return Some(Step::Yes);
    }
    if g.vertices().any(|v| inst.size_of(&VertexSet::from([v])) >= p) {
        return Some(Step::No);
    }
    if comps.iter().any(|c| inst.size_of(c) > p && c.iter().all(|&v| g.degree(v) + 1 == c.len())) {
        return Some(Step::No);
    }
    None
}

fn round(inst: &Instance, run: &mut Run) -> Result<Step, KernelError> {
    if let Some(s) = trivial_integrity(inst) {
        return Ok(s);
    }
    let p = inst.budget;
    // The packing test is cheap and decides some small instances too, so it
    // runs before the size gate.
    let (hp, bp) = bcd_above(inst, p, run)?;
    if bp.packing_size() as u64 > p {
        return Ok(Step::No);
    }
    if inst.graph.vertex_count() as u64 <= 3 * p * p {
        return Ok(Step::Small(None));
    }
    let (h1, b1) = bcd_above(inst, 1, run)?;
    if b1.packing_size() as u64 <= p {
        return crown_round(inst, &h1, &b1, None, run);
    }
    // A 1-BCD packing above p and a p-BCD packing of at most p bracket the
    // threshold; the search keeps the bracket and halves it.
    let (mut lo, mut hi) = (1, p);
    let mut best = (hp, bp);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let (hm, bm) = bcd_above(inst, mid, run)?;
        if bm.packing_size() as u64 <= p {
            hi = mid;
            best = (hm, bm);
        } else {
            lo = mid;
        }
    }
    crown_round(inst, &best.0, &best.1, Some(hi), run)
}

/// Delete the light components left out by the decomposition, or else a
/// `(p, λ)` crown taken from its head and crown.
fn crown_round(
    inst: &Instance,
    covered: &WeightedGraph,
    b: &Bcd,
    lb: Option<u64>,
    run: &mut Run,
) -> Result<Step, KernelError> {
    let light: VertexSet = inst.graph.vertex_set().difference(&covered.vertex_set()).copied().collect();
    if let Some(rec) = light_removal(inst, &light) {
        return Ok(Step::Reduce(rec, lb));
    }
    let p = inst.budget;
    let y = b.lambda;
    // A₁ heads then carry more than d - y + 1 = p vertices with their crown.
    let d = crown_dbe(&inst.graph, b, |_| p + y - 1, y, run)?;
    if d.a1.is_empty() {
        if light.is_empty() {
            return Err(KernelError::Internal(format!(
                "no (p, {y}) crown although the decomposition covers more than 3p² vertices"
            )));
        }
        run.stats.guarantee_misses += 1;
        return Ok(Step::Small(lb));
    }
    let crown = d.preimage(&d.a1);
    let rec = integrity_record(inst, d.a1.clone(), crown, heaviest_assigned(&inst.graph, &d));
    Ok(Step::Reduce(rec, lb))
}
