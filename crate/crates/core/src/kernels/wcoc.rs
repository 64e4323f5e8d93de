//! Weighted component order connectivity: a kernel of weight at most
//! `3μ(k + √μ·W)` with `μ = max(k, W)`.
//!
//! After the exact clean-up rules the instance either already meets the
//! integer weight gate `3μk + W(T + tk)` (with `t = ⌈√k⌉`, `T = ⌊μk/t⌋`),
//! or its `W`-BCD either proves a no-instance through a large packing or has
//! a non-empty over-demanded head set to delete. An empty one is itself a
//! proof of a no-instance once the weight is above the gate.

use crate::graph::{connected_components, VertexSet};

use super::{
    bcd_above, ceil_sqrt, check_problem, crown_dbe, exhaust, Instance, KernelError, KernelOptions, KernelOutcome,
    Problem, ReductionRecord, Run, Step,
};

/// Largest weight a wCOC instance may keep after kernelization.
pub fn weight_gate(k: u64, w: u64) -> u64 {
    let mu = k.max(w);
    let t = ceil_sqrt(k).max(1);
    let big_t = mu * k / t;
    3 * mu * k + w * (big_t + t * k)
}

pub fn kernelize_wcoc(inst: &Instance, opts: &KernelOptions) -> Result<KernelOutcome, KernelError> {
    check_problem(inst, Problem::Wcoc)?;
    if inst.cap == 0 {
        return Err(KernelError::ZeroCap);
    }
    exhaust(inst, opts, inst.graph.vertex_count() + 2, round)
}

fn round(inst: &Instance, run: &mut Run) -> Result<Step, KernelError> {
    let (k, w) = (inst.budget, inst.cap);
    let g = &inst.graph;
    // Components within the bound never need a deletion, so they go first.
    let light: VertexSet =
        connected_components(g).into_iter().filter(|c| g.weight_of(c) <= w).flatten().collect();
    if !light.is_empty() {
        return Ok(Step::Reduce(ReductionRecord { head: VertexSet::new(), crown: light, decrement: 0, gadget: None }, None));
    }
    if g.is_empty() {
        return Ok(Step::Yes);
    }
    if g.max_weight() > k.max(w) || k == 0 {
        return Ok(Step::No);
    }
    let (_, b) = bcd_above(inst, w, run)?;
    if b.packing_size() as u64 > k {
        return Ok(Step::No);
    }
    if g.total_weight() <= weight_gate(k, w) {
        return Ok(Step::Small(None));
    }
    let d = crown_dbe(g, &b, |h| w * (g.weight(h) + 1) + w - 2, w, run)?;
    if d.a1.is_empty() {
        return Ok(Step::No);
    }
    let crown = d.preimage(&d.a1);
    let decrement = g.weight_of(&d.a1);
    Ok(Step::Reduce(ReductionRecord { head: d.a1, crown, decrement, gadget: None }, None))
}
