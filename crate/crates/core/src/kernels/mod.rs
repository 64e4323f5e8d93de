//! Kernelization algorithms for vertex integrity and component order
//! connectivity, in their unweighted and weighted forms.
//!
//! Every algorithm works by repeatedly finding a head set `H` that separates
//! a crown `C` from the rest of the graph, deleting `H ∪ C` and charging `H`
//! to the budget. Each deletion is written down as a [`ReductionRecord`], so
//! the list of records (the certificate) replays the whole run on the input.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bcd::{compute_bcd, verify_bcd, Bcd, BcdError};
use crate::dbe::{compute_dbe, verify_dbe, A2Bound, Dbe, DbeError, Demands};
use crate::graph::{connected_components, drop_light_components, SizeMeasure, VertexId, VertexSet, WeightedGraph};

pub mod coc;
pub mod vi;
pub mod wcoc;
pub mod wvi;

pub use coc::{
    compute_r_prime, find_reducible_structure, kernelize_coc2, kernelize_coc_fpt, unique_w_separator, Coc2Mode,
    ReduciblePair,
};
pub use vi::kernelize_vi;
pub use wcoc::kernelize_wcoc;
pub use wvi::kernelize_wvi;

/// The four problems handled by the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Problem {
    Vi,
    Wvi,
    Coc,
    Wcoc,
}

impl Problem {
    /// Unweighted problems count vertices, weighted ones add up weights.
    pub fn measure(self) -> SizeMeasure {
        match self {
            Problem::Vi | Problem::Coc => SizeMeasure::Cardinality,
            Problem::Wvi | Problem::Wcoc => SizeMeasure::Weight,
        }
    }

    pub fn is_integrity(self) -> bool {
        matches!(self, Problem::Vi | Problem::Wvi)
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::Vi => "vi",
            Problem::Wvi => "wvi",
            Problem::Coc => "coc",
            Problem::Wcoc => "wcoc",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vi" => Ok(Problem::Vi),
            "wvi" => Ok(Problem::Wvi),
            "coc" => Ok(Problem::Coc),
            "wcoc" => Ok(Problem::Wcoc),
            other => Err(format!("unknown problem `{other}`")),
        }
    }
}

/// A problem instance. `budget` is `p` for the integrity problems and `k`
/// for the connectivity problems; `cap` is the component bound `W` and is
/// only meaningful for the latter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub problem: Problem,
    pub graph: WeightedGraph,
    pub budget: u64,
    pub cap: u64,
}

impl Instance {
    pub fn vi(graph: WeightedGraph, p: u64) -> Self {
        Instance { problem: Problem::Vi, graph, budget: p, cap: 0 }
    }

    pub fn wvi(graph: WeightedGraph, p: u64) -> Self {
        Instance { problem: Problem::Wvi, graph, budget: p, cap: 0 }
    }

    pub fn coc(graph: WeightedGraph, k: u64, w: u64) -> Self {
        Instance { problem: Problem::Coc, graph, budget: k, cap: w }
    }

    pub fn wcoc(graph: WeightedGraph, k: u64, w: u64) -> Self {
        Instance { problem: Problem::Wcoc, graph, budget: k, cap: w }
    }

    /// Size of a vertex set under the problem's measure.
    pub fn size_of(&self, set: &VertexSet) -> u64 {
        self.problem.measure().of(&self.graph, set)
    }

    /// Size of the whole graph under the problem's measure.
    pub fn total_size(&self) -> u64 {
        match self.problem.measure() {
            SizeMeasure::Weight => self.graph.total_weight(),
            SizeMeasure::Cardinality => self.graph.vertex_count() as u64,
        }
    }
}

/// One deletion step: remove `head ∪ crown`, lower the budget by
/// `decrement`, then (integrity problems only) add a gadget component.
///
/// A gadget of size `b` is a clique on `b` fresh unit vertices for VI and a
/// single fresh vertex of weight `b` for wVI. Its fresh ids start one above
/// the largest id present before the deletion. The gadget remembers that
/// the deleted crown leaves behind components of size `b`, which keeps the
/// deletion an equivalence even when the smaller instance could otherwise
/// get away with smaller components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionRecord {
    pub head: VertexSet,
    pub crown: VertexSet,
    pub decrement: u64,
    pub gadget: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("vertex {0} of the reduction is not in the graph")]
    MissingVertex(VertexId),
    #[error("head and crown share vertex {0}")]
    Overlap(VertexId),
    #[error("crown vertex {0} has a neighbour outside head and crown")]
    NotSeparated(VertexId),
    #[error("decrement {decrement} does not match the head size {head}")]
    WrongDecrement { decrement: u64, head: u64 },
    #[error("decrement {decrement} exceeds the budget {budget}")]
    BudgetUnderflow { decrement: u64, budget: u64 },
    #[error("gadgets only exist for the integrity problems")]
    GadgetNotAllowed,
}

/// Apply one reduction record.
pub fn apply_reduction(inst: &Instance, rec: &ReductionRecord) -> Result<Instance, ReductionError> {
    let g = &inst.graph;
    for &v in rec.head.iter().chain(&rec.crown) {
        if !g.contains(v) {
            return Err(ReductionError::MissingVertex(v));
        }
    }
    if let Some(&v) = rec.head.intersection(&rec.crown).next() {
        return Err(ReductionError::Overlap(v));
    }
    for &v in &rec.crown {
        if g.neighbors(v).iter().find(|u| !rec.head.contains(u) && !rec.crown.contains(u)).is_some() {
            return Err(ReductionError::NotSeparated(v));
        }
    }
    let head = inst.size_of(&rec.head);
    if head != rec.decrement {
        return Err(ReductionError::WrongDecrement { decrement: rec.decrement, head });
    }
    if rec.decrement > inst.budget {
        return Err(ReductionError::BudgetUnderflow { decrement: rec.decrement, budget: inst.budget });
    }
    if rec.gadget.is_some() && !inst.problem.is_integrity() {
        return Err(ReductionError::GadgetNotAllowed);
    }
    let next_id = g.max_id() + 1;
    let mut graph = g.clone();
    let mut gone = rec.head.clone();
    gone.extend(&rec.crown);
    graph.remove_vertices(&gone);
    if let Some(b) = rec.gadget {
        add_gadget(&mut graph, inst.problem, b, next_id);
    }
    Ok(Instance { graph, budget: inst.budget - rec.decrement, ..inst.clone() })
}

fn add_gadget(g: &mut WeightedGraph, problem: Problem, b: u64, first: VertexId) {
    match problem {
        Problem::Vi => {
            let ids: Vec<VertexId> = (0..b as VertexId).map(|i| first + i).collect();
            for &v in &ids {
                g.add_vertex(v, 1).expect("fresh id");
            }
            for (i, &u) in ids.iter().enumerate() {
                for &v in &ids[i + 1..] {
                    g.add_edge(u, v).expect("fresh edge");
                }
            }
        }
        _ => g.add_vertex(first, b).expect("fresh id"),
    }
}

/// Whether `g` has a component that already plays the role of a gadget of
/// size `b`: a clique (VI) or a single vertex (wVI) of size at least `b`.
/// Deleting part of such a component never pays off, so it pins the largest
/// remaining component at `b` or more just like a gadget would.
pub(crate) fn has_gadget_like(inst: &Instance, b: u64) -> bool {
    let g = &inst.graph;
    connected_components(g).iter().any(|c| {
        let is_clique = c.iter().all(|&v| g.degree(v) + 1 == c.len());
        let shape = match inst.problem {
            Problem::Vi => is_clique,
            _ => c.len() == 1,
        };
        shape && inst.size_of(c) >= b
    })
}

/// Record deleting `head ∪ crown` from an integrity instance, adding a
/// gadget of size `b` unless the rest of the graph already has one.
pub(crate) fn integrity_record(inst: &Instance, head: VertexSet, crown: VertexSet, b: u64) -> ReductionRecord {
    let decrement = inst.size_of(&head);
    let mut gone = head.clone();
    gone.extend(&crown);
    let rest = Instance { graph: inst.graph.without(&gone), ..inst.clone() };
    let gadget = if b == 0 || has_gadget_like(&rest, b) { None } else { Some(b) };
    ReductionRecord { head, crown, decrement, gadget }
}

/// Replacing the light components `light` by a gadget, or `None` when that
/// would not make the instance smaller.
pub(crate) fn light_removal(inst: &Instance, light: &VertexSet) -> Option<ReductionRecord> {
    if light.is_empty() {
        return None;
    }
    let g = &inst.graph;
    let biggest = connected_components(&g.induced(light)).iter().map(|c| inst.size_of(c)).max().unwrap_or(0);
    let rec = if inst.problem.is_integrity() {
        integrity_record(inst, VertexSet::new(), light.clone(), biggest)
    } else {
        ReductionRecord { head: VertexSet::new(), crown: light.clone(), decrement: 0, gadget: None }
    };
    let added = match (inst.problem, rec.gadget) {
        (_, None) => 0,
        (Problem::Vi, Some(b)) => b as usize,
        (_, Some(_)) => 1,
    };
    (added < light.len()).then_some(rec)
}

/// Final classification of a kernelization run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    DecidedNo,
    DecidedYes,
    Reduced,
    AlreadySmall,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::DecidedNo => "decided-no",
            Verdict::DecidedYes => "decided-yes",
            Verdict::Reduced => "reduced",
            Verdict::AlreadySmall => "already-small",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Counters collected during a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KernelStats {
    pub iterations: usize,
    pub bcds: usize,
    pub dbes: usize,
    /// Search tree nodes visited by the FPT mode.
    pub nodes: usize,
    /// A priori bound on `nodes`, summed over rounds (FPT mode only).
    pub node_bound: u64,
    /// Decompositions re-checked by the independent verifiers (audit mode).
    pub audited: usize,
    /// Times a reduction that should exist by the size argument was not
    /// found, because a leftover gadget kept the graph from being fully
    /// covered by the decomposition. The run then stops as already small.
    pub guarantee_misses: usize,
}

/// Result of an exhaustive kernelization run.
///
/// `instance` is the working instance when the run stopped. For a decided
/// verdict it is the instance on which the decision was taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelOutcome {
    pub verdict: Verdict,
    pub instance: Instance,
    pub certificate: Vec<ReductionRecord>,
    pub lambda_lb: Option<u64>,
    pub stats: KernelStats,
    /// Violations found in audit mode; always empty unless something is broken.
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct KernelOptions {
    /// Re-verify every decomposition the algorithm builds.
    pub audit: bool,
    /// Override the hard cap on the number of reduction rounds.
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("{0} expects unit vertex weights")]
    WeightedInput(Problem),
    #[error("kernelizer for {expected} called with a {got} instance")]
    WrongProblem { expected: Problem, got: Problem },
    #[error("component bound W must be positive")]
    ZeroCap,
    #[error("mode precondition violated: {0}")]
    ModePrecondition(String),
    #[error("more than {0} reduction rounds")]
    IterationOverrun(usize),
    #[error(transparent)]
    Bcd(#[from] BcdError),
    #[error(transparent)]
    Dbe(#[from] DbeError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

/// What one round of an algorithm concluded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    No,
    Yes,
    Small(Option<u64>),
    Reduce(ReductionRecord, Option<u64>),
}

/// Shared state of one run: audit bookkeeping and counters.
pub(crate) struct Run {
    pub opts: KernelOptions,
    pub stats: KernelStats,
    pub violations: Vec<String>,
}

impl Run {
    pub fn new(opts: &KernelOptions) -> Self {
        Run { opts: opts.clone(), stats: KernelStats::default(), violations: Vec::new() }
    }

    pub fn bcd(&mut self, g: &WeightedGraph, b: Bcd) -> Bcd {
        self.stats.bcds += 1;
        if self.opts.audit {
            self.stats.audited += 1;
            if let Err(e) = verify_bcd(g, &b) {
                self.violations.push(format!("bcd: {e}"));
            }
        }
        b
    }

    pub fn dbe(&mut self, g: &WeightedGraph, a: &VertexSet, b: &VertexSet, d: Dbe) -> Dbe {
        self.stats.dbes += 1;
        if self.opts.audit {
            self.stats.audited += 1;
            if let Err(e) = verify_dbe(g, a, b, &d, A2Bound::Guaranteed) {
                self.violations.push(format!("dbe: {e}"));
            }
        }
        d
    }
}

/// The λ-BCD of the components heavier than λ, together with the graph
/// those components induce.
pub(crate) fn bcd_above(inst: &Instance, lambda: u64, run: &mut Run) -> Result<(WeightedGraph, Bcd), KernelError> {
    let h = drop_light_components(&inst.graph, lambda, inst.problem.measure());
    let b = if h.is_empty() {
        Bcd { lambda, crown: VertexSet::new(), head: VertexSet::new(), parts: Vec::new(), crown_components: Vec::new() }
    } else {
        compute_bcd(&h, lambda)?
    };
    let b = run.bcd(&h, b);
    Ok((h, b))
}

/// Expansion of the BCD heads into their crown with per-head demands.
pub(crate) fn crown_dbe(
    g: &WeightedGraph,
    b: &Bcd,
    demand: impl Fn(VertexId) -> u64,
    y: u64,
    run: &mut Run,
) -> Result<Dbe, KernelError> {
    let demands: Demands = b.head.iter().map(|&h| (h, demand(h))).collect();
    let d = compute_dbe(g, &b.head, &b.crown, &demands, y)?;
    Ok(run.dbe(g, &b.head, &b.crown, d))
}

/// Heaviest component among those assigned into `A₁`.
pub(crate) fn heaviest_assigned(g: &WeightedGraph, d: &Dbe) -> u64 {
    d.components
        .iter()
        .zip(&d.assignment)
        .filter(|(_, h)| d.a1.contains(h))
        .map(|(q, _)| g.weight_of(q))
        .max()
        .unwrap_or(0)
}

/// Drive `step` until it decides or reports the instance small, applying
/// each reduction it returns.
pub(crate) fn exhaust(
    inst: &Instance,
    opts: &KernelOptions,
    default_cap: usize,
    mut step: impl FnMut(&Instance, &mut Run) -> Result<Step, KernelError>,
) -> Result<KernelOutcome, KernelError> {
    let cap = opts.max_iterations.unwrap_or(default_cap);
    let mut run = Run::new(opts);
    let mut cur = inst.clone();
    let mut certificate = Vec::new();
    let mut lambda_lb = None;
    loop {
        if run.stats.iterations >= cap {
            return Err(KernelError::IterationOverrun(cap));
        }
        run.stats.iterations += 1;
        let s = step(&cur, &mut run)?;
        let (verdict, lb) = match s {
            Step::No => (Verdict::DecidedNo, None),
            // An empty kernel is a yes-instance by itself; after deletions
            // it is reported as the reduced instance it is.
            Step::Yes if cur.graph.is_empty() && !certificate.is_empty() => (Verdict::Reduced, None),
            Step::Yes => (Verdict::DecidedYes, None),
            Step::Small(lb) => {
                (if certificate.is_empty() { Verdict::AlreadySmall } else { Verdict::Reduced }, lb)
            }
            Step::Reduce(rec, lb) => {
                match apply_reduction(&cur, &rec) {
                    Ok(next) => cur = next,
                    Err(ReductionError::BudgetUnderflow { .. }) => {
                        return Ok(finish(Verdict::DecidedNo, cur, certificate, lambda_lb, run));
                    }
                    Err(e) => return Err(e.into()),
                }
                certificate.push(rec);
                // A bound is about the instance it was proven for; after a
                // reduction only the next round's bound applies.
                lambda_lb = lb;
                continue;
            }
        };
        if lb.is_some() {
            lambda_lb = lb;
        }
        return Ok(finish(verdict, cur, certificate, lambda_lb, run));
    }
}

fn finish(
    verdict: Verdict,
    instance: Instance,
    certificate: Vec<ReductionRecord>,
    lambda_lb: Option<u64>,
    run: Run,
) -> KernelOutcome {
    KernelOutcome { verdict, instance, certificate, lambda_lb, stats: run.stats, violations: run.violations }
}

/// Replay a certificate on an instance.
pub fn replay(inst: &Instance, certificate: &[ReductionRecord]) -> Result<Instance, ReductionError> {
    let mut cur = inst.clone();
    for rec in certificate {
        cur = apply_reduction(&cur, rec)?;
    }
    Ok(cur)
}

/// `⌈√x⌉` over the integers.
pub fn ceil_sqrt(x: u64) -> u64 {
    let r = x.isqrt();
    if r * r == x {
        r
    } else {
        r + 1
    }
}

pub(crate) fn check_unit(inst: &Instance) -> Result<(), KernelError> {
    if inst.graph.has_unit_weights() {
        Ok(())
    } else {
        Err(KernelError::WeightedInput(inst.problem))
    }
}

pub(crate) fn check_problem(inst: &Instance, expected: Problem) -> Result<(), KernelError> {
    if inst.problem == expected {
        Ok(())
    } else {
        Err(KernelError::WrongProblem { expected, got: inst.problem })
    }
}
