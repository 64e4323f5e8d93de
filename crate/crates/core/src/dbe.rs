//! Demanded balanced expansions.
//!
//! A head side `A` and the components of `G[B]` are embedded in a flow
//! network. One maximum flow yields a fractional expansion; heads that can
//! still push flow to the sink land in `A₂`, everyone else in `A₁`. The
//! fractional assignment is then rounded to a whole-component assignment
//! along a spanning forest of its support, which moves each head's mass by
//! less than `y`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{components_of_subset, ComponentList, VertexId, VertexSet, Weight, WeightedGraph};
use crate::maxflow::{build_dbe_network, NetworkError};

/// Per-head demand `d_a`.
pub type Demands = BTreeMap<VertexId, u64>;

/// The same demand for every head in `heads`.
pub fn uniform_demands(heads: &VertexSet, d: u64) -> Demands {
    heads.iter().map(|&h| (h, d)).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DbeError {
    #[error("head side and component side overlap at vertex {0}")]
    Overlap(VertexId),
    #[error("vertex {0} is not in the graph")]
    MissingVertex(VertexId),
    #[error("component containing {min_vertex} weighs {weight} > y = {y}")]
    HeavyComponent { min_vertex: VertexId, weight: Weight, y: u64 },
    #[error("y must be positive")]
    ZeroY,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Fractional expansion: `mass[i][a]` units of component `i` go to head `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalDbe {
    pub a1: VertexSet,
    pub a2: VertexSet,
    pub y: u64,
    pub demands: Demands,
    pub components: ComponentList,
    pub mass: Vec<BTreeMap<VertexId, u64>>,
}

/// Integral expansion: component `components[i]` is assigned to head `assignment[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dbe {
    pub a1: VertexSet,
    pub a2: VertexSet,
    pub y: u64,
    pub demands: Demands,
    pub components: ComponentList,
    pub assignment: Vec<VertexId>,
}

impl Dbe {
    /// Total weight assigned to `head`.
    pub fn assigned_weight(&self, g: &WeightedGraph, head: VertexId) -> Weight {
        self.components
            .iter()
            .zip(&self.assignment)
            .filter(|(_, &h)| h == head)
            .map(|(q, _)| g.weight_of(q))
            .sum()
    }

    /// Union of the components assigned into `heads`.
    pub fn preimage(&self, heads: &VertexSet) -> VertexSet {
        self.components
            .iter()
            .zip(&self.assignment)
            .filter(|(_, h)| heads.contains(h))
            .flat_map(|(q, _)| q.iter().copied())
            .collect()
    }
}

/// A crown `C` separated by head `H`, with every crown component assigned to a head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrownDecomposition {
    pub crown: VertexSet,
    pub head: VertexSet,
    pub components: Vec<(VertexSet, VertexId)>,
    pub y: u64,
}

/// Maximum flow on the head/component network, classified into `A₁`/`A₂`.
pub fn compute_fractional_dbe(
    g: &WeightedGraph,
    a_side: &VertexSet,
    b_side: &VertexSet,
    demands: &Demands,
    y: u64,
) -> Result<FractionalDbe, DbeError> {
    if y == 0 {
        return Err(DbeError::ZeroY);
    }
    for &v in a_side.iter().chain(b_side) {
        if !g.contains(v) {
            return Err(DbeError::MissingVertex(v));
        }
    }
    if let Some(&v) = a_side.intersection(b_side).next() {
        return Err(DbeError::Overlap(v));
    }
    let components = components_of_subset(g, b_side);
    for q in &components {
        let w = g.weight_of(q);
        if w > y {
            return Err(DbeError::HeavyComponent { min_vertex: *q.first().unwrap(), weight: w, y });
        }
    }
    // One extra unit on every sink arc: a head is over-demanded exactly when
    // it can absorb d_a + 1 - w(a) units.
    let shifted: Demands = a_side
        .iter()
        .map(|&a| (a, demands.get(&a).copied().map_or(0, |d| d + 1)))
        .collect();
    if let Some(&a) = a_side.iter().find(|a| !demands.contains_key(a)) {
        return Err(NetworkError::MissingDemand(a).into());
    }
    let mut net = build_dbe_network(g, a_side, &components, &shifted)?;
    net.network.max_flow();
    let reach = net.network.can_reach_sink();
    let a2: VertexSet = a_side.iter().copied().filter(|a| reach[net.head_node[a]]).collect();
    let a1: VertexSet = a_side.difference(&a2).copied().collect();
    let mass = (0..components.len())
        .map(|i| {
            net.assign_arcs[i]
                .iter()
                .map(|&(a, arc)| (a, net.network.arc(arc).flow))
                .filter(|&(_, f)| f > 0)
                .collect()
        })
        .collect();
    Ok(FractionalDbe {
        a1,
        a2,
        y,
        demands: a_side.iter().map(|a| (*a, demands[a])).collect(),
        components,
        mass,
    })
}

/// Compute a demanded balanced expansion of `a_side` into the components of `G[b_side]`.
pub fn compute_dbe(
    g: &WeightedGraph,
    a_side: &VertexSet,
    b_side: &VertexSet,
    demands: &Demands,
    y: u64,
) -> Result<Dbe, DbeError> {
    let fr = compute_fractional_dbe(g, a_side, b_side, demands, y)?;
    Ok(round_fractional(g, &fr))
}

/// Round a fractional expansion to whole components.
///
/// Cycles in the (bipartite, undirected) support are cancelled first; this
/// keeps every head's inflow and every component's outflow. On the
/// resulting forest, rooted at the smallest head of each tree, a component
/// on the `A₁` side goes to its parent head and a component on the `A₂`
/// side goes to its smallest child head, or to its parent when it has none.
/// Components without flow go to their smallest neighbour.
pub fn round_fractional(g: &WeightedGraph, fr: &FractionalDbe) -> Dbe {
    let mut mass = fr.mass.clone();
    cancel_support_cycles(&mut mass);

    let mut head_edges: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (q, m) in mass.iter().enumerate() {
        for &a in m.keys() {
            head_edges.entry(a).or_default().push(q);
        }
    }
    let mut parent_of_component: Vec<Option<VertexId>> = vec![None; mass.len()];
    let mut children_of_component: Vec<Vec<VertexId>> = vec![Vec::new(); mass.len()];
    let mut seen_head = BTreeSet::new();
    let mut seen_comp = vec![false; mass.len()];
    for &root in head_edges.keys() {
        if !seen_head.insert(root) {
            continue;
        }
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &q in &head_edges[&a] {
                if seen_comp[q] {
                    continue;
                }
                seen_comp[q] = true;
                parent_of_component[q] = Some(a);
                for &b in mass[q].keys() {
                    if seen_head.insert(b) {
                        children_of_component[q].push(b);
                        queue.push_back(b);
                    }
                }
            }
        }
    }

    let assignment = fr
        .components
        .iter()
        .enumerate()
        .map(|(q, comp)| match parent_of_component[q] {
            None => g
                .neighborhood(comp)
                .into_iter()
                .find(|v| fr.a1.contains(v) || fr.a2.contains(v))
                .expect("component has a head neighbour"),
            Some(parent) => {
                let on_a1 = mass[q].keys().any(|a| fr.a1.contains(a));
                if on_a1 {
                    parent
                } else {
                    children_of_component[q].iter().min().copied().unwrap_or(parent)
                }
            }
        })
        .collect();

    Dbe {
        a1: fr.a1.clone(),
        a2: fr.a2.clone(),
        y: fr.y,
        demands: fr.demands.clone(),
        components: fr.components.clone(),
        assignment,
    }
}

/// Repeatedly find a cycle in the bipartite support and shift mass around
/// it until the support is a forest.
fn cancel_support_cycles(mass: &mut [BTreeMap<VertexId, u64>]) {
    while let Some(cycle) = find_support_cycle(mass) {
        // cycle = [(q0, a0), (q1, a0), (q1, a1), ..., (q0, a_last)] alternating:
        // even positions lose, odd positions gain.
        let delta = cycle.iter().step_by(2).map(|&(q, a)| mass[q][&a]).min().unwrap();
        for (i, &(q, a)) in cycle.iter().enumerate() {
            let e = mass[q].get_mut(&a).unwrap();
            if i % 2 == 0 {
                *e -= delta;
            } else {
                *e += delta;
            }
            if *e == 0 {
                mass[q].remove(&a);
            }
        }
    }
}

/// Nodes: components `0..m`, heads keyed by id. Returns the cycle as a list
/// of support edges `(component, head)` in traversal order.
fn find_support_cycle(mass: &[BTreeMap<VertexId, u64>]) -> Option<Vec<(usize, VertexId)>> {
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
    enum Node {
        Comp(usize),
        Head(VertexId),
    }
    let mut adj: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    for (q, m) in mass.iter().enumerate() {
        for &a in m.keys() {
            adj.entry(Node::Comp(q)).or_default().push(Node::Head(a));
            adj.entry(Node::Head(a)).or_default().push(Node::Comp(q));
        }
    }
    let mut parent: BTreeMap<Node, Node> = BTreeMap::new();
    let mut depth: BTreeMap<Node, usize> = BTreeMap::new();
    for &root in adj.keys() {
        if depth.contains_key(&root) {
            continue;
        }
        depth.insert(root, 0);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[&v] {
                if parent.get(&v) == Some(&u) {
                    continue;
                }
                if depth.contains_key(&u) {
                    // Non-tree edge v-u closes a cycle through the lowest common ancestor.
                    let mut left = vec![v];
                    let mut right = vec![u];
                    while depth[left.last().unwrap()] > depth[right.last().unwrap()] {
                        left.push(parent[left.last().unwrap()]);
                    }
                    while depth[right.last().unwrap()] > depth[left.last().unwrap()] {
                        right.push(parent[right.last().unwrap()]);
                    }
                    while left.last() != right.last() {
                        left.push(parent[left.last().unwrap()]);
                        right.push(parent[right.last().unwrap()]);
                    }
                    right.pop();
                    let walk: Vec<Node> = left.into_iter().chain(right.into_iter().rev()).collect();
                    let edges = (0..walk.len())
                        .map(|i| match (walk[i], walk[(i + 1) % walk.len()]) {
                            (Node::Comp(q), Node::Head(a)) | (Node::Head(a), Node::Comp(q)) => (q, a),
                            _ => unreachable!("support graph is bipartite"),
                        })
                        .collect();
                    return Some(edges);
                }
                depth.insert(u, depth[&v] + 1);
                parent.insert(u, v);
                queue.push_back(u);
            }
        }
    }
    None
}

/// Which upper bound to use for `A₂` heads.
///
/// The literal bound `d_a + y - 1` is not always attainable: two unit heads
/// with demand 2 sharing three unit components have no expansion meeting it.
/// The rounding above guarantees `d_a + y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum A2Bound {
    Literal,
    Guaranteed,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DbeViolation {
    #[error("A1 and A2 do not partition the head side")]
    NotAPartition,
    #[error("assignment does not cover the components of G[B]")]
    ComponentMismatch,
    #[error("condition 1: component containing {0} is heavier than y")]
    HeavyComponent(VertexId),
    #[error("condition 2: component containing {0} is assigned to a non-neighbour")]
    NotANeighbour(VertexId),
    #[error("condition 3: component containing {0} is assigned into A1 but touches A2")]
    LeaksIntoA2(VertexId),
    #[error("condition 4: head {0} in A1 is not over-demanded")]
    A1TooLight(VertexId),
    #[error("condition 4: head {0} in A2 exceeds its upper bound")]
    A2TooHeavy(VertexId),
}

/// Re-evaluate the four expansion conditions from scratch.
pub fn verify_dbe(
    g: &WeightedGraph,
    a_side: &VertexSet,
    b_side: &VertexSet,
    dbe: &Dbe,
    bound: A2Bound,
) -> Result<(), DbeViolation> {
    if !dbe.a1.is_disjoint(&dbe.a2) || &dbe.a1.union(&dbe.a2).copied().collect::<VertexSet>() != a_side {
        return Err(DbeViolation::NotAPartition);
    }
    if dbe.components != components_of_subset(g, b_side) || dbe.assignment.len() != dbe.components.len() {
        return Err(DbeViolation::ComponentMismatch);
    }
    let y = dbe.y;
    for (q, &h) in dbe.components.iter().zip(&dbe.assignment) {
        let min = *q.first().unwrap();
        if g.weight_of(q) > y {
            return Err(DbeViolation::HeavyComponent(min));
        }
        let n = g.neighborhood(q);
        if !n.contains(&h) || !a_side.contains(&h) {
            return Err(DbeViolation::NotANeighbour(min));
        }
        if dbe.a1.contains(&h) && n.iter().any(|v| dbe.a2.contains(v)) {
            return Err(DbeViolation::LeaksIntoA2(min));
        }
    }
    for &a in a_side {
        let total = u128::from(g.weight(a)) + u128::from(dbe.assigned_weight(g, a));
        let d = u128::from(dbe.demands[&a]);
        let y = u128::from(y);
        if dbe.a1.contains(&a) {
            if total + y <= d + 1 {
                return Err(DbeViolation::A1TooLight(a));
            }
        } else {
            let limit = match bound {
                A2Bound::Literal => d + y - 1,
                A2Bound::Guaranteed => d + y,
            };
            if total > limit {
                return Err(DbeViolation::A2TooHeavy(a));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FractionalViolation {
    #[error("head {0} in A1 is not over-demanded")]
    A1TooLight(VertexId),
    #[error("head {0} in A2 receives more than d_a + 1")]
    A2TooHeavy(VertexId),
    #[error("component {0} gives away more than its weight")]
    OverAssigned(usize),
    #[error("component {0} sends mass to a non-neighbour")]
    NotANeighbour(usize),
    #[error("component {0} is unsaturated or feeds A1 but touches A2")]
    LeaksIntoA2(usize),
}

/// Check the fractional conditions. `A₂` heads are allowed one unit beyond
/// their demand, matching what a single flow classification can certify.
pub fn verify_fractional(g: &WeightedGraph, fr: &FractionalDbe) -> Result<(), FractionalViolation> {
    let mut inflow: BTreeMap<VertexId, u64> = BTreeMap::new();
    for (i, (q, m)) in fr.components.iter().zip(&fr.mass).enumerate() {
        let n = g.neighborhood(q);
        let total: u64 = m.values().sum();
        if total > g.weight_of(q) {
            return Err(FractionalViolation::OverAssigned(i));
        }
        for (&a, &x) in m {
            if !n.contains(&a) {
                return Err(FractionalViolation::NotANeighbour(i));
            }
            *inflow.entry(a).or_default() += x;
        }
        let feeds_a1 = m.keys().any(|a| fr.a1.contains(a));
        if (feeds_a1 || total < g.weight_of(q)) && n.iter().any(|v| fr.a2.contains(v)) {
            return Err(FractionalViolation::LeaksIntoA2(i));
        }
    }
    for &a in fr.a1.iter().chain(&fr.a2) {
        let total = g.weight(a) + inflow.get(&a).copied().unwrap_or(0);
        let d = fr.demands[&a];
        if fr.a1.contains(&a) && total <= d {
            return Err(FractionalViolation::A1TooLight(a));
        }
        if fr.a2.contains(&a) && total > d + 1 {
            return Err(FractionalViolation::A2TooHeavy(a));
        }
    }
    Ok(())
}

/// The crown induced by `A₁`, if non-empty.
pub fn extract_crown(dbe: &Dbe) -> Option<CrownDecomposition> {
    if dbe.a1.is_empty() {
        return None;
    }
    let components: Vec<(VertexSet, VertexId)> = dbe
        .components
        .iter()
        .zip(&dbe.assignment)
        .filter(|(_, h)| dbe.a1.contains(h))
        .map(|(q, &h)| (q.clone(), h))
        .collect();
    Some(CrownDecomposition {
        crown: components.iter().flat_map(|(q, _)| q.iter().copied()).collect(),
        head: dbe.a1.clone(),
        components,
        y: dbe.y,
    })
}

/// Components `Q` of `G[B]` with `N(Q) ⊆ heads`.
pub fn components_bounded_by(g: &WeightedGraph, b_side: &VertexSet, heads: &VertexSet) -> ComponentList {
    components_of_subset(g, b_side)
        .into_iter()
        .filter(|q| g.neighborhood(q).is_subset(heads))
        .collect()
}
