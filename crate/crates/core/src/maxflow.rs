//! Integral maximum flow (Dinic) and the bipartite head/component network
//! used to compute demanded balanced expansions.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::graph::{ComponentList, VertexId, VertexSet, Weight, WeightedGraph};

pub type NodeId = usize;
pub type ArcId = usize;

#[derive(Clone, Debug)]
struct Arc {
    to: NodeId,
    cap: u64,
    flow: u64,
}

/// Directed network with integer capacities.
///
/// Every arc added by [`FlowNetwork::add_arc`] gets a hidden reverse partner
/// for the residual graph. Public arc ids refer to forward arcs only and are
/// numbered in insertion order, which fixes the augmentation order.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    source: NodeId,
    sink: NodeId,
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

/// A forward arc as seen from outside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcView {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: u64,
    pub flow: u64,
}

impl FlowNetwork {
    /// Network with `nodes` nodes; `source` and `sink` must be distinct members.
    pub fn new(nodes: usize, source: NodeId, sink: NodeId) -> Self {
        assert!(source < nodes && sink < nodes && source != sink, "bad terminals");
        FlowNetwork { source, sink, arcs: Vec::new(), out: vec![Vec::new(); nodes] }
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn add_node(&mut self) -> NodeId {
        self.out.push(Vec::new());
        self.out.len() - 1
    }

    pub fn add_arc(&mut self, from: NodeId, to: NodeId, capacity: u64) -> ArcId {
        let id = self.arcs.len() / 2;
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap: capacity, flow: 0 });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0, flow: 0 });
        id
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len() / 2
    }

    pub fn arc(&self, id: ArcId) -> ArcView {
        let a = &self.arcs[2 * id];
        ArcView { from: self.arcs[2 * id + 1].to, to: a.to, capacity: a.cap, flow: a.flow }
    }

    pub fn arcs(&self) -> impl Iterator<Item = ArcView> + '_ {
        (0..self.arc_count()).map(|i| self.arc(i))
    }

    fn residual(&self, idx: usize) -> u64 {
        let a = &self.arcs[idx];
        if idx.is_multiple_of(2) {
            a.cap - a.flow
        } else {
            self.arcs[idx - 1].flow
        }
    }

    fn push(&mut self, idx: usize, amount: u64) {
        if idx.is_multiple_of(2) {
            self.arcs[idx].flow += amount;
        } else {
            self.arcs[idx - 1].flow -= amount;
        }
    }

    /// Value of the current flow (net outflow of the source).
    pub fn flow_value(&self) -> u64 {
        let out: u64 = self.arcs().filter(|a| a.from == self.source).map(|a| a.flow).sum();
        let back: u64 = self.arcs().filter(|a| a.to == self.source).map(|a| a.flow).sum();
        out - back
    }

    /// Augment the current flow to a maximum one and return its value.
    pub fn max_flow(&mut self) -> u64 {
        let n = self.node_count();
        loop {
            let mut level = vec![usize::MAX; n];
            level[self.source] = 0;
            let mut queue = VecDeque::from([self.source]);
            while let Some(v) = queue.pop_front() {
                for &e in &self.out[v] {
                    let to = self.arcs[e].to;
                    if level[to] == usize::MAX && self.residual(e) > 0 {
                        level[to] = level[v] + 1;
                        queue.push_back(to);
                    }
                }
            }
            if level[self.sink] == usize::MAX {
                break;
            }
            let mut next = vec![0usize; n];
            while self.augment(self.source, u64::MAX, &level, &mut next) > 0 {}
        }
        self.flow_value()
    }

    fn augment(&mut self, v: NodeId, limit: u64, level: &[usize], next: &mut [usize]) -> u64 {
        if v == self.sink {
            return limit;
        }
        while next[v] < self.out[v].len() {
            let e = self.out[v][next[v]];
            let to = self.arcs[e].to;
            let r = self.residual(e);
            if r > 0 && level[to] == level[v] + 1 {
                let got = self.augment(to, limit.min(r), level, next);
                if got > 0 {
                    self.push(e, got);
                    return got;
                }
            }
            next[v] += 1;
        }
        0
    }

    /// Nodes from which the sink is reachable in the residual graph.
    pub fn can_reach_sink(&self) -> Vec<bool> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        seen[self.sink] = true;
        let mut stack = vec![self.sink];
        while let Some(v) = stack.pop() {
            // A residual arc u -> v exists iff the partner stored in out[v] has
            // positive residual in the opposite direction.
            for &e in &self.out[v] {
                let u = self.arcs[e].to;
                if !seen[u] && self.residual(e ^ 1) > 0 {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Nodes reachable from the source in the residual graph (the source side of a minimum cut).
    pub fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[self.source] = true;
        let mut stack = vec![self.source];
        while let Some(v) = stack.pop() {
            for &e in &self.out[v] {
                let u = self.arcs[e].to;
                if !seen[u] && self.residual(e) > 0 {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Check capacity and conservation constraints of the current flow.
    pub fn is_feasible_flow(&self) -> bool {
        let mut balance = vec![0i128; self.node_count()];
        for a in self.arcs() {
            if a.flow > a.capacity {
                return false;
            }
            balance[a.from] -= i128::from(a.flow);
            balance[a.to] += i128::from(a.flow);
        }
        balance
            .iter()
            .enumerate()
            .all(|(v, &b)| v == self.source || v == self.sink || b == 0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("component {index} (min vertex {min_vertex}) has no neighbor on the head side")]
    IsolatedComponent { index: usize, min_vertex: VertexId },
    #[error("vertex {0} is on the head side but has no demand")]
    MissingDemand(VertexId),
}

/// The flow network for a head set `A` and the components of `G[B]`.
///
/// Node layout: source, sink, one node per head (ascending id), then one
/// node per component (list order).
#[derive(Clone, Debug)]
pub struct DbeNetwork {
    pub network: FlowNetwork,
    pub heads: Vec<VertexId>,
    pub head_node: BTreeMap<VertexId, NodeId>,
    pub component_weights: Vec<Weight>,
    pub component_neighbors: Vec<VertexSet>,
    /// Source arc of each component.
    pub source_arcs: Vec<ArcId>,
    /// Per component: `(head, arc)` for each head adjacent to it.
    pub assign_arcs: Vec<Vec<(VertexId, ArcId)>>,
    pub sink_arcs: BTreeMap<VertexId, ArcId>,
}

impl DbeNetwork {
    /// Flow currently routed from component `q` to `head`.
    pub fn mass(&self, q: usize, head: VertexId) -> u64 {
        self.assign_arcs[q]
            .iter()
            .find(|(h, _)| *h == head)
            .map_or(0, |&(_, arc)| self.network.arc(arc).flow)
    }
}

/// Build the head/component network.
///
/// Arcs are `s -> Q` with capacity `w(Q)`, `Q -> a` with capacity `w(Q)` for
/// every head `a` adjacent to `Q`, and `a -> t` with capacity
/// `max(0, d_a - w(a))`.
pub fn build_dbe_network(
    g: &WeightedGraph,
    a_side: &VertexSet,
    components: &ComponentList,
    demands: &BTreeMap<VertexId, u64>,
) -> Result<DbeNetwork, NetworkError> {
    let heads: Vec<VertexId> = a_side.iter().copied().collect();
    let mut network = FlowNetwork::new(2 + heads.len() + components.len(), 0, 1);
    let head_node: BTreeMap<VertexId, NodeId> =
        heads.iter().enumerate().map(|(i, &a)| (a, 2 + i)).collect();
    let mut component_weights = Vec::with_capacity(components.len());
    let mut component_neighbors = Vec::with_capacity(components.len());
    let mut source_arcs = Vec::with_capacity(components.len());
    let mut assign_arcs = Vec::with_capacity(components.len());
    for (i, q) in components.iter().enumerate() {
        let node = 2 + heads.len() + i;
        let wq = g.weight_of(q);
        let nbrs: VertexSet = g.neighborhood(q).intersection(a_side).copied().collect();
        if nbrs.is_empty() {
            return Err(NetworkError::IsolatedComponent {
                index: i,
                min_vertex: q.iter().next().copied().unwrap_or(0),
            });
        }
        source_arcs.push(network.add_arc(0, node, wq));
        assign_arcs.push(nbrs.iter().map(|&a| (a, network.add_arc(node, head_node[&a], wq))).collect());
        component_weights.push(wq);
        component_neighbors.push(nbrs);
    }
    let mut sink_arcs = BTreeMap::new();
    for &a in &heads {
        let d = *demands.get(&a).ok_or(NetworkError::MissingDemand(a))?;
        sink_arcs.insert(a, network.add_arc(head_node[&a], 1, d.saturating_sub(g.weight(a))));
    }
    Ok(DbeNetwork {
        network,
        heads,
        head_node,
        component_weights,
        component_neighbors,
        source_arcs,
        assign_arcs,
        sink_arcs,
    })
}

/// Minimum s-t cut by enumerating every source side. Exponential; intended
/// as an independent check on small networks.
pub fn brute_min_cut(net: &FlowNetwork) -> u64 {
    let inner: Vec<NodeId> = (0..net.node_count()).filter(|&v| v != net.source() && v != net.sink()).collect();
    assert!(inner.len() <= 20, "network too large for enumeration");
    let mut best = u64::MAX;
    for mask in 0u32..(1 << inner.len()) {
        let mut side = vec![false; net.node_count()];
        side[net.source()] = true;
        for (i, &v) in inner.iter().enumerate() {
            side[v] = mask >> i & 1 == 1;
        }
        let cut = net.arcs().filter(|a| side[a.from] && !side[a.to]).map(|a| a.capacity).sum();
        best = best.min(cut);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path_bottleneck() {
        let mut n = FlowNetwork::new(4, 0, 3);
        n.add_arc(0, 1, 3);
        n.add_arc(1, 2, 3);
        n.add_arc(2, 3, 1);
        assert_eq!(n.max_flow(), 1);
        assert!(n.is_feasible_flow());
    }

    #[test]
    fn empty_and_parallel() {
        let mut empty = FlowNetwork::new(2, 0, 1);
        assert_eq!(empty.max_flow(), 0);
        let mut par = FlowNetwork::new(4, 0, 1);
        for mid in [2, 3] {
            par.add_arc(0, mid, 1);
            par.add_arc(mid, 1, 1);
        }
        assert_eq!(par.max_flow(), 2);
    }

    #[test]
    fn needs_reverse_arcs() {
        // Classic instance where a greedy first path must be undone.
        let mut n = FlowNetwork::new(4, 0, 3);
        n.add_arc(0, 1, 1);
        n.add_arc(0, 2, 1);
        n.add_arc(1, 2, 1);
        n.add_arc(1, 3, 1);
        n.add_arc(2, 3, 1);
        assert_eq!(n.max_flow(), 2);
        assert_eq!(brute_min_cut(&n), 2);
    }

    #[test]
    fn dbe_network_matches_hand_construction() {
        // Q = {2,3,4} path of weight 3 hanging off head 1 with demand 2.
        let g = WeightedGraph::from_edges(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        let a = VertexSet::from([1]);
        let comps = vec![VertexSet::from([2, 3, 4])];
        let net = build_dbe_network(&g, &a, &comps, &BTreeMap::from([(1, 2)])).unwrap();
        let caps: Vec<(NodeId, NodeId, u64)> = net.network.arcs().map(|x| (x.from, x.to, x.capacity)).collect();
        assert_eq!(caps, vec![(0, 3, 3), (3, 2, 3), (2, 1, 1)]);
        let mut flow = net.network.clone();
        assert_eq!(flow.max_flow(), 1);
    }

    #[test]
    fn dbe_network_rejects_isolated_component() {
        let g = WeightedGraph::from_edges(3, &[(1, 2)]).unwrap();
        let err = build_dbe_network(&g, &VertexSet::from([1]), &vec![VertexSet::from([3])], &BTreeMap::from([(1, 1)]));
        assert!(matches!(err, Err(NetworkError::IsolatedComponent { .. })));
        let only_terminals = build_dbe_network(&g, &VertexSet::from([1]), &vec![], &BTreeMap::from([(1, 4)])).unwrap();
        assert_eq!(only_terminals.network.arc_count(), 1);
    }
}
