//! Vertex-weighted simple graphs with stable ids, component analysis,
//! the line-oriented instance format and seeded instance generators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Vertex identifier. Ids start at 1 and are never renumbered by deletions.
pub type VertexId = u32;
/// Vertex weight, always at least 1.
pub type Weight = u64;
/// An ordered set of vertex ids.
pub type VertexSet = BTreeSet<VertexId>;
/// Pairwise disjoint vertex sets, each inducing a connected subgraph.
pub type ComponentList = Vec<VertexSet>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} already exists")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} does not exist")]
    MissingVertex(VertexId),
    #[error("vertex id 0 is not allowed")]
    ZeroId,
    #[error("vertex {0} has weight 0")]
    ZeroWeight(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(VertexId, VertexId),
}

/// Undirected, simple, vertex-weighted graph.
///
/// Iteration over vertices and neighbors is always in ascending id order,
/// which makes every algorithm built on top of it deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedGraph {
    weights: BTreeMap<VertexId, Weight>,
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph on ids `1..=n`, unit weights, no edges.
    pub fn with_unit_vertices(n: u32) -> Self {
        let mut g = Self::new();
        for v in 1..=n {
            g.weights.insert(v, 1);
            g.adj.insert(v, BTreeSet::new());
        }
        g
    }

    /// Build from an edge list over ids `1..=n` with unit weights.
    pub fn from_edges(n: u32, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut g = Self::with_unit_vertices(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: VertexId, weight: Weight) -> Result<(), GraphError> {
        if v == 0 {
            return Err(GraphError::ZeroId);
        }
        if weight == 0 {
            return Err(GraphError::ZeroWeight(v));
        }
        if self.weights.contains_key(&v) {
            return Err(GraphError::DuplicateVertex(v));
        }
        self.weights.insert(v, weight);
        self.adj.insert(v, BTreeSet::new());
        Ok(())
    }

    pub fn set_weight(&mut self, v: VertexId, weight: Weight) -> Result<(), GraphError> {
        if weight == 0 {
            return Err(GraphError::ZeroWeight(v));
        }
        match self.weights.get_mut(&v) {
            Some(w) => {
                *w = weight;
                Ok(())
            }
            None => Err(GraphError::MissingVertex(v)),
        }
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !self.contains(u) {
            return Err(GraphError::MissingVertex(u));
        }
        if !self.contains(v) {
            return Err(GraphError::MissingVertex(v));
        }
        if !self.adj.get_mut(&u).expect("checked").insert(v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adj.get_mut(&v).expect("checked").insert(u);
        Ok(())
    }

    /// Remove the given vertices and their incident edges. Unknown ids are ignored.
    pub fn remove_vertices(&mut self, set: &VertexSet) {
        for &v in set {
            if let Some(nbrs) = self.adj.remove(&v) {
                for u in nbrs {
                    if let Some(a) = self.adj.get_mut(&u) {
                        a.remove(&v);
                    }
                }
                self.weights.remove(&v);
            }
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.weights.contains_key(&v)
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.weights.keys().copied()
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.weights.keys().copied().collect()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, n)| n.range(u + 1..).map(move |&v| (u, v)))
    }

    /// Weight of `v`. Panics if `v` is not a vertex.
    pub fn weight(&self, v: VertexId) -> Weight {
        self.weights[&v]
    }

    pub fn neighbors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adj[&v]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|n| n.contains(&v))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[&v].len()
    }

    pub fn total_weight(&self) -> Weight {
        self.weights.values().sum()
    }

    pub fn max_weight(&self) -> Weight {
        self.weights.values().copied().max().unwrap_or(0)
    }

    pub fn max_id(&self) -> VertexId {
        self.weights.keys().next_back().copied().unwrap_or(0)
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.values().all(|&w| w == 1)
    }

    /// Sum of weights of the members of `set` that are vertices of the graph.
    pub fn weight_of<'a>(&self, set: impl IntoIterator<Item = &'a VertexId>) -> Weight {
        set.into_iter().filter_map(|v| self.weights.get(v)).sum()
    }

    /// Open neighborhood of a vertex set.
    pub fn neighborhood(&self, set: &VertexSet) -> VertexSet {
        let mut out = VertexSet::new();
        for &v in set {
            if let Some(n) = self.adj.get(&v) {
                out.extend(n.iter().filter(|u| !set.contains(u)));
            }
        }
        out
    }

    pub fn induced(&self, set: &VertexSet) -> WeightedGraph {
        let mut g = WeightedGraph::new();
        for &v in set {
            if let Some(&w) = self.weights.get(&v) {
                g.weights.insert(v, w);
                g.adj.insert(
                    v,
                    self.adj[&v].iter().copied().filter(|u| set.contains(u)).collect(),
                );
            }
        }
        g
    }

    pub fn without(&self, set: &VertexSet) -> WeightedGraph {
        let mut g = self.clone();
        g.remove_vertices(set);
        g
    }

    /// Same graph with every weight replaced by 1.
    pub fn unit_weighted(&self) -> WeightedGraph {
        let mut g = self.clone();
        for w in g.weights.values_mut() {
            *w = 1;
        }
        g
    }

    pub fn is_connected_set(&self, set: &VertexSet) -> bool {
        let Some(&start) = set.iter().next() else {
            return false;
        };
        let mut seen = VertexSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &u in &self.adj[&v] {
                if set.contains(&u) && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen.len() == set.len()
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.is_connected_set(&self.vertex_set())
    }
}

/// Connected components ordered by ascending minimum id; members sorted.
pub fn connected_components(g: &WeightedGraph) -> ComponentList {
    components_of_subset(g, &g.vertex_set())
}

/// Components of `G[set]`, ordered by ascending minimum id.
pub fn components_of_subset(g: &WeightedGraph, set: &VertexSet) -> ComponentList {
    let mut seen = VertexSet::new();
    let mut out = Vec::new();
    for &s in set {
        if !g.contains(s) || !seen.insert(s) {
            continue;
        }
        let mut comp = VertexSet::from([s]);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in g.neighbors(v) {
                if set.contains(&u) && seen.insert(u) {
                    comp.insert(u);
                    queue.push_back(u);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// How component size is measured when filtering light components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeMeasure {
    Weight,
    Cardinality,
}

impl SizeMeasure {
    pub fn of(self, g: &WeightedGraph, set: &VertexSet) -> Weight {
        match self {
            SizeMeasure::Weight => g.weight_of(set),
            SizeMeasure::Cardinality => set.len() as Weight,
        }
    }
}

/// Vertices lying in components whose size is at most `lambda`.
pub fn light_component_vertices(g: &WeightedGraph, lambda: Weight, measure: SizeMeasure) -> VertexSet {
    connected_components(g)
        .into_iter()
        .filter(|c| measure.of(g, c) <= lambda)
        .flatten()
        .collect()
}

/// Induced subgraph on the components of size greater than `lambda`.
pub fn drop_light_components(g: &WeightedGraph, lambda: Weight, measure: SizeMeasure) -> WeightedGraph {
    g.without(&light_component_vertices(g, lambda, measure))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn perr(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

const ID_COMMENT: &str = "original-ids";

/// Parse the line-oriented graph format (`c`, `p n m`, `v id w`, `e u v`).
///
/// A comment of the form `c original-ids i1 i2 ...` written by
/// [`render_graph`] maps the local ids `1..=n` back to stable ids.
pub fn parse_graph(text: &str) -> Result<WeightedGraph, ParseError> {
    let mut header: Option<(u32, usize, usize)> = None;
    let mut g = WeightedGraph::new();
    let mut weighted = BTreeSet::new();
    let mut edges_seen = 0usize;
    let mut id_map: Option<(usize, Vec<VertexId>)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let kind = tok.next().unwrap_or_default();
        if kind == "c" {
            if tok.next() == Some(ID_COMMENT) {
                let ids = tok
                    .map(|t| t.parse::<VertexId>().map_err(|_| perr(line_no, format!("bad id '{t}' in id map"))))
                    .collect::<Result<Vec<_>, _>>()?;
                id_map = Some((line_no, ids));
            }
            continue;
        }
        let nums = tok
            .map(|t| t.parse::<u64>().map_err(|_| perr(line_no, format!("expected a non-negative integer, found '{t}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        match kind {
            "p" => {
                if header.is_some() {
                    return Err(perr(line_no, "duplicate 'p' line"));
                }
                let [n, m] = nums[..] else {
                    return Err(perr(line_no, "expected 'p <n> <m>'"));
                };
                let n = u32::try_from(n).map_err(|_| perr(line_no, "vertex count too large"))?;
                g = WeightedGraph::with_unit_vertices(n);
                header = Some((n, m as usize, line_no));
            }
            "v" | "e" => {
                let Some((n, _, _)) = header else {
                    return Err(perr(line_no, "'p' line must come first"));
                };
                let [a, b] = nums[..] else {
                    return Err(perr(line_no, format!("expected '{kind} <x> <y>'")));
                };
                let in_range = |x: u64| x >= 1 && x <= u64::from(n);
                if kind == "v" {
                    if !in_range(a) {
                        return Err(perr(line_no, format!("vertex id {a} out of range 1..={n}")));
                    }
                    if b == 0 {
                        return Err(perr(line_no, format!("vertex {a} has non-positive weight")));
                    }
                    if !weighted.insert(a) {
                        return Err(perr(line_no, format!("weight of vertex {a} given twice")));
                    }
                    g.set_weight(a as VertexId, b).map_err(|e| perr(line_no, e.to_string()))?;
                } else {
                    for x in [a, b] {
                        if !in_range(x) {
                            return Err(perr(line_no, format!("vertex id {x} out of range 1..={n}")));
                        }
                    }
                    if a == b {
                        return Err(perr(line_no, format!("self-loop at vertex {a}")));
                    }
                    g.add_edge(a as VertexId, b as VertexId).map_err(|e| perr(line_no, e.to_string()))?;
                    edges_seen += 1;
                }
            }
            other => return Err(perr(line_no, format!("unknown record type '{other}'"))),
        }
    }

    let Some((n, m, p_line)) = header else {
        return Err(perr(text.lines().count().max(1), "missing 'p' line"));
    };
    if edges_seen != m {
        return Err(perr(p_line, format!("header announces {m} edges, found {edges_seen}")));
    }
    match id_map {
        None => Ok(g),
        Some((line, ids)) => {
            if ids.len() != n as usize || ids.iter().collect::<BTreeSet<_>>().len() != ids.len() || ids.contains(&0) {
                return Err(perr(line, "id map must list n distinct positive ids"));
            }
            Ok(relabel(&g, |v| ids[v as usize - 1]))
        }
    }
}

fn relabel(g: &WeightedGraph, f: impl Fn(VertexId) -> VertexId) -> WeightedGraph {
    let mut out = WeightedGraph::new();
    for v in g.vertices() {
        out.add_vertex(f(v), g.weight(v)).expect("relabelling is injective");
    }
    for (u, v) in g.edges() {
        out.add_edge(f(u), f(v)).expect("relabelling is injective");
    }
    out
}

/// Canonical rendering. Graphs whose ids are not exactly `1..=n` get an
/// `original-ids` comment so that parsing restores the stable ids.
pub fn render_graph(g: &WeightedGraph) -> String {
    let ids: Vec<VertexId> = g.vertices().collect();
    let local: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    let mut out = String::new();
    writeln!(out, "p {} {}", g.vertex_count(), g.edge_count()).unwrap();
    if ids.iter().enumerate().any(|(i, &v)| v as usize != i + 1) {
        write!(out, "c {ID_COMMENT}").unwrap();
        for v in &ids {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    for &v in &ids {
        let w = g.weight(v);
        if w != 1 {
            writeln!(out, "v {} {}", local[&v], w).unwrap();
        }
    }
    for (u, v) in g.edges() {
        writeln!(out, "e {} {}", local[&u], local[&v]).unwrap();
    }
    out
}

/// Returns an induced claw `(center, [a, b, c])` if one exists.
pub fn find_induced_claw(g: &WeightedGraph) -> Option<(VertexId, [VertexId; 3])> {
    for v in g.vertices() {
        let n: Vec<VertexId> = g.neighbors(v).iter().copied().collect();
        for i in 0..n.len() {
            for j in i + 1..n.len() {
                if g.has_edge(n[i], n[j]) {
                    continue;
                }
                for k in j + 1..n.len() {
                    if !g.has_edge(n[i], n[k]) && !g.has_edge(n[j], n[k]) {
                        return Some((v, [n[i], n[j], n[k]]));
                    }
                }
            }
        }
    }
    None
}

pub fn is_claw_free(g: &WeightedGraph) -> bool {
    find_induced_claw(g).is_none()
}

/// Instance families for tests and benchmarks.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceKind {
    /// Erdős–Rényi graph on `n` vertices, weights uniform in `1..=max_weight`.
    RandomGnp { n: u32, p: f64, max_weight: Weight },
    /// Line graph of a random `G(base_n, p)`; claw-free by construction.
    ClawfreeLinegraph { base_n: u32, p: f64, max_weight: Weight },
    /// `count` disjoint unit-weight cliques on `size` vertices each.
    DisjointCliques { count: u32, size: u32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("edge probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("maximum weight must be at least 1")]
    ZeroWeight,
    #[error("generated line graph contains a claw at {0}")]
    ClawFound(VertexId),
}

/// Deterministic instance generation under a fixed seed.
pub fn generate_instance(kind: &InstanceKind, seed: u64) -> Result<WeightedGraph, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        InstanceKind::RandomGnp { n, p, max_weight } => {
            check_gnp(p, max_weight)?;
            Ok(gnp(&mut rng, n, p, max_weight))
        }
        InstanceKind::ClawfreeLinegraph { base_n, p, max_weight } => {
            check_gnp(p, max_weight)?;
            let base = gnp(&mut rng, base_n, p, 1);
            let mut g = line_graph(&base);
            if max_weight > 1 {
                for v in g.vertex_set() {
                    g.set_weight(v, rng.gen_range(1..=max_weight)).expect("vertex exists");
                }
            }
            if let Some((c, _)) = find_induced_claw(&g) {
                return Err(GenerateError::ClawFound(c));
            }
            Ok(g)
        }
        InstanceKind::DisjointCliques { count, size } => {
            let mut g = WeightedGraph::with_unit_vertices(count * size);
            for c in 0..count {
                let base = c * size;
                for i in 1..=size {
                    for j in i + 1..=size {
                        g.add_edge(base + i, base + j).expect("fresh edge");
                    }
                }
            }
            Ok(g)
        }
    }
}

fn check_gnp(p: f64, max_weight: Weight) -> Result<(), GenerateError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenerateError::Probability(p));
    }
    if max_weight == 0 {
        return Err(GenerateError::ZeroWeight);
    }
    Ok(())
}

fn gnp(rng: &mut ChaCha8Rng, n: u32, p: f64, max_weight: Weight) -> WeightedGraph {
    let mut g = WeightedGraph::with_unit_vertices(n);
    if max_weight > 1 {
        for v in 1..=n {
            g.set_weight(v, rng.gen_range(1..=max_weight)).expect("vertex exists");
        }
    }
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).expect("fresh edge");
            }
        }
    }
    g
}

/// Line graph with vertices numbered by the lexicographic order of the base edges.
pub fn line_graph(base: &WeightedGraph) -> WeightedGraph {
    let edges: Vec<(VertexId, VertexId)> = base.edges().collect();
    let mut g = WeightedGraph::with_unit_vertices(edges.len() as u32);
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            if a == c || a == d || b == c || b == d {
                g.add_edge(i as VertexId + 1, j as VertexId + 1).expect("fresh edge");
            }
        }
    }
    g
}
