//! λ-balanced crown decompositions and the packings they certify.
//!
//! [`compute_bcd`] refines a partition of the graph into connected parts.
//! Whenever a part weighs more than `3λ` it is split along a DFS tree. The
//! only part that resists splitting is a "star": one vertex `v` whose
//! removal leaves pieces of weight at most `λ`. A stuck star is resolved by
//! the first of these moves that applies:
//!
//! * `v` becomes a head when the pieces that only see heads and `v` already
//!   outweigh λ together with `v`;
//! * one piece moves to a neighbouring part that stays lighter than the star
//!   was, or that splits in two after receiving it;
//! * a demanded balanced expansion between the star centres (closed under
//!   neighbouring star-shaped parts) and their pieces either finds new heads
//!   or redistributes the pieces with every centre carrying less than `3λ`.
//!
//! Heads and crowns are never undone and the number of heads plus parts
//! never drops, so a seed packing is never lost. The last move has no
//! potential argument behind it, so the loop carries a step cap and reports
//! [`BcdError::NoProgress`] instead of spinning.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dbe::{compute_dbe, uniform_demands};
use crate::graph::{components_of_subset, connected_components, VertexId, VertexSet, Weight, WeightedGraph};

/// A λ-balanced crown decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bcd {
    pub lambda: Weight,
    pub crown: VertexSet,
    pub head: VertexSet,
    pub parts: Vec<VertexSet>,
    /// Components of `G[crown]` with the head each one is assigned to.
    pub crown_components: Vec<(VertexSet, VertexId)>,
}

impl Bcd {
    /// `|H| + |ℜ|`, the size of the derived packing.
    pub fn packing_size(&self) -> usize {
        self.head.len() + self.parts.len()
    }

    /// Vertices covered by crown, head and parts.
    pub fn covered(&self) -> VertexSet {
        let mut all = self.crown.clone();
        all.extend(&self.head);
        for p in &self.parts {
            all.extend(p);
        }
        all
    }

    /// Crown components assigned to `h`.
    pub fn crown_of(&self, h: VertexId) -> VertexSet {
        self.crown_components
            .iter()
            .filter(|(_, x)| *x == h)
            .flat_map(|(q, _)| q.iter().copied())
            .collect()
    }
}

/// Pairwise-disjoint connected vertex sets of weight at least `threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packing {
    pub parts: Vec<VertexSet>,
    pub threshold: Weight,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BcdError {
    #[error("lambda must be positive")]
    ZeroLambda,
    #[error("component containing {min_vertex} weighs {weight} <= lambda = {lambda}")]
    LightComponent { min_vertex: VertexId, weight: Weight, lambda: Weight },
    #[error("seed part {0} is invalid: {1}")]
    BadSeed(usize, String),
    #[error("no progress after {0} refinement steps")]
    NoProgress(usize),
    #[error("constructed decomposition is invalid: {0}")]
    Invalid(BcdViolation),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph weighs {total}, needs at least {needed}")]
    TooLight { total: Weight, needed: Weight },
    #[error("vertex {vertex} weighs {weight}, more than {limit}")]
    HeavyVertex { vertex: VertexId, weight: Weight, limit: Weight },
    #[error("induced claw centred at {0}")]
    Claw(VertexId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BcdViolation {
    #[error("item 1: crown, head and parts do not partition the vertex set")]
    NotAPartition,
    #[error("item 1: crown vertex {0} has a neighbour outside the head")]
    CrownNotSeparated(VertexId),
    #[error("item 2: crown component containing {0} is heavier than lambda")]
    HeavyCrownComponent(VertexId),
    #[error("item 3: crown component containing {0} is not assigned to an adjacent head")]
    BadAssignment(VertexId),
    #[error("item 3: crown components do not match the components of G[C]")]
    CrownComponentsMismatch,
    #[error("item 4: head {0} with its crown does not exceed lambda")]
    LightHead(VertexId),
    #[error("item 5: part containing {0} is disconnected")]
    DisconnectedPart(VertexId),
    #[error("item 5: part containing {0} weighs {1}, outside (lambda, 3 lambda]")]
    PartWeight(VertexId, Weight),
}

/// Check the five decomposition items against `g`.
pub fn verify_bcd(g: &WeightedGraph, b: &Bcd) -> Result<(), BcdViolation> {
    let lambda = b.lambda;
    let mut total = b.crown.len() + b.head.len();
    let mut union = b.crown.clone();
    union.extend(&b.head);
    for p in &b.parts {
        total += p.len();
        union.extend(p);
    }
    if union.len() != total || union != g.vertex_set() {
        return Err(BcdViolation::NotAPartition);
    }
    for &c in &b.crown {
        if g.neighbors(c).iter().any(|u| !b.crown.contains(u) && !b.head.contains(u)) {
            return Err(BcdViolation::CrownNotSeparated(c));
        }
    }
    let comps = components_of_subset(g, &b.crown);
    for q in &comps {
        if g.weight_of(q) > lambda {
            return Err(BcdViolation::HeavyCrownComponent(*q.first().unwrap()));
        }
    }
    let mut listed: Vec<VertexSet> = b.crown_components.iter().map(|(q, _)| q.clone()).collect();
    listed.sort();
    let mut sorted = comps.clone();
    sorted.sort();
    if listed != sorted {
        return Err(BcdViolation::CrownComponentsMismatch);
    }
    for (q, h) in &b.crown_components {
        if !b.head.contains(h) || !g.neighborhood(q).contains(h) {
            return Err(BcdViolation::BadAssignment(*q.first().unwrap()));
        }
    }
    for &h in &b.head {
        if g.weight(h) + g.weight_of(&b.crown_of(h)) <= lambda {
            return Err(BcdViolation::LightHead(h));
        }
    }
    for p in &b.parts {
        let min = *p.first().ok_or(BcdViolation::NotAPartition)?;
        if !g.is_connected_set(p) {
            return Err(BcdViolation::DisconnectedPart(min));
        }
        let w = g.weight_of(p);
        if w <= lambda || w > 3 * lambda {
            return Err(BcdViolation::PartWeight(min, w));
        }
    }
    Ok(())
}

/// Check that `p` is a packing in `g`; returns the index of the first bad part.
pub fn verify_packing(g: &WeightedGraph, p: &Packing) -> Result<(), (usize, String)> {
    let mut seen = VertexSet::new();
    for (i, part) in p.parts.iter().enumerate() {
        if part.is_empty() {
            return Err((i, "empty part".into()));
        }
        if let Some(v) = part.iter().find(|v| !g.contains(**v)) {
            return Err((i, format!("vertex {v} not in graph")));
        }
        if part.iter().any(|v| !seen.insert(*v)) {
            return Err((i, "overlaps an earlier part".into()));
        }
        if !g.is_connected_set(part) {
            return Err((i, "disconnected".into()));
        }
        if g.weight_of(part) < p.threshold {
            return Err((i, format!("weighs less than {}", p.threshold)));
        }
    }
    Ok(())
}

/// Packing of size `|H| + |ℜ|` with threshold `λ + 1`: every part plus
/// every head together with its crown.
pub fn packing_from_bcd(b: &Bcd) -> Packing {
    let mut parts = b.parts.clone();
    for &h in &b.head {
        let mut p = b.crown_of(h);
        p.insert(h);
        parts.push(p);
    }
    Packing { parts, threshold: b.lambda + 1 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Owner {
    Part(usize),
    Head,
    Crown,
}

struct Refiner<'a> {
    g: &'a WeightedGraph,
    lambda: Weight,
    parts: BTreeMap<usize, VertexSet>,
    next_id: usize,
    heads: BTreeMap<VertexId, Vec<VertexSet>>,
    owner: BTreeMap<VertexId, Owner>,
    steps: usize,
}

impl<'a> Refiner<'a> {
    fn new(g: &'a WeightedGraph, lambda: Weight) -> Self {
        Refiner { g, lambda, parts: BTreeMap::new(), next_id: 0, heads: BTreeMap::new(), owner: BTreeMap::new(), steps: 0 }
    }

    fn add_part(&mut self, p: VertexSet) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        for &v in &p {
            self.owner.insert(v, Owner::Part(id));
        }
        self.parts.insert(id, p);
        id
    }

    fn split(&mut self, id: usize, a: VertexSet, b: VertexSet) {
        self.parts.remove(&id);
        self.add_part(a);
        self.add_part(b);
    }

    fn part_weight(&self, id: usize) -> Weight {
        self.g.weight_of(&self.parts[&id])
    }

    /// Parts adjacent to `set`, excluding `except`.
    fn adjacent_parts(&self, set: &VertexSet, except: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .g
            .neighborhood(set)
            .iter()
            .filter_map(|v| match self.owner.get(v) {
                Some(Owner::Part(id)) if *id != except => Some(*id),
                _ => None,
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Hand `set` to an adjacent part, preferring one that stays at most
    /// `3λ`, then the lightest, then the oldest.
    fn transfer(&mut self, set: VertexSet, except: usize) {
        let w = self.g.weight_of(&set);
        let cap = 3 * self.lambda;
        let target = self
            .adjacent_parts(&set, except)
            .into_iter()
            .min_by_key(|id| {
                let pw = self.part_weight(*id);
                (pw + w > cap, pw, *id)
            })
            .expect("a piece that is not crownable touches another part");
        for &v in &set {
            self.owner.insert(v, Owner::Part(target));
        }
        self.parts.get_mut(&target).unwrap().extend(set);
    }

    fn make_head(&mut self, h: VertexId, crown: Vec<VertexSet>) {
        self.owner.insert(h, Owner::Head);
        for q in &crown {
            for &x in q {
                self.owner.insert(x, Owner::Crown);
            }
        }
        self.heads.entry(h).or_default().extend(crown);
    }

    fn only_heads_around(&self, set: &VertexSet, extra: Option<VertexId>) -> bool {
        self.g.neighborhood(set).iter().all(|u| Some(*u) == extra || self.heads.contains_key(u))
    }

    /// Give unowned vertices a place: heavy components become parts, light
    /// ones join a crown when only heads surround them and an adjacent part
    /// otherwise.
    fn rehome(&mut self, free: VertexSet) {
        for &x in &free {
            self.owner.remove(&x);
        }
        let mut light = Vec::new();
        for c in components_of_subset(self.g, &free) {
            if self.g.weight_of(&c) > self.lambda {
                self.add_part(c);
            } else {
                light.push(c);
            }
        }
        for c in light {
            if self.only_heads_around(&c, None) {
                let h = *self.g.neighborhood(&c).first().expect("light leftovers touch a head or part");
                self.make_head(h, vec![c]);
            } else {
                self.transfer(c, usize::MAX);
            }
        }
    }

    fn run(&mut self) -> Result<(), BcdError> {
        let n = self.g.vertex_count();
        let cap = 20 * n * n + 1000;
        while self.steps < cap {
            self.steps += 1;
            let heavy: Vec<usize> =
                self.parts.keys().copied().filter(|id| self.part_weight(*id) > 3 * self.lambda).collect();
            if heavy.is_empty() {
                return Ok(());
            }
            let mut stars = Vec::new();
            let mut split = false;
            for id in heavy {
                match self.try_split(id) {
                    Some(v) => stars.push((id, v)),
                    None => split = true,
                }
            }
            if split {
                continue;
            }
            if self.star_heads(&stars) || self.balance(&stars) {
                continue;
            }
            self.expand(&stars);
        }
        Err(BcdError::NoProgress(cap))
    }

    /// Split a part heavier than `3λ` into two connected parts heavier than
    /// λ, or return its star centre.
    fn try_split(&mut self, id: usize) -> Option<VertexId> {
        match split_or_centre(self.g, &self.parts[&id], self.lambda) {
            Ok((a, b)) => {
                self.split(id, a, b);
                None
            }
            Err(v) => Some(v),
        }
    }

    /// A star whose centre outweighs λ together with the pieces that see
    /// nothing but the centre and heads turns into a head.
    fn star_heads(&mut self, stars: &[(usize, VertexId)]) -> bool {
        let g = self.g;
        for &(id, v) in stars {
            let mut rest = self.parts[&id].clone();
            rest.remove(&v);
            let (crownable, others): (Vec<VertexSet>, Vec<VertexSet>) =
                components_of_subset(g, &rest).into_iter().partition(|k| self.only_heads_around(k, Some(v)));
            let crown_weight: Weight = crownable.iter().map(|k| g.weight_of(k)).sum();
            if g.weight(v) + crown_weight > self.lambda {
                self.parts.remove(&id);
                self.make_head(v, crownable);
                for k in others {
                    self.transfer(k, id);
                }
                return true;
            }
        }
        false
    }

    /// Move one piece of a star to a neighbouring part that stays lighter
    /// than the star did, or whose union with the piece splits in two. The
    /// first kind strictly lowers the sum of squared part weights, the second
    /// adds a part.
    fn balance(&mut self, stars: &[(usize, VertexId)]) -> bool {
        let g = self.g;
        let mut order: Vec<(usize, VertexId)> = stars.to_vec();
        order.sort_by_key(|(id, _)| (std::cmp::Reverse(self.part_weight(*id)), *id));
        for (id, v) in order {
            let wr = self.part_weight(id);
            let mut rest = self.parts[&id].clone();
            rest.remove(&v);
            for piece in components_of_subset(g, &rest) {
                let wp = g.weight_of(&piece);
                let mut targets = self.adjacent_parts(&piece, id);
                targets.sort_by_key(|t| (self.part_weight(*t), *t));
                for t in targets {
                    let mut joined = self.parts[&t].clone();
                    joined.extend(piece.iter().copied());
                    let lighter = self.part_weight(t) + wp < wr;
                    let halves = if lighter { None } else { split_or_centre(g, &joined, self.lambda).ok() };
                    if !lighter && halves.is_none() {
                        continue;
                    }
                    self.parts.get_mut(&id).unwrap().retain(|x| !piece.contains(x));
                    for &x in &piece {
                        self.owner.insert(x, Owner::Part(t));
                    }
                    self.parts.insert(t, joined);
                    if let Some((a, b)) = halves {
                        self.split(t, a, b);
                    }
                    return true;
                }
            }
        }
        false
    }

    /// Expansion step over all stuck stars at once: the star pieces form
    /// the component side and every non-head vertex next to them the head
    /// side, with demand `2λ - 1` and `y = λ`.
    fn expand(&mut self, stars: &[(usize, VertexId)]) {
        let g = self.g;
        let lambda = self.lambda;
        let mut pieces: Vec<VertexSet> = Vec::new();
        for &(id, v) in stars {
            let mut rest = self.parts[&id].clone();
            rest.remove(&v);
            pieces.extend(components_of_subset(g, &rest));
        }
        let b: VertexSet = pieces.iter().flatten().copied().collect();
        let comps = components_of_subset(g, &b);
        if let Some(q) = comps.iter().find(|q| g.weight_of(*q) > lambda) {
            // Pieces of different stars touch and together outweigh λ: gather
            // adjacent pieces until the union is heavy enough to be a part.
            let inside: Vec<&VertexSet> = pieces.iter().filter(|p| !p.is_disjoint(q)).collect();
            let mut taken = vec![false; inside.len()];
            let mut union = inside[0].clone();
            taken[0] = true;
            while g.weight_of(&union) <= lambda {
                let nb = g.neighborhood(&union);
                let next = (0..inside.len()).find(|&i| !taken[i] && !inside[i].is_disjoint(&nb)).expect("q is connected");
                taken[next] = true;
                union.extend(inside[next]);
            }
            for &(id, _) in stars {
                let p = self.parts.get_mut(&id).unwrap();
                p.retain(|x| !union.contains(x));
            }
            self.add_part(union);
            return;
        }
        let mut stars = stars.to_vec();
        let mut b = b;
        while let Some((id, c, rest)) = self.next_small_star(&stars, &b) {
            stars.push((id, c));
            b.extend(rest);
        }
        let stars = &stars[..];
        let a: VertexSet = g.neighborhood(&b).into_iter().filter(|u| !self.heads.contains_key(u)).collect();
        let dbe = compute_dbe(g, &a, &b, &uniform_demands(&a, 2 * lambda - 1), lambda)
            .expect("every star piece touches its centre");
        if !dbe.a1.is_empty() {
            let mut free = VertexSet::new();
            let touched: BTreeSet<usize> = dbe
                .a1
                .iter()
                .filter_map(|x| match self.owner.get(x) {
                    Some(Owner::Part(id)) => Some(*id),
                    _ => None,
                })
                .collect();
            for id in touched {
                free.extend(self.parts.remove(&id).unwrap());
            }
            for &h in &dbe.a1 {
                let crown: Vec<VertexSet> = dbe
                    .components
                    .iter()
                    .zip(&dbe.assignment)
                    .filter(|(_, x)| **x == h)
                    .map(|(q, _)| q.clone())
                    .collect();
                for q in &crown {
                    for x in q {
                        free.remove(x);
                    }
                }
                free.remove(&h);
                self.make_head(h, crown);
            }
            self.rehome(free);
            return;
        }
        // No head is over-demanded: every piece has a balanced home. Each
        // centre keeps its own share, topped up from adjacent pieces if that
        // share alone is too light.
        let mut assignment = dbe.assignment.clone();
        let centres: BTreeSet<VertexId> = stars.iter().map(|(_, v)| *v).collect();
        let mut load: BTreeMap<VertexId, Weight> = centres.iter().map(|&v| (v, g.weight(v))).collect();
        for (q, h) in dbe.components.iter().zip(&assignment) {
            if let Some(l) = load.get_mut(h) {
                *l += g.weight_of(q);
            }
        }
        for &v in &centres {
            let nv = g.neighbors(v);
            for (i, q) in dbe.components.iter().enumerate() {
                if load[&v] > lambda {
                    break;
                }
                let w = g.weight_of(q);
                let donor = assignment[i];
                let spare = load.get(&donor).is_none_or(|l| *l - w > lambda);
                if donor != v && spare && q.iter().any(|x| nv.contains(x)) {
                    if let Some(l) = load.get_mut(&donor) {
                        *l -= w;
                    }
                    assignment[i] = v;
                    *load.get_mut(&v).unwrap() += w;
                }
            }
        }
        for &(id, v) in stars {
            self.parts.insert(id, VertexSet::from([v]));
        }
        for (q, h) in dbe.components.iter().zip(&assignment) {
            let Some(Owner::Part(target)) = self.owner.get(h).copied() else {
                unreachable!("the head side consists of part vertices")
            };
            for &x in q {
                self.owner.insert(x, Owner::Part(target));
            }
            self.parts.get_mut(&target).unwrap().extend(q.iter().copied());
        }
        // A centre that could not collect more than λ joins a neighbour.
        for &(id, _) in stars {
            if self.part_weight(id) <= lambda {
                let p = self.parts.remove(&id).unwrap();
                self.transfer(p, id);
            }
        }
    }

    /// A part next to the current piece set that is itself star shaped
    /// around a vertex, such that its pieces keep every component of the
    /// enlarged piece set at most λ. Pulling such parts in lets neighbouring
    /// stars share their pieces in one balanced step.
    fn next_small_star(&self, stars: &[(usize, VertexId)], b: &VertexSet) -> Option<(usize, VertexId, VertexSet)> {
        let g = self.g;
        let a: VertexSet = g.neighborhood(b).into_iter().filter(|u| !self.heads.contains_key(u)).collect();
        let mut ids: Vec<usize> = a
            .iter()
            .filter_map(|x| match self.owner.get(x) {
                Some(Owner::Part(id)) if stars.iter().all(|(s, _)| s != id) => Some(*id),
                _ => None,
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            let r = &self.parts[&id];
            let mut candidates: Vec<VertexId> = r.intersection(&a).copied().collect();
            if let Err(v) = split_or_centre(g, r, self.lambda) {
                candidates.push(v);
            }
            for c in candidates {
                let mut rest = r.clone();
                rest.remove(&c);
                if components_of_subset(g, &rest).iter().any(|k| g.weight_of(k) > self.lambda) {
                    continue;
                }
                let mut merged = b.clone();
                merged.extend(rest.iter().copied());
                if components_of_subset(g, &merged).iter().all(|k| g.weight_of(k) <= self.lambda) {
                    return Some((id, c, rest));
                }
            }
        }
        None
    }

    fn finish(self) -> Bcd {
        let mut parts: Vec<VertexSet> = self.parts.into_values().collect();
        parts.sort();
        let mut crown_components = Vec::new();
        let mut crown = VertexSet::new();
        for (&h, comps) in &self.heads {
            for q in comps {
                crown.extend(q);
                crown_components.push((q.clone(), h));
            }
        }
        crown_components.sort();
        Bcd { lambda: self.lambda, crown, head: self.heads.keys().copied().collect(), parts, crown_components }
    }
}

/// Split a connected set heavier than λ into two connected sets heavier
/// than λ. Fails with a star centre: a vertex whose removal leaves only
/// components of weight at most λ.
fn split_or_centre(g: &WeightedGraph, r: &VertexSet, lambda: Weight) -> Result<(VertexSet, VertexSet), VertexId> {
    let tree = DfsTree::new(g, r);
    let sw = tree.subtree_weights(g);
    let v = *tree.postorder.iter().find(|&&x| sw[&x] > lambda).expect("set is heavier than lambda");
    let tv = tree.subtree(v);
    let up: VertexSet = r.difference(&tv).copied().collect();
    if g.weight_of(&up) > lambda {
        return Ok((tv, up));
    }
    let mut base = VertexSet::from([v]);
    let mut attached = Vec::new();
    for &c in &tree.children[&v] {
        let tc = tree.subtree(c);
        if tc.iter().any(|x| g.neighbors(*x).iter().any(|u| up.contains(u))) {
            attached.push(tc);
        } else {
            base.extend(tc);
        }
    }
    if g.weight_of(&base) <= lambda {
        for tc in attached {
            base.extend(tc);
            if g.weight_of(&base) > lambda {
                break;
            }
        }
        let rest: VertexSet = r.difference(&base).copied().collect();
        if g.weight_of(&rest) > lambda {
            return Ok((base, rest));
        }
        return Err(v);
    }
    let u: VertexSet = r.difference(&base).copied().collect();
    if g.weight_of(&u) > lambda {
        return Ok((base, u));
    }
    Err(v)
}

/// Depth-first tree of a connected vertex set, rooted at its smallest id,
/// visiting neighbours in ascending order. All non-tree edges join an
/// ancestor to a descendant.
pub(crate) struct DfsTree {
    pub children: BTreeMap<VertexId, Vec<VertexId>>,
    pub parent: BTreeMap<VertexId, VertexId>,
    pub postorder: Vec<VertexId>,
}

impl DfsTree {
    pub fn new(g: &WeightedGraph, set: &VertexSet) -> Self {
        let root = *set.first().expect("non-empty set");
        let mut children: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::from([(root, Vec::new())]);
        let mut parent = BTreeMap::new();
        let mut postorder = Vec::with_capacity(set.len());
        let mut stack: Vec<(VertexId, Vec<VertexId>)> = vec![(root, nbrs_desc(g, set, root))];
        while let Some((v, pending)) = stack.last_mut() {
            let v = *v;
            match pending.pop() {
                Some(u) if !children.contains_key(&u) => {
                    children.insert(u, Vec::new());
                    children.get_mut(&v).unwrap().push(u);
                    parent.insert(u, v);
                    let next = nbrs_desc(g, set, u);
                    stack.push((u, next));
                }
                Some(_) => {}
                None => {
                    postorder.push(v);
                    stack.pop();
                }
            }
        }
        DfsTree { children, parent, postorder }
    }

    pub fn subtree_weights(&self, g: &WeightedGraph) -> BTreeMap<VertexId, Weight> {
        let mut sw = BTreeMap::new();
        for &v in &self.postorder {
            let s: Weight = g.weight(v) + self.children[&v].iter().map(|c| sw[c]).sum::<Weight>();
            sw.insert(v, s);
        }
        sw
    }

    pub fn subtree(&self, v: VertexId) -> VertexSet {
        let mut out = VertexSet::from([v]);
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &c in &self.children[&x] {
                out.insert(c);
                stack.push(c);
            }
        }
        out
    }
}

fn nbrs_desc(g: &WeightedGraph, set: &VertexSet, v: VertexId) -> Vec<VertexId> {
    g.neighbors(v).iter().rev().copied().filter(|u| set.contains(u)).collect()
}

fn check_lambda_components(g: &WeightedGraph, lambda: Weight) -> Result<(), BcdError> {
    if lambda == 0 {
        return Err(BcdError::ZeroLambda);
    }
    for c in connected_components(g) {
        let w = g.weight_of(&c);
        if w <= lambda {
            return Err(BcdError::LightComponent { min_vertex: *c.first().unwrap(), weight: w, lambda });
        }
    }
    Ok(())
}

fn finish_checked(g: &WeightedGraph, r: Refiner<'_>) -> Result<Bcd, BcdError> {
    let b = r.finish();
    verify_bcd(g, &b).map_err(BcdError::Invalid)?;
    Ok(b)
}

/// Compute a λ-BCD of a graph whose components all weigh more than λ.
pub fn compute_bcd(g: &WeightedGraph, lambda: Weight) -> Result<Bcd, BcdError> {
    check_lambda_components(g, lambda)?;
    let mut r = Refiner::new(g, lambda);
    for c in connected_components(g) {
        r.add_part(c);
    }
    r.run()?;
    finish_checked(g, r)
}

/// Compute a λ-BCD starting from a packing with threshold at least `λ + 1`.
/// The derived packing is at least as large as the seed.
pub fn compute_bcd_seeded(g: &WeightedGraph, lambda: Weight, seed: &Packing) -> Result<Bcd, BcdError> {
    check_lambda_components(g, lambda)?;
    let checked = Packing { parts: seed.parts.clone(), threshold: lambda + 1 };
    verify_packing(g, &checked).map_err(|(i, msg)| BcdError::BadSeed(i, msg))?;
    let mut r = Refiner::new(g, lambda);
    let mut covered = VertexSet::new();
    for p in &seed.parts {
        covered.extend(p);
        r.add_part(p.clone());
    }
    let free: VertexSet = g.vertex_set().difference(&covered).copied().collect();
    let mut light = Vec::new();
    for c in components_of_subset(g, &free) {
        if g.weight_of(&c) > lambda {
            r.add_part(c);
        } else {
            light.push(c);
        }
    }
    for c in light {
        let target = *r.adjacent_parts(&c, usize::MAX).first().expect("light leftover touches a part");
        for &v in &c {
            r.owner.insert(v, Owner::Part(target));
        }
        r.parts.get_mut(&target).unwrap().extend(c);
    }
    r.run()?;
    finish_checked(g, r)
}

/// Maximum-cardinality matching (Edmonds' blossom algorithm), as 2-vertex parts.
pub fn maximum_matching(g: &WeightedGraph) -> Packing {
    let ids: Vec<VertexId> = g.vertices().collect();
    let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = ids.iter().map(|v| g.neighbors(*v).iter().map(|u| index[u]).collect()).collect();
    let mate = blossom(&adj);
    let parts = (0..ids.len())
        .filter_map(|i| mate[i].filter(|&j| i < j).map(|j| VertexSet::from([ids[i], ids[j]])))
        .collect();
    Packing { parts, threshold: 2 }
}

fn blossom(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = adj.len();
    const NONE: usize = usize::MAX;
    let mut mate = vec![NONE; n];
    for root in 0..n {
        if mate[root] != NONE {
            continue;
        }
        let mut base: Vec<usize> = (0..n).collect();
        let mut parent = vec![NONE; n];
        let mut used = vec![false; n];
        used[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut found = NONE;
        'search: while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if base[v] == base[u] || mate[v] == u {
                    continue;
                }
                if u == root || (mate[u] != NONE && parent[mate[u]] != NONE) {
                    let cur = lca(&mate, &base, &parent, v, u);
                    let mut in_blossom = vec![false; n];
                    mark_path(&mate, &mut base, &mut parent, &mut in_blossom, v, cur, u);
                    mark_path(&mate, &mut base, &mut parent, &mut in_blossom, u, cur, v);
                    for i in 0..n {
                        if in_blossom[base[i]] {
                            base[i] = cur;
                            if !used[i] {
                                used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if parent[u] == NONE {
                    parent[u] = v;
                    if mate[u] == NONE {
                        found = u;
                        break 'search;
                    }
                    used[mate[u]] = true;
                    queue.push_back(mate[u]);
                }
            }
        }
        let mut v = found;
        while v != NONE {
            let pv = parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
    mate.into_iter().map(|m| (m != NONE).then_some(m)).collect()
}

fn lca(mate: &[usize], base: &[usize], parent: &[usize], a: usize, b: usize) -> usize {
    let mut seen = vec![false; mate.len()];
    let mut a = a;
    loop {
        a = base[a];
        seen[a] = true;
        if mate[a] == usize::MAX {
            break;
        }
        a = parent[mate[a]];
    }
    let mut b = b;
    loop {
        b = base[b];
        if seen[b] {
            return b;
        }
        b = parent[mate[b]];
    }
}

fn mark_path(
    mate: &[usize],
    base: &mut [usize],
    parent: &mut [usize],
    in_blossom: &mut [bool],
    mut v: usize,
    b: usize,
    mut child: usize,
) {
    while base[v] != b {
        in_blossom[base[v]] = true;
        in_blossom[base[mate[v]]] = true;
        parent[v] = child;
        child = mate[v];
        v = parent[mate[v]];
    }
}

/// Carve a connected piece `S` with `W + 1 ≤ w(S) ≤ 2W` from a connected
/// claw-free graph such that `G - S` stays connected.
///
/// Uses the DFS tree rooted at the smallest id. Claw-freeness bounds the
/// number of children of every tree vertex by two; when the lowest vertex
/// whose subtree reaches `W + 1` overshoots `2W`, the claw at that vertex
/// forces an edge from its parent into one child subtree, which keeps the
/// other side attached after removal.
pub fn carve_connected_piece(g: &WeightedGraph, w_cap: Weight) -> Result<VertexSet, BcdError> {
    let all = g.vertex_set();
    if all.is_empty() || !g.is_connected() {
        return Err(BcdError::Disconnected);
    }
    if g.total_weight() < w_cap + 1 {
        return Err(BcdError::TooLight { total: g.total_weight(), needed: w_cap + 1 });
    }
    if let Some(v) = g.vertices().find(|&v| g.weight(v) > w_cap) {
        return Err(BcdError::HeavyVertex { vertex: v, weight: g.weight(v), limit: w_cap });
    }
    let tree = DfsTree::new(g, &all);
    let sw = tree.subtree_weights(g);
    let v = *tree.postorder.iter().find(|&&x| sw[&x] > w_cap).expect("total weight exceeds W");
    if sw[&v] <= 2 * w_cap {
        return Ok(tree.subtree(v));
    }
    let kids = &tree.children[&v];
    if kids.len() != 2 {
        return Err(BcdError::Claw(v));
    }
    let (v1, v2) = (kids[0], kids[1]);
    let keep = match tree.parent.get(&v) {
        None => v1,
        Some(&u) if g.has_edge(u, v2) => v1,
        Some(&u) if g.has_edge(u, v1) => v2,
        Some(_) => return Err(BcdError::Claw(v)),
    };
    let mut s = tree.subtree(keep);
    s.insert(v);
    Ok(s)
}

/// W-BCD of a connected claw-free graph with empty crown and head: carve
/// pieces until less than `W + 1` remains, then merge the remainder into
/// the first adjacent piece.
pub fn clawfree_bcd(g: &WeightedGraph, w_cap: Weight) -> Result<Bcd, BcdError> {
    if w_cap == 0 {
        return Err(BcdError::ZeroLambda);
    }
    if !g.is_connected() || g.is_empty() {
        return Err(BcdError::Disconnected);
    }
    let mut rest = g.clone();
    let mut parts: Vec<VertexSet> = Vec::new();
    while rest.total_weight() > w_cap {
        let s = carve_connected_piece(&rest, w_cap)?;
        rest.remove_vertices(&s);
        parts.push(s);
    }
    if !rest.is_empty() {
        let left = rest.vertex_set();
        let n = g.neighborhood(&left);
        let i = parts.iter().position(|p| !p.is_disjoint(&n)).ok_or(BcdError::Disconnected)?;
        parts[i].extend(left);
    }
    let b = Bcd { lambda: w_cap, crown: VertexSet::new(), head: VertexSet::new(), parts, crown_components: Vec::new() };
    verify_bcd(g, &b).map_err(BcdError::Invalid)?;
    Ok(b)
}
