//! Degrees, combinatorial types, placements, vertex classes and the natural
//! orientation.

use crate::error::{Error, Result};
use crate::rational::{checked_add, checked_div, checked_mul, rat, rat_pair_serde, rat_serde, Rat};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type Vec2 = [i64; 2];

pub fn det(a: Vec2, b: Vec2) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn vadd(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn vneg(a: Vec2) -> Vec2 {
    [-a[0], -a[1]]
}

pub fn weight(v: Vec2) -> u32 {
    v[0].unsigned_abs().gcd(&v[1].unsigned_abs()) as u32
}

pub fn is_even(v: Vec2) -> bool {
    weight(v) % 2 == 0
}

/// Degree: labeled end directions (labels are 1-based) and the fixed set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degree {
    pub ends: Vec<Vec2>,
    #[serde(default)]
    pub fixed: BTreeSet<usize>,
}

impl Degree {
    pub fn new(ends: Vec<Vec2>, fixed: BTreeSet<usize>) -> Result<Self> {
        let d = Self { ends, fixed };
        d.validate()?;
        Ok(d)
    }

    /// `d` copies each of `(-1,0)`, `(0,-1)`, `(1,1)`.
    pub fn p2(d: usize) -> Self {
        let mut ends = Vec::with_capacity(3 * d);
        for v in [[-1, 0], [0, -1], [1, 1]] {
            ends.extend(std::iter::repeat(v).take(d));
        }
        Self { ends, fixed: BTreeSet::new() }
    }

    pub fn with_fixed(mut self, fixed: &[usize]) -> Result<Self> {
        self.fixed = fixed.iter().copied().collect();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ends.is_empty() {
            return Err(Error::InvalidDegree("no ends".into()));
        }
        if let Some(i) = self.ends.iter().position(|v| *v == [0, 0]) {
            return Err(Error::InvalidDegree(format!("end {} has zero direction", i + 1)));
        }
        let sum = self.ends.iter().fold([0, 0], |a, v| vadd(a, *v));
        if sum != [0, 0] {
            return Err(Error::InvalidDegree(format!("ends do not balance (sum {sum:?})")));
        }
        if let Some(j) = self.fixed.iter().find(|&&j| j == 0 || j > self.ends.len()) {
            return Err(Error::InvalidDegree(format!("fixed label {j} out of range")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.ends.len()
    }

    pub fn dir(&self, label: usize) -> Vec2 {
        self.ends[label - 1]
    }

    pub fn is_fixed(&self, label: usize) -> bool {
        self.fixed.contains(&label)
    }

    /// `|G(Δ,F)|`: product of factorials of repeated non-fixed directions.
    pub fn g_order(&self) -> u64 {
        let mut counts: BTreeMap<Vec2, u64> = BTreeMap::new();
        for (i, v) in self.ends.iter().enumerate() {
            if !self.is_fixed(i + 1) {
                *counts.entry(*v).or_default() += 1;
            }
        }
        counts.values().map(|&c| (1..=c).product::<u64>()).product()
    }

    /// `I^α = ∏_{j∈F} w(y_j)`.
    pub fn i_alpha(&self) -> u64 {
        self.fixed.iter().map(|&j| weight(self.dir(j)) as u64).product()
    }

    /// Checks `r + 2s + |F| = |Δ| - 1`.
    pub fn check_counts(&self, r: usize, s: usize) -> Result<()> {
        let lhs = r + 2 * s + self.fixed.len();
        if lhs + 1 != self.n() {
            return Err(Error::Config(format!(
                "r + 2s + |F| = {lhs} but |Δ| - 1 = {}",
                self.n() as i64 - 1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkKind {
    Real,
    Complex,
}

/// Bounded edge; `h(to) = h(from) + length * dir`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub dir: Vec2,
}

/// Unbounded end; `dir` points away from `vertex`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndRec {
    pub vertex: usize,
    pub label: usize,
    pub dir: Vec2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkRec {
    pub vertex: usize,
    pub label: usize,
    pub kind: MarkKind,
}

/// Labeled marked tree. Marking labels are 1-based, real ones first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombType {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
    pub ends: Vec<EndRec>,
    pub markings: Vec<MarkRec>,
    /// Per bounded edge: `true` when the flow runs `from -> to`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<bool>>,
}

/// Item adjacent to a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inc {
    /// bounded edge index with the direction pointing away from the vertex
    Edge(usize, Vec2),
    End(usize),
    Mark(usize),
}

impl CombType {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertices: (0..vertex_count).collect(),
            edges: vec![],
            ends: vec![],
            markings: vec![],
            orientation: None,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn add_vertex(&mut self) -> usize {
        let v = self.vertices.len();
        self.vertices.push(v);
        v
    }

    pub fn incidences(&self, v: usize) -> Vec<Inc> {
        let mut out = vec![];
        for (i, e) in self.edges.iter().enumerate() {
            if e.from == v {
                out.push(Inc::Edge(i, e.dir));
            }
            if e.to == v {
                out.push(Inc::Edge(i, vneg(e.dir)));
            }
        }
        for (i, e) in self.ends.iter().enumerate() {
            if e.vertex == v {
                out.push(Inc::End(i));
            }
        }
        for (i, m) in self.markings.iter().enumerate() {
            if m.vertex == v {
                out.push(Inc::Mark(i));
            }
        }
        out
    }

    fn adjacency(&self) -> Vec<Vec<Inc>> {
        let mut adj = vec![vec![]; self.vertex_count()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.from].push(Inc::Edge(i, e.dir));
            adj[e.to].push(Inc::Edge(i, vneg(e.dir)));
        }
        for (i, e) in self.ends.iter().enumerate() {
            adj[e.vertex].push(Inc::End(i));
        }
        for (i, m) in self.markings.iter().enumerate() {
            adj[m.vertex].push(Inc::Mark(i));
        }
        adj
    }

    /// Outward non-marking directions at `v`.
    pub fn outward_dirs(&self, v: usize) -> Vec<Vec2> {
        self.incidences(v)
            .into_iter()
            .filter_map(|inc| match inc {
                Inc::Edge(_, d) => Some(d),
                Inc::End(i) => Some(self.ends[i].dir),
                Inc::Mark(_) => None,
            })
            .collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.incidences(v).len()
    }

    pub fn edge_weight(&self, e: usize) -> u32 {
        weight(self.edges[e].dir)
    }

    pub fn r(&self) -> usize {
        self.markings.iter().filter(|m| m.kind == MarkKind::Real).count()
    }

    pub fn s(&self) -> usize {
        self.markings.iter().filter(|m| m.kind == MarkKind::Complex).count()
    }

    pub fn marking_vertex(&self, label: usize) -> Option<usize> {
        self.markings.iter().find(|m| m.label == label).map(|m| m.vertex)
    }

    pub fn is_marked(&self, v: usize) -> bool {
        self.markings.iter().any(|m| m.vertex == v)
    }

    /// Tree, balancing, labels and zero-direction checks.
    pub fn validate(&self, degree: &Degree) -> Result<()> {
        let nv = self.vertex_count();
        if self.vertices.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::InvalidType("vertex ids must be 0..n".into()));
        }
        for e in &self.edges {
            if e.from >= nv || e.to >= nv || e.from == e.to {
                return Err(Error::InvalidType("edge endpoint out of range".into()));
            }
            if e.dir == [0, 0] {
                return Err(Error::InvalidType("edge with zero direction".into()));
            }
        }
        if self.edges.len() + 1 != nv {
            return Err(Error::InvalidType("graph is not a tree (edge count)".into()));
        }
        let adj = self.adjacency();
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for inc in &adj[v] {
                if let Inc::Edge(i, _) = inc {
                    let e = &self.edges[*i];
                    let u = if e.from == v { e.to } else { e.from };
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidType("graph is not connected".into()));
        }
        let mut labels: Vec<usize> = self.ends.iter().map(|e| e.label).collect();
        labels.sort_unstable();
        if labels != (1..=degree.n()).collect::<Vec<_>>() {
            return Err(Error::InvalidType("end labels do not match the degree".into()));
        }
        for e in &self.ends {
            if e.dir != degree.dir(e.label) {
                return Err(Error::InvalidType(format!("end {} has the wrong direction", e.label)));
            }
        }
        let mut mlabels: Vec<usize> = self.markings.iter().map(|m| m.label).collect();
        mlabels.sort_unstable();
        if mlabels != (1..=self.markings.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidType("marking labels must be 1..r+s".into()));
        }
        for m in &self.markings {
            let real_label = m.label <= self.r();
            if real_label != (m.kind == MarkKind::Real) {
                return Err(Error::InvalidType("real markings must carry the first labels".into()));
            }
        }
        for v in 0..nv {
            let sum = self.outward_dirs(v).into_iter().fold([0, 0], vadd);
            if sum != [0, 0] {
                return Err(Error::InvalidType(format!("balancing fails at vertex {v}")));
            }
        }
        Ok(())
    }

    /// `2 + #bounded edges`.
    pub fn cell_dimension(&self) -> usize {
        2 + self.edges.len()
    }

    /// Canonical string: the tree rooted at marking 1 (or end 1), children sorted.
    /// With `unlabeled`, non-fixed end labels are replaced by their direction.
    pub fn canonical_key(&self, degree: &Degree, unlabeled: bool) -> String {
        let adj = self.adjacency();
        let root = self
            .marking_vertex(1)
            .or_else(|| self.ends.iter().find(|e| e.label == 1).map(|e| e.vertex))
            .unwrap_or(0);
        self.encode(&adj, degree, unlabeled, root, usize::MAX)
    }

    fn encode(&self, adj: &[Vec<Inc>], degree: &Degree, unlabeled: bool, v: usize, via: usize) -> String {
        let mut items: Vec<String> = vec![];
        for inc in &adj[v] {
            match *inc {
                Inc::Edge(i, d) if i != via => {
                    let e = &self.edges[i];
                    let u = if e.from == v { e.to } else { e.from };
                    items.push(format!("E{},{}{}", d[0], d[1], self.encode(adj, degree, unlabeled, u, i)));
                }
                Inc::Edge(..) => {}
                Inc::End(i) => {
                    let e = &self.ends[i];
                    if unlabeled && !degree.is_fixed(e.label) {
                        items.push(format!("y{},{}", e.dir[0], e.dir[1]));
                    } else {
                        items.push(format!("y#{}", e.label));
                    }
                }
                Inc::Mark(i) => {
                    let m = &self.markings[i];
                    items.push(format!("x{}{}", m.label, if m.kind == MarkKind::Real { 'r' } else { 'c' }));
                }
            }
        }
        items.sort();
        format!("({})", items.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OldType {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6a,
    T6b,
    T7,
    T8,
    T9,
    /// real marking on an even edge
    ForbiddenA,
    /// unmarked vertex whose single even edge is outgoing
    ForbiddenB,
    /// complex marking with three even edges
    ForbiddenC,
}

impl OldType {
    pub fn is_forbidden(self) -> bool {
        matches!(self, OldType::ForbiddenA | OldType::ForbiddenB | OldType::ForbiddenC)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexTag {
    TypeI,
    TypeII,
    TypeIII,
    Old(OldType),
    DescendantHigher,
    Invalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexClass {
    pub tag: VertexTag,
    pub mikhalkin_a: u64,
}

/// Types I-III, unmarked higher valence, or invalid.
///
/// For type III the image vertex is 3-valent and balanced, so `|det|` of any
/// two of the three directions is the same number; this is asserted.
pub fn classify_vertex(comb: &CombType, v: usize) -> VertexClass {
    let invalid = VertexClass { tag: VertexTag::Invalid, mikhalkin_a: 0 };
    let incs = comb.incidences(v);
    let marks: Vec<MarkKind> = incs
        .iter()
        .filter_map(|i| match i {
            Inc::Mark(m) => Some(comb.markings[*m].kind),
            _ => None,
        })
        .collect();
    let dirs = comb.outward_dirs(v);
    if dirs.iter().fold([0, 0], |a, d| vadd(a, *d)) != [0, 0] {
        return invalid;
    }
    match (marks.as_slice(), dirs.len()) {
        ([MarkKind::Real], 2) if dirs[0] == vneg(dirs[1]) => {
            VertexClass { tag: VertexTag::TypeI, mikhalkin_a: 0 }
        }
        ([], 3) => VertexClass { tag: VertexTag::TypeII, mikhalkin_a: det(dirs[0], dirs[1]).unsigned_abs() },
        ([MarkKind::Complex], 3) => {
            let a = det(dirs[0], dirs[1]).unsigned_abs();
            debug_assert_eq!(a, det(dirs[1], dirs[2]).unsigned_abs());
            debug_assert_eq!(a, det(dirs[0], dirs[2]).unsigned_abs());
            VertexClass { tag: VertexTag::TypeIII, mikhalkin_a: a }
        }
        ([], k) if k >= 4 => VertexClass { tag: VertexTag::DescendantHigher, mikhalkin_a: 0 },
        _ => invalid,
    }
}

/// Natural orientation: every unmarked edge points to the unique non-fixed end
/// of its component of `Γ` minus the markings.
pub fn natural_orient(comb: &CombType, degree: &Degree) -> Result<CombType> {
    let nv = comb.vertex_count();
    let ne = comb.edges.len();
    // union-find over items: edges 0..ne, ends ne..ne+nends
    let nitems = ne + comb.ends.len();
    let mut parent: Vec<usize> = (0..nitems).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let adj = comb.adjacency();
    for v in 0..nv {
        if comb.is_marked(v) {
            continue;
        }
        let items: Vec<usize> = adj[v]
            .iter()
            .filter_map(|inc| match inc {
                Inc::Edge(i, _) => Some(*i),
                Inc::End(i) => Some(ne + i),
                Inc::Mark(_) => None,
            })
            .collect();
        for w in items.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut free_end: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in comb.ends.iter().enumerate() {
        if !degree.is_fixed(e.label) {
            let root = find(&mut parent, ne + i);
            free_end.entry(root).or_default().push(i);
        }
    }
    let mut roots = BTreeSet::new();
    for i in 0..nitems {
        roots.insert(find(&mut parent, i));
    }
    for root in &roots {
        let n = free_end.get(root).map_or(0, |v| v.len());
        if n != 1 {
            return Err(Error::NotOrientable(format!(
                "a component of the curve minus its markings has {n} non-fixed ends"
            )));
        }
    }
    let mut forward = vec![false; ne];
    for (root, ends) in &free_end {
        let start = comb.ends[ends[0]].vertex;
        if comb.is_marked(start) {
            continue;
        }
        // BFS inside the component from the free end's vertex
        let mut queue = VecDeque::from([start]);
        let mut seen = vec![false; nv];
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for inc in &adj[v] {
                if let Inc::Edge(i, _) = *inc {
                    if find(&mut parent, i) != *root {
                        continue;
                    }
                    let e = &comb.edges[i];
                    let u = if e.from == v { e.to } else { e.from };
                    if seen[u] {
                        continue;
                    }
                    seen[u] = true;
                    // flow runs u -> v
                    forward[i] = e.from == u;
                    if !comb.is_marked(u) {
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    let mut out = comb.clone();
    if let Some(existing) = &comb.orientation {
        if *existing != forward {
            return Err(Error::NotOrientable("given orientation differs from the natural one".into()));
        }
    }
    out.orientation = Some(forward);
    Ok(out)
}

/// Old vertex type of an oriented refined broccoli vertex.
pub fn old_vertex_type(comb: &CombType, degree: &Degree, v: usize) -> Option<OldType> {
    let orient = comb.orientation.as_ref()?;
    let class = classify_vertex(comb, v);
    // (outward dir, incoming?)
    let mut edges: Vec<(Vec2, bool)> = vec![];
    for inc in comb.incidences(v) {
        match inc {
            Inc::Edge(i, d) => {
                let e = &comb.edges[i];
                let incoming = (e.to == v) == orient[i];
                edges.push((d, incoming));
            }
            Inc::End(i) => {
                let e = &comb.ends[i];
                edges.push((e.dir, degree.is_fixed(e.label)));
            }
            Inc::Mark(_) => {}
        }
    }
    let even: Vec<&(Vec2, bool)> = edges.iter().filter(|(d, _)| is_even(*d)).collect();
    match class.tag {
        VertexTag::TypeI => Some(if even.is_empty() { OldType::T1 } else { OldType::ForbiddenA }),
        VertexTag::TypeII => Some(match even.len() {
            0 => OldType::T2,
            1 if even[0].1 => OldType::T3,
            1 => OldType::ForbiddenB,
            _ => OldType::T4,
        }),
        VertexTag::TypeIII => Some(match even.len() {
            0 => OldType::T5,
            1 => {
                let odd: Vec<Vec2> = edges.iter().filter(|(d, _)| !is_even(*d)).map(|e| e.0).collect();
                if det(odd[0], odd[1]) == 0 {
                    OldType::T6b
                } else {
                    OldType::T6a
                }
            }
            _ => OldType::ForbiddenC,
        }),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub is_refined_broccoli: bool,
    pub is_descendant: bool,
    pub is_old_broccoli: bool,
    pub is_welschinger: bool,
}

pub fn curve_class_predicates(comb: &CombType, degree: &Degree) -> ClassFlags {
    let classes: Vec<VertexClass> = (0..comb.vertex_count()).map(|v| classify_vertex(comb, v)).collect();
    let oriented = natural_orient(comb, degree).ok();
    let all_123 = classes
        .iter()
        .all(|c| matches!(c.tag, VertexTag::TypeI | VertexTag::TypeII | VertexTag::TypeIII));
    let is_refined_broccoli = all_123 && oriented.is_some();
    let is_descendant = (0..comb.vertex_count()).all(|v| {
        let incs = comb.incidences(v);
        let marks: Vec<MarkKind> = incs
            .iter()
            .filter_map(|i| match i {
                Inc::Mark(m) => Some(comb.markings[*m].kind),
                _ => None,
            })
            .collect();
        let balanced = comb.outward_dirs(v).into_iter().fold([0, 0], vadd) == [0, 0];
        balanced
            && match marks.as_slice() {
                [] => incs.len() >= 3,
                [MarkKind::Real] => incs.len() == 3,
                [MarkKind::Complex] => incs.len() == 4,
                _ => false,
            }
    });
    let old_types: Option<Vec<OldType>> = oriented
        .as_ref()
        .filter(|_| is_refined_broccoli)
        .map(|o| (0..o.vertex_count()).filter_map(|v| old_vertex_type(o, degree, v)).collect());
    let is_old_broccoli = old_types.as_ref().is_some_and(|t| t.iter().all(|t| !t.is_forbidden()));
    // vertex types (1)-(5) and (6b) whose odd edges are unmarked ends
    let is_welschinger = match (&oriented, &old_types) {
        (Some(o), Some(_)) => (0..o.vertex_count()).all(|v| match old_vertex_type(o, degree, v) {
            Some(OldType::T1 | OldType::T2 | OldType::T3 | OldType::T4 | OldType::T5) => true,
            Some(OldType::T6b) => {
                let odd_ends = o
                    .ends
                    .iter()
                    .filter(|e| e.vertex == v && !is_even(e.dir) && !degree.is_fixed(e.label))
                    .count();
                odd_ends == 2
            }
            _ => false,
        }),
        _ => false,
    };
    ClassFlags { is_refined_broccoli, is_descendant, is_old_broccoli, is_welschinger }
}

/// A combinatorial type with an anchor (image of vertex 0) and edge lengths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedCurve {
    pub comb: CombType,
    #[serde(with = "rat_pair_serde")]
    pub anchor: [Rat; 2],
    #[serde(with = "lengths_serde")]
    pub lengths: Vec<Rat>,
}

mod lengths_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct L(#[serde(with = "rat_serde")] Rat);

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, L> = v.iter().enumerate().map(|(i, r)| (format!("{i:04}"), L(*r))).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let m: BTreeMap<String, L> = BTreeMap::deserialize(d)?;
        let mut out = vec![];
        for (i, (k, v)) in m.into_iter().enumerate() {
            if k.parse::<usize>().ok() != Some(i) {
                return Err(serde::de::Error::custom("edge ids must be 0..n"));
            }
            out.push(v.0);
        }
        Ok(out)
    }
}

impl PlacedCurve {
    /// Positions of all vertices.
    pub fn positions(&self) -> Result<Vec<[Rat; 2]>> {
        let nv = self.comb.vertex_count();
        let mut pos: Vec<Option<[Rat; 2]>> = vec![None; nv];
        pos[0] = Some(self.anchor);
        let adj = self.comb.adjacency();
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let p = pos[v].expect("visited");
            for inc in &adj[v] {
                if let Inc::Edge(i, d) = *inc {
                    let e = &self.comb.edges[i];
                    let u = if e.from == v { e.to } else { e.from };
                    if pos[u].is_some() {
                        continue;
                    }
                    let l = self.lengths[i];
                    pos[u] = Some([
                        checked_add(&p[0], &checked_mul(&l, &rat(d[0] as i128))?)?,
                        checked_add(&p[1], &checked_mul(&l, &rat(d[1] as i128))?)?,
                    ]);
                    queue.push_back(u);
                }
            }
        }
        pos.into_iter().map(|p| p.ok_or(Error::InvalidType("disconnected".into()))).collect()
    }

    /// Value of `λ · h(y_label)` for a line condition on an end.
    pub fn end_line_value(&self, label: usize, covector: [i64; 2]) -> Result<Rat> {
        let pos = self.positions()?;
        let end = self
            .comb
            .ends
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| Error::InvalidType(format!("no end {label}")))?;
        let p = pos[end.vertex];
        checked_add(
            &checked_mul(&p[0], &rat(covector[0] as i128))?,
            &checked_mul(&p[1], &rat(covector[1] as i128))?,
        )
    }

    pub fn all_lengths_positive(&self) -> bool {
        self.lengths.iter().all(|l| *l > Rat::zero())
    }
}

/// Length `l` with `b = a + l * d`, or `None` when `b - a` is not a multiple of `d`.
pub fn length_along(a: [Rat; 2], b: [Rat; 2], d: Vec2) -> Result<Option<Rat>> {
    let dx = crate::rational::checked_sub(&b[0], &a[0])?;
    let dy = crate::rational::checked_sub(&b[1], &a[1])?;
    let l = if d[0] != 0 { checked_div(&dx, &rat(d[0] as i128))? } else { checked_div(&dy, &rat(d[1] as i128))? };
    let ok = checked_mul(&l, &rat(d[0] as i128))? == dx && checked_mul(&l, &rat(d[1] as i128))? == dy;
    Ok(ok.then_some(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(dirs: &[Vec2], mark: Option<MarkKind>) -> CombType {
        let mut c = CombType::new(1);
        for (i, d) in dirs.iter().enumerate() {
            c.ends.push(EndRec { vertex: 0, label: i + 1, dir: *d });
        }
        if let Some(kind) = mark {
            c.markings.push(MarkRec { vertex: 0, label: 1, kind });
        }
        c
    }

    #[test]
    fn classify_examples() {
        let c = star(&[[1, 0], [0, 1], [-1, -1]], None);
        assert_eq!(classify_vertex(&c, 0), VertexClass { tag: VertexTag::TypeII, mikhalkin_a: 1 });
        let c = star(&[[2, 0], [0, 1], [-2, -1]], None);
        assert_eq!(classify_vertex(&c, 0).mikhalkin_a, 2);
        let c = star(&[[1, 0], [0, 1], [-1, -1]], Some(MarkKind::Complex));
        assert_eq!(classify_vertex(&c, 0), VertexClass { tag: VertexTag::TypeIII, mikhalkin_a: 1 });
        let c = star(&[[1, 0], [0, 1], [-1, 0]], None);
        assert_eq!(classify_vertex(&c, 0).tag, VertexTag::Invalid);
        let c = star(&[[1, 0], [0, 1], [-1, 0], [0, -1]], None);
        assert_eq!(classify_vertex(&c, 0).tag, VertexTag::DescendantHigher);
    }

    /// Star with ends (-1,0),(0,-1),(1,1); end `on` subdivided by a real marking.
    fn line_with_mark_on(on: usize) -> CombType {
        let mut c = CombType::new(2);
        let dirs = [[-1, 0], [0, -1], [1, 1]];
        for (i, d) in dirs.iter().enumerate() {
            if i + 1 == on {
                c.edges.push(Edge { from: 0, to: 1, dir: *d });
                c.ends.push(EndRec { vertex: 1, label: i + 1, dir: *d });
            } else {
                c.ends.push(EndRec { vertex: 0, label: i + 1, dir: *d });
            }
        }
        c.markings.push(MarkRec { vertex: 1, label: 1, kind: MarkKind::Real });
        c
    }

    #[test]
    fn cell_dimension_examples() {
        let c = star(&[[-1, 0], [0, -1], [1, 1]], None);
        assert_eq!(c.cell_dimension(), 2);
        assert_eq!(line_with_mark_on(1).cell_dimension(), 3);
    }

    #[test]
    fn orientation_away_from_fixed_end() {
        let deg = Degree::p2(1);
        let c = line_with_mark_on(1);
        c.validate(&deg).unwrap();
        // component {edge 0, ends 2,3} has two free ends
        assert!(natural_orient(&c, &deg).is_err());
        let deg = Degree::p2(1).with_fixed(&[1]).unwrap();
        let c = line_with_mark_on(3);
        let o = natural_orient(&c, &deg).unwrap();
        // flow runs from the marked vertex 1 to vertex 0, toward the free end 2
        assert_eq!(o.orientation, Some(vec![false]));
        assert_eq!(natural_orient(&o, &deg).unwrap(), o);
    }

    #[test]
    fn g_order_and_counts() {
        let d = Degree::p2(3);
        assert_eq!(d.g_order(), 216);
        assert!(d.check_counts(8, 0).is_ok());
        assert!(d.check_counts(7, 0).is_err());
        let f = Degree::p2(2).with_fixed(&[1]).unwrap();
        assert_eq!(f.g_order(), 2 * 2);
        assert!(Degree::new(vec![[1, 0], [0, 1]], BTreeSet::new()).is_err());
    }

    #[test]
    fn canonical_key_ignores_numbering() {
        let deg = Degree::p2(1);
        let a = line_with_mark_on(2);
        let mut b = a.clone();
        // swap vertex ids
        for e in &mut b.edges {
            std::mem::swap(&mut e.from, &mut e.to);
        }
        for e in &mut b.ends {
            e.vertex = 1 - e.vertex;
        }
        for m in &mut b.markings {
            m.vertex = 1 - m.vertex;
        }
        assert_eq!(a.canonical_key(&deg, false), b.canonical_key(&deg, false));
        assert_ne!(a.canonical_key(&deg, false), line_with_mark_on(1).canonical_key(&deg, false));
    }
}
