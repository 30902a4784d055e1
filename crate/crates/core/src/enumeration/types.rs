use crate::curve::{vadd, CombType, Degree, Edge, EndRec, MarkKind, MarkRec, Vec2};
use crate::error::{Error, Result};

/// Refuse brute-force runs beyond this many types.
const MAX_TYPES: u128 = 2_000_000;

/// Every labeled type with ends `Δ`, `r` real markings subdividing edges,
/// `s` complex markings on distinct trivalent vertices, all other vertices
/// trivalent. Trees come from leaf insertion, real markings from edge
/// insertion, so no type appears twice.
pub fn enumerate_types(degree: &Degree, r: usize, s: usize) -> Result<Vec<CombType>> {
    degree.validate()?;
    degree.check_counts(r, s)?;
    let n = degree.n();
    let estimate = type_count_estimate(n, r, s);
    if estimate > MAX_TYPES {
        return Err(Error::Unsupported(format!("{estimate} types is beyond brute force")));
    }
    let mut out = vec![];
    if n == 2 {
        if s > 0 || r == 0 {
            return Ok(out);
        }
        let mut base = CombType::new(1);
        for label in 1..=2 {
            base.ends.push(EndRec { vertex: 0, label, dir: degree.dir(label) });
        }
        base.markings.push(MarkRec { vertex: 0, label: 1, kind: MarkKind::Real });
        insert_real(&base, 2, r, &mut out);
        return Ok(out);
    }
    for tree in trivalent_trees(n) {
        let Some(base) = realize(&tree, n, degree) else { continue };
        let internal = base.vertex_count();
        let mut chosen = vec![];
        assign_complex(&base, internal, r, s, &mut chosen, &mut out);
    }
    Ok(out)
}

fn type_count_estimate(n: usize, r: usize, s: usize) -> u128 {
    if n < 3 {
        return (1..=r as u128).product::<u128>().max(1);
    }
    let trees: u128 = (1..=(2 * n as u128 - 5)).step_by(2).product();
    let internal = n as u128 - 2;
    let complex: u128 = (0..s as u128).map(|i| internal.saturating_sub(i)).product();
    let edges = 2 * n as u128 - 3;
    let real: u128 = (0..r as u128).map(|i| edges + i).product();
    trees * complex * real
}

/// Trees on leaves `0..n` (leaf `i` is end `i+1`); internal nodes are `n..`.
fn trivalent_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    let c = n;
    let mut trees = vec![vec![(0, c), (1, c), (2, c)]];
    for leaf in 3..n {
        let mut next = Vec::with_capacity(trees.len() * (2 * leaf - 3));
        for t in &trees {
            let new_node = n + leaf - 2;
            for i in 0..t.len() {
                let (a, b) = t[i];
                let mut u = t.clone();
                u[i] = (a, new_node);
                u.push((new_node, b));
                u.push((leaf, new_node));
                next.push(u);
            }
        }
        trees = next;
    }
    trees
}

/// Bounded edge directions by balancing; `None` if some edge has direction 0.
fn realize(tree: &[(usize, usize)], n: usize, degree: &Degree) -> Option<CombType> {
    let nodes = 2 * n - 2;
    let mut adj = vec![vec![]; nodes];
    for &(a, b) in tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    // outward direction of the edge a -> b as seen from a: sum of ends behind b
    fn behind(adj: &[Vec<usize>], n: usize, degree: &Degree, from: usize, node: usize) -> Vec2 {
        if node < n {
            return degree.dir(node + 1);
        }
        adj[node]
            .iter()
            .filter(|&&x| x != from)
            .fold([0, 0], |acc, &x| vadd(acc, behind(adj, n, degree, node, x)))
    }
    let mut comb = CombType::new(n - 2);
    for &(a, b) in tree {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if a < n {
            comb.ends.push(EndRec { vertex: b - n, label: a + 1, dir: degree.dir(a + 1) });
        } else {
            let dir = behind(&adj, n, degree, a, b);
            if dir == [0, 0] {
                return None;
            }
            comb.edges.push(Edge { from: a - n, to: b - n, dir });
        }
    }
    comb.ends.sort_by_key(|e| e.label);
    Some(comb)
}

fn assign_complex(base: &CombType, internal: usize, r: usize, s: usize, chosen: &mut Vec<usize>, out: &mut Vec<CombType>) {
    if chosen.len() == s {
        let mut c = base.clone();
        for (k, &v) in chosen.iter().enumerate() {
            c.markings.push(MarkRec { vertex: v, label: r + k + 1, kind: MarkKind::Complex });
        }
        insert_real(&c, 1, r, out);
        return;
    }
    for v in 0..internal {
        if !chosen.contains(&v) {
            chosen.push(v);
            assign_complex(base, internal, r, s, chosen, out);
            chosen.pop();
        }
    }
}

/// Inserts real markings `next..=r` into edges and ends, one at a time.
fn insert_real(c: &CombType, next: usize, r: usize, out: &mut Vec<CombType>) {
    if next > r {
        let mut c = c.clone();
        c.markings.sort_by_key(|m| m.label);
        out.push(c);
        return;
    }
    for i in 0..c.edges.len() {
        let mut d = c.clone();
        let w = d.add_vertex();
        let e = d.edges[i].clone();
        d.edges[i] = Edge { from: e.from, to: w, dir: e.dir };
        d.edges.push(Edge { from: w, to: e.to, dir: e.dir });
        d.markings.push(MarkRec { vertex: w, label: next, kind: MarkKind::Real });
        insert_real(&d, next + 1, r, out);
    }
    for i in 0..c.ends.len() {
        let mut d = c.clone();
        let w = d.add_vertex();
        let end = d.ends[i].clone();
        d.edges.push(Edge { from: end.vertex, to: w, dir: end.dir });
        d.ends[i].vertex = w;
        d.markings.push(MarkRec { vertex: w, label: next, kind: MarkKind::Real });
        insert_real(&d, next + 1, r, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn tree_counts() {
        assert_eq!(trivalent_trees(3).len(), 1);
        assert_eq!(trivalent_trees(4).len(), 3);
        assert_eq!(trivalent_trees(6).len(), 105);
    }

    #[test]
    fn degree_one_counts() {
        let d = Degree::p2(1);
        let t = enumerate_types(&d, 2, 0).unwrap();
        assert_eq!(t.len(), 12);
        let keys: BTreeSet<String> = t.iter().map(|c| c.canonical_key(&d, false)).collect();
        assert_eq!(keys.len(), 12);
        for c in &t {
            c.validate(&d).unwrap();
            assert_eq!(c.cell_dimension(), 2 * 2);
        }
        let t = enumerate_types(&d, 0, 1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].cell_dimension(), 2);
    }

    #[test]
    fn types_are_distinct_and_valid() {
        let d = Degree::p2(2);
        let t = enumerate_types(&d, 1, 2).unwrap();
        let keys: BTreeSet<String> = t.iter().map(|c| c.canonical_key(&d, false)).collect();
        assert_eq!(keys.len(), t.len());
        for c in &t {
            c.validate(&d).unwrap();
            assert_eq!(c.cell_dimension(), 2 * 3);
        }
    }

    #[test]
    fn too_large_is_refused() {
        assert!(matches!(enumerate_types(&Degree::p2(4), 11, 0), Err(Error::Unsupported(_))));
    }
}
