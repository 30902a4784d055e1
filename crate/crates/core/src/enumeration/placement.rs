use super::Config;
use crate::curve::{CombType, Degree, Inc, PlacedCurve};
use crate::error::{Error, Result};
use crate::rational::{checked_div, checked_mul, checked_sub, rat, Rat};
use num_traits::{Signed, Zero};
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// no solution at all
    Inconsistent,
    /// a positive-dimensional solution set
    SingularConsistent,
    ZeroLength,
    NegativeLength,
}

impl Rejection {
    /// Whether the configuration is to blame (as opposed to the type).
    pub fn is_degenerate(self) -> bool {
        matches!(self, Rejection::SingularConsistent | Rejection::ZeroLength)
    }

    pub fn name(self) -> &'static str {
        match self {
            Rejection::Inconsistent => "inconsistent",
            Rejection::SingularConsistent => "singular_consistent",
            Rejection::ZeroLength => "zero_length",
            Rejection::NegativeLength => "negative_length",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    Curve(PlacedCurve),
    Rejected(Rejection),
}

/// Solves for the anchor (image of vertex 0) and the bounded edge lengths.
pub fn solve_placement(comb: &CombType, degree: &Degree, cfg: &Config) -> Result<Placement> {
    let ne = comb.edges.len();
    let n = 2 + ne;
    let nv = comb.vertex_count();
    // position of each vertex: anchor + Σ coef[e] * len[e] * dir[e]
    let mut coef: Vec<Option<Vec<i64>>> = vec![None; nv];
    coef[0] = Some(vec![0; ne]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let cv = coef[v].clone().expect("visited");
        for inc in comb.incidences(v) {
            if let Inc::Edge(i, _) = inc {
                let e = &comb.edges[i];
                let (u, sign) = if e.from == v { (e.to, 1) } else { (e.from, -1) };
                if coef[u].is_none() {
                    let mut cu = cv.clone();
                    cu[i] = sign;
                    coef[u] = Some(cu);
                    queue.push_back(u);
                }
            }
        }
    }
    let coef: Vec<Vec<i64>> = coef
        .into_iter()
        .map(|c| c.ok_or_else(|| Error::InvalidType("disconnected type".into())))
        .collect::<Result<_>>()?;

    let mut rows: Vec<Vec<Rat>> = vec![];
    for m in &comb.markings {
        let p = cfg
            .points
            .get(m.label - 1)
            .ok_or_else(|| Error::Config(format!("no point for marking {}", m.label)))?
            .0;
        for axis in 0..2 {
            let mut row = vec![Rat::zero(); n + 1];
            row[axis] = rat(1);
            for (i, e) in comb.edges.iter().enumerate() {
                row[2 + i] = rat((coef[m.vertex][i] * e.dir[axis]) as i128);
            }
            row[n] = p[axis];
            rows.push(row);
        }
    }
    for end in &comb.ends {
        if !degree.is_fixed(end.label) {
            continue;
        }
        let line = cfg
            .lines
            .iter()
            .find(|l| l.end == end.label)
            .ok_or_else(|| Error::Config(format!("no line for end {}", end.label)))?;
        let lam = line.covector;
        let mut row = vec![Rat::zero(); n + 1];
        row[0] = rat(lam[0] as i128);
        row[1] = rat(lam[1] as i128);
        for (i, e) in comb.edges.iter().enumerate() {
            row[2 + i] = rat((coef[end.vertex][i] * (lam[0] * e.dir[0] + lam[1] * e.dir[1])) as i128);
        }
        row[n] = line.value;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::InvalidType(format!("system is {}x{}, not square", rows.len(), n)));
    }
    let sol = match gauss(rows, n)? {
        Solved::Unique(x) => x,
        Solved::Inconsistent => return Ok(Placement::Rejected(Rejection::Inconsistent)),
        Solved::Underdetermined => return Ok(Placement::Rejected(Rejection::SingularConsistent)),
    };
    let lengths = sol[2..].to_vec();
    if lengths.iter().any(|l| l.is_zero()) {
        return Ok(Placement::Rejected(Rejection::ZeroLength));
    }
    if lengths.iter().any(|l| l.is_negative()) {
        return Ok(Placement::Rejected(Rejection::NegativeLength));
    }
    Ok(Placement::Curve(PlacedCurve { comb: comb.clone(), anchor: [sol[0], sol[1]], lengths }))
}

enum Solved {
    Unique(Vec<Rat>),
    Inconsistent,
    Underdetermined,
}

/// Gauss-Jordan on an augmented `n x (n+1)` matrix.
fn gauss(mut a: Vec<Vec<Rat>>, n: usize) -> Result<Solved> {
    let rows = a.len();
    let mut pivot_row = 0;
    let mut pivots = vec![];
    for col in 0..n {
        let Some(p) = (pivot_row..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(pivot_row, p);
        let pv = a[pivot_row][col];
        for c in col..=n {
            a[pivot_row][c] = checked_div(&a[pivot_row][c], &pv)?;
        }
        for r in 0..rows {
            if r == pivot_row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col];
            for c in col..=n {
                let t = checked_mul(&f, &a[pivot_row][c])?;
                a[r][c] = checked_sub(&a[r][c], &t)?;
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if (pivot_row..rows).any(|r| !a[r][n].is_zero()) {
        return Ok(Solved::Inconsistent);
    }
    if pivots.len() < n {
        return Ok(Solved::Underdetermined);
    }
    Ok(Solved::Unique((0..n).map(|i| a[i][n]).collect()))
}
