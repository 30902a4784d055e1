//! Curve multiplicities, the broccoli index and formal broccolization, and the
//! invariants obtained by summing multiplicities over an enumeration.

use crate::curve::{
    classify_vertex, curve_class_predicates, is_even, natural_orient, old_vertex_type, vneg, weight, ClassFlags,
    CombType, Degree, Edge, EndRec, Inc, MarkKind, MarkRec, OldType, Vec2, VertexTag,
};
use crate::enumeration::{enumerate_through, random_config, Config, EnumOptions, EnumerationReport};
use crate::error::{Error, Result};
use crate::laurent::{bracket_minus, end_mult, end_mult_simple, int, q_plus, to_y, QFraction, QLaurent, YLaurent};
use crate::parallel::{map_vec, Parallelism};
use crate::rational::big;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Vertex and end conventions. `Refined` is the broccoli multiplicity;
/// `Star` swaps in the simpler end factors; the two mixed schemes combine a
/// refined factor on one vertex type with the classical factor on the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultScheme {
    Refined,
    Star,
    /// `[a]_-` on unmarked vertices, 1 on complex ones
    MixedMinus,
    /// `a` on unmarked vertices, `[a]_+` on complex ones
    MixedPlus,
}

/// `[a]_+` with the double-end value `2/(q+q^{-1})` at `a = 0`.
fn plus_factor(a: u64) -> QFraction {
    let a = a as i64;
    let num = QLaurent::from_int_terms(&[(a, 1), (-a, 1)]);
    match num.div_exact(&q_plus()) {
        Some(p) => QFraction::from_laurent(p),
        None => QFraction::new(num, q_plus()).expect("nonzero denominator"),
    }
}

fn vertex_factor(comb: &CombType, v: usize, scheme: MultScheme) -> Result<QFraction> {
    let c = classify_vertex(comb, v);
    Ok(match (c.tag, scheme) {
        (VertexTag::TypeI, _) => QFraction::one(),
        (VertexTag::TypeII, MultScheme::MixedPlus) => QFraction::from_laurent(QLaurent::constant(big(c.mikhalkin_a as i64))),
        (VertexTag::TypeII, _) => QFraction::from_laurent(bracket_minus(c.mikhalkin_a as i64)),
        (VertexTag::TypeIII, MultScheme::MixedMinus) => QFraction::one(),
        (VertexTag::TypeIII, _) => plus_factor(c.mikhalkin_a),
        (tag, _) => return Err(Error::InvalidType(format!("vertex {v} of kind {tag:?} has no refined multiplicity"))),
    })
}

fn end_factor(degree: &Degree, e: &EndRec, scheme: MultScheme) -> QFraction {
    let w = weight(e.dir);
    let fixed = degree.is_fixed(e.label);
    match scheme {
        MultScheme::Star => end_mult_simple(w, fixed),
        _ => end_mult(w, fixed),
    }
}

/// Product of end and vertex factors under `scheme`.
pub fn mult_with(comb: &CombType, degree: &Degree, scheme: MultScheme) -> Result<QFraction> {
    let mut m = QFraction::one();
    for e in &comb.ends {
        m = m.mul(&end_factor(degree, e, scheme));
    }
    for v in 0..comb.vertex_count() {
        m = m.mul(&vertex_factor(comb, v, scheme)?);
    }
    Ok(m)
}

/// Refined multiplicity `m_C` as a fraction in `q = y^{1/2}`.
pub fn refined_mult(comb: &CombType, degree: &Degree) -> Result<QFraction> {
    mult_with(comb, degree, MultScheme::Refined)
}

/// `m_C` as a Laurent polynomial in `y`.
pub fn refined_mult_y(comb: &CombType, degree: &Degree) -> Result<YLaurent> {
    to_y(&refined_mult(comb, degree)?.to_laurent()?)
}

/// Refined Severi multiplicity: `∏ [a]_-` over the trivalent vertices.
pub fn refined_severi_mult(comb: &CombType) -> Result<YLaurent> {
    let mut m = QLaurent::one();
    for v in 0..comb.vertex_count() {
        let c = classify_vertex(comb, v);
        match c.tag {
            VertexTag::TypeI => {}
            VertexTag::TypeII => m = &m * &bracket_minus(c.mikhalkin_a as i64),
            tag => {
                return Err(Error::Precondition(format!("refined Severi multiplicity needs s = 0 and trivalent vertices, found {tag:?}")));
            }
        }
    }
    to_y(&m)
}

/// Product of `a` over all trivalent vertices, marked or not.
pub fn mikhalkin_mult(comb: &CombType) -> u64 {
    (0..comb.vertex_count())
        .map(|v| classify_vertex(comb, v))
        .filter(|c| matches!(c.tag, VertexTag::TypeII | VertexTag::TypeIII))
        .map(|c| c.mikhalkin_a)
        .product()
}

/// Product of `a` over the unmarked trivalent vertices.
pub fn descendant_mult(comb: &CombType) -> u64 {
    (0..comb.vertex_count())
        .map(|v| classify_vertex(comb, v))
        .filter(|c| c.tag == VertexTag::TypeII)
        .map(|c| c.mikhalkin_a)
        .product()
}

/// Real multiplicity from the complex one: 0 if even, `±1` by residue mod 4.
pub fn real_mult_of(mult: u64) -> i64 {
    match mult % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

pub fn real_mult(comb: &CombType) -> Result<i64> {
    if comb.s() > 0 {
        return Err(Error::Precondition("real multiplicity needs s = 0".into()));
    }
    Ok(real_mult_of(mikhalkin_mult(comb)))
}

/// A vertex counts as even when one of its edges is even.
fn has_even_edge(comb: &CombType, v: usize) -> bool {
    comb.outward_dirs(v).into_iter().any(is_even)
}

/// `i_B = -#V_cm - e_f + #V_wcm + e_n`.
pub fn broccoli_index(comb: &CombType, degree: &Degree) -> i64 {
    let mut i = 0i64;
    for v in 0..comb.vertex_count() {
        match classify_vertex(comb, v).tag {
            VertexTag::TypeIII if has_even_edge(comb, v) => i -= 1,
            VertexTag::TypeII if has_even_edge(comb, v) => i += 1,
            _ => {}
        }
    }
    for e in comb.ends.iter().filter(|e| is_even(e.dir)) {
        if degree.is_fixed(e.label) {
            i -= 1;
        } else {
            i += 1;
        }
    }
    i
}

/// Both sides of `n(3) + n(4) + e_n = n(6) + e_f`.
pub fn parity_ledger(comb: &CombType, degree: &Degree) -> Result<(u64, u64)> {
    let oriented = oriented(comb, degree)?;
    let (mut lhs, mut rhs) = (0, 0);
    for v in 0..oriented.vertex_count() {
        match old_vertex_type(&oriented, degree, v) {
            Some(OldType::T3 | OldType::T4) => lhs += 1,
            Some(OldType::T6a | OldType::T6b) => rhs += 1,
            _ => {}
        }
    }
    for e in oriented.ends.iter().filter(|e| is_even(e.dir)) {
        if degree.is_fixed(e.label) {
            rhs += 1;
        } else {
            lhs += 1;
        }
    }
    Ok((lhs, rhs))
}

fn oriented(comb: &CombType, degree: &Degree) -> Result<CombType> {
    if comb.orientation.is_some() {
        Ok(comb.clone())
    } else {
        natural_orient(comb, degree)
    }
}

/// A forest with its own end directions and fixed set, produced by surgery.
/// It does not pass through any configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalCurve {
    pub comb: CombType,
    pub degree: Degree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surgery {
    /// real marking on an even edge, split into two complex vertices
    SplitReal { vertex: usize },
    /// unmarked vertex with outgoing even edge, odd edges cut
    CutOdd { vertex: usize },
    /// complex marking with three even edges, split in three
    SplitComplex { vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Broccolized {
    pub curve: FormalCurve,
    pub surgeries: Vec<Surgery>,
}

/// Two primitive vectors with `v1 + v2 = -d`: in coordinates where
/// `d = (n, 0)` they are `(-1, n)` and `(1 - n, -n)`.
pub fn split_primitive(d: Vec2) -> (Vec2, Vec2) {
    let n = weight(d) as i64;
    let p = [d[0] / n, d[1] / n];
    // a p0 + b p1 = 1; M = [[a, b], [-p1, p0]] sends p to (1, 0)
    let (a, b) = ext_gcd(p[0], p[1]);
    let back = |u: Vec2| -> Vec2 { [p[0] * u[0] - b * u[1], p[1] * u[0] + a * u[1]] };
    (back([-1, n]), back([1 - n, -n]))
}

fn ext_gcd(x: i64, y: i64) -> (i64, i64) {
    let (mut r0, mut r1) = (x, y);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-s0, -t0)
    } else {
        (s0, t0)
    }
}

struct Surgeon {
    comb: CombType,
    ends: Vec<Vec2>,
    fixed: std::collections::BTreeSet<usize>,
    next_mark: usize,
    dead_edges: Vec<usize>,
}

impl Surgeon {
    fn new_end(&mut self, vertex: usize, dir: Vec2) {
        self.ends.push(dir);
        let label = self.ends.len();
        self.comb.ends.push(EndRec { vertex, label, dir });
    }

    fn mark_complex(&mut self, v: usize) {
        if let Some(m) = self.comb.markings.iter_mut().find(|m| m.vertex == v) {
            m.kind = MarkKind::Complex;
        } else {
            self.next_mark += 1;
            self.comb.markings.push(MarkRec { vertex: v, label: self.next_mark, kind: MarkKind::Complex });
        }
    }

    /// Outward direction at `v` of an incidence.
    fn dir_of(&self, inc: &Inc) -> Vec2 {
        match *inc {
            Inc::Edge(_, d) => d,
            Inc::End(i) => self.comb.ends[i].dir,
            Inc::Mark(_) => unreachable!("markings have no direction"),
        }
    }

    fn move_incidence(&mut self, inc: &Inc, from: usize, to: usize) {
        match *inc {
            Inc::Edge(i, _) => {
                let e = &mut self.comb.edges[i];
                if e.from == from {
                    e.from = to;
                } else {
                    e.to = to;
                }
            }
            Inc::End(i) => self.comb.ends[i].vertex = to,
            Inc::Mark(_) => {}
        }
    }

    /// A complex vertex carrying one even incidence and two new odd ends.
    fn sprout(&mut self, v: usize, inc: &Inc) {
        let (v1, v2) = split_primitive(self.dir_of(inc));
        self.mark_complex(v);
        self.new_end(v, v1);
        self.new_end(v, v2);
    }

    fn split(&mut self, v: usize) {
        let incs: Vec<Inc> = self.comb.incidences(v).into_iter().filter(|i| !matches!(i, Inc::Mark(_))).collect();
        self.sprout(v, &incs[0]);
        for inc in &incs[1..] {
            let w = self.comb.add_vertex();
            self.move_incidence(inc, v, w);
            self.sprout(w, inc);
        }
    }

    fn cut_odd(&mut self, v: usize) {
        let incs = self.comb.incidences(v);
        self.mark_complex(v);
        for inc in incs {
            match inc {
                Inc::Edge(i, d) if !is_even(d) => {
                    let e = self.comb.edges[i].clone();
                    let other = if e.from == v { e.to } else { e.from };
                    self.dead_edges.push(i);
                    self.new_end(v, d);
                    self.new_end(other, vneg(d));
                }
                Inc::End(i) if !is_even(self.comb.ends[i].dir) => {
                    let label = self.comb.ends[i].label;
                    self.fixed.remove(&label);
                }
                _ => {}
            }
        }
    }
}

/// Applies the three surgeries to every forbidden vertex. Each lowers the
/// broccoli index by 2; the result has only old vertex types.
pub fn broccolize(comb: &CombType, degree: &Degree) -> Result<Broccolized> {
    let oriented = oriented(comb, degree)?;
    let forbidden: Vec<(usize, OldType)> = (0..oriented.vertex_count())
        .filter_map(|v| old_vertex_type(&oriented, degree, v).map(|t| (v, t)))
        .filter(|(_, t)| t.is_forbidden())
        .collect();
    let mut s = Surgeon {
        comb: oriented,
        ends: degree.ends.clone(),
        fixed: degree.fixed.clone(),
        next_mark: comb.markings.iter().map(|m| m.label).max().unwrap_or(0),
        dead_edges: vec![],
    };
    let mut surgeries = vec![];
    for (v, t) in forbidden {
        match t {
            OldType::ForbiddenA => {
                s.split(v);
                surgeries.push(Surgery::SplitReal { vertex: v });
            }
            OldType::ForbiddenB => {
                s.cut_odd(v);
                surgeries.push(Surgery::CutOdd { vertex: v });
            }
            OldType::ForbiddenC => {
                s.split(v);
                surgeries.push(Surgery::SplitComplex { vertex: v });
            }
            _ => unreachable!("filtered to forbidden types"),
        }
    }
    let mut comb = s.comb;
    if !s.dead_edges.is_empty() {
        let orient = comb.orientation.take().expect("oriented");
        let keep: Vec<usize> = (0..comb.edges.len()).filter(|i| !s.dead_edges.contains(i)).collect();
        let edges: Vec<Edge> = keep.iter().map(|&i| comb.edges[i].clone()).collect();
        comb.orientation = Some(keep.iter().map(|&i| orient[i]).collect());
        comb.edges = edges;
    }
    comb.ends.sort_by_key(|e| e.label);
    comb.markings.sort_by_key(|m| m.label);
    let degree = Degree { ends: s.ends, fixed: s.fixed };
    Ok(Broccolized { curve: FormalCurve { comb, degree }, surgeries })
}

/// Whether every vertex of a formal curve has an old, non-forbidden type.
pub fn is_old_formal(f: &FormalCurve) -> bool {
    (0..f.comb.vertex_count()).all(|v| match old_vertex_type(&f.comb, &f.degree, v) {
        Some(t) => !t.is_forbidden(),
        None => false,
    })
}

/// `m_C · ∏ w` over the non-fixed ends, as a Laurent polynomial in `q`.
pub fn cleared_mult(comb: &CombType, degree: &Degree) -> Result<QLaurent> {
    let m = refined_mult(comb, degree)?;
    let w: i64 = comb
        .ends
        .iter()
        .filter(|e| !degree.is_fixed(e.label))
        .map(|e| weight(e.dir) as i64)
        .product();
    m.scale(&big(w)).to_laurent()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveMultiplicities {
    pub refined: YLaurent,
    pub mikhalkin: u64,
    /// only for `s = 0`
    pub real_m: Option<i64>,
    pub descendant: u64,
    pub broccoli_index: i64,
    pub flags: ClassFlags,
}

pub fn curve_multiplicities(comb: &CombType, degree: &Degree) -> Result<CurveMultiplicities> {
    Ok(CurveMultiplicities {
        refined: refined_mult_y(comb, degree)?,
        mikhalkin: mikhalkin_mult(comb),
        real_m: (comb.s() == 0).then(|| real_mult_of(mikhalkin_mult(comb))),
        descendant: descendant_mult(comb),
        broccoli_index: broccoli_index(comb, degree),
        flags: curve_class_predicates(comb, degree),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvariantKind {
    #[serde(rename = "N^rB")]
    RefinedBroccoli,
    #[serde(rename = "N^desc")]
    Descendant,
    #[serde(rename = "N^desc*")]
    DescendantStar,
}

impl InvariantKind {
    fn scheme(self) -> MultScheme {
        match self {
            InvariantKind::DescendantStar => MultScheme::Star,
            _ => MultScheme::Refined,
        }
    }

    fn admits(self, flags: &ClassFlags) -> bool {
        match self {
            InvariantKind::RefinedBroccoli => flags.is_refined_broccoli,
            _ => flags.is_descendant,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub invariant: InvariantKind,
    pub degree: Degree,
    pub r: usize,
    pub s: usize,
    pub fixed: Vec<usize>,
    pub seeds: Vec<u64>,
    pub value: YLaurent,
    /// labeled curves counted
    pub curves: u64,
    pub g_order: u64,
}

/// `Σ m / |Aut|` over the orbits in `report` admitted by `kind`.
pub fn aggregate(kind: InvariantKind, degree: &Degree, report: &EnumerationReport, par: Parallelism) -> Result<(YLaurent, u64)> {
    let g = degree.g_order();
    let parts = map_vec(par, &report.curves, |c| -> Result<Option<(QFraction, u64)>> {
        let comb = &c.curve.comb;
        if !kind.admits(&curve_class_predicates(comb, degree)) {
            return Ok(None);
        }
        let m = mult_with(comb, degree, kind.scheme())?;
        let aut = BigRational::new(BigInt::one(), BigInt::from(c.automorphisms));
        Ok(Some((m.scale(&aut), g / c.automorphisms)))
    });
    let mut total = QFraction::zero();
    let mut count = 0;
    for p in parts {
        if let Some((m, k)) = p? {
            total = total.add(&m);
            count += k;
        }
    }
    Ok((to_y(&total.to_laurent()?)?, count))
}

/// Invariant of `kind` through the given configuration.
pub fn invariant_through(kind: InvariantKind, degree: &Degree, cfg: &Config, par: Parallelism) -> Result<InvariantResult> {
    let report = enumerate_through(degree, cfg, par)?;
    if report.degenerate {
        return Err(Error::Degenerate("configuration is not in general position".into()));
    }
    result_from(kind, degree, cfg.r, cfg.s, vec![], &report, par)
}

/// Invariant of `kind` through a generic configuration drawn from `seed`.
pub fn invariant_seeded(kind: InvariantKind, degree: &Degree, r: usize, s: usize, seed: u64, opts: &EnumOptions) -> Result<InvariantResult> {
    let (_, report) = random_config(degree, r, s, seed, opts)?;
    result_from(kind, degree, r, s, vec![seed], &report, opts.parallelism)
}

pub fn result_from(
    kind: InvariantKind,
    degree: &Degree,
    r: usize,
    s: usize,
    seeds: Vec<u64>,
    report: &EnumerationReport,
    par: Parallelism,
) -> Result<InvariantResult> {
    let (value, curves) = aggregate(kind, degree, report, par)?;
    Ok(InvariantResult {
        invariant: kind,
        degree: degree.clone(),
        r,
        s,
        fixed: degree.fixed.iter().copied().collect(),
        seeds,
        value,
        curves,
        g_order: degree.g_order(),
    })
}

pub fn invariant_rb(degree: &Degree, cfg: &Config, par: Parallelism) -> Result<InvariantResult> {
    invariant_through(InvariantKind::RefinedBroccoli, degree, cfg, par)
}

pub fn invariant_desc(degree: &Degree, cfg: &Config, par: Parallelism) -> Result<InvariantResult> {
    invariant_through(InvariantKind::Descendant, degree, cfg, par)
}

pub fn invariant_desc_star(degree: &Degree, cfg: &Config, par: Parallelism) -> Result<InvariantResult> {
    invariant_through(InvariantKind::DescendantStar, degree, cfg, par)
}

/// Total of `Σ m / |Aut|` under any scheme, kept as a fraction.
pub fn scheme_total(degree: &Degree, report: &EnumerationReport, scheme: MultScheme) -> Result<QFraction> {
    let mut total = QFraction::zero();
    for c in &report.curves {
        let m = mult_with(&c.curve.comb, degree, scheme)?;
        total = total.add(&m.scale(&BigRational::new(BigInt::one(), BigInt::from(c.automorphisms))));
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TropDescendant {
    /// `Ñ`: markings assigned to valences in order
    #[serde(with = "crate::rational::big_serde")]
    pub ordered: BigRational,
    /// `N = |k|!/k! · Ñ`
    #[serde(with = "crate::rational::big_serde")]
    pub unordered: BigRational,
}

/// Tropical descendant invariant with `k = (k0, k1)`: the first `k0`
/// markings sit on 2-valent points, the other `k1` on 4-valent vertices.
pub fn trop_descendant(degree: &Degree, k: &[usize], report: &EnumerationReport, cfg: &Config) -> Result<TropDescendant> {
    if k.iter().skip(2).any(|&x| x > 0) {
        return Err(Error::Unsupported("descendants at vertices of valence above 4".into()));
    }
    let k0 = k.first().copied().unwrap_or(0);
    let k1 = k.get(1).copied().unwrap_or(0);
    if (k0, k1) != (cfg.r, cfg.s) {
        return Err(Error::Precondition(format!("k = ({k0},{k1}) does not match (r,s) = ({},{})", cfg.r, cfg.s)));
    }
    let mut sum = BigRational::zero();
    for c in &report.curves {
        if !curve_class_predicates(&c.curve.comb, degree).is_descendant {
            continue;
        }
        sum += BigRational::new(BigInt::from(descendant_mult(&c.curve.comb)), BigInt::from(c.automorphisms));
    }
    let ordered = sum / int(degree.i_alpha() as i64);
    let unordered = &ordered * BigRational::from_integer(binomial(k0 + k1, k1));
    Ok(TropDescendant { ordered, unordered })
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `∏_{fixed odd} w / ∏_{non-fixed odd} w`, the value at `y = 1` of the end factors.
pub fn weight_ratio(degree: &Degree) -> BigRational {
    let mut r = BigRational::one();
    for (i, v) in degree.ends.iter().enumerate() {
        let w = weight(*v) as i64;
        if w % 2 == 0 {
            continue;
        }
        if degree.is_fixed(i + 1) {
            r *= int(w);
        } else {
            r /= int(w);
        }
    }
    r
}

/// Refined multiplicity of a Welschinger curve from its old vertex types and
/// Mikhalkin multiplicities. All ends are assumed primitive.
pub fn refined_welschinger_mult(vertices: &[(OldType, u64)]) -> Result<QFraction> {
    let mut m = QFraction::one();
    for &(t, a) in vertices {
        let f = match t {
            OldType::T1 | OldType::T7 => QFraction::one(),
            OldType::T2 | OldType::T3 | OldType::T4 => QFraction::from_laurent(bracket_minus(a as i64)),
            OldType::T5 | OldType::T6b => plus_factor(a),
            OldType::T8 => {
                let a = a as i64;
                let num = QLaurent::from_int_terms(&[(a, 2), (-a, -2)]);
                let den = QLaurent::from_int_terms(&[(2, 1), (-2, -1)]);
                match num.div_exact(&den) {
                    Some(p) => QFraction::from_laurent(p),
                    None => QFraction::new(num, den)?,
                }
            }
            t => return Err(Error::InvalidType(format!("vertex type {t:?} does not occur in Welschinger curves"))),
        };
        m = m.mul(&f);
    }
    Ok(m)
}
