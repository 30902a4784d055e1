//! Exact search for all curves through a configuration.
//!
//! The root is the first marking. Cutting the curve at the markings leaves
//! components with one non-fixed end each, so every bounded edge carries a
//! flow direction. A *rigid flow* is the subtree upstream of an edge; it is
//! determined by the set of markings and fixed ends it contains and lives on a
//! ray (or a line for a bare fixed end). A *seeded flow* starts at a marking
//! with a chosen direction and absorbs rigid flows until it leaves through a
//! non-fixed end; it is then a *closed piece*. Both families are built by
//! increasing key size, so each curve is produced exactly once.

use super::Config;
use crate::curve::{det, length_along, vadd, vneg, CombType, Degree, Edge, EndRec, MarkKind, MarkRec, PlacedCurve, Vec2};
use crate::error::{Error, Result};
use crate::parallel::{map_vec, Parallelism};
use crate::rational::Rat;
use num_integer::Integer;
use std::collections::{HashMap, HashSet};

const MAX_CLASSES: usize = 16;
const MAX_BITS: usize = 24;

type Cons = [u8; MAX_CLASSES];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct HPoint {
    x: i128,
    y: i128,
    w: i128,
}

fn ck(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::Overflow("flow geometry"))
}

fn mul(a: i128, b: i128) -> Result<i128> {
    ck(a.checked_mul(b))
}

fn sub(a: i128, b: i128) -> Result<i128> {
    ck(a.checked_sub(b))
}

fn add(a: i128, b: i128) -> Result<i128> {
    ck(a.checked_add(b))
}

impl HPoint {
    fn new(x: i128, y: i128, w: i128) -> Result<Self> {
        let (mut x, mut y, mut w) = if w < 0 { (-x, -y, -w) } else { (x, y, w) };
        let g = x.gcd(&y).gcd(&w);
        if g > 1 {
            x /= g;
            y /= g;
            w /= g;
        }
        if w == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self { x, y, w })
    }

    fn from_rats(p: &[Rat; 2]) -> Result<Self> {
        let l = p[0].denom().lcm(p[1].denom());
        Self::new(mul(*p[0].numer(), l / p[0].denom())?, mul(*p[1].numer(), l / p[1].denom())?, l)
    }

    fn to_rats(self) -> [Rat; 2] {
        [Rat::new(self.x, self.w), Rat::new(self.y, self.w)]
    }

    /// `v · self` as (numerator, denominator)
    fn dot(self, v: Vec2) -> Result<(i128, i128)> {
        Ok((add(mul(v[0] as i128, self.x)?, mul(v[1] as i128, self.y)?)?, self.w))
    }
}

#[derive(Clone, Copy, Debug)]
enum Geom {
    Ray(HPoint),
    /// `lam · X = num / den`
    Line { lam: Vec2, num: i128, den: i128 },
}

impl Geom {
    /// Line through the geometry: covector and value.
    fn line(&self, dir: Vec2) -> Result<(Vec2, i128, i128)> {
        match *self {
            Geom::Ray(p) => {
                let lam = [dir[1], -dir[0]];
                let (n, d) = p.dot(lam)?;
                Ok((lam, n, d))
            }
            Geom::Line { lam, num, den } => Ok((lam, num, den)),
        }
    }
}

enum Meet {
    At(HPoint),
    Miss,
    Degenerate,
}

/// Sign of `dir · (x - start)`.
fn forward_sign(start: HPoint, dir: Vec2, x: HPoint) -> Result<i32> {
    let (xn, xd) = x.dot(dir)?;
    let (sn, sd) = start.dot(dir)?;
    let diff = sub(mul(xn, sd)?, mul(sn, xd)?)?;
    Ok(diff.signum() as i32)
}

fn meet(g1: &Geom, d1: Vec2, g2: &Geom, d2: Vec2) -> Result<Meet> {
    let (l1, n1, w1) = g1.line(d1)?;
    let (l2, n2, w2) = g2.line(d2)?;
    let dt = det(l1, l2) as i128;
    if dt == 0 {
        // parallel; equal lines are a coincidence of the configuration
        let i = if l1[0] != 0 { 0 } else { 1 };
        let same = mul(mul(n2, w1)?, l1[i] as i128)? == mul(mul(n1, w2)?, l2[i] as i128)?;
        return Ok(if same { Meet::Degenerate } else { Meet::Miss });
    }
    let x = sub(mul(mul(n1, w2)?, l2[1] as i128)?, mul(mul(n2, w1)?, l1[1] as i128)?)?;
    let y = sub(mul(mul(n2, w1)?, l1[0] as i128)?, mul(mul(n1, w2)?, l2[0] as i128)?)?;
    let w = mul(mul(w1, w2)?, dt)?;
    let p = HPoint::new(x, y, w)?;
    for (g, d) in [(g1, d1), (g2, d2)] {
        if let Geom::Ray(s) = g {
            match forward_sign(*s, d, p)? {
                1 => {}
                0 => return Ok(Meet::Degenerate),
                _ => return Ok(Meet::Miss),
            }
        }
    }
    Ok(Meet::At(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Piece {
    sf: u32,
    class: u8,
    w: u16,
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Line(u16),
    Merge(u32, u32),
    EmitReal { x: u8, piece: Piece },
    EmitComplex { x: u8, a: Piece, b: Piece },
    Seed,
    Chain { prev: u32, rf: u32 },
}

#[derive(Clone, Debug)]
struct Flow {
    dir: Vec2,
    geom: Geom,
    cons: Cons,
    kind: Kind,
}

struct FixedEnd {
    label: usize,
    dir: Vec2,
    lam: Vec2,
    num: i128,
    den: i128,
}

struct Problem {
    masks_by_size: Vec<Vec<u64>>,
    m: usize,
    r: usize,
    points: Vec<HPoint>,
    classes: Vec<Vec2>,
    class_labels: Vec<Vec<usize>>,
    totals: Cons,
    fixed: Vec<FixedEnd>,
    nbits: usize,
    dirs: Vec<Vec2>,
    dir_index: HashMap<Vec2, u16>,
    class_of: HashMap<Vec2, u8>,
    /// Directions a chain edge can still have, indexed by consumption and
    /// used fixed ends; `None` when the table would be too large.
    downstream: Option<Vec<HashSet<Vec2>>>,
    strides: Vec<usize>,
}

impl Problem {
    fn marking_bit(&self, x: usize) -> Option<u32> {
        (x > 0).then(|| (x - 1) as u32)
    }

    fn fixed_bit(&self, k: usize) -> u32 {
        (self.m.saturating_sub(1) + k) as u32
    }

    fn all_mask(&self) -> u64 {
        (1u64 << self.nbits) - 1
    }

    fn fits(&self, c: &Cons) -> bool {
        c.iter().zip(self.totals.iter()).all(|(a, b)| a <= b)
    }

    /// Whether a chain edge with direction `dir`, after consuming `c` and the
    /// conditions in `b`, can still be balanced by the ends left over.
    fn downstream_ok(&self, dir: Vec2, c: &Cons, b: u64) -> bool {
        let Some(table) = &self.downstream else { return true };
        let used_fixed = (b >> self.m.saturating_sub(1)) as usize;
        let mut idx = used_fixed;
        for (i, s) in self.strides.iter().enumerate() {
            idx += c[i] as usize * s;
        }
        table[idx].contains(&dir)
    }
}

const MAX_DOWNSTREAM: usize = 1 << 14;

/// For every consumption vector and set of used fixed ends: the sums of one
/// remaining class end plus any sub-multiset of the other remaining ends.
fn downstream_table(classes: &[Vec2], totals: &Cons, fixed: &[FixedEnd]) -> Option<(Vec<HashSet<Vec2>>, Vec<usize>)> {
    let nf = fixed.len();
    let mut size = 1usize << nf;
    let mut strides = vec![];
    for c in 0..classes.len() {
        strides.push(size);
        size = size.checked_mul(totals[c] as usize + 1)?;
        if size > MAX_DOWNSTREAM {
            return None;
        }
    }
    let mut table = vec![HashSet::new(); size];
    for (idx, slot) in table.iter_mut().enumerate() {
        let used_fixed = idx % (1 << nf);
        let mut rest = vec![];
        for (k, fe) in fixed.iter().enumerate() {
            if used_fixed & (1 << k) == 0 {
                rest.push(fe.dir);
            }
        }
        let mut remaining = vec![0usize; classes.len()];
        for c in 0..classes.len() {
            let used = (idx / strides[c]) % (totals[c] as usize + 1);
            remaining[c] = totals[c] as usize - used;
        }
        for c in 0..classes.len() {
            if remaining[c] == 0 {
                continue;
            }
            let mut sums: HashSet<Vec2> = [classes[c]].into();
            let add = |v: Vec2, sums: &mut HashSet<Vec2>| {
                let next: Vec<Vec2> = sums.iter().map(|s| vadd(*s, v)).collect();
                sums.extend(next);
            };
            for (c2, &k) in remaining.iter().enumerate() {
                let k = if c2 == c { k - 1 } else { k };
                for _ in 0..k {
                    add(classes[c2], &mut sums);
                }
            }
            for v in &rest {
                add(*v, &mut sums);
            }
            slot.extend(sums);
        }
    }
    Some((table, strides))
}

fn cons_add(a: &Cons, b: &Cons) -> Cons {
    let mut out = *a;
    for i in 0..MAX_CLASSES {
        out[i] = out[i].saturating_add(b[i]);
    }
    out
}

/// Every nonzero sum of a sub-multiset of the ends.
fn candidate_dirs(degree: &Degree) -> Vec<Vec2> {
    let mut sums: std::collections::BTreeSet<Vec2> = [[0, 0]].into();
    for v in &degree.ends {
        let next: Vec<Vec2> = sums.iter().map(|s| vadd(*s, *v)).collect();
        sums.extend(next);
    }
    sums.remove(&[0, 0]);
    sums.into_iter().collect()
}

/// A curve found by the search, with the size of its automorphism group
/// (relabelings of identical non-fixed ends that fix the curve).
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FoundCurve {
    pub curve: PlacedCurve,
    pub automorphisms: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SearchStats {
    pub rigid_flows: u64,
    pub seeded_flows: u64,
    pub closed_pieces: u64,
}

pub(crate) struct SearchOutcome {
    pub curves: Vec<FoundCurve>,
    pub degenerate: bool,
    pub stats: SearchStats,
}

struct Tables {
    arena: Vec<Flow>,
    rf: Vec<Vec<u32>>,
    /// (x, w) -> B -> seeded flow ids
    sf: Vec<HashMap<u64, Vec<u32>>>,
    /// (x, B) -> closed pieces sorted
    cp: HashMap<(u8, u64), Vec<Piece>>,
    degenerate: bool,
}

impl Tables {
    fn sf_slot(&self, p: &Problem, x: usize, w: u16) -> usize {
        x * p.dirs.len() + w as usize
    }

    fn pieces(&self, x: usize, b: u64) -> &[Piece] {
        self.cp.get(&(x as u8, b)).map_or(&[], |v| v.as_slice())
    }

    fn piece_cons(&self, p: &Piece) -> Cons {
        let mut c = self.arena[p.sf as usize].cons;
        c[p.class as usize] += 1;
        c
    }
}

fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    // all submasks including 0 and mask
    let mut sub = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & mask;
        }
        Some(cur)
    })
}

pub(crate) fn search(degree: &Degree, r: usize, s: usize, cfg: &Config, par: Parallelism) -> Result<SearchOutcome> {
    let problem = setup(degree, r, s, cfg)?;
    let p = &problem;
    let mut t = Tables {
        arena: vec![],
        rf: vec![vec![]; 1usize << p.nbits],
        sf: vec![HashMap::new(); p.m * p.dirs.len()],
        cp: HashMap::new(),
        degenerate: false,
    };
    // seeds
    for x in 0..p.m {
        for (wi, w) in p.dirs.iter().enumerate() {
            if !p.downstream_ok(*w, &[0; MAX_CLASSES], 0) {
                continue;
            }
            let id = t.arena.len() as u32;
            t.arena.push(Flow { dir: *w, geom: Geom::Ray(p.points[x]), cons: [0; MAX_CLASSES], kind: Kind::Seed });
            let slot = t.sf_slot(p, x, wi as u16);
            t.sf[slot].insert(0, vec![id]);
        }
        close_pieces(p, &mut t, x, 0);
    }
    let mut stats = SearchStats::default();
    for level in 1..=p.nbits {
        // rigid flows with keys of this size
        let keys = &p.masks_by_size[level];
        let results = map_vec(par, keys, |&k| rigid_for_key(p, &t, k));
        for (k, res) in keys.iter().zip(results) {
            let (flows, degen) = res?;
            t.degenerate |= degen;
            let base = t.arena.len() as u32;
            t.rf[*k as usize] = (base..base + flows.len() as u32).collect();
            stats.rigid_flows += flows.len() as u64;
            t.arena.extend(flows);
        }
        // seeded flows with |B| = level
        let tasks: Vec<(usize, u16)> =
            (0..p.m).flat_map(|x| (0..p.dirs.len() as u16).map(move |w| (x, w))).collect();
        let results = map_vec(par, &tasks, |&(x, w)| seeded_for(p, &t, x, w, level));
        for (&(x, w), res) in tasks.iter().zip(results) {
            let (per_b, degen) = res?;
            t.degenerate |= degen;
            let slot = t.sf_slot(p, x, w);
            for (b, flows) in per_b {
                let base = t.arena.len() as u32;
                t.sf[slot].insert(b, (base..base + flows.len() as u32).collect());
                stats.seeded_flows += flows.len() as u64;
                t.arena.extend(flows);
            }
        }
        for x in 0..p.m {
            let own = p.marking_bit(x).map_or(0, |b| 1u64 << b);
            for &b in &p.masks_by_size[level] {
                if b & own == 0 {
                    close_pieces(p, &mut t, x, b);
                }
            }
        }
    }
    stats.closed_pieces = t.cp.values().map(|v| v.len() as u64).sum();
    let assemblies = assemble_root(p, &t, par)?;
    let mut curves = Vec::with_capacity(assemblies.len());
    for a in assemblies {
        curves.push(build_curve(p, &t, &a)?);
    }
    Ok(SearchOutcome { curves, degenerate: t.degenerate, stats })
}

fn setup(degree: &Degree, r: usize, s: usize, cfg: &Config) -> Result<Problem> {
    let m = r + s;
    let mut classes: Vec<Vec2> = vec![];
    let mut class_labels: Vec<Vec<usize>> = vec![];
    for (i, v) in degree.ends.iter().enumerate() {
        if degree.is_fixed(i + 1) {
            continue;
        }
        match classes.iter().position(|c| c == v) {
            Some(c) => class_labels[c].push(i + 1),
            None => {
                classes.push(*v);
                class_labels.push(vec![i + 1]);
            }
        }
    }
    if classes.len() > MAX_CLASSES {
        return Err(Error::Unsupported(format!("more than {MAX_CLASSES} distinct non-fixed directions")));
    }
    let mut totals = [0u8; MAX_CLASSES];
    for (c, l) in class_labels.iter().enumerate() {
        totals[c] = u8::try_from(l.len()).map_err(|_| Error::Unsupported("too many parallel ends".into()))?;
    }
    let points = cfg.points.iter().map(|p| HPoint::from_rats(&p.0)).collect::<Result<Vec<_>>>()?;
    let mut fixed = vec![];
    for &label in &degree.fixed {
        let line = cfg
            .lines
            .iter()
            .find(|l| l.end == label)
            .ok_or_else(|| Error::Config(format!("no line condition for fixed end {label}")))?;
        fixed.push(FixedEnd {
            label,
            dir: degree.dir(label),
            lam: line.covector,
            num: *line.value.numer(),
            den: *line.value.denom(),
        });
    }
    let nbits = m.saturating_sub(1) + fixed.len();
    if nbits > MAX_BITS {
        return Err(Error::Unsupported(format!("more than {MAX_BITS} conditions besides the root")));
    }
    let dirs = candidate_dirs(degree);
    if dirs.len() > u16::MAX as usize {
        return Err(Error::Unsupported("too many candidate directions".into()));
    }
    let dir_index = dirs.iter().enumerate().map(|(i, d)| (*d, i as u16)).collect();
    let class_of = classes.iter().enumerate().map(|(i, d)| (*d, i as u8)).collect();
    let (downstream, strides) = match downstream_table(&classes, &totals, &fixed) {
        Some((t, s)) => (Some(t), s),
        None => (None, vec![]),
    };
    let mut masks_by_size = vec![vec![]; nbits + 1];
    for mask in 0u64..(1u64 << nbits) {
        masks_by_size[mask.count_ones() as usize].push(mask);
    }
    Ok(Problem {
        masks_by_size,
        m,
        r,
        points,
        classes,
        class_labels,
        totals,
        fixed,
        nbits,
        dirs,
        dir_index,
        class_of,
        downstream,
        strides,
    })
}

fn close_pieces(p: &Problem, t: &mut Tables, x: usize, b: u64) {
    let mut out = vec![];
    for (wi, _) in p.dirs.iter().enumerate() {
        let slot = t.sf_slot(p, x, wi as u16);
        let Some(ids) = t.sf[slot].get(&b) else { continue };
        for &id in ids {
            let f = &t.arena[id as usize];
            if let Some(&c) = p.class_of.get(&f.dir) {
                if f.cons[c as usize] < p.totals[c as usize] {
                    out.push(Piece { sf: id, class: c, w: wi as u16 });
                }
            }
        }
    }
    if !out.is_empty() {
        out.sort();
        t.cp.insert((x as u8, b), out);
    }
}

fn rigid_for_key(p: &Problem, t: &Tables, key: u64) -> Result<(Vec<Flow>, bool)> {
    let mut out = vec![];
    let mut degen = false;
    if key.count_ones() == 1 {
        for (k, fe) in p.fixed.iter().enumerate() {
            if key == 1u64 << p.fixed_bit(k) {
                out.push(Flow {
                    dir: vneg(fe.dir),
                    geom: Geom::Line { lam: fe.lam, num: fe.num, den: fe.den },
                    cons: [0; MAX_CLASSES],
                    kind: Kind::Line(k as u16),
                });
            }
        }
    }
    // merges; the first part holds the lowest bit
    let low = key & key.wrapping_neg();
    let rest = key ^ low;
    for sub in submasks(rest) {
        let k1 = sub | low;
        let k2 = key ^ k1;
        if k2 == 0 {
            continue;
        }
        for &a in &t.rf[k1 as usize] {
            let fa = &t.arena[a as usize];
            for &b in &t.rf[k2 as usize] {
                let fb = &t.arena[b as usize];
                let cons = cons_add(&fa.cons, &fb.cons);
                if !p.fits(&cons) {
                    continue;
                }
                let dir = vadd(fa.dir, fb.dir);
                if det(fa.dir, fb.dir) == 0 {
                    if let Meet::Degenerate = meet(&fa.geom, fa.dir, &fb.geom, fb.dir)? {
                        degen = true;
                    }
                    continue;
                }
                match meet(&fa.geom, fa.dir, &fb.geom, fb.dir)? {
                    Meet::At(x) => out.push(Flow { dir, geom: Geom::Ray(x), cons, kind: Kind::Merge(a, b) }),
                    Meet::Degenerate => degen = true,
                    Meet::Miss => {}
                }
            }
        }
    }
    // emissions from a non-root marking in the key
    for x in 1..p.m {
        let bit = 1u64 << p.marking_bit(x).expect("non-root");
        if key & bit == 0 {
            continue;
        }
        let b = key ^ bit;
        let start = Geom::Ray(p.points[x]);
        if x < p.r {
            for piece in t.pieces(x, b) {
                let cons = t.piece_cons(piece);
                let dir = vneg(p.dirs[piece.w as usize]);
                out.push(Flow { dir, geom: start, cons, kind: Kind::EmitReal { x: x as u8, piece: *piece } });
            }
        } else {
            for b2 in submasks(b) {
                let b3 = b ^ b2;
                for pa in t.pieces(x, b2) {
                    let ca = t.piece_cons(pa);
                    for pb in t.pieces(x, b3) {
                        if pb < pa {
                            continue;
                        }
                        let cons = cons_add(&ca, &t.piece_cons(pb));
                        if !p.fits(&cons) {
                            continue;
                        }
                        let dir = vneg(vadd(p.dirs[pa.w as usize], p.dirs[pb.w as usize]));
                        if dir == [0, 0] {
                            continue;
                        }
                        out.push(Flow {
                            dir,
                            geom: start,
                            cons,
                            kind: Kind::EmitComplex { x: x as u8, a: *pa, b: *pb },
                        });
                    }
                }
            }
        }
    }
    Ok((out, degen))
}

type SeededLevel = (Vec<(u64, Vec<Flow>)>, bool);

fn seeded_for(p: &Problem, t: &Tables, x: usize, w: u16, level: usize) -> Result<SeededLevel> {
    let slot = t.sf_slot(p, x, w);
    let own = p.marking_bit(x).map_or(0, |b| 1u64 << b);
    let mut out: Vec<(u64, Vec<Flow>)> = vec![];
    let mut degen = false;
    let table = &t.sf[slot];
    if table.is_empty() {
        return Ok((out, false));
    }
    for &b in &p.masks_by_size[level] {
        if b & own != 0 {
            continue;
        }
        let mut flows = vec![];
        for b1 in submasks(b) {
            if b1 == b {
                continue;
            }
            let Some(prevs) = table.get(&b1) else { continue };
            let k = b ^ b1;
            let rfs = &t.rf[k as usize];
            if rfs.is_empty() {
                continue;
            }
            for &a in prevs {
                let fa = &t.arena[a as usize];
                for &rid in rfs {
                    let fr = &t.arena[rid as usize];
                    let cons = cons_add(&fa.cons, &fr.cons);
                    if !p.fits(&cons) {
                        continue;
                    }
                    let dir = vadd(fa.dir, fr.dir);
                    if dir != [0, 0] && !p.downstream_ok(dir, &cons, b) {
                        continue;
                    }
                    if dir == [0, 0] || det(fa.dir, fr.dir) == 0 {
                        if let Meet::Degenerate = meet(&fa.geom, fa.dir, &fr.geom, fr.dir)? {
                            degen = true;
                        }
                        continue;
                    }
                    match meet(&fa.geom, fa.dir, &fr.geom, fr.dir)? {
                        Meet::At(pt) => flows.push(Flow { dir, geom: Geom::Ray(pt), cons, kind: Kind::Chain { prev: a, rf: rid } }),
                        Meet::Degenerate => degen = true,
                        Meet::Miss => {}
                    }
                }
            }
        }
        if !flows.is_empty() {
            out.push((b, flows));
        }
    }
    Ok((out, degen))
}

#[derive(Clone, Debug)]
enum Assembly {
    Real(Piece, Piece),
    Complex(Piece, Piece, Piece),
    NoMarking(u32),
}

fn assemble_root(p: &Problem, t: &Tables, par: Parallelism) -> Result<Vec<Assembly>> {
    let all = p.all_mask();
    let totals = p.totals;
    if p.m == 0 {
        let mut out = vec![];
        for &id in &t.rf[all as usize] {
            let f = &t.arena[id as usize];
            if let Some(&c) = p.class_of.get(&f.dir) {
                let mut cons = f.cons;
                cons[c as usize] += 1;
                if cons == totals {
                    out.push(Assembly::NoMarking(id));
                }
            }
        }
        return Ok(out);
    }
    let masks: Vec<u64> = submasks(all).collect::<Vec<_>>().into_iter().rev().collect();
    let complex_root = p.r == 0;
    let parts = map_vec(par, &masks, |&b1| {
        let mut out = vec![];
        let rest = all ^ b1;
        if !complex_root {
            for pa in t.pieces(0, b1) {
                let wa = p.dirs[pa.w as usize];
                if wa <= vneg(wa) {
                    continue;
                }
                let ca = t.piece_cons(pa);
                for pb in t.pieces(0, rest) {
                    if p.dirs[pb.w as usize] != vneg(wa) {
                        continue;
                    }
                    if cons_add(&ca, &t.piece_cons(pb)) == totals {
                        out.push(Assembly::Real(*pa, *pb));
                    }
                }
            }
        } else {
            for b2 in submasks(rest) {
                let b3 = rest ^ b2;
                for pa in t.pieces(0, b1) {
                    let ca = t.piece_cons(pa);
                    let wa = p.dirs[pa.w as usize];
                    for pb in t.pieces(0, b2) {
                        if pb < pa {
                            continue;
                        }
                        let cab = cons_add(&ca, &t.piece_cons(pb));
                        if !p.fits(&cab) {
                            continue;
                        }
                        let need = vneg(vadd(wa, p.dirs[pb.w as usize]));
                        let Some(&wi) = p.dir_index.get(&need) else { continue };
                        for pc in t.pieces(0, b3) {
                            if pc.w != wi || pc < pb {
                                continue;
                            }
                            if cons_add(&cab, &t.piece_cons(pc)) == totals {
                                out.push(Assembly::Complex(*pa, *pb, *pc));
                            }
                        }
                    }
                }
            }
        }
        out
    });
    Ok(parts.into_iter().flatten().collect())
}

enum Attach {
    Vertex(usize),
    Fixed(usize),
}

struct Builder<'a> {
    p: &'a Problem,
    t: &'a Tables,
    comb: CombType,
    pos: Vec<HPoint>,
    pools: Vec<Vec<usize>>,
    mark_vertex: Vec<Option<usize>>,
    automorphisms: u64,
}

impl Builder<'_> {
    fn vertex(&mut self, at: HPoint) -> usize {
        self.pos.push(at);
        self.comb.add_vertex()
    }

    fn marking(&mut self, x: usize) -> usize {
        let v = self.vertex(self.p.points[x]);
        let kind = if x < self.p.r { MarkKind::Real } else { MarkKind::Complex };
        self.comb.markings.push(MarkRec { vertex: v, label: x + 1, kind });
        self.mark_vertex[x] = Some(v);
        v
    }

    fn start(&self, id: u32) -> HPoint {
        match self.t.arena[id as usize].geom {
            Geom::Ray(p) => p,
            Geom::Line { .. } => unreachable!("lines have no start"),
        }
    }

    fn rigid(&mut self, id: u32) -> Attach {
        let f = &self.t.arena[id as usize];
        match f.kind {
            Kind::Line(k) => Attach::Fixed(k as usize),
            Kind::Merge(a, b) => {
                let v = self.vertex(self.start(id));
                self.attach(a, v);
                self.attach(b, v);
                Attach::Vertex(v)
            }
            Kind::EmitReal { x, piece } => {
                let v = self.marking(x as usize);
                self.piece(piece, v);
                Attach::Vertex(v)
            }
            Kind::EmitComplex { x, a, b } => {
                let v = self.marking(x as usize);
                self.piece(a, v);
                self.piece(b, v);
                if a == b {
                    self.automorphisms *= 2;
                }
                Attach::Vertex(v)
            }
            Kind::Seed | Kind::Chain { .. } => unreachable!("seeded flow used as rigid"),
        }
    }

    fn attach(&mut self, child: u32, v: usize) {
        let dir = self.t.arena[child as usize].dir;
        match self.rigid(child) {
            Attach::Vertex(u) => self.comb.edges.push(Edge { from: u, to: v, dir }),
            Attach::Fixed(k) => {
                let fe = &self.p.fixed[k];
                self.comb.ends.push(EndRec { vertex: v, label: fe.label, dir: fe.dir });
            }
        }
    }

    fn piece(&mut self, piece: Piece, root: usize) {
        let last = self.chain(piece.sf, root);
        let label = self.pools[piece.class as usize].remove(0);
        self.comb.ends.push(EndRec { vertex: last, label, dir: self.p.classes[piece.class as usize] });
    }

    fn chain(&mut self, id: u32, root: usize) -> usize {
        match self.t.arena[id as usize].kind {
            Kind::Seed => root,
            Kind::Chain { prev, rf } => {
                let u = self.chain(prev, root);
                let v = self.vertex(self.start(id));
                let dir = self.t.arena[prev as usize].dir;
                self.comb.edges.push(Edge { from: u, to: v, dir });
                self.attach(rf, v);
                v
            }
            _ => unreachable!("rigid flow used as seeded"),
        }
    }
}

fn build_curve(p: &Problem, t: &Tables, a: &Assembly) -> Result<FoundCurve> {
    let mut b = Builder {
        p,
        t,
        comb: CombType::new(0),
        pos: vec![],
        pools: p.class_labels.clone(),
        mark_vertex: vec![None; p.m],
        automorphisms: 1,
    };
    match a {
        Assembly::Real(x, y) => {
            let v = b.marking(0);
            b.piece(*x, v);
            b.piece(*y, v);
        }
        Assembly::Complex(x, y, z) => {
            let v = b.marking(0);
            for q in [x, y, z] {
                b.piece(*q, v);
            }
            if x == y || y == z {
                b.automorphisms *= 2;
            }
        }
        Assembly::NoMarking(id) => {
            let f = &t.arena[*id as usize];
            let Attach::Vertex(v) = b.rigid(*id) else {
                return Err(Error::InvalidType("a single fixed end cannot form a curve".into()));
            };
            let c = p.class_of[&f.dir];
            let label = b.pools[c as usize].remove(0);
            b.comb.ends.push(EndRec { vertex: v, label, dir: f.dir });
        }
    }
    b.comb.markings.sort_by_key(|m| m.label);
    b.comb.ends.sort_by_key(|e| e.label);
    let pos: Vec<[Rat; 2]> = b.pos.iter().map(|h| h.to_rats()).collect();
    let mut lengths = Vec::with_capacity(b.comb.edges.len());
    for e in &b.comb.edges {
        let l = length_along(pos[e.from], pos[e.to], e.dir)?
            .ok_or_else(|| Error::InvalidType("edge endpoints not aligned with its direction".into()))?;
        lengths.push(l);
    }
    let n_edges = b.comb.edges.len();
    b.comb.orientation = Some(vec![true; n_edges]);
    Ok(FoundCurve { curve: PlacedCurve { comb: b.comb, anchor: pos[0], lengths }, automorphisms: b.automorphisms })
}
