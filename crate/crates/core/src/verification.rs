//! Local wall-crossing identities, the invariance harness, classical oracles
//! and per-curve property checks.

use crate::curve::{curve_class_predicates, det, natural_orient, Degree, Vec2};
use crate::enumeration::{random_config, Config, EnumOptions, EnumerationReport};
use crate::error::{Error, Result};
use crate::invariants::{
    broccoli_index, broccolize, cleared_mult, is_old_formal, parity_ledger, mikhalkin_mult, real_mult_of,
    refined_mult_y, result_from, InvariantKind,
};
use crate::laurent::{bracket_minus, eval_y, plus_divisibility_order, QFraction, QLaurent, YLaurent};
use crate::parallel::{map_vec, Parallelism};
use crate::rational::big;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn minus(a: i64) -> QFraction {
    QFraction::from_laurent(bracket_minus(a))
}

fn plus(a: i64) -> QFraction {
    let num = QLaurent::from_int_terms(&[(a, 1), (-a, 1)]);
    QFraction::new(num, crate::laurent::q_plus()).expect("nonzero denominator")
}

fn balanced(vs: &[Vec2]) -> bool {
    vs.iter().fold([0i64, 0], |a, v| [a[0] + v[0], a[1] + v[1]]) == [0, 0]
}

fn dets(v: &[Vec2]) -> impl Fn(usize, usize) -> i64 + '_ {
    move |i, j| det(v[i - 1], v[j - 1])
}

/// `[A12]_- + [A13]_-`.
pub fn relation_a(v: [Vec2; 3]) -> Result<QFraction> {
    if !balanced(&v) {
        return Err(Error::Precondition("vectors must sum to zero".into()));
    }
    let a = dets(&v);
    if a(1, 2) == 0 || a(1, 3) == 0 {
        return Err(Error::Degenerate("a determinant vanishes".into()));
    }
    Ok(minus(a(1, 2)).add(&minus(a(1, 3))))
}

fn four(v: &[Vec2; 4], mixed: bool) -> Result<QFraction> {
    if !balanced(v) {
        return Err(Error::Precondition("vectors must sum to zero".into()));
    }
    let a = dets(v);
    let pairs = [(1, 2), (3, 4), (2, 3), (1, 4), (1, 3), (4, 2)];
    if pairs.iter().any(|&(i, j)| a(i, j) == 0) {
        return Err(Error::Degenerate("a determinant vanishes".into()));
    }
    let w = |x: i64| if mixed { plus(x) } else { minus(x) };
    let t1 = minus(a(1, 2)).mul(&w(a(3, 4)));
    let t2 = w(a(2, 3)).mul(&minus(a(1, 4)));
    let t3 = minus(a(1, 3)).mul(&w(a(4, 2)));
    Ok(t1.add(&t2).add(&t3))
}

/// `[A12]_-[A34]_- + [A23]_-[A14]_- + [A13]_-[A42]_-`.
pub fn relation_b(v: [Vec2; 4]) -> Result<QFraction> {
    four(&v, false)
}

/// `[A12]_-[A34]_+ + [A23]_+[A14]_- + [A13]_-[A42]_+`.
pub fn relation_c(v: [Vec2; 4]) -> Result<QFraction> {
    four(&v, true)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub samples: u64,
    pub checked: u64,
    pub skipped_degenerate: u64,
    pub violations: Vec<String>,
}

impl RelationReport {
    fn merge(&mut self, o: RelationReport) {
        self.samples += o.samples;
        self.checked += o.checked;
        self.skipped_degenerate += o.skipped_degenerate;
        self.violations.extend(o.violations);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationsSummary {
    pub a: RelationReport,
    pub b: RelationReport,
    pub c: RelationReport,
}

impl RelationsSummary {
    pub fn violations(&self) -> usize {
        self.a.violations.len() + self.b.violations.len() + self.c.violations.len()
    }

    pub fn skipped(&self) -> u64 {
        self.a.skipped_degenerate + self.b.skipped_degenerate + self.c.skipped_degenerate
    }
}

fn random_balanced<const N: usize>(rng: &mut ChaCha8Rng, max: i64) -> Option<[Vec2; N]> {
    let mut v = [[0i64; 2]; N];
    for x in v.iter_mut().take(N - 1) {
        *x = [rng.gen_range(-max..=max), rng.gen_range(-max..=max)];
    }
    let s = v[..N - 1].iter().fold([0i64, 0], |a, x| [a[0] + x[0], a[1] + x[1]]);
    v[N - 1] = [-s[0], -s[1]];
    v[N - 1].iter().all(|c| c.abs() <= max).then_some(v)
}

fn check_one(res: Result<QFraction>, what: String, rep: &mut RelationReport) {
    rep.samples += 1;
    match res {
        Ok(f) if f.is_zero() => rep.checked += 1,
        Ok(f) => {
            rep.checked += 1;
            rep.violations.push(format!("{what} gives {f}"));
        }
        Err(_) => rep.skipped_degenerate += 1,
    }
}

/// Runs `samples` balanced tuples per relation with entries in `[-max, max]`.
/// Sample `i` uses its own stream, so the result does not depend on scheduling.
pub fn fuzz_relations(samples: u64, max_entry: i64, seed: u64, par: Parallelism) -> RelationsSummary {
    let idx: Vec<u64> = (0..samples).collect();
    let parts = map_vec(par, &idx, |&i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let mut out = RelationsSummary::default();
        let v3 = loop {
            if let Some(v) = random_balanced::<3>(&mut rng, max_entry) {
                break v;
            }
        };
        check_one(relation_a(v3), format!("A{v3:?}"), &mut out.a);
        let v4 = loop {
            if let Some(v) = random_balanced::<4>(&mut rng, max_entry) {
                break v;
            }
        };
        check_one(relation_b(v4), format!("B{v4:?}"), &mut out.b);
        check_one(relation_c(v4), format!("C{v4:?}"), &mut out.c);
        out
    });
    let mut total = RelationsSummary::default();
    for p in parts {
        total.a.merge(p.a);
        total.b.merge(p.b);
        total.c.merge(p.c);
    }
    total
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Numbers of rational plane curves of degree `1..=d` through `3d-1` points.
pub fn kontsevich_numbers(d: u64) -> Vec<BigInt> {
    let mut n: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for e in 2..=d {
        let mut s = BigInt::zero();
        for d1 in 1..e {
            let d2 = e - d1;
            let a = BigInt::from(d1 * d1 * d2 * d2) * binomial(3 * e - 4, 3 * d1 - 2);
            let b = BigInt::from(d1 * d1 * d1 * d2) * binomial(3 * e - 4, 3 * d1 - 1);
            s += &n[d1 as usize] * &n[d2 as usize] * (a - b);
        }
        n.push(s);
    }
    n.into_iter().skip(1).take(d as usize).collect()
}

pub fn kontsevich_n(d: u64) -> Result<BigInt> {
    if d == 0 {
        return Err(Error::Precondition("degree must be positive".into()));
    }
    Ok(kontsevich_numbers(d).pop().expect("d >= 1"))
}

/// `Σ mult_R / |G|` over the curves of an `s = 0` enumeration.
pub fn welschinger_total(degree: &Degree, cfg: &Config, report: &EnumerationReport) -> Result<BigRational> {
    if cfg.s != 0 {
        return Err(Error::Precondition("Welschinger totals need s = 0".into()));
    }
    cfg.validate(degree)?;
    let mut sum = BigRational::zero();
    for c in &report.curves {
        let m = real_mult_of(mikhalkin_mult(&c.curve.comb));
        sum += BigRational::new(BigInt::from(m), BigInt::from(c.automorphisms));
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedValue {
    pub seed: u64,
    pub config: Config,
    pub value: YLaurent,
    pub orbits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub degree: Degree,
    pub r: usize,
    pub s: usize,
    pub runs: Vec<SeedValue>,
    pub common: Option<YLaurent>,
    /// first pair of seeds whose values differ
    pub mismatch: Option<(u64, u64)>,
}

/// The refined broccoli invariant for each seed, compared exactly.
pub fn invariance_harness(degree: &Degree, r: usize, s: usize, seeds: &[u64], opts: &EnumOptions) -> Result<InvarianceReport> {
    if seeds.len() < 2 {
        return Err(Error::Precondition("need at least two seeds".into()));
    }
    let mut runs = vec![];
    for &seed in seeds {
        let (config, report) = random_config(degree, r, s, seed, opts)?;
        let res = result_from(InvariantKind::RefinedBroccoli, degree, r, s, vec![seed], &report, opts.parallelism)?;
        runs.push(SeedValue { seed, config, value: res.value, orbits: report.curves.len() });
    }
    let mismatch = runs.iter().skip(1).find(|x| x.value != runs[0].value).map(|x| (runs[0].seed, x.seed));
    let common = mismatch.is_none().then(|| runs[0].value.clone());
    Ok(InvarianceReport { degree: degree.clone(), r, s, runs, common, mismatch })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub curves: u64,
    pub old: u64,
    pub surgeries: u64,
    pub failures: Vec<String>,
}

impl PropertyReport {
    pub fn merge(&mut self, o: PropertyReport) {
        self.curves += o.curves;
        self.old += o.old;
        self.surgeries += o.surgeries;
        self.failures.extend(o.failures);
    }
}

/// Checks every curve of `report`: symmetry and Laurent-ness of `m_C`, the
/// old-broccoli dichotomy with the divisibility order, the parity ledger,
/// broccolization, the broccoli/descendant bijection and orientation.
pub fn check_properties(degree: &Degree, report: &EnumerationReport) -> PropertyReport {
    let mut out = PropertyReport::default();
    for (k, c) in report.curves.iter().enumerate() {
        out.curves += 1;
        let comb = &c.curve.comb;
        let mut fail = |msg: String| out.failures.push(format!("curve {k}: {msg}"));
        if let Err(e) = natural_orient(comb, degree) {
            fail(format!("orientation: {e}"));
            continue;
        }
        let flags = curve_class_predicates(comb, degree);
        if !flags.is_refined_broccoli || flags.is_refined_broccoli != flags.is_descendant {
            fail(format!("flags {flags:?}"));
        }
        let m = match refined_mult_y(comb, degree) {
            Ok(m) => m,
            Err(e) => {
                fail(format!("multiplicity: {e}"));
                continue;
            }
        };
        if !m.is_symmetric() {
            fail(format!("{m} is not symmetric"));
        }
        let cleared = match cleared_mult(comb, degree) {
            Ok(p) if p.has_integer_coeffs() => p,
            other => {
                fail(format!("cleared multiplicity {other:?} is not integral"));
                continue;
            }
        };
        let ib = broccoli_index(comb, degree);
        let at_minus1 = eval_y(&m, &big(-1)).expect("Laurent");
        let old = flags.is_old_broccoli;
        if old != (ib == 0) || (ib == 0) != !at_minus1.is_zero() {
            fail(format!("dichotomy: old {old}, i_B {ib}, m(-1) {at_minus1}"));
        }
        let order = plus_divisibility_order(&cleared).unwrap_or(0) as i64;
        if order != ib.max(0) || ib < 0 || ib % 2 != 0 {
            fail(format!("i_B {ib} but divisibility order {order}"));
        }
        if old {
            out.old += 1;
            match parity_ledger(comb, degree) {
                Ok((l, r)) if l == r => {}
                other => fail(format!("parity ledger {other:?}")),
            }
        }
        match broccolize(comb, degree) {
            Ok(b) => {
                let n = b.surgeries.len() as i64;
                out.surgeries += n as u64;
                let f = &b.curve;
                let ib2 = broccoli_index(&f.comb, &f.degree);
                if old && n != 0 {
                    fail("surgery on an old curve".into());
                }
                if ib2 != ib - 2 * n || ib2 != 0 || !is_old_formal(f) {
                    fail(format!("broccolization left i_B {ib2} after {n} surgeries from {ib}"));
                }
                match cleared_mult(&f.comb, &f.degree).and_then(|p| plus_divisibility_order(&p)) {
                    Ok(o2) if o2 as i64 == order - 2 * n => {}
                    other => fail(format!("divisibility after surgery {other:?}, before {order}")),
                }
            }
            Err(e) => fail(format!("broccolize: {e}")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_examples() {
        assert!(relation_a([[1, 0], [0, 1], [-1, -1]]).unwrap().is_zero());
        assert!(relation_a([[3, 1], [-1, 2], [-2, -3]]).unwrap().is_zero());
        assert!(relation_a([[1, 0], [2, 0], [-3, 0]]).is_err());
        assert!(relation_a([[1, 0], [0, 1], [1, 1]]).is_err());
        assert!(relation_b([[1, 0], [0, 1], [-2, 1], [1, -2]]).unwrap().is_zero());
        assert!(relation_c([[1, 0], [0, 1], [-2, 1], [1, -2]]).unwrap().is_zero());
        assert!(relation_c([[2, 1], [-1, 3], [-3, -1], [2, -3]]).unwrap().is_zero());
    }

    #[test]
    fn kontsevich_small() {
        let n: Vec<i64> = kontsevich_numbers(5).iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(n, vec![1, 1, 12, 620, 87304]);
    }

    #[test]
    fn fuzz_is_deterministic() {
        let a = fuzz_relations(50, 10, 3, Parallelism::Sequential);
        let b = fuzz_relations(50, 10, 3, Parallelism::Parallel);
        assert_eq!(a, b);
        assert_eq!(a.violations(), 0);
        assert_eq!(a.a.samples, 50);
    }
}
