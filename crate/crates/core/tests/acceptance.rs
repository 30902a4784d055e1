//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;
use tropical_refined::curve::{curve_class_predicates, Degree, OldType};
use tropical_refined::enumeration::{enumerate_through, random_config, Config, EnumOptions, EnumerationReport};
use tropical_refined::invariants::{
    aggregate, broccoli_index, cleared_mult, descendant_mult, refined_mult_y, refined_welschinger_mult, result_from,
    scheme_total, trop_descendant, InvariantKind, MultScheme,
};
use tropical_refined::laurent::{bracket_minus, bracket_plus, eval_y, q_plus, to_y, QFraction, QLaurent, YLaurent};
use tropical_refined::parallel::Parallelism;
use tropical_refined::verification::{
    check_properties, fuzz_relations, invariance_harness, kontsevich_numbers, welschinger_total, InvarianceReport,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn y(terms: &[(i64, i64)]) -> YLaurent {
    YLaurent::from_int_terms(terms)
}

fn q(terms: &[(i64, i64)]) -> QLaurent {
    QLaurent::from_int_terms(terms)
}

/// Value at `y = -1` straight from the coefficients.
fn at_minus_one(p: &YLaurent) -> BigRational {
    p.terms().fold(BigRational::zero(), |acc, (e, c)| if e % 2 == 0 { acc + c } else { acc - c })
}

fn at_one(p: &YLaurent) -> BigRational {
    p.terms().fold(BigRational::zero(), |acc, (_, c)| acc + c)
}

/// Kontsevich recursion in machine integers.
fn kontsevich_u128(d: usize) -> Vec<u128> {
    fn choose(n: u128, k: u128) -> u128 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let mut n = vec![0u128, 1];
    for e in 2..=d as u128 {
        let mut s: i128 = 0;
        for d1 in 1..e {
            let d2 = e - d1;
            let pos = d1 * d1 * d2 * d2 * choose(3 * e - 4, 3 * d1 - 2);
            let neg = d1 * d1 * d1 * d2 * choose(3 * e - 4, 3 * d1 - 1);
            s += (n[d1 as usize] * n[d2 as usize]) as i128 * (pos as i128 - neg as i128);
        }
        n.push(s as u128);
    }
    n[1..=d].to_vec()
}

/// Multiplicity of `q^2 + 1` in a Laurent polynomial, by repeated long division.
fn order_at_i(p: &QLaurent) -> u32 {
    let lo = p.min_exp().unwrap_or(0);
    let mut c: Vec<BigRational> = (lo..=p.max_exp().unwrap_or(0)).map(|e| p.coeff(e)).collect();
    let mut k = 0;
    loop {
        if c.len() < 3 {
            return k;
        }
        let mut quot = vec![BigRational::zero(); c.len() - 2];
        let mut rem = c.clone();
        for j in (2..rem.len()).rev() {
            let t = rem[j].clone();
            quot[j - 2] = t.clone();
            rem[j - 2] = &rem[j - 2] - &t;
            rem[j] = BigRational::zero();
        }
        if !(rem[0].is_zero() && rem[1].is_zero()) {
            return k;
        }
        c = quot;
        k += 1;
    }
}

struct Run {
    degree: Degree,
    r: usize,
    s: usize,
    harness: InvarianceReport,
    reports: Vec<(Config, EnumerationReport)>,
}

fn criterion_two_runs() -> Result<Vec<Run>, String> {
    let opts = EnumOptions::default();
    let cases = [(3, 8, 0), (3, 6, 1), (3, 4, 2), (3, 2, 3), (3, 0, 4), (2, 5, 0), (2, 3, 1), (2, 1, 2)];
    let mut out = vec![];
    for (d, r, s) in cases {
        let degree = Degree::p2(d);
        let harness = invariance_harness(&degree, r, s, &[1, 2, 3], &opts).map_err(|e| format!("d{d} ({r},{s}): {e}"))?;
        let mut reports = vec![];
        for run in &harness.runs {
            let rep = enumerate_through(&degree, &run.config, Parallelism::Parallel).map_err(|e| e.to_string())?;
            reports.push((run.config.clone(), rep));
        }
        out.push(Run { degree, r, s, harness, reports });
    }
    Ok(out)
}

fn c1_relations() -> Check {
    let mut checked = [0u64; 3];
    let mut skipped = 0;
    let mut secs = 0.0;
    for (seed, samples) in [(1, 1000), (2, 2000)] {
        let t = Instant::now();
        let sum = fuzz_relations(samples, 10, seed, Parallelism::Parallel);
        if seed == 1 {
            secs = t.elapsed().as_secs_f64();
        }
        ensure(sum.violations() == 0, || format!("seed {seed}: {} violations", sum.violations()))?;
        for (k, rep) in [&sum.a, &sum.b, &sum.c].into_iter().enumerate() {
            ensure(rep.samples == samples, || format!("{rep:?}"))?;
            checked[k] += rep.checked;
        }
        skipped += sum.skipped();
    }
    ensure(checked.iter().all(|&c| c >= 1000), || format!("non-degenerate samples per relation {checked:?}"))?;
    ensure(secs < 10.0, || format!("1000 samples took {secs:.1}s"))?;
    Ok(format!("A/B/C exactly zero on {checked:?} non-degenerate tuples, {skipped} skipped-degenerate, 1000 samples in {secs:.2}s"))
}

fn c2_invariance(runs: &[Run]) -> Check {
    let expected = [
        (3, 8, 0, y(&[(1, 1), (0, 10), (-1, 1)])),
        (3, 6, 1, y(&[(1, 1), (0, 8), (-1, 1)])),
        (3, 4, 2, y(&[(1, 1), (0, 6), (-1, 1)])),
        (3, 2, 3, y(&[(1, 1), (0, 4), (-1, 1)])),
        (3, 0, 4, y(&[(1, 1), (0, 2), (-1, 1)])),
        (2, 5, 0, y(&[(0, 1)])),
        (2, 3, 1, y(&[(0, 1)])),
        (2, 1, 2, y(&[(0, 1)])),
    ];
    let mut parts = vec![];
    for (run, (d, r, s, want)) in runs.iter().zip(expected) {
        let h = &run.harness;
        ensure(h.runs.len() == 3, || "fewer than 3 seeds".into())?;
        let common = h.common.as_ref().ok_or_else(|| format!("d{d} ({r},{s}): seeds {:?} disagree", h.mismatch))?;
        ensure(*common == want, || format!("d{d} ({r},{s}): {common}, snapshot {want}"))?;
        parts.push(format!("d{d}({r},{s})={common}"));
    }
    Ok(parts.join("; "))
}

struct Endpoint {
    degree: Degree,
    config: Config,
    report: EnumerationReport,
    value: YLaurent,
    secs: f64,
}

/// Degrees 1..=4 through 3d-1 generic points, seed 1.
fn endpoint_runs() -> Result<Vec<Endpoint>, String> {
    let opts = EnumOptions::default();
    let mut out = vec![];
    for d in 1..=4usize {
        let degree = Degree::p2(d);
        let t = Instant::now();
        let (config, report) = random_config(&degree, 3 * d - 1, 0, 1, &opts).map_err(|e| e.to_string())?;
        let value = result_from(InvariantKind::RefinedBroccoli, &degree, 3 * d - 1, 0, vec![1], &report, Parallelism::Parallel)
            .map_err(|e| e.to_string())?
            .value;
        out.push(Endpoint { degree, config, report, value, secs: t.elapsed().as_secs_f64() });
    }
    Ok(out)
}

fn c3_kontsevich(ends: &[Endpoint]) -> Check {
    let oracle = kontsevich_u128(5);
    let lib: Vec<u128> = kontsevich_numbers(5).iter().map(|n| n.to_u128().unwrap()).collect();
    ensure(oracle == lib && oracle == vec![1, 1, 12, 620, 87304], || format!("recursion {oracle:?} vs {lib:?}"))?;
    let mut parts = vec![];
    for (k, e) in ends.iter().enumerate() {
        let v1 = eval_y(&e.value, &big(1)).map_err(|e| e.to_string())?;
        ensure(v1 == at_one(&e.value), || "evaluation disagrees".into())?;
        ensure(v1 == big(oracle[k] as i64), || format!("d{}: y=1 gives {v1}, Kontsevich {}", k + 1, oracle[k]))?;
        ensure(e.secs < 900.0, || format!("d{} took {:.0}s", k + 1, e.secs))?;
        parts.push(format!("d{}: {} -> {v1} ({:.1}s)", k + 1, e.value, e.secs));
    }
    Ok(parts.join("; "))
}

fn c4_welschinger(ends: &[Endpoint], runs: &[Run]) -> Check {
    let classical = [1i64, 1, 8, 240];
    let mut parts = vec![];
    for (k, e) in ends.iter().enumerate() {
        let vm1 = eval_y(&e.value, &big(-1)).map_err(|e| e.to_string())?;
        ensure(vm1 == at_minus_one(&e.value), || "evaluation disagrees".into())?;
        let w = welschinger_total(&e.degree, &e.config, &e.report).map_err(|e| e.to_string())?;
        ensure(vm1 == w, || format!("d{}: y=-1 gives {vm1}, real count {w}", k + 1))?;
        ensure(w == big(classical[k]), || format!("d{}: real count {w}, classical {}", k + 1, classical[k]))?;
        parts.push(w.to_string());
    }
    // cubics with s pairs of conjugate points, summed curve by curve at y = -1
    let pairs = [8, 6, 4, 2, 0];
    for (run, w) in runs.iter().take(5).zip(pairs) {
        for (_, rep) in &run.reports {
            let mut sum = BigRational::zero();
            for c in &rep.curves {
                let m = refined_mult_y(&c.curve.comb, &run.degree).map_err(|e| e.to_string())?;
                sum += at_minus_one(&m) / big(c.automorphisms as i64);
            }
            ensure(sum == big(w), || format!("({},{}): {sum} vs {w}", run.r, run.s))?;
        }
    }
    Ok(format!("real counts {} match; cubics with s = 0..4 conjugate pairs give 8, 6, 4, 2, 0", parts.join(", ")))
}

fn c5_regression(runs: &[Run]) -> Check {
    let want = y(&[(1, 1), (0, 10), (-1, 1)]);
    let got = runs[0].harness.common.clone().ok_or("no common value")?;
    ensure(got == want, || format!("{got}"))?;
    let direct = aggregate(InvariantKind::RefinedBroccoli, &runs[0].degree, &runs[0].reports[0].1, Parallelism::Sequential)
        .map_err(|e| e.to_string())?
        .0;
    ensure(direct == want, || format!("sequential {direct}"))?;
    Ok(format!("N^rB(3,(8,0)) = {got}"))
}

fn c6_dichotomy(runs: &[Run]) -> Check {
    let (mut curves, mut old, mut surgeries) = (0, 0, 0);
    for run in runs {
        for (_, rep) in &run.reports {
            let props = check_properties(&run.degree, rep);
            ensure(props.failures.is_empty(), || props.failures.join("; "))?;
            surgeries += props.surgeries;
            for c in &rep.curves {
                let comb = &c.curve.comb;
                let flags = curve_class_predicates(comb, &run.degree);
                let ib = broccoli_index(comb, &run.degree);
                let m = refined_mult_y(comb, &run.degree).map_err(|e| e.to_string())?;
                let nonzero = !at_minus_one(&m).is_zero();
                ensure(flags.is_old_broccoli == (ib == 0) && (ib == 0) == nonzero, || {
                    format!("old {} i_B {ib} m(-1) nonzero {nonzero}", flags.is_old_broccoli)
                })?;
                if ib != 0 {
                    let cleared = cleared_mult(comb, &run.degree).map_err(|e| e.to_string())?;
                    let k = order_at_i(&cleared) as i64;
                    ensure(ib >= 2 && ib % 2 == 0 && k == ib, || format!("i_B {ib}, order {k}"))?;
                }
                curves += 1;
                old += flags.is_old_broccoli as u64;
            }
        }
    }
    ensure(curves > old, || "no curve with i_B > 0 was exercised".into())?;
    Ok(format!("{curves} curves, {old} old, {} with i_B > 0, {surgeries} broccolization steps", curves - old))
}

fn c7_bijection(runs: &[Run]) -> Check {
    let mut configs = 0;
    for run in runs {
        for (_, rep) in &run.reports {
            let keys = |pick: fn(&tropical_refined::curve::ClassFlags) -> bool| -> BTreeSet<String> {
                rep.curves
                    .iter()
                    .filter(|c| pick(&curve_class_predicates(&c.curve.comb, &run.degree)))
                    .map(|c| c.curve.comb.canonical_key(&run.degree, true))
                    .collect()
            };
            let rb = keys(|f| f.is_refined_broccoli);
            ensure(rb == keys(|f| f.is_descendant) && rb.len() == rep.curves.len(), || "curve sets differ".into())?;
            let a = aggregate(InvariantKind::RefinedBroccoli, &run.degree, rep, Parallelism::Parallel).map_err(|e| e.to_string())?;
            let b = aggregate(InvariantKind::Descendant, &run.degree, rep, Parallelism::Parallel).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("N^rB {} vs N^desc {}", a.0, b.0))?;
            configs += 1;
        }
    }
    Ok(format!("{configs} configurations: equal curve sets and N^desc = N^rB"))
}

fn c8_descendants() -> Check {
    let opts = EnumOptions::default();
    let mut parts = vec![];
    let weighted = Degree::new(vec![[-1, 0], [-1, 0], [0, -2], [1, 1], [1, 1]], [3].into()).map_err(|e| e.to_string())?;
    for (degree, r, s) in [(Degree::p2(2), 3, 1), (weighted, 1, 1)] {
        for seed in [1, 2, 3] {
            let (cfg, rep) = random_config(&degree, r, s, seed, &opts).map_err(|e| e.to_string())?;
            let star = result_from(InvariantKind::DescendantStar, &degree, r, s, vec![seed], &rep, Parallelism::Parallel)
                .map_err(|e| e.to_string())?;
            let mut tilde = BigRational::zero();
            for c in &rep.curves {
                tilde += big(descendant_mult(&c.curve.comb) as i64) / big(c.automorphisms as i64);
            }
            tilde /= big(degree.i_alpha() as i64);
            let at1 = eval_y(&star.value, &big(1)).map_err(|e| e.to_string())?;
            let i_alpha = big(degree.i_alpha() as i64);
            ensure(at1 == &i_alpha * &tilde, || format!("N*(1) = {at1}, I^a Ñ = {}", &i_alpha * &tilde))?;
            let td = trop_descendant(&degree, &[r, s], &rep, &cfg).map_err(|e| e.to_string())?;
            let choose = (1..=s as i64).fold(big(1), |acc, i| acc * big(r as i64 + i) / big(i));
            ensure(td.ordered == tilde && td.unordered == &choose * &tilde, || format!("{td:?} vs Ñ = {tilde}"))?;
            if degree == Degree::p2(2) {
                ensure(tilde.is_one(), || format!("<t0^3 t1> = {tilde}"))?;
            }
            if seed == 1 {
                parts.push(format!("I^a = {}, Ñ = {tilde}, N = {}", degree.i_alpha(), td.unordered));
            }
        }
    }
    Ok(parts.join("; "))
}

fn c9_refined_welschinger() -> Check {
    use OldType::*;
    let curve = [(T1, 0), (T1, 0), (T2, 1), (T2, 1), (T3, 2), (T5, 1), (T6b, 0), (T7, 0), (T8, 4)];
    let m = refined_welschinger_mult(&curve).map_err(|e| e.to_string())?;
    let m = to_y(&m.to_laurent().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(m == y(&[(1, 4), (-1, 4)]), || format!("example curve: {m}"))?;
    ensure(at_minus_one(&m) == big(-8), || "example curve at y=-1".into())?;

    // the two Welschinger resolutions of the local wall
    let upper = refined_welschinger_mult(&[(T5, 3)]).map_err(|e| e.to_string())?;
    let lower = refined_welschinger_mult(&[(T1, 0)]).map_err(|e| e.to_string())?;
    ensure(upper == QFraction::from_laurent(q(&[(2, 1), (0, -1), (-2, 1)])), || format!("upper {upper}"))?;
    let pair = to_y(&upper.add(&lower).to_laurent().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(pair == y(&[(1, 1), (-1, 1)]) && !pair.is_zero(), || format!("pair {pair}"))?;

    // mixing the two vertex conventions breaks invariance on conics with (r,s) = (3,1)
    let degree = Degree::p2(2);
    let opts = EnumOptions::default();
    let mut totals = vec![];
    for seed in [0, 1] {
        let (_, rep) = random_config(&degree, 3, 1, seed, &opts).map_err(|e| e.to_string())?;
        let t: Vec<QFraction> = [MultScheme::Refined, MultScheme::MixedMinus, MultScheme::MixedPlus]
            .iter()
            .map(|&sc| scheme_total(&degree, &rep, sc))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        totals.push(t);
    }
    let half_plus = QFraction::from_laurent(q(&[(1, 1), (-1, 1)]).scale(&(big(1) / big(2))));
    let two_over_plus = QFraction::new(q(&[(0, 2)]), q_plus()).map_err(|e| e.to_string())?;
    ensure(totals[0][0] == QFraction::one() && totals[1][0] == QFraction::one(), || "refined totals differ".into())?;
    ensure(totals[0][1] == QFraction::one() && totals[1][1] == half_plus, || format!("(a')+(b): {} / {}", totals[0][1], totals[1][1]))?;
    ensure(totals[0][2] == QFraction::one() && totals[1][2] == two_over_plus, || format!("(a)+(b'): {} / {}", totals[0][2], totals[1][2]))?;
    Ok(format!("example curve {m} (-8 at y=-1); resolution pair {pair} != 0; mixed schemes not invariant"))
}

fn c10_algebra() -> Check {
    let t = Instant::now();
    let naive = |a: i64| -> QLaurent {
        // (q^a - q^-a) / (q - q^-1) by explicit geometric sum
        let mut p = QLaurent::zero();
        for k in 0..a.abs() {
            p = &p + &q(&[(a.abs() - 1 - 2 * k, a.signum())]);
        }
        p
    };
    let minus = q(&[(1, 1), (-1, -1)]);
    for a in -12..=12i64 {
        let bm = bracket_minus(a);
        ensure(bm == naive(a), || format!("[{a}]-"))?;
        ensure(&bm * &minus == q(&[(a, 1), (-a, -1)]), || format!("[{a}]- times (q - 1/q)"))?;
        ensure(bm.is_symmetric() && bracket_minus(-a) == -&bm, || format!("[{a}]- symmetry"))?;
        ensure(bm.eval_q1() == big(a), || format!("[{a}]-(1)"))?;
        if a != 0 {
            let bp = bracket_plus(a).map_err(|e| e.to_string())?;
            let num = QFraction::from_laurent(q(&[(a, 1), (-a, 1)]));
            ensure(bp.mul(&QFraction::from_laurent(q_plus())) == num, || format!("[{a}]+ times (q + 1/q)"))?;
            ensure(bp == bracket_plus(-a).map_err(|e| e.to_string())?, || format!("[{a}]+ even in a"))?;
            if a % 2 != 0 {
                let p = bp.to_laurent().map_err(|e| e.to_string())?;
                ensure(p.is_symmetric() && p.has_integer_coeffs() && p.eval_q1().is_one(), || format!("[{a}]+ = {p}"))?;
            } else {
                ensure(bp.to_laurent().is_err(), || format!("[{a}]+ should not be Laurent"))?;
            }
        }
        for b in -12..=12i64 {
            let lhs = bracket_minus(a + b);
            let rhs = &(&q(&[(b, 1)]) * &bracket_minus(a)) + &(&q(&[(-a, 1)]) * &bracket_minus(b));
            ensure(lhs == rhs, || format!("[{a}+{b}]- addition"))?;
            let prod = &bracket_minus(a) * &bracket_minus(b);
            ensure(prod.is_symmetric() && prod.eval_q1() == big(a * b), || format!("[{a}]-[{b}]-"))?;
            if b > 0 {
                let dbl = &bracket_minus(b) * &q(&[(b, 1), (-b, 1)]);
                ensure(dbl == bracket_minus(2 * b), || format!("[2*{b}]-"))?;
            }
        }
    }
    // weight clearing: every cleared curve multiplicity has integer coefficients
    let mut cleared = 0;
    for ends in [
        vec![[-2, 0], [0, -2], [1, 1], [1, 1]],
        vec![[-1, 0], [-1, 0], [0, -2], [1, 1], [1, 1]],
        vec![[-2, 0], [-1, 0], [0, -3], [3, 3]],
    ] {
        let degree = Degree::new(ends, Default::default()).map_err(|e| e.to_string())?;
        let r = degree.n() - 1;
        for seed in 1..=3 {
            let (_, rep) = random_config(&degree, r, 0, seed, &EnumOptions::default()).map_err(|e| e.to_string())?;
            for c in &rep.curves {
                let p = cleared_mult(&c.curve.comb, &degree).map_err(|e| e.to_string())?;
                ensure(p.is_symmetric() && p.has_integer_coeffs(), || format!("cleared {p}"))?;
                cleared += 1;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.2}s"))?;
    Ok(format!("brackets for |a|,|b| <= 12, {cleared} weighted curves cleared to integer Laurent polynomials, {secs:.3}s"))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: &str, name: &str, f: &dyn Fn() -> Check| {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match res {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    };
    report("1", "wall-crossing relations", &c1_relations);
    let t = Instant::now();
    let runs = criterion_two_runs();
    let secs = t.elapsed().as_secs_f64();
    let runs = &runs;
    let with_runs = |f: fn(&[Run]) -> Check| {
        move || match runs {
            Ok(r) => f(r),
            Err(e) => Err(format!("enumeration failed: {e}")),
        }
    };
    report("2", &format!("invariance across seeds ({secs:.0}s)"), &with_runs(c2_invariance));
    let ends = endpoint_runs();
    let ends = &ends;
    report("3", "y=1 endpoint", &|| match ends {
        Ok(e) => c3_kontsevich(e),
        Err(e) => Err(format!("enumeration failed: {e}")),
    });
    report("4", "y=-1 endpoint", &|| match (ends, runs) {
        (Ok(e), Ok(r)) => c4_welschinger(e, r),
        (Err(e), _) | (_, Err(e)) => Err(format!("enumeration failed: {e}")),
    });
    report("5", "cubic regression", &with_runs(c5_regression));
    report("6", "old broccoli dichotomy", &with_runs(c6_dichotomy));
    report("7", "broccoli/descendant bijection", &with_runs(c7_bijection));
    report("8", "descendant specialization", &c8_descendants);
    report("9", "refined Welschinger curves", &c9_refined_welschinger);
    report("10", "algebra", &c10_algebra);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
