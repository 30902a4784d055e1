use proptest::prelude::*;
use tropical_refined::curve::{det, Degree, Vec2};
use tropical_refined::enumeration::{enumerate_through, sample_config, Config, EnumOptions};
use tropical_refined::invariants::{invariant_seeded, InvariantKind};
use tropical_refined::laurent::{bracket_minus, QFraction, QLaurent, YLaurent};
use tropical_refined::parallel::Parallelism;
use tropical_refined::verification::{relation_a, relation_b, relation_c};
use tropical_refined::Error;

fn vec2(max: i64) -> impl Strategy<Value = Vec2> {
    (-max..=max, -max..=max).prop_map(|(a, b)| [a, b])
}

fn laurent() -> impl Strategy<Value = QLaurent> {
    prop::collection::vec((-6i64..=6, -9i64..=9), 0..6).prop_map(|t| QLaurent::from_int_terms(&t))
}

fn balanced<const N: usize>() -> impl Strategy<Value = [Vec2; N]> {
    prop::collection::vec(vec2(10), N - 1).prop_map(|v| {
        let mut out = [[0, 0]; N];
        out[..N - 1].copy_from_slice(&v);
        let s = v.iter().fold([0, 0], |a, x| [a[0] + x[0], a[1] + x[1]]);
        out[N - 1] = [-s[0], -s[1]];
        out
    })
}

fn vanishes(res: Result<QFraction, Error>) -> bool {
    match res {
        Ok(f) => f.is_zero(),
        Err(Error::Degenerate(_)) => true,
        Err(_) => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn relations_vanish(v3 in balanced::<3>(), v4 in balanced::<4>()) {
        prop_assert!(vanishes(relation_a(v3)));
        prop_assert!(vanishes(relation_b(v4)));
        prop_assert!(vanishes(relation_c(v4)));
    }

    #[test]
    fn relation_a_skips_only_collinear(v in balanced::<3>()) {
        let degenerate = matches!(relation_a(v), Err(Error::Degenerate(_)));
        let collinear = det(v[0], v[1]) == 0 || det(v[1], v[2]) == 0 || det(v[0], v[2]) == 0;
        prop_assert_eq!(degenerate, collinear);
    }

    #[test]
    fn bracket_addition(a in -40i64..40, b in -40i64..40) {
        let lhs = bracket_minus(a + b);
        let rhs = &(&QLaurent::q_pow(b) * &bracket_minus(a)) + &(&QLaurent::q_pow(-a) * &bracket_minus(b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ring_laws(p in laurent(), q in laurent(), r in laurent()) {
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        let prod = &p * &q;
        if !q.is_zero() {
            prop_assert_eq!(prod.div_exact(&q), Some(p.clone()));
        }
    }

    #[test]
    fn fraction_cross_multiplication(p in laurent(), q in laurent(), k in 1i64..5) {
        prop_assume!(!q.is_zero());
        let f = QFraction::new(p.clone(), q.clone()).unwrap();
        let scaled = QFraction::new(&p * &QLaurent::q_pow(k), &q * &QLaurent::q_pow(k)).unwrap();
        prop_assert_eq!(&f, &scaled);
        prop_assert!(f.sub(&scaled).is_zero());
    }

    #[test]
    fn y_laurent_json_round_trip(t in prop::collection::vec((-5i64..=5, -20i64..=20), 0..6)) {
        let p = YLaurent::from_int_terms(&t);
        let s = serde_json::to_string(&p).unwrap();
        let back: YLaurent = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn config_sampling_is_deterministic(seed in any::<u64>(), attempt in 0u64..4) {
        let d = Degree::p2(2);
        let a = sample_config(&d, 3, 1, seed, attempt, 1000, 7).unwrap();
        prop_assert_eq!(&a, &sample_config(&d, 3, 1, seed, attempt, 1000, 7).unwrap());
        let back: Config = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lines_and_conics_count_one(seed in any::<u64>(), s in 0usize..=2) {
        let opts = EnumOptions::default();
        let line = invariant_seeded(InvariantKind::RefinedBroccoli, &Degree::p2(1), 2 - 2 * s.min(1), s.min(1), seed, &opts).unwrap();
        prop_assert_eq!(line.value, YLaurent::one());
        let conic = invariant_seeded(InvariantKind::RefinedBroccoli, &Degree::p2(2), 5 - 2 * s, s, seed, &opts).unwrap();
        prop_assert_eq!(conic.value, YLaurent::one());
    }

    #[test]
    fn reports_are_reproducible(seed in any::<u64>()) {
        let d = Degree::p2(3);
        let cfg = sample_config(&d, 4, 2, seed, 0, 1_000_000_000, 1).unwrap();
        let a = enumerate_through(&d, &cfg, Parallelism::Parallel).unwrap();
        let b = enumerate_through(&d, &cfg, Parallelism::Sequential).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn placements_reproduce_the_points(seed in any::<u64>()) {
        let d = Degree::p2(3).with_fixed(&[1, 9]).unwrap();
        let cfg = sample_config(&d, 4, 1, seed, 0, 1_000_000, 1).unwrap();
        let rep = enumerate_through(&d, &cfg, Parallelism::Parallel).unwrap();
        for c in &rep.curves {
            let pos = c.curve.positions().unwrap();
            for m in &c.curve.comb.markings {
                prop_assert_eq!(pos[m.vertex], cfg.points[m.label - 1].0);
            }
            for l in &cfg.lines {
                let v = c.curve.end_line_value(l.end, l.covector).unwrap();
                prop_assert_eq!(v, l.value);
            }
            prop_assert_eq!(c.curve.comb.edges.len(), 2 * (cfg.r + cfg.s) + d.fixed.len() - 2);
        }
    }
}

