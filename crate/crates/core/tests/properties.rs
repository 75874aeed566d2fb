use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

use statchar::cf::{Budget, CfDigits, ConvergentTable, NormEngine};
use statchar::density::{density_profile, family_from_exponent, family_validate, IndexSet};
use statchar::enclosure::{parse_rational, rational, Enclosure};
use statchar::ostrowski::{decode_with, encode_with, validate, DigitPattern, OstrowskiDigits};

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

fn stream() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..=12, 240)
}

/// A valid Ostrowski prefix of length `len` for the partial quotients `a`.
fn prefix_from(a: &[u64], picks: &[u64], len: usize) -> Vec<u64> {
    let mut d: Vec<u64> = Vec::with_capacity(len);
    for k in 0..len {
        let top = if k == 0 || d[k - 1] != 0 { a[k] - 1 } else { a[k] };
        d.push(picks[k] % (top + 1));
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_alternates(a in stream()) {
        let t = ConvergentTable::with_depth(&CfDigits::explicit("t", a).unwrap(), 60).unwrap();
        for n in 0..=60isize {
            let det = t.q(n) * t.p(n - 1) - t.p(n) * t.q(n - 1);
            let want = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            prop_assert_eq!(det, want);
        }
    }

    #[test]
    fn theta_between_reciprocal_denominators(a in stream()) {
        let mut t = ConvergentTable::with_depth(&CfDigits::explicit("t", a).unwrap(), 69).unwrap();
        for n in 0..40usize {
            let th = t.theta(n, &q("1e-60"), &Budget::default()).unwrap();
            let abs = th.enclosure.abs();
            let q1 = t.q(n as isize + 1).clone();
            let q0 = t.q(n as isize).clone();
            let lo = BigRational::new(BigInt::one(), &q1 + &q0);
            let hi = BigRational::new(BigInt::one(), q1);
            prop_assert!(abs.lo() > &lo && abs.hi() < &hi, "n={}", n);
            // sign (-1)^n
            prop_assert_eq!(th.enclosure.lo().is_positive(), n % 2 == 0);
        }
    }

    #[test]
    fn cross_identity(a in stream(), k in 0usize..40, m in 0usize..40) {
        let mut t = ConvergentTable::with_depth(&CfDigits::explicit("t", a).unwrap(), 69).unwrap();
        let w = q("1e-40");
        let tk = t.theta(k, &w, &Budget::default()).unwrap().enclosure;
        let tm = t.theta(m, &w, &Budget::default()).unwrap().enclosure;
        let lhs = tm.scale(t.q(k as isize)) - tk.scale(t.q(m as isize));
        let int = t.cross_theta_integer(k, m).unwrap();
        prop_assert!(lhs.contains(&BigRational::from_integer(int)));
    }

    #[test]
    fn theta_recurrence_telescopes(a in stream()) {
        // θ_{k+1} = a_{k+1}θ_k + θ_{k-1}, so Σ_{k=1}^{K} a_{k+1}θ_k = θ_{K+1} + θ_K - θ_1 - θ_0.
        let mut t = ConvergentTable::with_depth(&CfDigits::explicit("t", a.clone()).unwrap(), 69).unwrap();
        let w = q("1e-40");
        let th: Vec<Enclosure> = (0..=41).map(|k| t.theta(k, &w, &Budget::default()).unwrap().enclosure).collect();
        let mut sum = Enclosure::zero();
        for k in 1..=40 {
            sum = sum + th[k].scale(&BigInt::from(a[k]));
        }
        let closed = th[41].clone() + th[40].clone() - th[1].clone() - th[0].clone();
        prop_assert!(sum.intersects(&closed));
    }

    #[test]
    fn decode_lands_in_the_fundamental_range(a in stream(), picks in prop::collection::vec(0u64..64, 40), len in 1usize..40) {
        let alpha = CfDigits::explicit("t", a.clone()).unwrap();
        let d = prefix_from(&a, &picks, len);
        let beta = OstrowskiDigits::finite(&alpha, d);
        prop_assert!(validate(&beta, len).unwrap().is_ok());
        let mut t = ConvergentTable::with_depth(&alpha, 69).unwrap();
        let e = decode_with(&mut t, &beta, len, &q("1e-30"), &Budget::default()).unwrap();
        let al = t.alpha_enclosure(60).unwrap();
        // -α <= β < 1 - α
        prop_assert!(e.lo() >= &-al.hi().clone());
        prop_assert!(e.hi() < &(BigRational::one() - al.lo()));
    }

    #[test]
    fn encode_inverts_decode(a in stream(), picks in prop::collection::vec(0u64..64, 40), len in 1usize..40) {
        let alpha = CfDigits::explicit("t", a.clone()).unwrap();
        let d = prefix_from(&a, &picks, len);
        let beta = OstrowskiDigits::finite(&alpha, d.clone());
        let mut t = ConvergentTable::with_depth(&alpha, 69).unwrap();
        let w = BigRational::new(BigInt::one(), t.q(len as isize + 2) * 4);
        let e = decode_with(&mut t, &beta, len, &w, &Budget::default()).unwrap();
        let back = encode_with(&mut t, &e.midpoint(), len, &Budget::default()).unwrap();
        prop_assert_eq!(back.pattern(), &DigitPattern::Finite { digits: d });
    }

    #[test]
    fn norm_engine_agrees_with_decode(a in stream(), picks in prop::collection::vec(0u64..64, 40), len in 1usize..30, n in 1usize..30) {
        let alpha = CfDigits::explicit("t", a.clone()).unwrap();
        let d = prefix_from(&a, &picks, len);
        let beta = OstrowskiDigits::finite(&alpha, d);
        let mut t = ConvergentTable::with_depth(&alpha, 69).unwrap();
        let w = q("1e-20");
        let fast = NormEngine::new(&beta, 30, Budget::default()).unwrap().norm(n, &w).unwrap();
        prop_assert!(fast.width() <= w);
        let slow_w = &w / BigRational::from_integer(t.q(n as isize).clone());
        let slow = decode_with(&mut t, &beta, len, &slow_w, &Budget::default()).unwrap();
        let slow = slow.scale(t.q(n as isize)).circle_norm();
        prop_assert!(fast.intersects(&slow));
    }

    #[test]
    fn density_profile_matches_counting(mut items in prop::collection::vec(1u64..2000, 0..300), cps in prop::collection::btree_set(1u64..2000, 1..6)) {
        items.sort_unstable();
        items.dedup();
        let set = IndexSet::explicit(items.clone());
        let cps: Vec<u64> = cps.into_iter().collect();
        let r = density_profile(&set, &cps).unwrap();
        for (p, &n) in r.checkpoints.iter().zip(&cps) {
            let naive = items.iter().filter(|&&x| x <= n).count() as u64;
            prop_assert_eq!(p.count, naive);
            prop_assert!((p.ratio - naive as f64 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn exponent_families_are_valid(num in 11i64..40, s1 in 1u64..20) {
        let f = family_from_exponent(&rational(num, 10), s1).unwrap();
        prop_assert!(family_validate(&f, 60).is_ok());
        let iv = f.intervals_upto(100_000);
        for w in iv.windows(2) {
            prop_assert_eq!(w[1].0, w[0].1 + 2);
            prop_assert!(w[1].1 - w[1].0 >= w[0].1 - w[0].0);
        }
    }
}
