mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use wiretap_bounds::numerics::{
    bisect_monotone, ln_q_func, log_add_exp, log_binom_pmf, log_binom_pmf_all, logsumexp, q_func,
    q_inv, BracketedRoot,
};

#[test]
fn q_inv_roundtrips_across_the_unit_interval() {
    let mut rng = common::rng(41);
    let mut ps: Vec<f64> = (0..5000)
        .map(|_| 10f64.powf(rng.random_range(-9.0..0.0)))
        .collect();
    ps.extend((0..5000).map(|_| rng.random_range(1e-9..1.0 - 1e-9)));
    ps.extend([1e-9, 1.0 - 1e-9, 0.5, 0.1, 0.9]);
    for p in ps.into_iter().filter(|p| *p >= 1e-9 && *p <= 1.0 - 1e-9) {
        let x = q_inv(p).unwrap();
        let back = q_func(x);
        assert!(
            (back - p).abs() <= 1e-9 * p.min(1.0 - p).max(1e-7),
            "p {p}: {back}"
        );
        // Below one half the error is also small relative to p.
        if p <= 0.5 {
            assert!(((back - p) / p).abs() <= 1e-12, "p {p}: {back}");
        }
    }
}

#[test]
fn q_func_is_strictly_decreasing() {
    let mut rng = common::rng(42);
    for _ in 0..10_000 {
        let a = rng.random_range(-8.0..8.0f64);
        let b = a + rng.random_range(1e-6..4.0);
        assert!(q_func(a) > q_func(b), "{a} {b}");
        assert!(ln_q_func(a) > ln_q_func(b), "{a} {b}");
    }
}

#[test]
fn q_func_reflection() {
    for i in 0..=1600 {
        let x = -8.0 + i as f64 * 0.01;
        assert!((q_func(x) + q_func(-x) - 1.0).abs() <= 1e-15, "{x}");
    }
}

#[test]
fn ln_q_func_is_continuous_at_the_asymptotic_switch() {
    let below = ln_q_func(30.0 - 1e-9);
    let above = ln_q_func(30.0);
    assert!((below - above).abs() <= 1e-6, "{below} vs {above}");
}

#[test]
fn binomial_masses_sum_to_one() {
    for p in [0.01, 0.11, 0.5, 0.9] {
        for n in 0..=200u64 {
            let all = log_binom_pmf_all(n, p).unwrap();
            assert_eq!(all.len() as u64, n + 1);
            let total = logsumexp(&all).unwrap();
            assert!(total.abs() <= 1e-12, "p {p}, n {n}: ln Σ = {total}");
            for (k, &v) in all.iter().enumerate() {
                let one = log_binom_pmf(n, k as u64, p).unwrap().ln();
                assert!(
                    (one - v).abs() <= 1e-10 * v.abs().max(1.0),
                    "p {p}, n {n}, k {k}"
                );
            }
        }
    }
}

#[test]
fn binomial_masses_match_exact_rationals() {
    let p = BigRational::new(BigInt::from(11), BigInt::from(100));
    let q = BigRational::one() - &p;
    let n = 60u64;
    let all = log_binom_pmf_all(n, 0.11).unwrap();
    let mut c = BigInt::one();
    for k in 0..=n {
        let exact = BigRational::from_integer(c.clone())
            * num_traits::pow(p.clone(), k as usize)
            * num_traits::pow(q.clone(), (n - k) as usize);
        let want = exact.to_f64().unwrap().ln();
        assert!(
            (all[k as usize] - want).abs() <= 1e-12 * want.abs().max(1.0),
            "k {k}"
        );
        c = c * (n - k) / (k + 1);
    }
}

#[test]
fn bisection_inverts_a_monotone_map() {
    let mut rng = common::rng(43);
    for _ in 0..200 {
        let target = rng.random_range(1e-6..1.0 - 1e-6);
        let x = bisect_monotone(
            q_func,
            target,
            BracketedRoot::with_tol(-10.0, 10.0, 1e-12).unwrap(),
        )
        .unwrap();
        assert!((x - q_inv(target).unwrap()).abs() <= 1e-8);
    }
}

proptest! {
    #[test]
    fn logsumexp_ignores_order(mut v in prop::collection::vec(-700.0..700.0f64, 1..40), seed in any::<u64>()) {
        let a = logsumexp(&v).unwrap();
        v.shuffle(&mut common::rng(seed));
        let b = logsumexp(&v).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a >= v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }

    #[test]
    fn logsumexp_agrees_with_pairwise_sums(v in prop::collection::vec(-50.0..50.0f64, 1..20)) {
        let folded = v[1..].iter().fold(v[0], |acc, &x| log_add_exp(acc, x));
        let direct = logsumexp(&v).unwrap();
        prop_assert!((folded - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn q_inv_is_decreasing(a in 1e-9..0.999f64, b in 1e-9..0.999f64) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(q_inv(lo).unwrap() > q_inv(hi).unwrap());
    }
}
