mod common;

use moran_spectral::exactnum::rat;
use moran_spectral::fourier::{
    mask_value, mask_value_exact, mask_zero_exact, mu_hat_truncated, mu_hat_truncated_exact,
    mu_hat_zero_exact, q_function, tail_truncated,
};
use moran_spectral::spectra::lambda_n;
use moran_spectral::{DigitTriple, MoranSystem, Rational, TriState};
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #[test]
    fn mask_is_bounded_and_one_periodic(a in -10_000i64..10_000, b in -10_000i64..10_000, xi in -3.0f64..3.0) {
        let d = DigitTriple::new(a, b);
        let m = mask_value(&d, xi);
        prop_assert!(m.norm() <= 1.0 + 1e-15);
        prop_assert!((mask_value(&d, xi + 1.0) - m).norm() < 1e-9);
    }

    #[test]
    fn exact_and_float_masks_agree(a in -10_000i64..10_000, b in -10_000i64..10_000, num in -5_000i64..5_000, den in 1i64..5_000) {
        let d = DigitTriple::new(a, b);
        let xi = rat(num, den).unwrap();
        let e = mask_value_exact::<f64>(&d, &xi);
        let f = mask_value(&d, xi.to_f64().unwrap());
        prop_assert!((e - f).norm() < 1e-9);
    }

    #[test]
    fn zero_test_matches_numeric_modulus(a in -10_000i64..10_000, b in -10_000i64..10_000, k in -3_000i64..3_000) {
        let d = DigitTriple::new(a, b);
        let g = num_integer::gcd(a, b).max(1);
        prop_assume!(3 * g <= 10_000);
        // |ξ| ≤ 1 keeps the float phase accurate to well below the zero tolerance
        let xi = rat(k % (3 * g + 1), 3 * g).unwrap();
        let numeric = mask_value(&d, xi.to_f64().unwrap()).norm() < 1e-10;
        prop_assert_eq!(mask_zero_exact(&d, &xi), numeric);
    }
}

#[test]
fn mask_values() {
    let d = DigitTriple::new(1, 2);
    assert!((mask_value(&d, 0.0f64).re - 1.0).abs() < 1e-15);
    // (1 − 1 + 1)/3 at ξ = 1/2
    let h = mask_value(&d, 0.5f64);
    assert!((h.re - 1.0 / 3.0).abs() < 1e-15 && h.im.abs() < 1e-15);
    assert!(mask_zero_exact(&d, &rat(1, 3).unwrap()));
    assert!(!mask_zero_exact(&d, &rat(1, 2).unwrap()));
}

#[test]
fn product_formula_matches_atom_sum() {
    let mut rng = common::rng(21);
    for _ in 0..10 {
        let s = common::random_system(&mut rng, 6, 30, 10_000);
        for n in 0..=6 {
            let pos = common::atom_positions(&s, n);
            for _ in 0..10 {
                let xi: f64 = rng.gen_range(-2.0..2.0);
                assert!((mu_hat_truncated(&s, n, xi) - common::atom_sum(&pos, xi)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn exact_argument_path_matches_float_path() {
    let s = MoranSystem::parse("3*n^2", "odd: 3*n^3+1; even: 3*n+1", "3*n^3+2").unwrap();
    for (num, den) in [(1, 7), (-5, 3), (22, 9), (1000, 3)] {
        let xi = rat(num, den).unwrap();
        let e = mu_hat_truncated_exact::<f64>(&s, 8, &xi);
        let f = mu_hat_truncated(&s, 8, xi.to_f64().unwrap());
        assert!((e - f).norm() < 1e-9);
    }
}

#[test]
fn confirmed_zeros_vanish_numerically() {
    let mut rng = common::rng(22);
    let mut seen = 0;
    for _ in 0..20 {
        let s = common::random_system(&mut rng, 5, 30, 10_000);
        let l = lambda_n(&s, 4).unwrap();
        for d in l.positive_differences().iter().take(40) {
            if let TriState::ConfirmedYes(n) = mu_hat_zero_exact(&s, d, 6) {
                seen += 1;
                assert!(mu_hat_truncated_exact::<f64>(&s, n, d).norm() < 1e-10);
            }
        }
    }
    assert!(seen > 100);
}

#[test]
fn zero_set_trichotomy() {
    let s = MoranSystem::constant(9, 1, 2);
    // 3 = (9/3)·1 is in Λ_1, so it is a zero of μ̂
    assert_eq!(
        mu_hat_zero_exact(&s, &rat(3, 1).unwrap(), 5),
        TriState::ConfirmedYes(1)
    );
    assert_eq!(
        mu_hat_zero_exact(&s, &rat(1, 3).unwrap(), 5),
        TriState::ConfirmedNo
    );
    assert_eq!(
        mu_hat_zero_exact(&s, &Rational::from_integer(0.into()), 5),
        TriState::ConfirmedNo
    );
    // 3·9^7 first vanishes at level 8, beyond the searched depth
    let deep = Rational::from_integer((3 * 9i64.pow(7)).into());
    assert_eq!(
        mu_hat_zero_exact(&s, &deep, 4),
        TriState::UnknownUpToDepth(4)
    );
    assert_eq!(mu_hat_zero_exact(&s, &deep, 8), TriState::ConfirmedYes(8));
}

#[test]
fn lambda_n_saturates_q() {
    let mut rng = common::rng(23);
    for _ in 0..5 {
        let s = common::random_system(&mut rng, 5, 30, 10_000);
        for n in 1..=4 {
            let l = lambda_n(&s, n).unwrap();
            for _ in 0..100 {
                let xi: f64 = rng.gen();
                assert!((q_function(&s, n, &l, xi) - 1.0).abs() < 1e-9);
            }
        }
    }
    let s = MoranSystem::constant(9, 1, 2);
    assert!((q_function(&s, 2, &lambda_n(&s, 2).unwrap(), 0.37f64) - 1.0).abs() < 1e-10);
}

#[test]
fn tail_at_zero_is_one_and_prefix_tail_factorize() {
    let s = MoranSystem::parse("6*n", "3*n+1", "3*n^2+2").unwrap();
    assert_eq!(tail_truncated(&s, 3, 30, 0.0f64).re, 1.0);
    // μ̂_{n+m}(ξ) = μ̂_n(ξ) · ν̂_{>n}(ξ / P_n) truncated to m factors
    let (n, m, xi) = (3, 5, 0.731);
    let pn = s.product_p(n).to_f64().unwrap();
    let lhs = mu_hat_truncated(&s, n + m, xi);
    let rhs = mu_hat_truncated(&s, n, xi) * tail_truncated(&s, n, m, xi / pn);
    assert!((lhs - rhs).norm() < 1e-12);
}
