use moran_spectral::exactnum::{frac, int_gcd, phase_eval, rat, ExactError};
use moran_spectral::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-1_000_000i64..1_000_000, 1i64..100_000).prop_map(|(n, d)| rat(n, d).unwrap())
}

fn wide_rational() -> impl Strategy<Value = Rational> {
    (
        any::<i128>(),
        any::<i128>().prop_filter("nonzero", |d| *d != 0),
    )
        .prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn addition_round_trips_with_128_bit_parts(x in wide_rational(), y in wide_rational()) {
        prop_assert_eq!((&x + &y) - &y, x.clone());
        prop_assert!(x.denom().is_positive());
        prop_assert!(num_integer::Integer::gcd(x.numer(), x.denom()).is_one());
    }
}

proptest! {
    #[test]
    fn phases_compose_additively(s in small_rational(), t in small_rational()) {
        let lhs = phase_eval::<f64>(&s) * phase_eval::<f64>(&t);
        let rhs = phase_eval::<f64>(&(&s + &t));
        prop_assert!((lhs.re - rhs.re).abs() < 1e-12 && (lhs.im - rhs.im).abs() < 1e-12);
    }

    #[test]
    fn phases_ignore_integer_shifts(t in small_rational(), k in -1_000_000_000i64..1_000_000_000) {
        let shifted = &t + Rational::from_integer(BigInt::from(k));
        prop_assert_eq!(phase_eval::<f64>(&t), phase_eval::<f64>(&shifted));
    }

    #[test]
    fn phases_are_unit(t in small_rational()) {
        prop_assert!((phase_eval::<f64>(&t).norm() - 1.0).abs() < 1e-15);
        let f = frac(&t);
        prop_assert!(!f.is_negative() && f < Rational::one());
    }

    #[test]
    fn equality_agrees_with_cross_multiplication(a in -500i64..500, b in 1i64..500, c in -500i64..500, d in 1i64..500) {
        prop_assert_eq!(rat(a, b).unwrap() == rat(c, d).unwrap(), a * d == b * c);
    }
}

#[test]
fn phase_values() {
    let p = phase_eval::<f64>(&Rational::zero());
    assert_eq!((p.re, p.im), (1.0, 0.0));
    let h = phase_eval::<f64>(&rat(1, 2).unwrap());
    assert!((h.re + 1.0).abs() < 1e-15 && h.im.abs() < 1e-15);
    let t = phase_eval::<f64>(&rat(1, 3).unwrap());
    assert!((t.re + 0.5).abs() < 1e-15 && (t.im + 0.8660254037844386).abs() < 1e-15);
}

#[test]
fn gcd_values() {
    let g = |a: i64, b: i64| int_gcd(&BigInt::from(a), &BigInt::from(b));
    assert_eq!(g(4, 6), Ok(BigInt::from(2)));
    assert_eq!(g(1, 987_654_321), Ok(BigInt::one()));
    assert_eq!(g(82, 83), Ok(BigInt::one()));
    assert_eq!(g(0, 0), Err(ExactError::GcdOfZeros));
}

#[test]
fn f32_path_agrees_with_f64() {
    let t = rat(2, 7).unwrap();
    let (a, b) = (phase_eval::<f32>(&t), phase_eval::<f64>(&t));
    assert!((a.re as f64 - b.re).abs() < 1e-6 && (a.im as f64 - b.im).abs() < 1e-6);
}
