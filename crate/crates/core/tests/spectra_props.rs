mod common;

use moran_spectral::exactnum::rat;
use moran_spectral::fourier::q_function;
use moran_spectral::spectra::mapping::{admissible_count, iota_star};
use moran_spectral::spectra::{
    fourier_matrix_unitary, lambda_n, maximal_orthogonal_set, orthogonality_exact, q_profile,
};
use moran_spectral::{MaximalMapping, MoranSystem, Rational, SpectrumSet, Verdict};
use num_bigint::BigInt;

#[test]
fn lambda_n_has_full_cardinality() {
    let mut rng = common::rng(31);
    for _ in 0..50 {
        let s = common::random_system(&mut rng, 6, 30, 10_000);
        for n in 0..=6u64 {
            assert_eq!(lambda_n(&s, n).unwrap().len(), 3usize.pow(n as u32));
        }
    }
}

#[test]
fn lambda_n_rejects_bad_congruence() {
    let s = MoranSystem::constant(9, 1, 4);
    assert!(lambda_n(&s, 2).is_err());
}

#[test]
fn canonical_mapping_reproduces_lambda_n() {
    let mut rng = common::rng(32);
    for _ in 0..10 {
        let s = common::random_system(&mut rng, 6, 30, 10_000);
        let m = MaximalMapping::canonical(&s, 6).unwrap();
        for d in 0..=6usize {
            let set = maximal_orthogonal_set(&m, &s, d).unwrap();
            assert_eq!(set.points(), lambda_n(&s, d as u64).unwrap().points());
            assert_eq!(set.len() as u64, admissible_count(d));
        }
        // provenance is consistent with ι*
        let set = maximal_orthogonal_set(&m, &s, 3).unwrap();
        for x in set.points() {
            let word = set.provenance(x).unwrap();
            assert_eq!(Rational::new(iota_star(&m, word, &s), BigInt::from(3)), *x);
        }
    }
}

#[test]
fn q_profile_is_monotone_and_bounded() {
    let mut rng = common::rng(33);
    for _ in 0..10 {
        let s = common::random_system(&mut rng, 8, 30, 10_000);
        let m = MaximalMapping::canonical(&s, 5).unwrap();
        for xi in [0.0, 0.13, 0.5, 0.91] {
            let prof = q_profile(&s, &m, 5, 30, xi).unwrap();
            assert!(prof.windows(2).all(|w| w[1] >= w[0]));
            assert!(prof.iter().all(|&v| v <= 1.0 + 1e-6), "{prof:?}");
        }
    }
}

fn unitary_and_saturated(s: &MoranSystem, n: u64, set: &SpectrumSet) -> (bool, bool) {
    let unit = fourier_matrix_unitary(s, n, set)
        .map(|d| d < 1e-9)
        .unwrap_or(false);
    let sat = (0..50).all(|i| (q_function(s, n, set, i as f64 / 50.0) - 1.0).abs() < 1e-8);
    (unit, sat)
}

#[test]
fn unitarity_agrees_with_q_saturation() {
    let mut rng = common::rng(34);
    for _ in 0..10 {
        let s = common::random_system(&mut rng, 5, 30, 10_000);
        for n in 1..=4 {
            let l = lambda_n(&s, n).unwrap();
            assert_eq!(unitary_and_saturated(&s, n, &l), (true, true));
            // move one point off the lattice: still 3^n points, no longer a spectrum
            let mut pts = l.points().to_vec();
            let last = pts.pop().unwrap();
            pts.push(last + rat(1, 7).unwrap());
            let broken = SpectrumSet::from_points(pts);
            assert_eq!(unitary_and_saturated(&s, n, &broken), (false, false));
        }
    }
}

#[test]
fn planted_difference_is_caught() {
    let s = MoranSystem::constant(9, 1, 2);
    let mut pts = lambda_n(&s, 2).unwrap().points().to_vec();
    pts.push(rat(1, 2).unwrap());
    let r = orthogonality_exact(&s, &SpectrumSet::from_points(pts), 10);
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn mapping_records_round_trip_and_validate() {
    let mut rng = common::rng(35);
    for _ in 0..10 {
        let s = common::random_system(&mut rng, 6, 30, 10_000);
        let m = MaximalMapping::canonical(&s, 4).unwrap();
        assert!(m.validate(&s).is_ok());
        let back = MaximalMapping::from_records(&m.to_records(), &s).unwrap();
        assert_eq!(back, m);
    }
}
