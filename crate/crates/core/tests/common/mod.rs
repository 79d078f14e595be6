//! Shared generators and brute-force oracles for the integration suites.
#![allow(dead_code)]

use moran_spectral::{ComplexF64, MoranSystem, Rational, SequenceExpr};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero integer in `[-max, max]` congruent to `r` mod 3.
pub fn digit_with_residue(rng: &mut ChaCha8Rng, r: i64, max: i64) -> i64 {
    loop {
        let d: i64 = rng.gen_range(-max..=max);
        if d.rem_euclid(3) == r {
            return d;
        }
    }
}

/// Per-level values for a random system that passes the congruence check:
/// `p_k ∈ ±{3, 6, …, p_max}` and `{a_k, b_k} ≡ {1, 2} mod 3`.
pub fn random_levels(
    rng: &mut ChaCha8Rng,
    levels: usize,
    p_max: i64,
    d_max: i64,
) -> Vec<(i64, i64, i64)> {
    (0..levels)
        .map(|_| {
            let m = rng.gen_range(1..=p_max / 3);
            let p = if rng.gen_bool(0.5) { 3 * m } else { -3 * m };
            let r = rng.gen_range(1..=2);
            let a = digit_with_residue(rng, r, d_max);
            let b = digit_with_residue(rng, 3 - r, d_max);
            (p, a, b)
        })
        .collect()
}

/// System with the given first levels followed by the constant tail `p = 9, D = {0, 1, 2}`.
pub fn system_from_levels(levels: &[(i64, i64, i64)]) -> MoranSystem {
    let seq = |f: fn(&(i64, i64, i64)) -> i64, tail: i64| {
        SequenceExpr::prefix(levels.iter().map(f), SequenceExpr::constant(tail))
    };
    MoranSystem::new(seq(|l| l.0, 9), seq(|l| l.1, 1), seq(|l| l.2, 2))
}

pub fn random_system(rng: &mut ChaCha8Rng, levels: usize, p_max: i64, d_max: i64) -> MoranSystem {
    system_from_levels(&random_levels(rng, levels, p_max, d_max))
}

/// Every atom position `Σ_k d_k / P_k` of `μ_n`, enumerated independently of
/// the library (collisions kept as separate entries).
pub fn atom_positions(system: &MoranSystem, n: u64) -> Vec<Rational> {
    let mut xs = vec![Rational::zero()];
    let mut pk = BigInt::one();
    for k in 1..=n {
        pk *= system.p_at(k);
        let d = system.digits(k);
        let mut next = Vec::with_capacity(xs.len() * 3);
        for x in &xs {
            for digit in [BigInt::zero(), d.a.clone(), d.b.clone()] {
                next.push(x + Rational::new(digit, pk.clone()));
            }
        }
        xs = next;
    }
    xs
}

/// `Σ_x 3^(−n) e^(−2πi ξ x)` straight from the definition of the transform.
pub fn atom_sum(positions: &[Rational], xi: f64) -> ComplexF64 {
    let w = 1.0 / positions.len() as f64;
    positions
        .iter()
        .map(|x| {
            let t = -2.0 * std::f64::consts::PI * xi * x.to_f64().unwrap();
            ComplexF64::new(t.cos(), t.sin()) * w
        })
        .sum()
}
