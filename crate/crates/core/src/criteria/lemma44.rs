//! Δ-counting for multiplicative orbits `(α/β)^j x` away from the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::CriteriaError;
use crate::exactnum::Rational;
use crate::report::{CheckReport, Verdict};

/// Width of the band around `1/(αβ)` inside which float tests are not trusted.
pub const GUARD_BAND: f64 = 1e-12;

fn check_pair(alpha: i64, beta: i64) -> Result<(), CriteriaError> {
    let err = |reason| {
        Err(CriteriaError::InvalidPair {
            alpha,
            beta,
            reason,
        })
    };
    if !(alpha > beta && beta > 1) {
        return err("need alpha > beta > 1");
    }
    if alpha.gcd(&beta) != 1 {
        return err("alpha and beta must be coprime");
    }
    Ok(())
}

/// `#{0 ≤ j ≤ J : ‖(α/β)^j x‖ ≥ 1/(αβ)}` in exact arithmetic.
pub fn delta_count(alpha: i64, beta: i64, x: &Rational, j_max: u64) -> Result<u64, CriteriaError> {
    check_pair(alpha, beta)?;
    let ab = BigInt::from(alpha * beta);
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut count = 0;
    for j in 0..=j_max {
        if j > 0 {
            num *= alpha;
            den *= beta;
        }
        // ‖num/den‖ ≥ 1/(αβ)  ⟺  αβ·min(r, den − r) ≥ den
        let r = num.mod_floor(&den);
        let d = (&den - &r).min(r);
        if d * &ab >= den {
            count += 1;
        }
    }
    Ok(count)
}

/// Float evaluation of the Δ-count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCount {
    pub count: u64,
    /// Exponents `j` whose distance fell inside the guard band; these are not counted.
    pub near_boundary: Vec<u64>,
}

/// [`delta_count`] for a real `x`, with values within [`GUARD_BAND`] of the
/// threshold treated as failures and listed.
pub fn delta_count_f64(
    alpha: i64,
    beta: i64,
    x: f64,
    j_max: u64,
) -> Result<DeltaCount, CriteriaError> {
    check_pair(alpha, beta)?;
    let thr = 1.0 / (alpha * beta) as f64;
    let ratio = alpha as f64 / beta as f64;
    let mut y = x;
    let mut out = DeltaCount {
        count: 0,
        near_boundary: Vec::new(),
    };
    for j in 0..=j_max {
        if j > 0 {
            y *= ratio;
        }
        let f = y - y.floor();
        let d = f.min(1.0 - f);
        if (d - thr).abs() < GUARD_BAND {
            out.near_boundary.push(j);
        } else if d >= thr {
            out.count += 1;
        }
    }
    Ok(out)
}

/// Smallest `q ≥ 1` with `⌊α/β⌋ + 1 ≤ β^q`.
pub fn q1_compute(alpha: i64, beta: i64) -> Result<u32, CriteriaError> {
    check_pair(alpha, beta)?;
    let target = BigInt::from(alpha / beta + 1);
    let mut pow = BigInt::from(beta);
    let mut q = 1;
    while pow < target {
        pow *= beta;
        q += 1;
    }
    Ok(q)
}

/// Grid evidence that every `x ∈ [1, α/β]` has `Δ(q₁ + 1, x) ≥ 1`.
///
/// Grid points are exact rationals, so each test is exact; the continuum in
/// between is not covered.
pub fn lemma44_verify(
    alpha: i64,
    beta: i64,
    gridsize: usize,
) -> Result<CheckReport, CriteriaError> {
    const CHECK: &str = "lemma44";
    let q1 = q1_compute(alpha, beta)?;
    if gridsize == 0 {
        return Err(CriteriaError::InvalidParams(
            "grid size must be positive".into(),
        ));
    }
    let j_max = q1 as u64 + 1;
    let steps = (gridsize.max(2) - 1) as i64;
    // x_i = 1 + i(α − β)/(β·steps)
    let point = |i: usize| {
        Rational::new(
            BigInt::from(beta * steps + i as i64 * (alpha - beta)),
            BigInt::from(beta * steps),
        )
    };
    let counts: Vec<u64> = (0..gridsize)
        .into_par_iter()
        .map(|i| delta_count(alpha, beta, &point(i), j_max).unwrap_or(0))
        .collect();
    let (min_at, &min) = counts
        .iter()
        .enumerate()
        .min_by_key(|(_, &c)| c)
        .expect("nonempty grid");
    let verdict = Verdict::from_bool(min >= 1);
    let summary = if min >= 1 {
        format!("Δ(q₁+1, x) ≥ 1 on all {gridsize} grid points of [1, {alpha}/{beta}] (grid evidence only)")
    } else {
        format!("Δ(q₁+1, x) = 0 at x = {}", point(min_at))
    };
    let mut r = CheckReport::new(CHECK, verdict, summary)
        .with("alpha", alpha)
        .with("beta", beta)
        .with("q1", q1)
        .with("J", j_max)
        .with("gridsize", gridsize as u64)
        .with("min_count", min)
        .with("min_at", json!({ "index": min_at, "x": point(min_at).to_string(), "x_f64": point(min_at).to_f64() }))
        .with("zero_count_points", counts.iter().filter(|c| c.is_zero()).count() as u64);
    if min == 0 {
        r.first_violation = Some(min_at as u64);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    #[test]
    fn delta_examples() {
        assert_eq!(delta_count(3, 2, &rat(1, 1).unwrap(), 2).unwrap(), 2);
        assert_eq!(delta_count(3, 2, &rat(3, 2).unwrap(), 2).unwrap(), 3);
        assert_eq!(delta_count(7, 5, &rat(4, 1).unwrap(), 0).unwrap(), 0);
        assert!(delta_count(4, 2, &rat(1, 1).unwrap(), 2).is_err());
        assert!(delta_count(2, 3, &rat(1, 1).unwrap(), 2).is_err());
    }

    #[test]
    fn float_matches_and_guards() {
        assert_eq!(delta_count_f64(3, 2, 1.5, 2).unwrap().count, 3);
        // ‖x‖ exactly 1/6 sits on the threshold
        let d = delta_count_f64(3, 2, 1.0 / 6.0, 0).unwrap();
        assert_eq!(d.count, 0);
        assert_eq!(d.near_boundary, vec![0]);
        assert_eq!(delta_count(3, 2, &rat(1, 6).unwrap(), 0).unwrap(), 1);
    }

    #[test]
    fn q1_examples() {
        assert_eq!(q1_compute(3, 2).unwrap(), 1);
        assert_eq!(q1_compute(7, 2).unwrap(), 2);
        assert_eq!(q1_compute(5, 4).unwrap(), 1);
    }

    #[test]
    fn small_grid_passes() {
        let r = lemma44_verify(3, 2, 101).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(lemma44_verify(3, 2, 1).unwrap().passed());
    }
}
