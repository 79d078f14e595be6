//! Mask polynomials, truncated transforms, exact zero sets and `Q_Λ`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactnum::{
    frac, frac_of_ratio, frac_of_ratio_i128, unit_phase, ComplexVal, Rational, Real,
};
use crate::moran::{DigitTriple, MoranSystem};
use crate::spectra::SpectrumSet;

/// Numeric zero tolerance used throughout.
pub const ZERO_TOL: f64 = 1e-10;

/// Levels scanned past the requested depth when trying to prove non-membership.
const PROOF_SCAN: u64 = 64;

/// Outcome of a semi-decidable membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "index", rename_all = "snake_case")]
pub enum TriState {
    /// Member of the zero set of level `n`.
    ConfirmedYes(u64),
    ConfirmedNo,
    UnknownUpToDepth(u64),
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriState::ConfirmedYes(n) => write!(f, "yes (level {n})"),
            TriState::ConfirmedNo => write!(f, "no"),
            TriState::UnknownUpToDepth(d) => write!(f, "unknown up to depth {d}"),
        }
    }
}

fn to_real<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap_or_else(T::zero)
}

#[inline]
fn mask_from_turns<T: Real>(ta: T, tb: T) -> ComplexVal<T> {
    let third = to_real::<T>(1.0 / 3.0);
    (ComplexVal::new(T::one(), T::zero()) + unit_phase(ta) + unit_phase(tb)).scale(third)
}

/// `M_D(ξ) = (1 + e^(−2πiaξ) + e^(−2πibξ)) / 3`.
pub fn mask_value<T: Real>(d: &DigitTriple, xi: T) -> ComplexVal<T> {
    let a: T = to_real(d.a.to_f64().unwrap_or(0.0));
    let b: T = to_real(d.b.to_f64().unwrap_or(0.0));
    mask_from_turns(a * xi, b * xi)
}

/// [`mask_value`] with `aξ` and `bξ` reduced exactly before evaluation.
pub fn mask_value_exact<T: Real>(d: &DigitTriple, xi: &Rational) -> ComplexVal<T> {
    let ta = frac(&(Rational::from_integer(d.a.clone()) * xi));
    let tb = frac(&(Rational::from_integer(d.b.clone()) * xi));
    mask_from_turns(
        to_real(ta.to_f64().unwrap_or(0.0)),
        to_real(tb.to_f64().unwrap_or(0.0)),
    )
}

/// `M_D(ξ) = 0` decided exactly.
///
/// Three unit vectors, one of them 1, sum to zero only as the cube roots of
/// unity, so the test is `{aξ, bξ} ≡ {1/3, 2/3} (mod 1)`. When `a/g` and `b/g`
/// fall in distinct nonzero classes mod 3 (`g = gcd(a, b)`) this is the
/// lattice `(ℤ∖3ℤ) / (3g)`.
pub fn mask_zero_exact(d: &DigitTriple, xi: &Rational) -> bool {
    let one_third = Rational::new(BigInt::one(), BigInt::from(3));
    let two_thirds = Rational::new(BigInt::from(2), BigInt::from(3));
    let ta = frac(&(Rational::from_integer(d.a.clone()) * xi));
    if ta != one_third && ta != two_thirds {
        return false;
    }
    let tb = frac(&(Rational::from_integer(d.b.clone()) * xi));
    (ta == one_third && tb == two_thirds) || (ta == two_thirds && tb == one_third)
}

/// One factor `M_{D}(ξ / Q)` of a truncated product, with `Q` an exact integer.
#[derive(Debug, Clone)]
struct LevelEntry {
    a: BigInt,
    b: BigInt,
    den: BigInt,
    a_small: Option<i128>,
    b_small: Option<i128>,
    den_small: Option<i128>,
    /// `a / Q` and `b / Q`, correctly rounded.
    ra: f64,
    rb: f64,
}

impl LevelEntry {
    fn new(d: &DigitTriple, den: BigInt) -> Self {
        let ratio = |x: &BigInt| {
            Rational::new(x.clone(), den.clone())
                .to_f64()
                .unwrap_or(0.0)
        };
        Self {
            ra: ratio(&d.a),
            rb: ratio(&d.b),
            a_small: d.a.to_i128(),
            b_small: d.b.to_i128(),
            den_small: den.to_i128(),
            a: d.a.clone(),
            b: d.b.clone(),
            den,
        }
    }

    /// `frac(x · u / (v · Q))` for digit `x`, exact.
    #[inline]
    fn shift_turns(
        x: &BigInt,
        x_small: Option<i128>,
        u: &Shift,
        den: &BigInt,
        den_small: Option<i128>,
    ) -> f64 {
        if let (Some(xs), Some(us), Some(vs), Some(ds)) =
            (x_small, u.num_small, u.den_small, den_small)
        {
            if let (Some(n), Some(d)) = (xs.checked_mul(us), vs.checked_mul(ds)) {
                return frac_of_ratio_i128(n, d);
            }
        }
        frac_of_ratio(&(x * &u.num), &(&u.den * den))
    }
}

/// Exact rational shift `u / v` with cached small-integer forms.
#[derive(Debug, Clone)]
struct Shift {
    num: BigInt,
    den: BigInt,
    num_small: Option<i128>,
    den_small: Option<i128>,
}

/// Precomputed factors of a truncated infinite product `Π_k M_{D_k}(ξ / Q_k)`.
///
/// The argument `ξ + s` is split into an exact rational part `s`, reduced mod 1
/// with integer arithmetic, and a float part `ξ`, multiplied by the correctly
/// rounded ratios `a_k / Q_k`.
#[derive(Debug, Clone)]
pub struct FreqTable {
    levels: Vec<LevelEntry>,
}

impl FreqTable {
    /// Factors of `μ̂_n`: `Q_k = P_k` for `k = 1..=n`.
    pub fn for_prefix(system: &MoranSystem, n: u64) -> Self {
        let lv = system.levels(n);
        let levels = (1..=n as usize)
            .map(|k| LevelEntry::new(lv.digits_at(k), lv.prefix[k].clone()))
            .collect();
        Self { levels }
    }

    /// Factors of the tail `ν̂_{>n}` truncated to `m` levels: `Q_j = p_{n+1} ⋯ p_{n+j}`.
    pub fn for_tail(system: &MoranSystem, n: u64, m: u64) -> Self {
        let mut q = BigInt::one();
        let levels = (n + 1..=n + m)
            .map(|k| {
                q *= system.p_at(k);
                LevelEntry::new(&system.digits(k), q.clone())
            })
            .collect();
        Self { levels }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Product at a float argument.
    pub fn eval<T: Real>(&self, xi: T) -> ComplexVal<T> {
        let mut acc = ComplexVal::new(T::one(), T::zero());
        for l in &self.levels {
            acc = acc * mask_from_turns(xi * to_real::<T>(l.ra), xi * to_real::<T>(l.rb));
        }
        acc
    }

    /// Product at `ξ + shift` with the shift handled exactly.
    pub fn eval_shifted<T: Real>(&self, xi: T, shift: &Rational) -> ComplexVal<T> {
        self.eval_shifted_ratio(xi, shift.numer(), shift.denom())
    }

    /// [`FreqTable::eval_shifted`] with the shift given as `num / den`, `den > 0`,
    /// not necessarily in lowest terms.
    pub fn eval_shifted_ratio<T: Real>(&self, xi: T, num: &BigInt, den: &BigInt) -> ComplexVal<T> {
        if num.is_zero() {
            return self.eval(xi);
        }
        let s = Shift {
            num: num.clone(),
            den: den.clone(),
            num_small: num.to_i128(),
            den_small: den.to_i128(),
        };
        let sf = match (s.num_small, s.den_small) {
            (Some(n), Some(d)) if n.unsigned_abs() < 1 << 53 && d.unsigned_abs() < 1 << 53 => {
                n as f64 / d as f64
            }
            _ => Rational::new(num.clone(), den.clone())
                .to_f64()
                .unwrap_or(f64::INFINITY),
        };
        let mut acc = ComplexVal::new(T::one(), T::zero());
        for l in &self.levels {
            // below half a turn there is nothing to reduce, and the float
            // product already carries full relative precision
            let (fa, fb) = if (sf * l.ra).abs() < 0.5 && (sf * l.rb).abs() < 0.5 {
                (sf * l.ra, sf * l.rb)
            } else {
                (
                    LevelEntry::shift_turns(&l.a, l.a_small, &s, &l.den, l.den_small),
                    LevelEntry::shift_turns(&l.b, l.b_small, &s, &l.den, l.den_small),
                )
            };
            let ta = to_real::<T>(fa) + xi * to_real::<T>(l.ra);
            let tb = to_real::<T>(fb) + xi * to_real::<T>(l.rb);
            acc = acc * mask_from_turns(ta, tb);
        }
        acc
    }

    /// Product at an exact rational argument.
    pub fn eval_exact<T: Real>(&self, xi: &Rational) -> ComplexVal<T> {
        self.eval_shifted(T::zero(), xi)
    }

    /// `Σ_λ |product(ξ + λ)|²`, summed in the order of `points`.
    pub fn q_sum<T: Real>(&self, points: &[Rational], xi: T) -> T {
        let terms: Vec<T> = points
            .par_iter()
            .map(|l| self.eval_shifted(xi, l).norm_sqr())
            .collect();
        terms.into_iter().fold(T::zero(), |a, b| a + b)
    }
}

/// `μ̂_n(ξ) = Π_{k ≤ n} M_{D_k}(ξ / P_k)`.
pub fn mu_hat_truncated<T: Real>(system: &MoranSystem, n: u64, xi: T) -> ComplexVal<T> {
    FreqTable::for_prefix(system, n).eval(xi)
}

/// [`mu_hat_truncated`] at an exact argument, each factor reduced mod 1 exactly.
pub fn mu_hat_truncated_exact<T: Real>(
    system: &MoranSystem,
    n: u64,
    xi: &Rational,
) -> ComplexVal<T> {
    FreqTable::for_prefix(system, n).eval_exact(xi)
}

/// `m`-factor truncation of `ν̂_{>n}(ξ)`.
pub fn tail_truncated<T: Real>(system: &MoranSystem, n: u64, m: u64, xi: T) -> ComplexVal<T> {
    FreqTable::for_tail(system, n, m).eval(xi)
}

/// `Q_Λ(ξ) = Σ_{λ ∈ Λ} |μ̂_n(ξ + λ)|²`.
pub fn q_function<T: Real>(system: &MoranSystem, n: u64, lambda: &SpectrumSet, xi: T) -> T {
    FreqTable::for_prefix(system, n).q_sum(lambda.points(), xi)
}

/// Membership of `ξ` in `Z(μ̂) = ∪_n Z(M_{D_n}(· / P_n))`.
///
/// Levels `1..=depth` are tested exactly. `ConfirmedNo` needs a proof that no
/// later level can vanish: a level-`n` zero forces `|ξ| ≥ |P_n| / (3 g_n)` with
/// `g_n = gcd(a_n, b_n) ≤ min(|a_n|, |b_n|)`, so it suffices that
/// `|P_n| > 3|ξ| U(n)` for an explicit digit bound `U` from some `n₀` on, which
/// is carried forward by induction using an explicit lower bound on `|p_n|`.
pub fn mu_hat_zero_exact(system: &MoranSystem, xi: &Rational, depth: u64) -> TriState {
    if xi.is_zero() {
        return TriState::ConfirmedNo;
    }
    let mut pn = BigInt::one();
    for n in 1..=depth {
        pn *= system.p_at(n);
        if mask_zero_exact(
            &system.digits(n),
            &(xi / Rational::from_integer(pn.clone())),
        ) {
            return TriState::ConfirmedYes(n);
        }
    }
    match nonmember_proof(system, xi, depth, pn) {
        true => TriState::ConfirmedNo,
        false => TriState::UnknownUpToDepth(depth),
    }
}

fn nonmember_proof(system: &MoranSystem, xi: &Rational, depth: u64, mut pn: BigInt) -> bool {
    let Some(lower) = system.p.eventual_lower_bound() else {
        return false;
    };
    // any digit bound works since g_n ≤ |a_n| and g_n ≤ |b_n|; take the slower one
    let (ua, ub) = (system.a.upper_bound(), system.b.upper_bound());
    let probe = depth + 1;
    let upper = match ua.dominant().cmp(&ub.dominant()) {
        std::cmp::Ordering::Less => ua,
        std::cmp::Ordering::Greater => ub,
        std::cmp::Ordering::Equal => {
            if ua.eval(probe) <= ub.eval(probe) {
                ua
            } else {
                ub
            }
        }
    };
    let three_xi = Rational::from_integer(BigInt::from(3)) * xi.abs();
    let start = lower.monotone_from();
    for n in depth + 1..=depth + PROOF_SCAN {
        pn *= system.p_at(n);
        let pn_r = Rational::from_integer(pn.abs());
        if mask_zero_exact(
            &system.digits(n),
            &(xi / Rational::from_integer(pn.clone())),
        ) {
            // a zero past the requested depth: membership holds but was not asked for
            return false;
        }
        if n >= start
            && pn_r > &three_xi * upper.eval(n)
            && lower.eval(n + 1) >= upper.step_ratio(n)
        {
            return true;
        }
    }
    false
}
