//! Moran systems `{p_n}, D_n = {0, a_n, b_n}` and their finite truncations.

pub mod sequence;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde_json::json;
use thiserror::Error;

use crate::exactnum::Rational;
use crate::report::{num, CheckReport, Verdict};
pub use sequence::{Growth, LowerBound, SequenceError, SequenceExpr, UpperBound};

/// Default number of indices scanned by sequence validations.
pub const DEFAULT_HORIZON: u64 = 200;

/// The nonzero digits of `D = {0, a, b}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitTriple {
    pub a: BigInt,
    pub b: BigInt,
}

impl DigitTriple {
    pub fn new<A: Into<BigInt>, B: Into<BigInt>>(a: A, b: B) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
        }
    }

    /// `[0, a, b]`
    pub fn elements(&self) -> [BigInt; 3] {
        [BigInt::zero(), self.a.clone(), self.b.clone()]
    }

    pub fn is_proper(&self) -> bool {
        !self.a.is_zero() && !self.b.is_zero() && self.a != self.b
    }

    /// `{a mod 3, b mod 3} = {1, 2}`
    pub fn residues_are_one_two(&self) -> bool {
        let three = BigInt::from(3);
        let ra = self.a.mod_floor(&three);
        let rb = self.b.mod_floor(&three);
        (ra.is_one() && rb == BigInt::from(2)) || (rb.is_one() && ra == BigInt::from(2))
    }
}

impl fmt::Display for DigitTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{0, {}, {}}}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoranError {
    #[error("sequence {which}: {source}")]
    Sequence {
        which: &'static str,
        source: SequenceError,
    },
    #[error("structure violated at n = {n}: {reason}")]
    Structure { n: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoranSystem {
    pub p: SequenceExpr,
    pub a: SequenceExpr,
    pub b: SequenceExpr,
}

impl MoranSystem {
    /// Builds a system without checking its structure; see [`MoranSystem::checked`].
    pub fn new(p: SequenceExpr, a: SequenceExpr, b: SequenceExpr) -> Self {
        Self { p, a, b }
    }

    pub fn parse(p: &str, a: &str, b: &str) -> Result<Self, MoranError> {
        let f = |which, s: &str| {
            SequenceExpr::parse(s).map_err(|source| MoranError::Sequence { which, source })
        };
        Ok(Self::new(f("p", p)?, f("a", a)?, f("b", b)?))
    }

    /// Builds a system and rejects it if `|p_n| ≤ 1` or `D_n` has fewer than
    /// three elements for some `n ≤ horizon`.
    pub fn checked(
        p: SequenceExpr,
        a: SequenceExpr,
        b: SequenceExpr,
        horizon: u64,
    ) -> Result<Self, MoranError> {
        let s = Self::new(p, a, b);
        for n in 1..=horizon {
            if let Some(reason) = s.structure_violation(n) {
                return Err(MoranError::Structure { n, reason });
            }
        }
        Ok(s)
    }

    /// Convenience constructor for constant `p`, `a`, `b`.
    pub fn constant(p: i64, a: i64, b: i64) -> Self {
        Self::new(
            SequenceExpr::constant(p),
            SequenceExpr::constant(a),
            SequenceExpr::constant(b),
        )
    }

    pub fn p_at(&self, n: u64) -> BigInt {
        self.p.eval(n)
    }

    pub fn digits(&self, n: u64) -> DigitTriple {
        DigitTriple {
            a: self.a.eval(n),
            b: self.b.eval(n),
        }
    }

    /// `P_n = p_1 ⋯ p_n`, with `P_0 = 1`.
    pub fn product_p(&self, n: u64) -> BigInt {
        (1..=n).fold(BigInt::one(), |acc, k| acc * self.p_at(k))
    }

    /// Values of levels `1..=n`.
    pub fn levels(&self, n: u64) -> Levels {
        let mut lv = Levels {
            p: Vec::new(),
            digits: Vec::new(),
            prefix: vec![BigInt::one()],
        };
        lv.extend_to(self, n);
        lv
    }

    fn structure_violation(&self, n: u64) -> Option<String> {
        let p = self.p_at(n);
        let d = self.digits(n);
        if p.abs() <= BigInt::one() {
            return Some(format!("|p_n| = {} is not > 1", p.abs()));
        }
        if d.a.is_zero() || d.b.is_zero() {
            return Some(format!("digit set {d} contains a repeated 0"));
        }
        if d.a == d.b {
            return Some(format!("a_n = b_n = {}", d.a));
        }
        None
    }

    /// Checks `|p_n| > 1` and that `D_n` has three elements for `n ≤ horizon`.
    pub fn validate_structure(&self, horizon: u64) -> CheckReport {
        let violations: Vec<u64> = (1..=horizon)
            .filter(|&n| self.structure_violation(n).is_some())
            .collect();
        match violations.first() {
            None => CheckReport::pass(
                "structure",
                format!("|p_n| > 1 and |D_n| = 3 for n ≤ {horizon}"),
            )
            .with("horizon", horizon),
            Some(&n) => {
                CheckReport::fail("structure", self.structure_violation(n).unwrap_or_default())
                    .with_violation(n)
                    .with("horizon", horizon)
                    .with(
                        "violating_indices",
                        violations.iter().take(64).copied().collect::<Vec<_>>(),
                    )
            }
        }
    }

    /// `gcd(a_n, b_n)`.
    pub fn digit_gcd(&self, n: u64) -> BigInt {
        let d = self.digits(n);
        d.a.gcd(&d.b)
    }
}

impl fmt::Display for MoranSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p = {}; a = {}; b = {}", self.p, self.a, self.b)
    }
}

/// Cached level data for indices `1..=n`.
#[derive(Debug, Clone)]
pub struct Levels {
    pub p: Vec<BigInt>,
    pub digits: Vec<DigitTriple>,
    /// `prefix[k] = P_k`, `prefix[0] = 1`.
    pub prefix: Vec<BigInt>,
}

impl Levels {
    pub fn depth(&self) -> usize {
        self.p.len()
    }

    pub fn extend_to(&mut self, system: &MoranSystem, n: u64) {
        for k in self.p.len() as u64 + 1..=n {
            let pk = system.p_at(k);
            let last = self.prefix.last().expect("prefix starts at 1") * &pk;
            self.p.push(pk);
            self.digits.push(system.digits(k));
            self.prefix.push(last);
        }
    }

    /// Level `k ≥ 1` data.
    pub fn p_at(&self, k: usize) -> &BigInt {
        &self.p[k - 1]
    }

    pub fn digits_at(&self, k: usize) -> &DigitTriple {
        &self.digits[k - 1]
    }
}

/// `p_n ∈ 3ℤ∖{0}` and `{a_n, b_n} ≡ {1, 2} (mod 3)` for `1 ≤ n ≤ horizon`.
pub fn validate_congruence(system: &MoranSystem, horizon: u64) -> CheckReport {
    let three = BigInt::from(3);
    for n in 1..=horizon {
        let p = system.p_at(n);
        if p.is_zero() || !p.is_multiple_of(&three) {
            return CheckReport::fail(
                "congruence",
                format!("p_{n} = {p} is not a nonzero multiple of 3"),
            )
            .with_violation(n)
            .with("horizon", horizon)
            .with("p_n", p.to_string());
        }
        let d = system.digits(n);
        if !d.residues_are_one_two() {
            return CheckReport::fail(
                "congruence",
                format!(
                    "{{a_{n}, b_{n}}} = {{{}, {}}} is not {{1, 2}} mod 3",
                    d.a, d.b
                ),
            )
            .with_violation(n)
            .with("horizon", horizon)
            .with("a_n", d.a.to_string())
            .with("b_n", d.b.to_string());
        }
    }
    CheckReport::pass(
        "congruence",
        format!("3 | p_n and {{a_n, b_n}} ≡ {{1, 2}} mod 3 for n ≤ {horizon}"),
    )
    .with("horizon", horizon)
}

pub fn product_p(system: &MoranSystem, n: u64) -> BigInt {
    system.product_p(n)
}

/// `d_n = max{0, |a_n|, |b_n|}`
fn digit_max(system: &MoranSystem, n: u64) -> BigInt {
    let d = system.digits(n);
    d.a.abs().max(d.b.abs())
}

fn growth_json(g: &Option<Growth>) -> serde_json::Value {
    match g {
        Some(g) => json!({ "base": g.base.to_string(), "degree": g.degree }),
        None => serde_json::Value::Null,
    }
}

/// Classifies `Σ d_n / |P_n|` as convergent (pass), divergent (fail) or
/// inconclusive up to `horizon`.
pub fn compact_support_check(system: &MoranSystem, horizon: u64) -> CheckReport {
    const NAME: &str = "compact_support";
    let digit_upper = {
        let (ua, ub) = (system.a.upper_growth(), system.b.upper_growth());
        match (ua, ub) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        }
    };
    let digit_lower = {
        let (la, lb) = (system.a.lower_growth(), system.b.lower_growth());
        match (la, lb) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        }
    };
    let p_lower = system.p.lower_growth();
    let base = |r: CheckReport| {
        r.with("horizon", horizon)
            .with("digit_upper_growth", growth_json(&digit_upper))
            .with("digit_lower_growth", growth_json(&digit_lower))
            .with("p_lower_growth", growth_json(&p_lower))
    };

    // |p_n| grows without bound: |P_n| is super-exponential while every
    // expressible digit sequence is at most exponential
    if let Some(g) = &p_lower {
        if !g.is_bounded() && digit_upper.is_some() {
            return base(CheckReport::pass(
                NAME,
                "convergent: |p_n| is unbounded so |P_n| outgrows every exponential digit bound",
            ))
            .with("method", "super-exponential P_n");
        }
    }

    if let (Some(mags), Some(du)) = (system.p.periodic_magnitude(), &digit_upper) {
        // |P_n| ≍ G^n with G^period = Π mags
        let period = mags.len() as u32;
        let prod: BigInt = mags.iter().product();
        let g = prod
            .to_f64()
            .unwrap_or(f64::INFINITY)
            .powf(1.0 / period as f64);
        let with_g = |r: CheckReport| {
            base(r)
                .with("p_geometric_mean", num(g))
                .with("method", "ratio test on dominant growth")
        };
        if Pow::pow(&du.base, period) < prod {
            return with_g(CheckReport::pass(
                NAME,
                format!(
                    "convergent: digits grow like {}^n, below the mean contraction {g:.6}",
                    du.base
                ),
            ))
            .with("ratio", num(du.base.to_f64().unwrap_or(f64::INFINITY) / g));
        }
        if let Some(dl) = &digit_lower {
            if Pow::pow(&dl.base, period) >= prod {
                return with_g(
                    CheckReport::fail(
                        NAME,
                        format!(
                            "divergent: digits grow at least like {}^n, terms do not tend to 0",
                            dl.base
                        ),
                    )
                    .with("ratio", num(dl.base.to_f64().unwrap_or(f64::INFINITY) / g)),
                );
            }
        }
    }

    // no symbolic decision; report the partial sum and the trend of the terms
    let mut pn = BigInt::one();
    let mut partial = 0.0f64;
    let mut terms = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        pn *= system.p_at(n);
        let t = if pn.is_zero() {
            f64::INFINITY
        } else {
            Rational::new(digit_max(system, n), pn.abs())
                .to_f64()
                .unwrap_or(f64::INFINITY)
        };
        partial += t;
        terms.push(t);
    }
    let last = terms.last().copied().unwrap_or(0.0);
    let mid = terms.get(terms.len() / 2).copied().unwrap_or(0.0);
    base(CheckReport::inconclusive(
        NAME,
        format!("no symbolic decision; partial sum up to n = {horizon} is {partial:.6e}"),
    ))
    .with("partial_sum", num(partial))
    .with("last_term", num(last))
    .with(
        "last_term_trend",
        num(if mid > 0.0 { last / mid } else { f64::NAN }),
    )
}

/// `a_n ≡ a' (mod p_n)` with `a' ∈ [0, |p_n|)` and `α_n = |a_n − a'| / |p_n|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueData {
    pub n: u64,
    pub a_prime: BigInt,
    pub b_prime: BigInt,
    pub alpha: BigInt,
    pub beta: BigInt,
}

pub fn digit_residues(system: &MoranSystem, n: u64) -> ResidueData {
    let m = system.p_at(n).abs();
    let d = system.digits(n);
    let a_prime = d.a.mod_floor(&m);
    let b_prime = d.b.mod_floor(&m);
    let alpha = (&d.a - &a_prime).abs() / &m;
    let beta = (&d.b - &b_prime).abs() / &m;
    ResidueData {
        n,
        a_prime,
        b_prime,
        alpha,
        beta,
    }
}

/// Finitely supported probability measure with exact positions and weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    /// Sorted by position; positions distinct.
    pub atoms: Vec<(Rational, Rational)>,
}

impl DiscreteMeasure {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> Rational {
        self.atoms
            .iter()
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    pub fn weight_at(&self, x: &Rational) -> Option<&Rational> {
        self.atoms
            .binary_search_by(|(p, _)| p.cmp(x))
            .ok()
            .map(|i| &self.atoms[i].1)
    }
}

/// `μ_n = δ_{P_1⁻¹D_1} ∗ ⋯ ∗ δ_{P_n⁻¹D_n}` with colliding positions merged.
pub fn atoms(system: &MoranSystem, n: u64) -> DiscreteMeasure {
    let lv = system.levels(n);
    let mut counts: BTreeMap<Rational, u64> = BTreeMap::new();
    counts.insert(Rational::zero(), 1);
    for k in 1..=n as usize {
        let pk = &lv.prefix[k];
        let shifts: Vec<Rational> = lv
            .digits_at(k)
            .elements()
            .into_iter()
            .map(|d| Rational::new(d, pk.clone()))
            .collect();
        let mut next = BTreeMap::new();
        for (x, c) in &counts {
            for s in &shifts {
                *next.entry(x + s).or_insert(0u64) += c;
            }
        }
        counts = next;
    }
    let total = BigInt::from(3u32).pow(n as u32);
    DiscreteMeasure {
        atoms: counts
            .into_iter()
            .map(|(x, c)| (x, Rational::new(BigInt::from(c), total.clone())))
            .collect(),
    }
}

/// Verdict for a structural report, used by callers that gate on it.
pub fn require_structure(system: &MoranSystem, horizon: u64) -> Result<(), CheckReport> {
    let r = system.validate_structure(horizon);
    if r.verdict == Verdict::Pass {
        Ok(())
    } else {
        Err(r)
    }
}
