//! Non-spectrality criteria for constant contraction `p_n = p` with a digit
//! that is a geometric power `c·q^m` of a smaller base along a subsequence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde_json::json;

use super::Window;
use crate::moran::{MoranSystem, SequenceExpr};
use crate::report::{CheckReport, Verdict};

fn fail(check: &str, msg: String, at: Option<u64>) -> CheckReport {
    let mut r = CheckReport::fail(check, msg);
    r.first_violation = at;
    r
}

/// `p_n = p` and `gcd(a_n, b_n) = 1` on the window.
fn constant_coprime(
    check: &str,
    system: &MoranSystem,
    p: &BigInt,
    window: &Window,
) -> Option<CheckReport> {
    for n in window.iter() {
        let pn = system.p_at(n);
        if &pn != p {
            return Some(fail(
                check,
                format!("p_{n} = {pn} differs from p = {p}"),
                Some(n),
            ));
        }
        let g = system.digit_gcd(n);
        if !g.is_one() {
            return Some(fail(check, format!("gcd(a_{n}, b_{n}) = {g}"), Some(n)));
        }
    }
    None
}

fn is_digit(system: &MoranSystem, m: u64, v: &BigInt) -> bool {
    let d = system.digits(m);
    &d.a == v || &d.b == v
}

/// Non-spectrality for `p_n = p > q ≥ 2`, coprime digits and
/// `c·q^(ω_n) ∈ {a_(ω_n), b_(ω_n)}` along a strictly increasing `ω`.
pub fn thm15_check(
    system: &MoranSystem,
    p: i64,
    q: i64,
    c: i64,
    omega: &SequenceExpr,
    window: &Window,
) -> CheckReport {
    const CHECK: &str = "thm15";
    if !(p > q && q >= 2) {
        return fail(
            CHECK,
            format!("p > q ≥ 2 violated (p = {p}, q = {q})"),
            None,
        );
    }
    if c < 1 {
        return fail(CHECK, format!("c = {c} must be a positive integer"), None);
    }
    let pb = BigInt::from(p);
    if let Some(r) = constant_coprime(CHECK, system, &pb, window) {
        return r;
    }
    let mut prev: Option<BigInt> = None;
    let mut matched = Vec::new();
    for n in window.iter() {
        let w = omega.eval(n);
        if w < BigInt::one() || prev.as_ref().is_some_and(|pw| &w <= pw) {
            return fail(
                CHECK,
                format!("ω_{n} = {w} breaks strict increase from a positive start"),
                Some(n),
            );
        }
        prev = Some(w.clone());
        if w > BigInt::from(window.end) {
            continue;
        }
        let m = u64::try_from(&w).unwrap_or(u64::MAX);
        let target = BigInt::from(c) * num_traits::pow(BigInt::from(q), m as usize);
        if !is_digit(system, m, &target) {
            return fail(
                CHECK,
                format!("c·q^ω_{n} = {c}·{q}^{m} is neither a_{m} nor b_{m}"),
                Some(m),
            );
        }
        matched.push(m);
    }
    let evidence = |r: CheckReport| {
        r.with("p", p)
            .with("q", q)
            .with("c", c)
            .with("omega", omega.to_string())
            .with("window", json!(window))
    };
    if matched.is_empty() {
        return evidence(CheckReport::inconclusive(
            CHECK,
            "no ω_n falls inside the window; the digit condition was never tested",
        ));
    }
    evidence(CheckReport::new(
        CHECK,
        Verdict::Pass,
        format!(
            "non-spectral by the geometric-digit criterion (hypotheses verified up to n = {})",
            window.end
        ),
    ))
    .with("omega_values_checked", matched.len())
    .with("last_omega_checked", *matched.last().unwrap_or(&0))
}

/// The coprime-power special case `q^n ∈ {a_n, b_n}` with `p > q ≥ 2·gcd(p, q)`.
///
/// On pass the report embeds the geometric-digit check with `c = 1`, `ω_n = n`,
/// which must also pass since its hypotheses are weaker.
pub fn thm46_check(system: &MoranSystem, p: i64, q: i64, window: &Window) -> CheckReport {
    const CHECK: &str = "thm46";
    let g = p.gcd(&q);
    if !(p > q && q >= 2 * g && q >= 2) {
        return fail(
            CHECK,
            format!("p > q ≥ 2·gcd(p, q) violated (p = {p}, q = {q}, gcd = {g})"),
            None,
        );
    }
    if let Some(r) = constant_coprime(CHECK, system, &BigInt::from(p), window) {
        return r;
    }
    let mut power = BigInt::one();
    for n in window.iter() {
        if n == window.start {
            power = num_traits::pow(BigInt::from(q), n as usize);
        } else {
            power *= q;
        }
        if !is_digit(system, n, &power) {
            return fail(
                CHECK,
                format!("{q}^{n} is neither a_{n} nor b_{n}"),
                Some(n),
            );
        }
    }
    let weaker = thm15_check(system, p, q, 1, &SequenceExpr::index(), window);
    let verdict = Verdict::Pass.and(weaker.verdict);
    CheckReport::new(
        CHECK,
        verdict,
        format!(
            "non-spectral by the coprime-power criterion (hypotheses verified up to n = {})",
            window.end
        ),
    )
    .with("p", p)
    .with("q", q)
    .with("window", json!(window))
    .with("geometric_digit_check", json!(weaker))
}
