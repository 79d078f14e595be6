//! Candidate spectra and their certification.

pub mod mapping;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::exactnum::{frac_of_ratio, phase_eval, ComplexVal, Rational};
use crate::fourier::{mu_hat_zero_exact, TriState};
use crate::moran::{atoms, validate_congruence, DigitTriple, MoranSystem};
use crate::report::{num, CheckReport, Verdict};
pub use mapping::{maximal_orthogonal_set, q_profile, MaximalMapping, Word};

/// Largest `n` for which `3^n` points are enumerated.
pub const MAX_ENUM_DEPTH: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectraError {
    #[error("congruence hypothesis fails at n = {0}")]
    Congruence(u64),
    #[error("depth {0} exceeds the enumeration budget of {MAX_ENUM_DEPTH}")]
    TooDeep(u64),
    #[error("atoms collide: expected {expected} distinct positions, found {found}")]
    AtomCollision { expected: usize, found: usize },
    #[error("size mismatch: {atoms} atoms but {points} frequencies")]
    SizeMismatch { atoms: usize, points: usize },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Finite set of exact frequencies, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpectrumSet {
    points: Vec<Rational>,
    provenance: Option<BTreeMap<Rational, Word>>,
}

impl SpectrumSet {
    pub fn from_points<I: IntoIterator<Item = Rational>>(points: I) -> Self {
        let set: BTreeSet<Rational> = points.into_iter().collect();
        Self {
            points: set.into_iter().collect(),
            provenance: None,
        }
    }

    /// Points tagged with the word that produced them; duplicates keep the first word.
    pub fn from_tagged<I: IntoIterator<Item = (Rational, Word)>>(tagged: I) -> Self {
        let mut prov = BTreeMap::new();
        for (x, w) in tagged {
            prov.entry(x).or_insert(w);
        }
        Self {
            points: prov.keys().cloned().collect(),
            provenance: Some(prov),
        }
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.points.binary_search(x).is_ok()
    }

    pub fn provenance(&self, x: &Rational) -> Option<&Word> {
        self.provenance.as_ref()?.get(x)
    }

    /// Distinct positive differences `λ − λ'`.
    pub fn positive_differences(&self) -> Vec<Rational> {
        let mut diffs = BTreeSet::new();
        for (i, x) in self.points.iter().enumerate() {
            for y in &self.points[i + 1..] {
                diffs.insert(y - x);
            }
        }
        diffs.into_iter().collect()
    }
}

/// `Λ_n = Σ_{i ≤ n} (P_i / 3){−1, 0, 1}`.
pub fn lambda_n(system: &MoranSystem, n: u64) -> Result<SpectrumSet, SpectraError> {
    if n > MAX_ENUM_DEPTH {
        return Err(SpectraError::TooDeep(n));
    }
    let cong = validate_congruence(system, n);
    if let Some(k) = cong.first_violation {
        return Err(SpectraError::Congruence(k));
    }
    let mut pts = vec![BigInt::zero()];
    let mut pk = BigInt::one();
    for k in 1..=n {
        pk *= system.p_at(k);
        let step = &pk / 3;
        pts = pts
            .iter()
            .flat_map(|x| [x - &step, x.clone(), x + &step])
            .collect();
    }
    Ok(SpectrumSet::from_points(
        pts.into_iter().map(Rational::from_integer),
    ))
}

/// Every nonzero difference of `Λ` must lie in `Z(μ̂)`.
pub fn orthogonality_exact(system: &MoranSystem, lambda: &SpectrumSet, depth: u64) -> CheckReport {
    const NAME: &str = "orthogonality";
    let diffs = lambda.positive_differences();
    // Z(μ̂) is symmetric, so positive differences suffice
    let states: Vec<TriState> = diffs
        .par_iter()
        .map(|d| mu_hat_zero_exact(system, d, depth))
        .collect();
    let mut yes = 0u64;
    let mut no = Vec::new();
    let mut unknown = Vec::new();
    for (d, s) in diffs.iter().zip(&states) {
        match s {
            TriState::ConfirmedYes(_) => yes += 1,
            TriState::ConfirmedNo => no.push(d.to_string()),
            TriState::UnknownUpToDepth(_) => unknown.push(d.to_string()),
        }
    }
    let (verdict, summary) = if !no.is_empty() {
        (
            Verdict::Fail,
            format!("{} differences are provably outside the zero set", no.len()),
        )
    } else if !unknown.is_empty() {
        (
            Verdict::Inconclusive,
            format!(
                "{} differences undecided up to depth {depth}",
                unknown.len()
            ),
        )
    } else {
        (
            Verdict::Pass,
            format!(
                "all {} distinct differences lie in the zero set",
                diffs.len()
            ),
        )
    };
    let mut r = CheckReport::new(NAME, verdict, summary)
        .with("points", lambda.len())
        .with("distinct_differences", diffs.len())
        .with("confirmed", yes)
        .with("confirmed_no", no.len())
        .with("unknown", unknown.len())
        .with("depth", depth);
    r.insert(
        "confirmed_no_examples",
        json!(no.iter().take(16).collect::<Vec<_>>()),
    );
    r.insert(
        "unknown_examples",
        json!(unknown.iter().take(16).collect::<Vec<_>>()),
    );
    r
}

/// `max |M M* − I|` for `M_{λ,x} = e^(−2πiλx) √w_x` over the atoms of `μ_n`.
///
/// Entries of `M M*` depend only on `λ − λ'`, and each is a sum of exactly
/// reduced phases over the atoms.
pub fn fourier_matrix_unitary(
    system: &MoranSystem,
    n: u64,
    lambda: &SpectrumSet,
) -> Result<f64, SpectraError> {
    if n > MAX_ENUM_DEPTH {
        return Err(SpectraError::TooDeep(n));
    }
    let mu = atoms(system, n);
    let expected = 3usize.pow(n as u32);
    if mu.len() != expected {
        return Err(SpectraError::AtomCollision {
            expected,
            found: mu.len(),
        });
    }
    if lambda.len() != expected {
        return Err(SpectraError::SizeMismatch {
            atoms: expected,
            points: lambda.len(),
        });
    }
    // atoms on the common denominator P_n, frequencies on their lcm
    let pn = system.product_p(n).abs();
    let xs: Vec<BigInt> = mu
        .atoms
        .iter()
        .map(|(x, _)| (x * Rational::from_integer(pn.clone())).to_integer())
        .collect();
    let ws: Vec<f64> = mu
        .atoms
        .iter()
        .map(|(_, w)| w.to_f64().unwrap_or(0.0))
        .collect();
    let lden = lambda
        .points()
        .iter()
        .fold(BigInt::one(), |acc, l| acc.lcm(l.denom()));
    let den = &lden * &pn;
    let diffs: BTreeSet<BigInt> = {
        let ls: Vec<BigInt> = lambda
            .points()
            .iter()
            .map(|l| (l * Rational::from_integer(lden.clone())).to_integer())
            .collect();
        let mut s = BTreeSet::new();
        for (i, x) in ls.iter().enumerate() {
            for y in &ls[i + 1..] {
                s.insert(y - x);
            }
        }
        s
    };
    let diag: f64 = ws.iter().sum();
    let diffs: Vec<BigInt> = diffs.into_iter().collect();
    let off: Vec<f64> = diffs
        .par_iter()
        .map(|d| {
            let mut acc = ComplexVal::new(0.0, 0.0);
            for (x, w) in xs.iter().zip(&ws) {
                let t = frac_of_ratio(&(d * x), &den);
                acc += crate::exactnum::unit_phase(t) * *w;
            }
            acc.norm()
        })
        .collect();
    Ok(off.into_iter().fold((diag - 1.0).abs(), f64::max))
}

/// `max |H H* − I|` with `H_{d,l} = e^(−2πi d l / p) / √3`.
pub fn hadamard_check(p: i64, d: [i64; 3], l: [i64; 3]) -> f64 {
    let h: Vec<Vec<ComplexVal>> = d
        .iter()
        .map(|&di| {
            l.iter()
                .map(|&lj| {
                    phase_eval::<f64>(&Rational::new(BigInt::from(di) * lj, BigInt::from(p)))
                        / 3f64.sqrt()
                })
                .collect()
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let g: ComplexVal = (0..3).map(|k| h[i][k] * h[j][k].conj()).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - ComplexVal::new(target, 0.0)).norm());
        }
    }
    worst
}

/// [`hadamard_check`] for `(p_n, D_n, {0, 1, 2}·p_n/3)` at each level up to `horizon`.
pub fn hadamard_levels(system: &MoranSystem, horizon: u64) -> CheckReport {
    let mut worst = 0.0f64;
    for n in 1..=horizon {
        let p = system.p_at(n);
        let DigitTriple { a, b } = system.digits(n);
        let (Some(pi), Some(ai), Some(bi)) = (p.to_i64(), a.to_i64(), b.to_i64()) else {
            return CheckReport::inconclusive(
                "hadamard",
                format!("level {n} exceeds 64-bit range"),
            )
            .with_violation(n);
        };
        if pi % 3 != 0 {
            return CheckReport::fail("hadamard", format!("p_{n} = {pi} is not divisible by 3"))
                .with_violation(n);
        }
        let r = hadamard_check(pi.abs(), [0, ai, bi], [0, pi.abs() / 3, 2 * (pi.abs() / 3)]);
        worst = worst.max(r);
        if r > 1e-12 {
            return CheckReport::fail("hadamard", format!("level {n} residual {r:.3e}"))
                .with_violation(n)
                .with("residual", num(r));
        }
    }
    CheckReport::pass(
        "hadamard",
        format!("(p_n, D_n, L_n) Hadamard for n ≤ {horizon}"),
    )
    .with("max_residual", num(worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter()
            .map(|&x| Rational::from_integer(x.into()))
            .collect()
    }

    #[test]
    fn lambda_examples() {
        let s = MoranSystem::constant(9, 1, 2);
        assert_eq!(
            lambda_n(&s, 1).unwrap().points(),
            ints(&[-3, 0, 3]).as_slice()
        );
        assert_eq!(
            lambda_n(&s, 2).unwrap().points(),
            ints(&[-30, -27, -24, -3, 0, 3, 24, 27, 30]).as_slice()
        );
        assert_eq!(
            lambda_n(&MoranSystem::constant(4, 1, 2), 1),
            Err(SpectraError::Congruence(1))
        );
    }

    #[test]
    fn orthogonality_examples() {
        let s = MoranSystem::constant(9, 1, 2);
        assert!(orthogonality_exact(&s, &lambda_n(&s, 2).unwrap(), 4).passed());
        let bad = SpectrumSet::from_points([rat(0, 1).unwrap(), rat(1, 3).unwrap()]);
        let r = orthogonality_exact(&s, &bad, 4);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(orthogonality_exact(&s, &SpectrumSet::from_points(ints(&[0])), 4).passed());
    }

    #[test]
    fn unitary_examples() {
        let s = MoranSystem::constant(9, 1, 2);
        assert!(fourier_matrix_unitary(&s, 1, &lambda_n(&s, 1).unwrap()).unwrap() < 1e-12);
        assert_eq!(
            fourier_matrix_unitary(&s, 0, &SpectrumSet::from_points(ints(&[0]))).unwrap(),
            0.0
        );
        assert!(fourier_matrix_unitary(&s, 2, &lambda_n(&s, 2).unwrap()).unwrap() < 1e-10);
        let collide = MoranSystem::parse("3", "prefix: 1; tail: 3", "prefix: 2; tail: 6").unwrap();
        assert!(matches!(
            fourier_matrix_unitary(&collide, 2, &lambda_n(&s, 2).unwrap()),
            Err(SpectraError::AtomCollision { .. })
        ));
        assert!(matches!(
            fourier_matrix_unitary(&s, 1, &lambda_n(&s, 2).unwrap()),
            Err(SpectraError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn hadamard_examples() {
        assert!(hadamard_check(3, [0, 1, 2], [0, 1, 2]) < 1e-15);
        assert!(hadamard_check(9, [0, 1, 2], [0, 3, 6]) < 1e-12);
        assert!(hadamard_check(4, [0, 1, 2], [0, 1, 2]) >= 0.3);
        let s = MoranSystem::parse("3*n^2", "odd: 3*n^3 + 1; even: 3*n + 1", "3*n^3 + 2").unwrap();
        assert!(hadamard_levels(&s, 30).passed());
    }

    #[test]
    fn provenance_is_kept() {
        let x = rat(3, 1).unwrap();
        let s = SpectrumSet::from_tagged([(x.clone(), Word::from_letters(&[1]))]);
        assert_eq!(
            s.provenance(&x).map(|w| w.to_string()),
            Some("1".to_string())
        );
    }
}
