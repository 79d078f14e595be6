//! Closed-form integer sequences `n ↦ x_n` (n ≥ 1) and their text grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := INT | 'n' | factor '^' INT | INT '^' 'n' | INT '^' '(' 'n' ('+'|'-') INT ')' | '(' expr ')'
//! top    := expr | 'odd:' expr ';' 'even:' expr | 'prefix:' INT (',' INT)* ';' 'tail:' top
//! ```
//!
//! Expressions are kept in a normal form by the constructors in this module,
//! so `parse(e.to_string()) == e` for every expression built through them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SequenceExpr {
    /// `Σ coeffs[i] · n^i`, no trailing zero coefficients (zero is `[]`).
    Polynomial(Vec<BigInt>),
    /// `c · q^(n + offset)`; normalized so that `|q| ≥ 2` and `offset ∈ {0, -1}`.
    Geometric {
        c: BigInt,
        q: BigInt,
        offset: i64,
    },
    ParityPiecewise {
        odd: Box<SequenceExpr>,
        even: Box<SequenceExpr>,
    },
    /// `values[n-1]` for `n ≤ values.len()`, `tail(n)` afterwards.
    ExplicitPrefix {
        values: Vec<BigInt>,
        tail: Box<SequenceExpr>,
    },
    Sum(Box<SequenceExpr>, Box<SequenceExpr>),
    Product(Box<SequenceExpr>, Box<SequenceExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("parse error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("geometric term {q}^(n{offset:+}) is not an integer at n = 1")]
    NegativeExponent { q: BigInt, offset: i64 },
    #[error("geometric base 0 is not supported")]
    ZeroBase,
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

impl SequenceExpr {
    pub fn constant<I: Into<BigInt>>(c: I) -> Self {
        SequenceExpr::Polynomial(trim(vec![c.into()]))
    }

    pub fn zero() -> Self {
        SequenceExpr::Polynomial(Vec::new())
    }

    /// `n`
    pub fn index() -> Self {
        SequenceExpr::Polynomial(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn polynomial<I: Into<BigInt>>(coeffs: impl IntoIterator<Item = I>) -> Self {
        SequenceExpr::Polynomial(trim(coeffs.into_iter().map(Into::into).collect()))
    }

    /// `c · q^(n + offset)`.
    pub fn geometric<C: Into<BigInt>, Q: Into<BigInt>>(
        c: C,
        q: Q,
        offset: i64,
    ) -> Result<Self, SequenceError> {
        let (c, q) = (c.into(), q.into());
        if q.is_zero() {
            return Err(SequenceError::ZeroBase);
        }
        if c.is_zero() {
            return Ok(Self::zero());
        }
        if q.abs().is_one() {
            // (±1)^(n+offset): fold the offset parity into c
            let c = if q.is_negative() && offset.rem_euclid(2) == 1 {
                -c
            } else {
                c
            };
            if q.is_one() {
                return Ok(Self::constant(c));
            }
            return Ok(SequenceExpr::Geometric { c, q, offset: 0 });
        }
        if offset < -1 {
            return Err(SequenceError::NegativeExponent { q, offset });
        }
        if offset > 0 {
            let c = c * Pow::pow(&q, offset as u32);
            return Ok(SequenceExpr::Geometric { c, q, offset: 0 });
        }
        if offset == -1 && c.is_multiple_of(&q) {
            return Ok(SequenceExpr::Geometric {
                c: c / &q,
                q,
                offset: 0,
            });
        }
        Ok(SequenceExpr::Geometric { c, q, offset })
    }

    pub fn parity(odd: SequenceExpr, even: SequenceExpr) -> Self {
        let odd = odd.branch_for(true);
        let even = even.branch_for(false);
        if odd == even {
            return odd;
        }
        // the grammar has no prefix inside a parity branch, so lift it outward
        let len = odd.prefix_len().max(even.prefix_len());
        if len > 0 {
            let values: Vec<BigInt> = (1..=len as u64)
                .map(|n| {
                    if n % 2 == 1 {
                        odd.eval(n)
                    } else {
                        even.eval(n)
                    }
                })
                .collect();
            let tail = SequenceExpr::parity(odd.tail_part().clone(), even.tail_part().clone());
            return SequenceExpr::prefix(values, tail);
        }
        SequenceExpr::ParityPiecewise {
            odd: Box::new(odd),
            even: Box::new(even),
        }
    }

    /// Strips nested parity selection for a branch that only sees odd (or even) n.
    fn branch_for(self, odd: bool) -> SequenceExpr {
        match self {
            SequenceExpr::ParityPiecewise { odd: o, even: e } => {
                if odd {
                    *o
                } else {
                    *e
                }
            }
            other => other,
        }
    }

    pub fn prefix<I: Into<BigInt>>(
        values: impl IntoIterator<Item = I>,
        tail: SequenceExpr,
    ) -> Self {
        let mut values: Vec<BigInt> = values.into_iter().map(Into::into).collect();
        let (values, tail) = match tail {
            SequenceExpr::ExplicitPrefix {
                values: inner,
                tail,
            } => {
                // an inner prefix covers indices 1..=inner.len(); only the part
                // beyond our own prefix is still visible
                for (i, v) in inner.into_iter().enumerate() {
                    if i >= values.len() {
                        values.push(v);
                    }
                }
                (values, *tail)
            }
            t => (values, t),
        };
        let mut values = values;
        // drop trailing prefix entries the tail already produces
        while let Some(last) = values.last() {
            if tail.eval(values.len() as u64) == *last {
                values.pop();
            } else {
                break;
            }
        }
        if values.is_empty() {
            return tail;
        }
        SequenceExpr::ExplicitPrefix {
            values,
            tail: Box::new(tail),
        }
    }

    fn prefix_len(&self) -> usize {
        match self {
            SequenceExpr::ExplicitPrefix { values, .. } => values.len(),
            _ => 0,
        }
    }

    fn tail_part(&self) -> &SequenceExpr {
        match self {
            SequenceExpr::ExplicitPrefix { tail, .. } => tail,
            other => other,
        }
    }

    fn poly_coeffs(&self) -> Option<&[BigInt]> {
        match self {
            SequenceExpr::Polynomial(c) => Some(c),
            _ => None,
        }
    }

    fn as_constant(&self) -> Option<BigInt> {
        match self.poly_coeffs() {
            Some([]) => Some(BigInt::zero()),
            Some([c]) => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SequenceExpr::Polynomial(c) if c.is_empty())
    }

    fn split_parity(&self) -> (SequenceExpr, SequenceExpr) {
        match self {
            SequenceExpr::ParityPiecewise { odd, even } => ((**odd).clone(), (**even).clone()),
            other => (other.clone(), other.clone()),
        }
    }

    fn scale(self, k: &BigInt) -> SequenceExpr {
        use SequenceExpr::*;
        match self {
            Polynomial(c) => Polynomial(trim(c.into_iter().map(|x| x * k).collect())),
            Geometric { c, q, offset } => {
                SequenceExpr::geometric(c * k, q, offset).expect("normalized geometric")
            }
            Sum(a, b) => a.scale(k).add(b.scale(k)),
            Product(a, b) => {
                let a = a.scale(k);
                match a {
                    // keep the scalar folded into a simple left factor
                    Polynomial(_) | Geometric { .. } => a.mul(*b),
                    a => Product(Box::new(a), b),
                }
            }
            other => SequenceExpr::constant(k.clone()).mul(other),
        }
    }

    pub fn pow(self, k: u32) -> SequenceExpr {
        let mut acc = SequenceExpr::constant(1);
        for _ in 0..k {
            acc = acc.mul(self.clone());
        }
        acc
    }

    /// Value at index `n ≥ 1`.
    pub fn eval(&self, n: u64) -> BigInt {
        match self {
            SequenceExpr::Polynomial(c) => {
                let x = BigInt::from(n);
                c.iter().rev().fold(BigInt::zero(), |acc, ci| acc * &x + ci)
            }
            SequenceExpr::Geometric { c, q, offset } => {
                let e = n as i64 + offset;
                debug_assert!(e >= 0);
                c * Pow::pow(q, e.max(0) as u64)
            }
            SequenceExpr::ParityPiecewise { odd, even } => {
                if n % 2 == 1 {
                    odd.eval(n)
                } else {
                    even.eval(n)
                }
            }
            SequenceExpr::ExplicitPrefix { values, tail } => {
                let i = n as usize;
                if i >= 1 && i <= values.len() {
                    values[i - 1].clone()
                } else {
                    tail.eval(n)
                }
            }
            SequenceExpr::Sum(a, b) => a.eval(n) + b.eval(n),
            SequenceExpr::Product(a, b) => a.eval(n) * b.eval(n),
        }
    }

    pub fn parse(s: &str) -> Result<SequenceExpr, SequenceError> {
        let mut p = Parser::new(s)?;
        let e = p.top()?;
        p.expect_end()?;
        Ok(e)
    }

    /// True when the expression is built only from polynomial and geometric terms.
    pub fn is_closed_form(&self) -> bool {
        match self {
            SequenceExpr::Polynomial(_) | SequenceExpr::Geometric { .. } => true,
            SequenceExpr::Sum(a, b) | SequenceExpr::Product(a, b) => {
                a.is_closed_form() && b.is_closed_form()
            }
            _ => false,
        }
    }

    /// Explicit bound `|x_n| ≤ U(n)` valid for every `n ≥ 1`.
    pub fn upper_bound(&self) -> UpperBound {
        use SequenceExpr::*;
        match self {
            Polynomial(c) => UpperBound(
                c.iter()
                    .enumerate()
                    .filter(|(_, ci)| !ci.is_zero())
                    .map(|(i, ci)| Monomial {
                        coef: Rational::from_integer(ci.abs()),
                        degree: i as u32,
                        base: BigInt::one(),
                    })
                    .collect(),
            ),
            Geometric { c, q, offset } => {
                let qa = q.abs();
                let coef = if *offset < 0 {
                    Rational::new(c.abs(), Pow::pow(&qa, (-offset) as u32))
                } else {
                    Rational::from_integer(c.abs() * Pow::pow(&qa, *offset as u32))
                };
                UpperBound(vec![Monomial {
                    coef,
                    degree: 0,
                    base: qa,
                }])
            }
            ParityPiecewise { odd, even } => {
                let mut m = odd.upper_bound().0;
                m.extend(even.upper_bound().0);
                UpperBound(m).simplified()
            }
            ExplicitPrefix { values, tail } => {
                let mut m = tail.upper_bound().0;
                let vmax = values.iter().map(Signed::abs).max().unwrap_or_default();
                if !vmax.is_zero() {
                    m.push(Monomial {
                        coef: Rational::from_integer(vmax),
                        degree: 0,
                        base: BigInt::one(),
                    });
                }
                UpperBound(m).simplified()
            }
            Sum(a, b) => {
                let mut m = a.upper_bound().0;
                m.extend(b.upper_bound().0);
                UpperBound(m).simplified()
            }
            Product(a, b) => {
                let (ua, ub) = (a.upper_bound(), b.upper_bound());
                let mut m = Vec::with_capacity(ua.0.len() * ub.0.len());
                for x in &ua.0 {
                    for y in &ub.0 {
                        m.push(Monomial {
                            coef: &x.coef * &y.coef,
                            degree: x.degree + y.degree,
                            base: &x.base * &y.base,
                        });
                    }
                }
                UpperBound(m).simplified()
            }
        }
    }

    /// Asymptotic order `n^d · B^n` bounding `|x_n|` from above.
    pub fn upper_growth(&self) -> Option<Growth> {
        self.upper_bound().dominant()
    }

    /// Order `n^d · B^n` with `|x_n| ≥ c · n^d · B^n` for all large `n` and some `c > 0`.
    pub fn lower_growth(&self) -> Option<Growth> {
        use SequenceExpr::*;
        match self {
            Polynomial(c) => (!c.is_empty()).then(|| Growth {
                base: BigInt::one(),
                degree: (c.len() - 1) as u32,
            }),
            Geometric { q, .. } => Some(Growth {
                base: q.abs(),
                degree: 0,
            }),
            ParityPiecewise { odd, even } => {
                let (o, e) = (odd.lower_growth()?, even.lower_growth()?);
                Some(o.min(e))
            }
            ExplicitPrefix { tail, .. } => tail.lower_growth(),
            Sum(a, b) => {
                if let (Some(la), Some(ub)) = (a.lower_growth(), b.upper_growth()) {
                    if ub < la {
                        return Some(la);
                    }
                }
                if let (Some(lb), Some(ua)) = (b.lower_growth(), a.upper_growth()) {
                    if ua < lb {
                        return Some(lb);
                    }
                }
                None
            }
            Product(a, b) => {
                let (la, lb) = (a.lower_growth()?, b.lower_growth()?);
                Some(Growth {
                    base: la.base * lb.base,
                    degree: la.degree + lb.degree,
                })
            }
        }
    }

    /// Eventual magnitudes when `|x_n|` is eventually constant (one entry) or
    /// depends only on the parity of `n` (odd entry first).
    pub fn periodic_magnitude(&self) -> Option<Vec<BigInt>> {
        use SequenceExpr::*;
        match self {
            Polynomial(c) if c.len() <= 1 => {
                Some(vec![c.first().map(Signed::abs).unwrap_or_default()])
            }
            Geometric { c, q, .. } if q.abs().is_one() => Some(vec![c.abs()]),
            ParityPiecewise { odd, even } => {
                let (o, e) = (odd.periodic_magnitude()?, even.periodic_magnitude()?);
                let odd_mag = o[0].clone();
                let even_mag = if e.len() == 2 {
                    e[1].clone()
                } else {
                    e[0].clone()
                };
                if odd_mag == even_mag {
                    Some(vec![odd_mag])
                } else {
                    Some(vec![odd_mag, even_mag])
                }
            }
            ExplicitPrefix { tail, .. } => tail.periodic_magnitude(),
            Product(a, b) => {
                let (pa, pb) = (a.periodic_magnitude()?, b.periodic_magnitude()?);
                let at = |v: &Vec<BigInt>, i: usize| v[i.min(v.len() - 1)].clone();
                let len = pa.len().max(pb.len());
                Some((0..len).map(|i| at(&pa, i) * at(&pb, i)).collect())
            }
            _ => None,
        }
    }

    /// Eventually nondecreasing lower bound on `|x_n|`, for pure polynomial or
    /// geometric expressions only.
    pub fn eventual_lower_bound(&self) -> Option<LowerBound> {
        match self {
            SequenceExpr::Polynomial(c) if !c.is_empty() => {
                let d = c.len() - 1;
                let lead = c[d].abs();
                let rest: BigInt = c[..d].iter().map(Signed::abs).sum();
                Some(LowerBound::Poly {
                    lead,
                    rest,
                    degree: d as u32,
                })
            }
            SequenceExpr::Geometric { c, q, offset } => {
                let qa = q.abs();
                let coef = if *offset < 0 {
                    Rational::new(c.abs(), qa.clone())
                } else {
                    Rational::from_integer(c.abs())
                };
                Some(LowerBound::Geo { coef, base: qa })
            }
            _ => None,
        }
    }
}

/// `coef · n^degree · base^n`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coef: Rational,
    pub degree: u32,
    pub base: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperBound(pub Vec<Monomial>);

impl UpperBound {
    fn simplified(mut self) -> Self {
        self.0
            .sort_by(|a, b| (a.degree, &a.base).cmp(&(b.degree, &b.base)));
        let mut out: Vec<Monomial> = Vec::with_capacity(self.0.len());
        for m in self.0 {
            match out.last_mut() {
                Some(last) if last.degree == m.degree && last.base == m.base => last.coef += m.coef,
                _ => out.push(m),
            }
        }
        UpperBound(out)
    }

    pub fn eval(&self, n: u64) -> Rational {
        let nn = BigInt::from(n);
        self.0
            .iter()
            .map(|m| {
                &m.coef * Rational::from_integer(Pow::pow(&nn, m.degree) * Pow::pow(&m.base, n))
            })
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Upper bound on `U(n+1) / U(n)`: the largest `base · ((n+1)/n)^degree`.
    pub fn step_ratio(&self, n: u64) -> Rational {
        let r = Rational::new(BigInt::from(n + 1), BigInt::from(n));
        self.0
            .iter()
            .map(|m| Rational::from_integer(m.base.clone()) * Pow::pow(&r, m.degree))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn dominant(&self) -> Option<Growth> {
        self.0
            .iter()
            .map(|m| Growth {
                base: m.base.clone(),
                degree: m.degree,
            })
            .max()
    }
}

/// Growth order `n^degree · base^n`, compared by base first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Growth {
    pub base: BigInt,
    pub degree: u32,
}

impl Ord for Growth {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.base, self.degree).cmp(&(&other.base, other.degree))
    }
}

impl PartialOrd for Growth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Growth {
    pub fn is_bounded(&self) -> bool {
        self.base.is_one() && self.degree == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LowerBound {
    /// `n^(d-1) · (lead·n − rest)`, or `lead` when `d = 0`.
    Poly {
        lead: BigInt,
        rest: BigInt,
        degree: u32,
    },
    /// `coef · base^n`
    Geo { coef: Rational, base: BigInt },
}

impl LowerBound {
    pub fn eval(&self, n: u64) -> Rational {
        let nn = BigInt::from(n);
        match self {
            LowerBound::Poly {
                lead, degree: 0, ..
            } => Rational::from_integer(lead.clone()),
            LowerBound::Poly { lead, rest, degree } => {
                Rational::from_integer(Pow::pow(&nn, degree - 1) * (lead * &nn - rest))
            }
            LowerBound::Geo { coef, base } => coef * Rational::from_integer(Pow::pow(base, n)),
        }
    }

    /// First index from which the bound is positive and nondecreasing.
    pub fn monotone_from(&self) -> u64 {
        match self {
            LowerBound::Poly { degree: 0, .. } | LowerBound::Geo { .. } => 1,
            LowerBound::Poly { lead, rest, .. } => {
                let k: BigInt = (rest / lead) + 1;
                k.to_u64().unwrap_or(u64::MAX).max(1)
            }
        }
    }
}

// ---------------------------------------------------------------- display

fn needs_parens_in_product(e: &SequenceExpr) -> bool {
    match e {
        SequenceExpr::Sum(..) => true,
        SequenceExpr::Polynomial(c) => c.iter().filter(|x| !x.is_zero()).count() > 1,
        _ => false,
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, c: &[BigInt]) -> fmt::Result {
    if c.is_empty() {
        return write!(f, "0");
    }
    let mut first = true;
    for (d, ci) in c.iter().enumerate().rev() {
        if ci.is_zero() {
            continue;
        }
        let mag = ci.abs();
        if first {
            if ci.is_negative() && d > 0 {
                // a leading sign belongs to an INT, so keep the coefficient explicit
                write!(f, "{ci}*")?;
            } else if d == 0 || !mag.is_one() {
                write!(f, "{ci}")?;
                if d > 0 {
                    write!(f, "*")?;
                }
            }
        } else {
            write!(f, " {} ", if ci.is_negative() { '-' } else { '+' })?;
            if d == 0 || !mag.is_one() {
                write!(f, "{mag}")?;
                if d > 0 {
                    write!(f, "*")?;
                }
            }
        }
        match d {
            0 => {}
            1 => write!(f, "n")?,
            _ => write!(f, "n^{d}")?,
        }
        first = false;
    }
    Ok(())
}

impl Add for SequenceExpr {
    type Output = SequenceExpr;

    fn add(self, rhs: SequenceExpr) -> SequenceExpr {
        use SequenceExpr::*;
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if matches!(self, ExplicitPrefix { .. }) || matches!(rhs, ExplicitPrefix { .. }) {
            let len = self.prefix_len().max(rhs.prefix_len());
            let values: Vec<BigInt> = (1..=len as u64)
                .map(|n| self.eval(n) + rhs.eval(n))
                .collect();
            let tail = self.tail_part().clone().add(rhs.tail_part().clone());
            return SequenceExpr::prefix(values, tail);
        }
        if let ParityPiecewise { odd, even } = &self {
            let (o2, e2) = rhs.split_parity();
            return SequenceExpr::parity((**odd).clone().add(o2), (**even).clone().add(e2));
        }
        if let ParityPiecewise { .. } = &rhs {
            return rhs.add(self);
        }
        match (&self, &rhs) {
            (Polynomial(a), Polynomial(b)) => {
                let len = a.len().max(b.len());
                let z = BigInt::zero();
                Polynomial(trim(
                    (0..len)
                        .map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z))
                        .collect(),
                ))
            }
            (
                Geometric {
                    c: c1,
                    q: q1,
                    offset: o1,
                },
                Geometric {
                    c: c2,
                    q: q2,
                    offset: o2,
                },
            ) if q1 == q2 && o1 == o2 => {
                SequenceExpr::geometric(c1 + c2, q1.clone(), *o1).expect("normalized geometric")
            }
            _ => Sum(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Mul for SequenceExpr {
    type Output = SequenceExpr;

    fn mul(self, rhs: SequenceExpr) -> SequenceExpr {
        use SequenceExpr::*;
        if self.is_zero() || rhs.is_zero() {
            return SequenceExpr::zero();
        }
        if self.as_constant().is_some_and(|c| c.is_one()) {
            return rhs;
        }
        if rhs.as_constant().is_some_and(|c| c.is_one()) {
            return self;
        }
        if matches!(self, ExplicitPrefix { .. }) || matches!(rhs, ExplicitPrefix { .. }) {
            let len = self.prefix_len().max(rhs.prefix_len());
            let values: Vec<BigInt> = (1..=len as u64)
                .map(|n| self.eval(n) * rhs.eval(n))
                .collect();
            let tail = self.tail_part().clone().mul(rhs.tail_part().clone());
            return SequenceExpr::prefix(values, tail);
        }
        if let ParityPiecewise { odd, even } = &self {
            let (o2, e2) = rhs.split_parity();
            return SequenceExpr::parity((**odd).clone().mul(o2), (**even).clone().mul(e2));
        }
        if let ParityPiecewise { .. } = &rhs {
            return rhs.mul(self);
        }
        if let Some(k) = self.as_constant() {
            return rhs.scale(&k);
        }
        if let Some(k) = rhs.as_constant() {
            return self.scale(&k);
        }
        match (&self, &rhs) {
            (Polynomial(a), Polynomial(b)) => {
                let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        out[i + j] += x * y;
                    }
                }
                Polynomial(trim(out))
            }
            (
                Geometric {
                    c: c1,
                    q: q1,
                    offset: o1,
                },
                Geometric {
                    c: c2,
                    q: q2,
                    offset: o2,
                },
            ) => {
                let q = q1 * q2;
                let (c, off) = match (o1, o2) {
                    (0, 0) => (c1 * c2, 0),
                    (-1, -1) => (c1 * c2, -1),
                    (0, _) => (c1 * c2 * q1, -1),
                    _ => (c1 * c2 * q2, -1),
                };
                SequenceExpr::geometric(c, q, off).expect("normalized geometric")
            }
            _ => Product(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Neg for SequenceExpr {
    type Output = SequenceExpr;

    fn neg(self) -> SequenceExpr {
        SequenceExpr::constant(-1).mul(self)
    }
}

impl Sub for SequenceExpr {
    type Output = SequenceExpr;

    fn sub(self, rhs: SequenceExpr) -> SequenceExpr {
        self.add(rhs.neg())
    }
}

impl fmt::Display for SequenceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceExpr::Polynomial(c) => write_poly(f, c),
            SequenceExpr::Geometric { c, q, offset } => {
                if !c.is_one() {
                    write!(f, "{c}*")?;
                }
                match offset.cmp(&0) {
                    Ordering::Equal => write!(f, "{q}^n"),
                    Ordering::Less => write!(f, "{q}^(n - {})", -offset),
                    Ordering::Greater => write!(f, "{q}^(n + {offset})"),
                }
            }
            SequenceExpr::ParityPiecewise { odd, even } => write!(f, "odd: {odd}; even: {even}"),
            SequenceExpr::ExplicitPrefix { values, tail } => {
                write!(f, "prefix: ")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "; tail: {tail}")
            }
            SequenceExpr::Sum(a, b) => {
                write!(f, "{a} + ")?;
                if matches!(**b, SequenceExpr::Sum(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            SequenceExpr::Product(a, b) => {
                if needs_parens_in_product(a) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, "*")?;
                if needs_parens_in_product(b) || matches!(**b, SequenceExpr::Product(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

// ----------------------------------------------------------------- parser

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    N,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Semi,
    Comma,
    Keyword(&'static str),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, SequenceError> {
        let bytes = src.as_bytes();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let col = i + 1;
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    i += 1;
                    continue;
                }
                b'0'..=b'9' => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let v: BigInt = src[start..i].parse().expect("digits");
                    toks.push((col, Tok::Int(v)));
                    continue;
                }
                b'+' => toks.push((col, Tok::Plus)),
                b'-' => toks.push((col, Tok::Minus)),
                b'*' => toks.push((col, Tok::Star)),
                b'^' => toks.push((col, Tok::Caret)),
                b'(' => toks.push((col, Tok::LParen)),
                b')' => toks.push((col, Tok::RParen)),
                b';' => toks.push((col, Tok::Semi)),
                b',' => toks.push((col, Tok::Comma)),
                b'a'..=b'z' => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                        i += 1;
                    }
                    let word = &src[start..i];
                    if word == "n" {
                        toks.push((col, Tok::N));
                        continue;
                    }
                    let kw = match word {
                        "odd" => "odd",
                        "even" => "even",
                        "prefix" => "prefix",
                        "tail" => "tail",
                        _ => {
                            return Err(SequenceError::Parse {
                                pos: col,
                                msg: format!("unknown identifier '{word}'"),
                            })
                        }
                    };
                    let mut j = i;
                    while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                        j += 1;
                    }
                    if j >= bytes.len() || bytes[j] != b':' {
                        return Err(SequenceError::Parse {
                            pos: col,
                            msg: format!("expected ':' after '{word}'"),
                        });
                    }
                    toks.push((col, Tok::Keyword(kw)));
                    i = j + 1;
                    continue;
                }
                _ => {
                    return Err(SequenceError::Parse {
                        pos: col,
                        msg: format!("unexpected character '{}'", c as char),
                    })
                }
            }
            i += 1;
        }
        Ok(Self {
            toks,
            pos: 0,
            end: src.len() + 1,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SequenceError> {
        Err(SequenceError::Parse {
            pos: self.col(),
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), SequenceError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expect_end(&self) -> Result<(), SequenceError> {
        if self.pos < self.toks.len() {
            self.err("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn signed_int(&mut self) -> Result<BigInt, SequenceError> {
        let neg = self.eat(&Tok::Minus);
        match self.bump() {
            Some(Tok::Int(v)) => Ok(if neg { -v } else { v }),
            _ => {
                self.pos -= 1;
                self.err("expected integer")
            }
        }
    }

    fn top(&mut self) -> Result<SequenceExpr, SequenceError> {
        match self.peek() {
            Some(Tok::Keyword("odd")) => {
                self.bump();
                let odd = self.expr()?;
                self.expect(&Tok::Semi, "';'")?;
                if self.bump() != Some(Tok::Keyword("even")) {
                    self.pos -= 1;
                    return self.err("expected 'even:'");
                }
                let even = self.expr()?;
                Ok(SequenceExpr::parity(odd, even))
            }
            Some(Tok::Keyword("prefix")) => {
                self.bump();
                let mut values = vec![self.signed_int()?];
                while self.eat(&Tok::Comma) {
                    values.push(self.signed_int()?);
                }
                self.expect(&Tok::Semi, "';'")?;
                if self.bump() != Some(Tok::Keyword("tail")) {
                    self.pos -= 1;
                    return self.err("expected 'tail:'");
                }
                let tail = self.top()?;
                Ok(SequenceExpr::prefix(values, tail))
            }
            Some(Tok::Keyword(k)) => {
                let k = *k;
                self.err(format!("'{k}:' not allowed here"))
            }
            _ => self.expr(),
        }
    }

    fn expr(&mut self) -> Result<SequenceExpr, SequenceError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(self.term()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SequenceExpr, SequenceError> {
        let mut acc = self.factor()?;
        while self.eat(&Tok::Star) {
            acc = acc.mul(self.factor()?);
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<u32, SequenceError> {
        match self.bump() {
            Some(Tok::Int(v)) => match v.to_u32() {
                Some(k) => Ok(k),
                None => {
                    self.pos -= 1;
                    self.err("exponent too large")
                }
            },
            _ => {
                self.pos -= 1;
                self.err("expected integer exponent")
            }
        }
    }

    fn factor(&mut self) -> Result<SequenceExpr, SequenceError> {
        let base = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                if let Some(Tok::Int(_)) = self.peek() {
                    let Some(Tok::Int(v)) = self.bump() else {
                        unreachable!()
                    };
                    self.int_factor(-v)?
                } else {
                    return Ok(self.factor()?.neg());
                }
            }
            Some(Tok::Int(_)) => {
                let Some(Tok::Int(v)) = self.bump() else {
                    unreachable!()
                };
                self.int_factor(v)?
            }
            Some(Tok::N) => {
                self.bump();
                SequenceExpr::index()
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                e
            }
            _ => return self.err("expected integer, 'n' or '('"),
        };
        let mut acc = base;
        while self.peek() == Some(&Tok::Caret) {
            self.bump();
            let k = self.exponent()?;
            acc = acc.pow(k);
        }
        Ok(acc)
    }

    /// Integer already consumed; handles `INT ^ n` and `INT ^ (n ± INT)`.
    fn int_factor(&mut self, v: BigInt) -> Result<SequenceExpr, SequenceError> {
        if self.peek() != Some(&Tok::Caret) {
            return Ok(SequenceExpr::constant(v));
        }
        let save = self.pos;
        self.bump();
        match self.peek() {
            Some(Tok::N) => {
                self.bump();
                self.geometric(v, 0)
            }
            Some(Tok::LParen) if self.toks.get(self.pos + 1).map(|t| &t.1) == Some(&Tok::N) => {
                self.bump();
                self.bump();
                let sign = match self.bump() {
                    Some(Tok::Plus) => 1i64,
                    Some(Tok::Minus) => -1,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected '+' or '-' in exponent");
                    }
                };
                let off = match self.bump() {
                    Some(Tok::Int(k)) => match k.to_i64() {
                        Some(k) => k,
                        None => return self.err("offset too large"),
                    },
                    _ => {
                        self.pos -= 1;
                        return self.err("expected integer offset");
                    }
                };
                self.expect(&Tok::RParen, "')'")?;
                self.geometric(v, sign * off)
            }
            _ => {
                // INT ^ INT is handled by the generic power loop
                self.pos = save;
                Ok(SequenceExpr::constant(v))
            }
        }
    }

    fn geometric(&self, q: BigInt, offset: i64) -> Result<SequenceExpr, SequenceError> {
        SequenceExpr::geometric(1, q, offset).map_err(|e| SequenceError::Parse {
            pos: self.col(),
            msg: e.to_string(),
        })
    }
}

impl std::str::FromStr for SequenceExpr {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SequenceExpr::parse(s)
    }
}
