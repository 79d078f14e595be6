//! Maximal mappings on the word tree over `{0, 1, 2}` and the orthogonal sets they generate.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::{SpectraError, SpectrumSet};
use crate::exactnum::{Rational, Real};
use crate::fourier::FreqTable;
use crate::moran::MoranSystem;

/// Finite word over `{0, 1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Panics if a letter is not in `{0, 1, 2}`.
    pub fn from_letters(letters: &[u8]) -> Self {
        assert!(letters.iter().all(|&l| l < 3), "letters must be 0, 1 or 2");
        Word(letters.to_vec())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Empty, or ends in a nonzero letter.
    pub fn is_admissible(&self) -> bool {
        self.0.last().is_none_or(|&l| l != 0)
    }

    /// Position among words of the same length, first letter most significant.
    fn index(&self) -> usize {
        self.0.iter().fold(0usize, |acc, &l| acc * 3 + l as usize)
    }

    fn from_index(len: usize, mut idx: usize) -> Self {
        let mut v = vec![0u8; len];
        for slot in v.iter_mut().rev() {
            *slot = (idx % 3) as u8;
            idx /= 3;
        }
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.bytes()
            .map(|c| match c {
                b'0'..=b'2' => Ok(c - b'0'),
                _ => Err(format!("'{}' is not a letter of {{0, 1, 2}}", c as char)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// `ι` on all words of length `1..=depth`; `ι(∅) = 0` and `ι = 0` beyond `depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalMapping {
    depth: usize,
    /// `table[k - 1][index]` for words of length `k`.
    table: Vec<Vec<i64>>,
}

fn range_hi(system: &MoranSystem, k: usize) -> BigInt {
    system.p_at(k as u64 + 1).abs() - 2
}

impl MaximalMapping {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Builds the table from a rule; the result is not validated.
    pub fn from_fn(depth: usize, mut f: impl FnMut(&Word) -> i64) -> Self {
        let table = (1..=depth)
            .map(|k| {
                (0..3usize.pow(k as u32))
                    .map(|i| f(&Word::from_index(k, i)))
                    .collect()
            })
            .collect();
        Self { depth, table }
    }

    /// The mapping picking the element of `(i_k + 3ℤ) ∩ [−1, |p_{k+1}| − 2]`
    /// of least absolute value: `0 ↦ 0`, `1 ↦ 1`, `2 ↦ −1`.
    pub fn canonical(system: &MoranSystem, depth: usize) -> Result<Self, SpectraError> {
        check_hypotheses(system, depth)?;
        let m = Self::from_fn(depth, |w| match w.letters().last() {
            Some(1) => 1,
            Some(2) => -1,
            _ => 0,
        });
        m.validate(system)?;
        Ok(m)
    }

    /// `ι(word)`; zero for the empty word and beyond the stored depth.
    pub fn value(&self, word: &Word) -> i64 {
        match word.len() {
            0 => 0,
            k if k > self.depth => 0,
            k => self.table[k - 1][word.index()],
        }
    }

    /// Checks conditions (i) and (ii) at every stored word.
    pub fn validate(&self, system: &MoranSystem) -> Result<(), SpectraError> {
        let three = BigInt::from(3);
        for k in 1..=self.depth {
            let hi = range_hi(system, k);
            for (idx, &v) in self.table[k - 1].iter().enumerate() {
                let w = Word::from_index(k, idx);
                let last = *w.letters().last().expect("nonempty");
                if idx == 0 && v != 0 {
                    return Err(SpectraError::InvalidMapping(format!(
                        "ι({w}) = {v}, but ι(0^{k}) must be 0"
                    )));
                }
                let vb = BigInt::from(v);
                if (&vb - BigInt::from(last)).mod_floor(&three) != BigInt::zero() {
                    return Err(SpectraError::InvalidMapping(format!(
                        "ι({w}) = {v} is not ≡ {last} mod 3"
                    )));
                }
                if vb < BigInt::from(-1) || vb > hi {
                    return Err(SpectraError::InvalidMapping(format!(
                        "ι({w}) = {v} outside [-1, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses `word=<digits> value=<integer>` records, one per line.
    ///
    /// Every word of every length up to the longest given must be present.
    pub fn from_records(text: &str, system: &MoranSystem) -> Result<Self, SpectraError> {
        let mut entries: Vec<(Word, i64, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| SpectraError::Parse { line: line_no, msg };
            let mut word = None;
            let mut value = None;
            for field in line.split_whitespace() {
                match field.split_once('=') {
                    Some(("word", w)) => word = Some(w.parse::<Word>().map_err(err)?),
                    Some(("value", v)) => {
                        value = Some(
                            v.parse::<i64>()
                                .map_err(|e| err(format!("value '{v}': {e}")))?,
                        )
                    }
                    _ => return Err(err(format!("unrecognized field '{field}'"))),
                }
            }
            let (Some(w), Some(v)) = (word, value) else {
                return Err(err("expected `word=<digits> value=<integer>`".into()));
            };
            entries.push((w, v, line_no));
        }
        let depth = entries.iter().map(|(w, _, _)| w.len()).max().unwrap_or(0);
        let mut table: Vec<Vec<Option<i64>>> = (1..=depth)
            .map(|k| vec![None; 3usize.pow(k as u32)])
            .collect();
        for (w, v, line) in entries {
            if w.is_empty() {
                if v != 0 {
                    return Err(SpectraError::Parse {
                        line,
                        msg: "ι(∅) must be 0".into(),
                    });
                }
                continue;
            }
            let slot = &mut table[w.len() - 1][w.index()];
            if slot.is_some() {
                return Err(SpectraError::Parse {
                    line,
                    msg: format!("duplicate word {w}"),
                });
            }
            *slot = Some(v);
        }
        let mut full = Vec::with_capacity(depth);
        for (k, level) in table.into_iter().enumerate() {
            let mut row = Vec::with_capacity(level.len());
            for (idx, v) in level.into_iter().enumerate() {
                match v {
                    Some(v) => row.push(v),
                    None => {
                        return Err(SpectraError::InvalidMapping(format!(
                            "word {} missing; the prefix tree must be complete",
                            Word::from_index(k + 1, idx)
                        )))
                    }
                }
            }
            full.push(row);
        }
        let m = Self { depth, table: full };
        m.validate(system)?;
        Ok(m)
    }

    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for k in 1..=self.depth {
            for (idx, v) in self.table[k - 1].iter().enumerate() {
                out.push_str(&format!("word={} value={v}\n", Word::from_index(k, idx)));
            }
        }
        out
    }
}

fn check_hypotheses(system: &MoranSystem, depth: usize) -> Result<(), SpectraError> {
    let three = BigInt::from(3);
    for n in 2..=depth as u64 + 1 {
        if !system.p_at(n).is_multiple_of(&three) {
            return Err(SpectraError::Hypothesis(format!("3 ∤ p_{n}")));
        }
    }
    for n in 1..=depth as u64 {
        if !system.digits(n).residues_are_one_two() {
            return Err(SpectraError::Hypothesis(format!(
                "{{a_{n}, b_{n}}} is not {{1, 2}} mod 3"
            )));
        }
    }
    Ok(())
}

/// `ι*(i) = Σ_k ι(i0^∞|_k)|P_k|`, summed up to the mapping depth.
pub fn iota_star(mapping: &MaximalMapping, word: &Word, system: &MoranSystem) -> BigInt {
    let lv = system.levels(mapping.depth() as u64);
    let mut letters = Vec::with_capacity(mapping.depth());
    let mut acc = BigInt::zero();
    for k in 1..=mapping.depth() {
        letters.push(word.letters().get(k - 1).copied().unwrap_or(0));
        let v = mapping.value(&Word(letters.clone()));
        if v != 0 {
            acc += BigInt::from(v) * lv.prefix[k].abs();
        }
    }
    acc
}

/// `(length, index, ι*(word))` for every admissible word of length `≤ depth`.
fn admissible_values(
    mapping: &MaximalMapping,
    system: &MoranSystem,
    depth: usize,
) -> Vec<(usize, usize, BigInt)> {
    let lv = system.levels(mapping.depth() as u64);
    let pk: Vec<BigInt> = lv.prefix.iter().map(Signed::abs).collect();
    let full = mapping.depth();
    let value = |len: usize, idx: usize| {
        if len == 0 || len > full {
            0
        } else {
            mapping.table[len - 1][idx]
        }
    };
    // words ending in 0 past the admissible prefix only matter if some ι(…0) ≠ 0
    let pads = mapping
        .table
        .iter()
        .any(|row| row.iter().step_by(3).any(|&v| v != 0));
    let zero_tail = |len: usize, idx: usize| -> BigInt {
        let mut acc = BigInt::zero();
        if pads {
            let mut i = idx;
            for (k, p) in pk.iter().enumerate().take(full + 1).skip(len + 1) {
                i *= 3;
                let v = value(k, i);
                if v != 0 {
                    acc += BigInt::from(v) * p;
                }
            }
        }
        acc
    };
    let mut out = vec![(0, 0, zero_tail(0, 0))];
    // breadth-first over the tree, carrying prefix sums
    let mut frontier = vec![BigInt::zero()];
    for (k, p) in pk.iter().enumerate().take(depth + 1).skip(1) {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for (parent, sum) in frontier.iter().enumerate() {
            for l in 0..3usize {
                let idx = parent * 3 + l;
                let v = value(k, idx);
                let s = if v == 0 {
                    sum.clone()
                } else {
                    sum + BigInt::from(v) * p
                };
                if l != 0 {
                    let total = &s + zero_tail(k, idx);
                    out.push((k, idx, total));
                }
                next.push(s);
            }
        }
        frontier = next;
    }
    out
}

/// `{ι*(i)/3 : i ∈ A^ι, |i| ≤ depth}`, tagged with the generating words.
pub fn maximal_orthogonal_set(
    mapping: &MaximalMapping,
    system: &MoranSystem,
    depth: usize,
) -> Result<SpectrumSet, SpectraError> {
    if depth > mapping.depth() {
        return Err(SpectraError::Hypothesis(format!(
            "depth {depth} exceeds mapping depth {}",
            mapping.depth()
        )));
    }
    let three = BigInt::from(3);
    Ok(SpectrumSet::from_tagged(
        admissible_values(mapping, system, depth)
            .into_iter()
            .map(|(len, idx, v)| (Rational::new(v, three.clone()), Word::from_index(len, idx))),
    ))
}

/// Cumulative `Σ_{i ∈ A^ι, |i| ≤ n} |μ̂_trunc(ξ + ι*(i)/3)|²` for `n = 0..=max_depth`.
pub fn q_profile<T: Real>(
    system: &MoranSystem,
    mapping: &MaximalMapping,
    max_depth: usize,
    trunc: u64,
    xi: T,
) -> Result<Vec<T>, SpectraError> {
    if trunc < max_depth as u64 + 10 {
        return Err(SpectraError::Hypothesis(format!(
            "trunc {trunc} must be at least max_depth + 10"
        )));
    }
    if max_depth > mapping.depth() {
        return Err(SpectraError::Hypothesis(format!(
            "depth {max_depth} exceeds mapping depth {}",
            mapping.depth()
        )));
    }
    let table = FreqTable::for_prefix(system, trunc);
    let words = admissible_values(mapping, system, max_depth);
    let three = BigInt::from(3);
    let terms: Vec<(usize, T)> = words
        .par_iter()
        .map(|(len, _, v)| (*len, table.eval_shifted_ratio(xi, v, &three).norm_sqr()))
        .collect();
    let mut by_len = vec![T::zero(); max_depth + 1];
    for (len, t) in terms {
        by_len[len] = by_len[len] + t;
    }
    let mut acc = T::zero();
    Ok(by_len
        .into_iter()
        .map(|x| {
            acc = acc + x;
            acc
        })
        .collect())
}

/// Number of admissible words of length `≤ depth`, as a sanity figure.
pub fn admissible_count(depth: usize) -> u64 {
    3u64.pow(depth as u32)
}
