//! Hypothesis checkers for the spectrality and non-spectrality criteria.
//!
//! Every limit statement is checked on a finite [`Window`] and the verdicts
//! say so: a pass means "hypotheses verified up to the window end".

pub mod lemma44;
pub mod limits;
pub mod nonspectral;
pub mod tailbound;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lemma44::{delta_count, delta_count_f64, lemma44_verify, q1_compute, DeltaCount};
pub use limits::{
    corollary14_check, equipositive_probe, thm13_check, ProbeResult, LIMINF_WITNESSES,
};
pub use nonspectral::{thm15_check, thm46_check};
pub use tailbound::{m_k, tail_constants, thm12_check, TailBoundParams, TailConstants};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("invalid pair (alpha, beta) = ({alpha}, {beta}): {reason}")]
    InvalidPair {
        alpha: i64,
        beta: i64,
        reason: &'static str,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid window [{start}, {end}]: need 1 ≤ start ≤ end")]
    InvalidWindow { start: u64, end: u64 },
}

/// Inclusive index range `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn new(start: u64, end: u64) -> Result<Self, CriteriaError> {
        if start == 0 || start > end {
            return Err(CriteriaError::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    /// `1..=end`
    pub fn up_to(end: u64) -> Self {
        Self {
            start: 1,
            end: end.max(1),
        }
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u64> {
        self.start..=self.end
    }

    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First index of the final quarter.
    pub fn last_quarter_start(&self) -> u64 {
        self.end - (self.len() / 4).max(1) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_bounds() {
        assert!(Window::new(0, 3).is_err());
        assert!(Window::new(4, 3).is_err());
        let w = Window::new(1, 500).unwrap();
        assert_eq!(w.len(), 500);
        assert_eq!(w.last_quarter_start(), 376);
        assert_eq!(Window::new(5, 5).unwrap().last_quarter_start(), 5);
    }
}
