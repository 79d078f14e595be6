//! Structured verdicts shared by every checker.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Nothing was refuted, but the evidence only reaches a finite horizon.
    Inconclusive,
}

impl Verdict {
    /// Process exit status for this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Inconclusive => 3,
        }
    }

    /// Conjunction: any fail wins, then any inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub summary: String,
    /// First index (or grid position) at which the check failed, if any.
    pub first_violation: Option<u64>,
    pub evidence: BTreeMap<String, Value>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, verdict: Verdict, summary: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            verdict,
            summary: summary.into(),
            first_violation: None,
            evidence: BTreeMap::new(),
        }
    }

    pub fn pass(check: impl Into<String>, summary: impl Into<String>) -> Self {
        Self::new(check, Verdict::Pass, summary)
    }

    pub fn fail(check: impl Into<String>, summary: impl Into<String>) -> Self {
        Self::new(check, Verdict::Fail, summary)
    }

    pub fn inconclusive(check: impl Into<String>, summary: impl Into<String>) -> Self {
        Self::new(check, Verdict::Inconclusive, summary)
    }

    pub fn with_violation(mut self, at: u64) -> Self {
        self.first_violation = Some(at);
        self
    }

    pub fn with<V: Into<Value>>(mut self, key: &str, value: V) -> Self {
        self.evidence.insert(key.to_string(), value.into());
        self
    }

    pub fn insert<V: Into<Value>>(&mut self, key: &str, value: V) {
        self.evidence.insert(key.to_string(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// JSON number for a float, `null` when not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_conjunction_and_exit_codes() {
        use Verdict::*;
        assert_eq!(Pass.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Fail), Fail);
        assert_eq!(Pass.and(Pass), Pass);
        let codes: Vec<i32> = [Pass, Fail, Inconclusive]
            .iter()
            .map(|v| v.exit_code())
            .collect();
        assert_eq!(codes, vec![0, 2, 3]);
    }

    #[test]
    fn serializes_lowercase() {
        let r = CheckReport::fail("x", "bad").with_violation(4).with("k", 1);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"verdict\":\"fail\""));
        assert!(s.contains("\"first_violation\":4"));
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
