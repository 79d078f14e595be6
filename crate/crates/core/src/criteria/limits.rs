//! Checkers whose hypotheses are limits (`lim`, `liminf`), and the
//! equi-positivity probe for the tail transforms they control.
//!
//! A finite window cannot decide a limit, so these report trend evidence and
//! a pass means "consistent with the hypothesis up to the window end".

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CriteriaError, Window};
use crate::exactnum::{rational_from_f64, Rational};
use crate::fourier::FreqTable;
use crate::moran::{digit_residues, validate_congruence, MoranSystem};
use crate::report::{num, CheckReport, Verdict};

/// Indices needed before a `liminf` bound counts as a subsequence.
pub const LIMINF_WITNESSES: usize = 5;
/// Probe minima below this are flagged as a likely zero of the tail transform.
pub const PROBE_FLAG: f64 = 1e-6;
/// Witnesses echoed into the report.
const WITNESS_ECHO: usize = 10;

struct DecayEvidence {
    last_quarter_max: f64,
    previous_quarter_max: f64,
    trend_ok: bool,
    ok: bool,
    worst_at: Option<u64>,
}

/// Sub-verdict (A): `max{α_n, β_n}/|p_{n−1}|` small on the last quarter and not growing.
fn decay(system: &MoranSystem, window: &Window, eps: f64) -> DecayEvidence {
    let lq = window.last_quarter_start().max(2);
    let quarter = (window.len() / 4).max(1);
    let pq = lq.saturating_sub(quarter).max(window.start.max(2));
    let ratio = |n: u64| {
        let r = digit_residues(system, n);
        Rational::new(r.alpha.max(r.beta), system.p_at(n - 1).abs())
            .to_f64()
            .unwrap_or(f64::INFINITY)
    };
    let mut last_quarter_max: f64 = 0.0;
    let mut worst_at = None;
    for n in lq..=window.end {
        let r = ratio(n);
        if r > last_quarter_max || worst_at.is_none() {
            last_quarter_max = last_quarter_max.max(r);
            worst_at = Some(n);
        }
    }
    let previous_quarter_max = (pq..lq).map(ratio).fold(0.0, f64::max);
    let trend_ok = pq >= lq || last_quarter_max <= previous_quarter_max;
    DecayEvidence {
        last_quarter_max,
        previous_quarter_max,
        trend_ok,
        ok: last_quarter_max < eps && trend_ok,
        worst_at,
    }
}

struct LiminfEvidence {
    a_witnesses: Vec<u64>,
    b_witnesses: Vec<u64>,
    ok: bool,
}

/// Sub-verdict (B): enough `n` with `|a_n/p_n| < 2/3 − eps` (or the same for `b_n`).
fn liminf(system: &MoranSystem, window: &Window, eps: f64) -> LiminfEvidence {
    let bound =
        Rational::new(2.into(), 3.into()) - rational_from_f64(eps).unwrap_or_else(Rational::zero);
    let mut a_witnesses = Vec::new();
    let mut b_witnesses = Vec::new();
    for n in window.iter() {
        let p = system.p_at(n).abs();
        let d = system.digits(n);
        if Rational::new(d.a.abs(), p.clone()) < bound {
            a_witnesses.push(n);
        }
        if Rational::new(d.b.abs(), p) < bound {
            b_witnesses.push(n);
        }
    }
    let ok = a_witnesses.len() >= LIMINF_WITNESSES || b_witnesses.len() >= LIMINF_WITNESSES;
    LiminfEvidence {
        a_witnesses,
        b_witnesses,
        ok,
    }
}

fn witness_json(w: &[u64]) -> Value {
    json!({
        "count": w.len(),
        "first": &w[..w.len().min(WITNESS_ECHO)],
        "last": w.last(),
    })
}

fn liminf_json(l: &LiminfEvidence) -> Value {
    json!({ "holds": l.ok, "a": witness_json(&l.a_witnesses), "b": witness_json(&l.b_witnesses), "required": LIMINF_WITNESSES })
}

fn precondition(check: &str, system: &MoranSystem, window: &Window) -> Option<CheckReport> {
    let cong = validate_congruence(system, window.end);
    if cong.passed() {
        return None;
    }
    let mut r = CheckReport::fail(
        check,
        format!("congruence precondition failed: {}", cong.summary),
    );
    r.first_violation = cong.first_violation;
    Some(r)
}

/// Residue-decay spectrality criterion: the multiples of `p_n` hidden in the
/// digits shrink relative to `|p_{n−1}|`, and one digit ratio has `liminf < 2/3`.
pub fn thm13_check(system: &MoranSystem, window: &Window, eps: f64) -> CheckReport {
    const CHECK: &str = "thm13";
    if let Some(r) = precondition(CHECK, system, window) {
        return r;
    }
    let a = decay(system, window, eps);
    let b = liminf(system, window, eps);
    let verdict = Verdict::from_bool(a.ok && b.ok);
    let summary = match (a.ok, b.ok) {
        (true, true) => format!("hypotheses verified up to n = {}", window.end),
        (false, true) => {
            "decay of max{α_n, β_n}/|p_{n−1}| not observed on the last quarter".to_string()
        }
        (true, false) => {
            format!("fewer than {LIMINF_WITNESSES} indices with a digit ratio below 2/3 − eps")
        }
        (false, false) => "neither the decay nor the liminf hypothesis is supported".to_string(),
    };
    let mut r = CheckReport::new(CHECK, verdict, summary)
        .with("window", json!(window))
        .with("eps", num(eps))
        .with(
            "decay",
            json!({
                "holds": a.ok,
                "last_quarter_max": num(a.last_quarter_max),
                "previous_quarter_max": num(a.previous_quarter_max),
                "non_increasing": a.trend_ok,
                "status": "verified up to horizon",
            }),
        )
        .with("liminf", liminf_json(&b));
    if !a.ok {
        r.first_violation = a.worst_at;
    }
    r
}

/// Narrower variant: digits may exceed `p_n` only finitely often, plus the liminf condition.
pub fn corollary14_check(system: &MoranSystem, window: &Window, eps: f64) -> CheckReport {
    const CHECK: &str = "cor14";
    if let Some(r) = precondition(CHECK, system, window) {
        return r;
    }
    let excess: Vec<u64> = window
        .iter()
        .filter(|&n| {
            let d = system.digits(n);
            d.a.clone().max(d.b.clone()) > system.p_at(n)
        })
        .collect();
    let lq = window.last_quarter_start();
    let late = excess.iter().copied().find(|&n| n >= lq);
    let finite_ok = late.is_none();
    let b = liminf(system, window, eps);
    let summary = match (finite_ok, b.ok) {
        (true, true) => format!("hypotheses verified up to n = {}", window.end),
        (false, _) => format!(
            "max(a_n, b_n) > p_n keeps occurring in the final quarter (first at n = {})",
            late.unwrap_or(0)
        ),
        (true, false) => {
            format!("fewer than {LIMINF_WITNESSES} indices with a digit ratio below 2/3 − eps")
        }
    };
    let mut r = CheckReport::new(CHECK, Verdict::from_bool(finite_ok && b.ok), summary)
        .with("window", json!(window))
        .with("eps", num(eps))
        .with("excess", json!({ "holds": finite_ok, "indices": witness_json(&excess), "final_quarter_start": lq }))
        .with("liminf", liminf_json(&b));
    r.first_violation = late;
    r
}

/// Output of [`equipositive_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub min: f64,
    pub argmin_index: u64,
    pub argmin_x: f64,
    /// `min < PROBE_FLAG`: the family is probably not equi-positive here.
    pub flagged: bool,
    /// Minimum over indices at each grid point, as `(x, value)`.
    pub profile: Vec<(f64, f64)>,
    /// Minimum over the grid for each index.
    pub per_index: Vec<(u64, f64)>,
}

/// `min_k min_x |ν̂_{>n_k−1}(x)|` on a uniform grid of `[−1/2−δ, 1/2+δ]`, each
/// tail truncated to `trunc` factors.
pub fn equipositive_probe(
    system: &MoranSystem,
    indices: &[u64],
    delta: f64,
    gridsize: usize,
    trunc: u64,
) -> Result<ProbeResult, CriteriaError> {
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(CriteriaError::InvalidParams(format!(
            "delta = {delta} outside (0, 1/4]"
        )));
    }
    if trunc < 20 {
        return Err(CriteriaError::InvalidParams(format!(
            "trunc = {trunc} below 20"
        )));
    }
    if indices.is_empty() || indices.contains(&0) || gridsize == 0 {
        return Err(CriteriaError::InvalidParams(
            "need a nonempty list of positive indices and a positive grid".into(),
        ));
    }
    let half = 0.5 + delta;
    // symmetric construction keeps the midpoint at exactly 0
    let grid: Vec<f64> = if gridsize == 1 {
        vec![0.0]
    } else {
        let m = (gridsize - 1) as f64;
        (0..gridsize)
            .map(|i| (2.0 * i as f64 - m) * half / m)
            .collect()
    };
    let tables: Vec<FreqTable> = indices
        .iter()
        .map(|&n| FreqTable::for_tail(system, n - 1, trunc))
        .collect();
    let values: Vec<Vec<f64>> = tables
        .par_iter()
        .map(|t| grid.iter().map(|&x| t.eval(x).norm()).collect())
        .collect();

    let mut min = f64::INFINITY;
    let (mut argmin_index, mut argmin_x) = (indices[0], grid[0]);
    let mut per_index = Vec::with_capacity(indices.len());
    for (k, row) in values.iter().enumerate() {
        let mut row_min = f64::INFINITY;
        for (i, &v) in row.iter().enumerate() {
            row_min = row_min.min(v);
            if v < min {
                min = v;
                argmin_index = indices[k];
                argmin_x = grid[i];
            }
        }
        per_index.push((indices[k], row_min));
    }
    let profile = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, values.iter().map(|r| r[i]).fold(f64::INFINITY, f64::min)))
        .collect();
    Ok(ProbeResult {
        min,
        argmin_index,
        argmin_x,
        flagged: min < PROBE_FLAG,
        profile,
        per_index,
    })
}
