//! Linear-growth spectrality hypotheses and the uniform tail lower bound `c`.
//!
//! Under `|p_n| ≥ c₁n`, `|a_n| ≤ c₂n`, `|b_n| ≤ c₃n^k` for `n > N`, every tail
//! `μ̂_{>n}(ξ + λ)` with `ξ ∈ (−1/3, 1/3)` and `λ ∈ Λ_n` stays above
//! `c = ε₀^(γ−1) Π_{j≥γ} cos(2c₃M_kπ / (3c₁^(j−1)(c₁−1)))`.
//! The first `γ − 1` factors are bounded by `ε₀`, the rest by the cosine.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CriteriaError, Window};
use crate::exactnum::{rat_int, rational_from_f64, Rational};
use crate::fourier::FreqTable;
use crate::moran::{validate_congruence, MoranSystem};
use crate::report::{num, CheckReport, Verdict};
use crate::spectra::lambda_n;

const CHECK: &str = "thm12";
/// Factors kept in the cosine product.
const COS_FACTORS: usize = 200;
/// Factor count at which the Cauchy gap is measured.
const CAUCHY_AT: usize = 60;
pub const CAUCHY_TOL: f64 = 1e-12;
/// Side of the coarse `ε₀` grid.
const EPS_GRID: usize = 2001;
/// Tail factors used when sampling `|μ̂_{>n}|` against `c`.
const SAMPLE_TRUNC: u64 = 40;

/// Input constants of the linear-growth criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    /// Index threshold: the growth bounds are required for `n > N`.
    #[serde(rename = "N")]
    pub n_threshold: u64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub k: u32,
}

/// Derived constants, all reported by [`thm12_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub m_k: f64,
    pub gamma: u64,
    /// Bound on `|a_{n+j}(ξ+λ)/P_{n+j}|` used to cut the zero set out of the `ε₀` region.
    pub x_max: f64,
    /// Certified lower bound (grid minimum minus the Lipschitz slack).
    pub eps0: f64,
    /// Refined numerical minimum, for comparison.
    pub eps0_estimate: f64,
    pub c: f64,
    pub cos_product: f64,
    /// `max_{m ≥ 60} |Π_m − Π_60|` over the first 200 factors.
    pub cauchy_gap: f64,
    /// Angle `θ_γ` of the first cosine factor; must be below `π/2`.
    pub first_angle: f64,
}

impl TailBoundParams {
    /// The constant constraints `c₁ ≥ c₂ + 1 > 2`, `c₃ > 1`, `k ≥ 1`, `N ≥ 1`.
    pub fn validate(&self) -> Result<(), CriteriaError> {
        let bad = |s: &str| Err(CriteriaError::InvalidParams(s.to_string()));
        if ![self.c1, self.c2, self.c3].iter().all(|v| v.is_finite()) {
            return bad("constants must be finite");
        }
        if self.c1 < self.c2 + 1.0 {
            return bad("c1 ≥ c2 + 1 violated");
        }
        if self.c2 + 1.0 <= 2.0 {
            return bad("c2 + 1 > 2 violated");
        }
        if self.c3 <= 1.0 {
            return bad("c3 > 1 violated");
        }
        if self.k == 0 {
            return bad("k must be positive");
        }
        if self.n_threshold == 0 {
            return bad("N must be positive");
        }
        Ok(())
    }
}

/// `M_k = sup_{n ≥ 1, j ≥ k+1} (n+j)^k / (n+1)^j`.
///
/// For `n ≥ 2` the ratio `f(n, j+1)/f(n, j)` is below 1, and `f(n, k+1)` is
/// decreasing in `n`, so the supremum is `max_j f(1, j)`, which is log-concave
/// in `j` and found by scanning to its peak.
pub fn m_k(k: u32) -> f64 {
    let kf = k as f64;
    let f1 = |j: u64| kf * ((1 + j) as f64).ln() - j as f64 * std::f64::consts::LN_2;
    let mut j = k as u64 + 1;
    let mut best = f1(j);
    loop {
        let next = f1(j + 1);
        if next <= best {
            break;
        }
        best = next;
        j += 1;
    }
    best.exp().max(1.0)
}

/// Direct maximum of `f(n, j)` on `1 ≤ n ≤ n0`, `k+1 ≤ j ≤ j0`, as a cross-check.
fn m_k_grid(k: u32, n0: u64, j0: u64) -> f64 {
    let kf = k as f64;
    let mut best = f64::NEG_INFINITY;
    for n in 1..=n0 {
        for j in k as u64 + 1..=j0 {
            best = best.max(kf * ((n + j) as f64).ln() - j as f64 * ((n + 1) as f64).ln());
        }
    }
    best.exp()
}

fn gamma_of(p: &TailBoundParams, mk: f64) -> u64 {
    let c1 = p.c1;
    let t1 = ((4.0 * c1 * p.c3 * mk / (3.0 * (c1 - 1.0))).ln() / c1.ln())
        .floor()
        .max(0.0) as u64
        + 1;
    // ∏_{i<j}(n+i) ≥ (N+1)^(j−1) is what makes the a-digit term subordinate
    let t3 = (p.c2.ln() / ((p.n_threshold + 1) as f64).ln())
        .floor()
        .max(0.0) as u64
        + 2;
    t1.max(p.k as u64 + 1).max(t3)
}

/// `|ξ+λ| / |P_n| ≤ (1/3) Σ_{i=0}^{n} 1/|p_{n−i+1} ⋯ p_n|` for `λ ∈ Λ_n`, `|ξ| < 1/3`.
fn lambda_scale(system: &MoranSystem, n: u64) -> Rational {
    let mut acc = Rational::one();
    let mut q = BigInt::one();
    for i in (1..=n).rev() {
        q *= system.p_at(i).abs();
        acc += Rational::new(BigInt::one(), q.clone());
    }
    acc / rat_int(3)
}

/// Largest observed `|a_{n+j}(ξ+λ)/P_{n+j}|` bound for `n ≥ N`, `1 ≤ j < γ`, within the window.
fn observed_x_max(
    system: &MoranSystem,
    p: &TailBoundParams,
    gamma: u64,
    window: &Window,
) -> Option<f64> {
    let lo = p.n_threshold.max(1);
    let mut best: Option<f64> = None;
    for n in lo..window.end {
        let scale = lambda_scale(system, n);
        let mut q = BigInt::one();
        for j in 1..gamma {
            if n + j > window.end {
                break;
            }
            q *= system.p_at(n + j).abs();
            let v = Rational::new(system.digits(n + j).a.abs(), q.clone()) * &scale;
            let v = v.to_f64().unwrap_or(f64::INFINITY);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

fn f_mask(x: f64, y: f64) -> f64 {
    use std::f64::consts::TAU;
    let re = 1.0 + (TAU * x).cos() + (TAU * y).cos();
    let im = (TAU * x).sin() + (TAU * y).sin();
    re.hypot(im) / 3.0
}

/// `(certified, estimate)` lower bounds of `(1/3)|1 + e(x) + e(y)|` over `|x| ≤ x_max`, `y ∈ [0, 1]`.
///
/// Both partials of the modulus are bounded by `2π/3`, so every point lies
/// within `(2π/3)(h_x/2 + h_y/2)` of a grid value.
fn eps0_minimize(x_max: f64) -> (f64, f64) {
    let g = EPS_GRID;
    let hx = 2.0 * x_max / (g - 1) as f64;
    let hy = 1.0 / (g - 1) as f64;
    let (gmin, bx, by) = (0..g)
        .into_par_iter()
        .map(|i| {
            let x = -x_max + i as f64 * hx;
            (0..g)
                .map(|j| {
                    let y = j as f64 * hy;
                    (f_mask(x, y), x, y)
                })
                .fold(
                    (f64::INFINITY, 0.0, 0.0),
                    |a, b| if b.0 < a.0 { b } else { a },
                )
        })
        .reduce(
            || (f64::INFINITY, 0.0, 0.0),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    let certified = gmin - (2.0 * std::f64::consts::PI / 3.0) * (hx / 2.0 + hy / 2.0);

    // zoom in around the best grid cell
    let (mut cx, mut cy, mut best) = (bx, by, gmin);
    let (mut rx, mut ry) = (hx, hy);
    for _ in 0..6 {
        let (sx, sy) = (rx / 10.0, ry / 10.0);
        let (ox, oy) = (cx, cy);
        for i in -10..=10 {
            let x = (ox + i as f64 * sx).clamp(-x_max, x_max);
            for j in -10..=10 {
                let y = oy + j as f64 * sy;
                let v = f_mask(x, y);
                if v < best {
                    best = v;
                    cx = x;
                    cy = y;
                }
            }
        }
        rx = sx;
        ry = sy;
    }
    (certified, best)
}

/// Computes `M_k`, `γ`, `ε₀` and `c` for a system already known to satisfy
/// the growth bounds on `window`.
pub fn tail_constants(
    system: &MoranSystem,
    params: &TailBoundParams,
    window: &Window,
) -> Result<TailConstants, CriteriaError> {
    params.validate()?;
    let mk = m_k(params.k);
    let gamma = gamma_of(params, mk);
    let analytic = params.c2 / (3.0 * (params.c1 - 1.0));
    let x_max = observed_x_max(system, params, gamma, window).map_or(analytic, |o| o.min(analytic));
    if x_max >= 1.0 / 3.0 {
        return Err(CriteriaError::InvalidParams(format!(
            "digit bound x_max = {x_max} leaves no margin below 1/3; eps0 cannot be certified"
        )));
    }
    let (eps0, eps0_estimate) = eps0_minimize(x_max);

    let theta = |j: u64| {
        2.0 * params.c3 * mk * std::f64::consts::PI
            / (3.0 * params.c1.powi(j as i32 - 1) * (params.c1 - 1.0))
    };
    let mut partial = Vec::with_capacity(COS_FACTORS);
    let mut prod = 1.0;
    for i in 0..COS_FACTORS as u64 {
        prod *= theta(gamma + i).cos();
        partial.push(prod);
    }
    let at = partial[CAUCHY_AT - 1];
    let cauchy_gap = partial[CAUCHY_AT - 1..]
        .iter()
        .map(|v| (v - at).abs())
        .fold(0.0, f64::max);
    let cos_product = *partial.last().unwrap_or(&1.0);
    let c = eps0.max(0.0).powi(gamma as i32 - 1) * cos_product;
    Ok(TailConstants {
        m_k: mk,
        gamma,
        x_max,
        eps0,
        eps0_estimate,
        c,
        cos_product,
        cauchy_gap,
        first_angle: theta(gamma),
    })
}

/// Min of `|μ̂_{>n}(ξ + λ)|` over a few `ξ ∈ (−1/3, 1/3)`, `λ ∈ Λ_n`, `n` just past `N`.
fn tail_sample_min(
    system: &MoranSystem,
    params: &TailBoundParams,
    window: &Window,
) -> Option<(f64, u64)> {
    let mut best: Option<(f64, u64)> = None;
    let lo = params.n_threshold.max(1);
    for n in lo..=(lo + 2).min(window.end) {
        let lambda = lambda_n(system, n).ok()?;
        let pn = Rational::from_integer(system.product_p(n));
        let pn_f = pn.to_f64()?;
        let table = FreqTable::for_tail(system, n, SAMPLE_TRUNC);
        for i in -4..=4 {
            let xi = i as f64 * (0.33 / 4.0);
            for l in lambda.points() {
                let v = table.eval_shifted(xi / pn_f, &(l / &pn)).norm();
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, n));
                }
            }
        }
    }
    best
}

fn exceeds(lhs: &BigInt, c: &Rational, rhs: &BigInt) -> bool {
    // |lhs| > c · rhs
    Rational::from_integer(lhs.abs()) > c * Rational::from_integer(rhs.clone())
}

/// Checks the growth hypotheses on `window` and, when they hold, derives the
/// tail constants.
pub fn thm12_check(system: &MoranSystem, params: &TailBoundParams, window: &Window) -> CheckReport {
    if let Err(e) = params.validate() {
        return CheckReport::fail(CHECK, e.to_string()).with("params", json!(params));
    }
    let cong = validate_congruence(system, window.end);
    if !cong.passed() {
        let mut r = CheckReport::fail(
            CHECK,
            format!("congruence precondition failed: {}", cong.summary),
        );
        r.first_violation = cong.first_violation;
        return r;
    }
    let (c1, c2, c3) = match (
        rational_from_f64(params.c1),
        rational_from_f64(params.c2),
        rational_from_f64(params.c3),
    ) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return CheckReport::fail(CHECK, "constants must be finite"),
    };
    for n in window.iter().filter(|&n| n > params.n_threshold) {
        let nb = BigInt::from(n);
        let p = system.p_at(n);
        let d = system.digits(n);
        let violation =
            if Rational::from_integer(p.abs()) < &c1 * Rational::from_integer(nb.clone()) {
                Some(format!("|p_{n}| = {} < c1·n", p.abs()))
            } else if exceeds(&d.a, &c2, &nb) {
                Some(format!("|a_{n}| = {} > c2·n", d.a.abs()))
            } else if exceeds(&d.b, &c3, &num_traits::pow(nb.clone(), params.k as usize)) {
                Some(format!("|b_{n}| = {} > c3·n^k", d.b.abs()))
            } else {
                None
            };
        if let Some(msg) = violation {
            return CheckReport::fail(CHECK, format!("growth hypothesis violated: {msg}"))
                .with_violation(n)
                .with("params", json!(params));
        }
    }

    let consts = match tail_constants(system, params, window) {
        Ok(c) => c,
        Err(e) => return CheckReport::fail(CHECK, e.to_string()).with("params", json!(params)),
    };
    let mk_grid = m_k_grid(params.k, 64, params.k as u64 + 64);
    let sample = tail_sample_min(system, params, window);

    let mut problems = Vec::new();
    if consts.m_k < 1.0 || mk_grid > consts.m_k * (1.0 + 1e-12) {
        problems.push("M_k");
    }
    if consts.gamma < params.k as u64 + 1 {
        problems.push("gamma");
    }
    if !(consts.eps0 > 0.0 && consts.eps0 <= 1.0) {
        problems.push("eps0");
    }
    if consts.first_angle >= std::f64::consts::FRAC_PI_2 {
        problems.push("cosine angle");
    }
    if !(consts.c > 0.0 && consts.c < 1.0) {
        problems.push("c");
    }
    if consts.cauchy_gap > CAUCHY_TOL {
        problems.push("cosine product convergence");
    }
    if let Some((v, _)) = sample {
        if v < consts.c {
            problems.push("sampled tail below c");
        }
    }

    let verdict = Verdict::from_bool(problems.is_empty());
    let summary = if problems.is_empty() {
        format!(
            "hypotheses verified up to n = {}; tail lower bound c = {:.6e}",
            window.end, consts.c
        )
    } else {
        format!(
            "growth hypotheses hold up to n = {} but derived constants fail: {}",
            window.end,
            problems.join(", ")
        )
    };
    let mut r = CheckReport::new(CHECK, verdict, summary)
        .with("params", json!(params))
        .with("window_end", window.end)
        .with("M_k", num(consts.m_k))
        .with("M_k_grid_check", num(mk_grid))
        .with("gamma", consts.gamma)
        .with("x_max", num(consts.x_max))
        .with("eps0", num(consts.eps0))
        .with("eps0_estimate", num(consts.eps0_estimate))
        .with("cos_product", num(consts.cos_product))
        .with("cauchy_gap_at_60", num(consts.cauchy_gap))
        .with("c", num(consts.c));
    if let Some((v, n)) = sample {
        r.insert(
            "tail_sample_min",
            json!({ "value": num(v), "n": n, "trunc": SAMPLE_TRUNC }),
        );
    }
    r
}
