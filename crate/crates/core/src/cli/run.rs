//! Command dispatch: turns a [`RunConfig`] into check reports and plot rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Command, Resolved, RunConfig, SpectrumSource, TheoremParams};
use super::CliError;
use crate::criteria::{
    corollary14_check, equipositive_probe, lemma44_verify, thm12_check, thm13_check, thm15_check,
    thm46_check,
};
use crate::exactnum::parse_rational;
use crate::fourier::q_function;
use crate::moran::{compact_support_check, validate_congruence, MoranSystem, SequenceExpr};
use crate::report::{num, CheckReport, Verdict};
use crate::spectra::{
    fourier_matrix_unitary, lambda_n, maximal_orthogonal_set, orthogonality_exact, q_profile,
    MaximalMapping, SpectrumSet,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Canonical echo of the system's sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemEcho {
    pub p: String,
    pub a: String,
    pub b: String,
}

/// Wall-clock data, the only nondeterministic part of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u64,
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub system: SystemEcho,
    /// The command block and the resolved overrides.
    pub parameters: Value,
    pub seed: u64,
    pub verdict: Verdict,
    pub exit_status: i32,
    pub checks: Vec<CheckReport>,
    pub timing: Timing,
}

impl RunReport {
    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Report plus the optional `xi,value` table.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub table: Option<Vec<(f64, f64)>>,
}

impl RunOutcome {
    pub fn csv(&self) -> Option<String> {
        self.table.as_ref().map(|rows| render_csv(rows))
    }
}

/// `xi,value` header then one row per point, shortest round-trip formatting.
pub fn render_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("xi,value\n");
    for (x, v) in rows {
        s.push_str(&format!("{x:?},{v:?}\n"));
    }
    s
}

struct Output {
    checks: Vec<CheckReport>,
    table: Option<Vec<(f64, f64)>>,
}

impl Output {
    fn one(r: CheckReport) -> Self {
        Self {
            checks: vec![r],
            table: None,
        }
    }
}

/// Runs one command. Timing is measured here; everything else is a pure
/// function of the config and seed.
pub fn run(config: &RunConfig, seed: u64) -> Result<RunOutcome, CliError> {
    let start = std::time::Instant::now();
    let started_unix_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let system = config.system()?;
    let res = config.resolve()?;
    let out = dispatch(config, &system, &res, seed)?;
    let verdict = out
        .checks
        .iter()
        .fold(Verdict::Pass, |v, c| v.and(c.verdict));
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool: "moran-check".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: config.command.name().into(),
        system: SystemEcho {
            p: system.p.to_string(),
            a: system.a.to_string(),
            b: system.b.to_string(),
        },
        parameters: json!({ "command": config.command, "resolved": res }),
        seed,
        verdict,
        exit_status: verdict.exit_code(),
        checks: out.checks,
        timing: Timing {
            started_unix_ms,
            wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    Ok(RunOutcome {
        report,
        table: out.table,
    })
}

fn spectrum(
    config: &RunConfig,
    src: &SpectrumSource,
    system: &MoranSystem,
    depth: u64,
) -> Result<SpectrumSet, CliError> {
    let lib = |e: crate::spectra::SpectraError| CliError::Input(e.to_string());
    match src {
        SpectrumSource::Lambda => lambda_n(system, depth).map_err(lib),
        SpectrumSource::Points { points } => {
            let pts = points
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    parse_rational(s).ok_or_else(|| {
                        CliError::Config(format!("field spectrum.points[{i}]: bad rational {s:?}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SpectrumSet::from_points(pts))
        }
        _ => {
            let m = mapping(config, src, system, depth)?;
            maximal_orthogonal_set(&m, system, depth as usize).map_err(lib)
        }
    }
}

fn mapping(
    config: &RunConfig,
    src: &SpectrumSource,
    system: &MoranSystem,
    depth: u64,
) -> Result<MaximalMapping, CliError> {
    let lib = |e: crate::spectra::SpectraError| CliError::Input(e.to_string());
    match src {
        SpectrumSource::CanonicalMapping => {
            MaximalMapping::canonical(system, depth as usize).map_err(lib)
        }
        SpectrumSource::MappingFile { path } => {
            let full = config.base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
            MaximalMapping::from_records(&text, system).map_err(lib)
        }
        _ => Err(CliError::Usage(
            "this spectrum source has no maximal mapping".into(),
        )),
    }
}

fn grid(lo: f64, hi: f64, n: u64) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let m = (n - 1) as f64;
    (0..n).map(|i| lo + (hi - lo) * (i as f64 / m)).collect()
}

fn dispatch(
    config: &RunConfig,
    system: &MoranSystem,
    res: &Resolved,
    seed: u64,
) -> Result<Output, CliError> {
    Ok(match &config.command {
        Command::Validate => Output {
            checks: vec![
                system.validate_structure(res.horizon),
                validate_congruence(system, res.horizon),
            ],
            table: None,
        },
        Command::Convergence => Output::one(compact_support_check(system, res.horizon)),
        Command::Orthogonality { spectrum: src } => {
            let set = spectrum(config, src, system, res.depth)?;
            Output::one(orthogonality_exact(system, &set, res.trunc))
        }
        Command::Unitarity { spectrum: src } => unitarity(config, src, system, res, seed)?,
        Command::QScan {
            spectrum: src,
            xi_min,
            xi_max,
        } => q_scan(config, src, system, res, *xi_min, *xi_max)?,
        Command::Theorem { theorem } => Output::one(theorem_report(theorem, system, res)?),
        Command::Lemma44 { alpha, beta } => Output::one(
            lemma44_verify(*alpha, *beta, res.grid as usize)
                .map_err(|e| CliError::Input(e.to_string()))?,
        ),
        Command::Probe { indices, delta } => {
            let p = equipositive_probe(system, indices, *delta, res.grid as usize, res.trunc)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let verdict = Verdict::from_bool(!p.flagged && p.min > 0.0);
            let summary = if p.flagged {
                format!(
                    "tail transform nearly vanishes at x = {} for index {}",
                    p.argmin_x, p.argmin_index
                )
            } else {
                format!(
                    "minimum {:.6e} over {} indices and {} grid points",
                    p.min,
                    indices.len(),
                    res.grid
                )
            };
            let r = CheckReport::new("probe", verdict, summary)
                .with("min", num(p.min))
                .with(
                    "argmin",
                    json!({ "index": p.argmin_index, "x": num(p.argmin_x) }),
                )
                .with("flagged", p.flagged)
                .with(
                    "per_index",
                    json!(p
                        .per_index
                        .iter()
                        .map(|(n, v)| json!({ "index": n, "min": num(*v) }))
                        .collect::<Vec<_>>()),
                );
            Output {
                checks: vec![r],
                table: Some(p.profile),
            }
        }
    })
}

fn theorem_report(
    t: &TheoremParams,
    system: &MoranSystem,
    res: &Resolved,
) -> Result<CheckReport, CliError> {
    let w = &res.window;
    Ok(match t {
        TheoremParams::Thm12 { .. } => {
            thm12_check(system, &t.tail_params().expect("thm12 params"), w)
        }
        TheoremParams::Thm13 => thm13_check(system, w, res.eps),
        TheoremParams::Cor14 => corollary14_check(system, w, res.eps),
        TheoremParams::Thm15 { p, q, c, omega } => {
            let omega = SequenceExpr::parse(omega)
                .map_err(|e| CliError::Config(format!("field theorem.omega: {e}")))?;
            thm15_check(system, *p, *q, *c, &omega, w)
        }
        TheoremParams::Thm46 { p, q } => thm46_check(system, *p, *q, w),
    })
}

fn unitarity(
    config: &RunConfig,
    src: &SpectrumSource,
    system: &MoranSystem,
    res: &Resolved,
    seed: u64,
) -> Result<Output, CliError> {
    let set = spectrum(config, src, system, res.depth)?;
    let dev = fourier_matrix_unitary(system, res.depth, &set)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let unit = CheckReport::new(
        "unitarity",
        Verdict::from_bool(dev < res.tolerance),
        format!("max |M M* − I| = {dev:.3e} at depth {}", res.depth),
    )
    .with("deviation", num(dev))
    .with("tolerance", num(res.tolerance))
    .with("points", set.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..res.samples).map(|_| rng.gen::<f64>()).collect();
    let worst = xs
        .iter()
        .map(|&x| (q_function(system, res.depth, &set, x) - 1.0).abs())
        .fold(0.0, f64::max);
    let q = CheckReport::new(
        "q-samples",
        Verdict::from_bool(worst <= res.tolerance),
        format!(
            "max |Q(ξ) − 1| = {worst:.3e} over {} seeded samples",
            res.samples
        ),
    )
    .with("max_deviation", num(worst))
    .with("samples", res.samples);
    Ok(Output {
        checks: vec![unit, q],
        table: None,
    })
}

fn q_scan(
    config: &RunConfig,
    src: &SpectrumSource,
    system: &MoranSystem,
    res: &Resolved,
    lo: f64,
    hi: f64,
) -> Result<Output, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Usage(format!(
            "q-scan range [{lo}, {hi}] is empty or not finite"
        )));
    }
    let xs = grid(lo, hi, res.grid);
    let tol = res.tolerance;
    if !src.uses_mapping() {
        let set = spectrum(config, src, system, res.depth)?;
        let rows: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| (x, q_function(system, res.depth, &set, x)))
            .collect();
        let worst = rows
            .iter()
            .map(|(_, v)| (v - 1.0).abs())
            .fold(0.0, f64::max);
        let r = CheckReport::new(
            "q-scan",
            Verdict::from_bool(worst <= tol),
            format!(
                "max |Q(ξ) − 1| = {worst:.3e} on {} grid points (depth {})",
                rows.len(),
                res.depth
            ),
        )
        .with("max_deviation", num(worst))
        .with("tolerance", num(tol))
        .with("points", set.len());
        return Ok(Output {
            checks: vec![r],
            table: Some(rows),
        });
    }

    let m = mapping(config, src, system, res.depth)?;
    let depth = res.depth as usize;
    let profiles = xs
        .iter()
        .map(|&x| q_profile::<f64>(system, &m, depth, res.trunc, x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let rows: Vec<(f64, f64)> = xs
        .iter()
        .zip(&profiles)
        .map(|(&x, p)| (x, *p.last().unwrap_or(&0.0)))
        .collect();
    let monotone = profiles
        .iter()
        .all(|p| p.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    let max = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let (min_at, min) =
        rows.iter().enumerate().fold(
            (0, f64::INFINITY),
            |b, (i, r)| if r.1 < b.1 { (i, r.1) } else { b },
        );
    let (verdict, summary) = if !monotone || max > 1.0 + tol {
        (
            Verdict::Fail,
            format!("profile exceeds 1 or decreases (max {max:.6})"),
        )
    } else if 1.0 - min <= tol {
        (
            Verdict::Pass,
            format!("Q saturates to 1 within {tol:e} on all grid points"),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!("Q deficiency {:.6} at ξ = {} after depth {depth}; evidence against completeness only", 1.0 - min, rows[min_at].0),
        )
    };
    let r = CheckReport::new("q-profile", verdict, summary)
        .with("depth", res.depth)
        .with("trunc", res.trunc)
        .with("min", num(min))
        .with("max", num(max))
        .with("deficiency", num(1.0 - min))
        .with("monotone", monotone)
        .with("profile_at_min", json!({ "xi": num(rows[min_at].0), "values": profiles[min_at].iter().map(|v| num(*v)).collect::<Vec<_>>() }))
        .with("set_size", crate::spectra::mapping::admissible_count(depth));
    Ok(Output {
        checks: vec![r],
        table: Some(rows),
    })
}
