//! Run configuration: one system, one command, optional overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::criteria::{TailBoundParams, Window};
use crate::moran::{MoranSystem, SequenceExpr};

pub const MAX_DEPTH: u64 = 12;
pub const MAX_TRUNC: u64 = 200;
pub const MAX_GRID: u64 = 1_000_000;
pub const MAX_HORIZON: u64 = 100_000;
pub const MAX_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub p: String,
    pub a: String,
    pub b: String,
}

/// Where a candidate spectrum comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumSource {
    /// The canonical tree `Λ_n` at the configured depth.
    #[default]
    Lambda,
    /// The set generated by the canonical maximal mapping.
    CanonicalMapping,
    /// A maximal mapping read from a record file (path relative to the config).
    MappingFile { path: PathBuf },
    /// Explicit rationals such as `"1/3"`.
    Points { points: Vec<String> },
}

impl SpectrumSource {
    pub fn uses_mapping(&self) -> bool {
        matches!(
            self,
            SpectrumSource::CanonicalMapping | SpectrumSource::MappingFile { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase", deny_unknown_fields)]
pub enum TheoremParams {
    Thm12 {
        #[serde(rename = "N")]
        n_threshold: u64,
        c1: f64,
        c2: f64,
        c3: f64,
        k: u32,
    },
    Thm13,
    Cor14,
    Thm15 {
        p: i64,
        q: i64,
        c: i64,
        omega: String,
    },
    Thm46 {
        p: i64,
        q: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Validate,
    Convergence,
    Orthogonality {
        #[serde(default)]
        spectrum: SpectrumSource,
    },
    Unitarity {
        #[serde(default)]
        spectrum: SpectrumSource,
    },
    QScan {
        #[serde(default)]
        spectrum: SpectrumSource,
        #[serde(default)]
        xi_min: f64,
        #[serde(default = "one")]
        xi_max: f64,
    },
    Theorem {
        theorem: TheoremParams,
    },
    Lemma44 {
        alpha: i64,
        beta: i64,
    },
    Probe {
        indices: Vec<u64>,
        delta: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Convergence => "convergence",
            Command::Orthogonality { .. } => "orthogonality",
            Command::Unitarity { .. } => "unitarity",
            Command::QScan { .. } => "q-scan",
            Command::Theorem { .. } => "theorem",
            Command::Lemma44 { .. } => "lemma44",
            Command::Probe { .. } => "probe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub horizon: Option<u64>,
    pub window: Option<Window>,
    pub depth: Option<u64>,
    pub trunc: Option<u64>,
    pub grid: Option<u64>,
    pub tolerance: Option<f64>,
    pub eps: Option<f64>,
    pub samples: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub command: Command,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub output: OutputPaths,
    /// Directory that relative paths inside the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Overrides with command-dependent defaults filled in and bounds checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolved {
    pub horizon: u64,
    pub window: Window,
    pub depth: u64,
    pub trunc: u64,
    pub grid: u64,
    pub tolerance: f64,
    pub eps: f64,
    pub samples: u64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn system(&self) -> Result<MoranSystem, CliError> {
        let field = |name: &str, s: &str| {
            SequenceExpr::parse(s)
                .map_err(|e| CliError::Config(format!("field system.{name}: {e}")))
        };
        Ok(MoranSystem::new(
            field("p", &self.system.p)?,
            field("a", &self.system.a)?,
            field("b", &self.system.b)?,
        ))
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let o = &self.overrides;
        let (def_grid, def_trunc, def_depth) = match &self.command {
            Command::Lemma44 { .. } => (10_000, 40, 3),
            Command::Probe { .. } => (200, 30, 3),
            Command::QScan { spectrum, .. } if spectrum.uses_mapping() => (101, 45, 6),
            _ => (101, 40, 3),
        };
        let horizon = o.horizon.unwrap_or(crate::moran::DEFAULT_HORIZON);
        let r = Resolved {
            horizon,
            window: o.window.unwrap_or(Window::up_to(horizon)),
            depth: o.depth.unwrap_or(def_depth),
            trunc: o.trunc.unwrap_or(def_trunc),
            grid: o.grid.unwrap_or(def_grid),
            tolerance: o.tolerance.unwrap_or(1e-8),
            eps: o.eps.unwrap_or(0.01),
            samples: o.samples.unwrap_or(100),
        };
        let bound = |name: &str, v: u64, lo: u64, hi: u64| {
            if v < lo || v > hi {
                Err(CliError::Usage(format!(
                    "override {name} = {v} outside [{lo}, {hi}]"
                )))
            } else {
                Ok(())
            }
        };
        bound("horizon", r.horizon, 1, MAX_HORIZON)?;
        bound("depth", r.depth, 0, MAX_DEPTH)?;
        bound("trunc", r.trunc, 1, MAX_TRUNC)?;
        bound("grid", r.grid, 1, MAX_GRID)?;
        bound("samples", r.samples, 0, MAX_SAMPLES)?;
        Window::new(r.window.start, r.window.end)
            .map_err(|e| CliError::Usage(format!("override window: {e}")))?;
        bound("window.end", r.window.end, 1, MAX_HORIZON)?;
        if !(r.tolerance.is_finite() && r.tolerance > 0.0) {
            return Err(CliError::Usage(format!(
                "override tolerance = {} must be positive",
                r.tolerance
            )));
        }
        if !(r.eps.is_finite() && r.eps >= 0.0) {
            return Err(CliError::Usage(format!(
                "override eps = {} must be nonnegative",
                r.eps
            )));
        }
        Ok(r)
    }
}

impl TheoremParams {
    pub fn tail_params(&self) -> Option<TailBoundParams> {
        match *self {
            TheoremParams::Thm12 {
                n_threshold,
                c1,
                c2,
                c3,
                k,
            } => Some(TailBoundParams {
                n_threshold,
                c1,
                c2,
                c3,
                k,
            }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str =
        r#"{"system": {"p": "9", "a": "1", "b": "2"}, "command": {"name": "validate"}}"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.command, Command::Validate);
        let r = c.resolve().unwrap();
        assert_eq!(r.window, Window::up_to(200));
    }

    #[test]
    fn unknown_field_is_named() {
        let text = r#"{"system": {"p": "9", "a": "1", "b": "2", "q": "5"}, "command": {"name": "validate"}}"#;
        let e = RunConfig::parse(text).unwrap_err().to_string();
        assert!(
            e.contains("unknown field `q`") && e.contains("line 1"),
            "{e}"
        );
    }

    #[test]
    fn bad_sequence_names_field() {
        let text =
            r#"{"system": {"p": "9", "a": "1+", "b": "2"}, "command": {"name": "validate"}}"#;
        let e = RunConfig::parse(text)
            .unwrap()
            .system()
            .unwrap_err()
            .to_string();
        assert!(e.contains("system.a"), "{e}");
    }

    #[test]
    fn overrides_are_bounded() {
        let text = r#"{"system": {"p": "9", "a": "1", "b": "2"}, "command": {"name": "validate"}, "overrides": {"depth": 13}}"#;
        assert!(matches!(
            RunConfig::parse(text).unwrap().resolve(),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn theorem_command_shape() {
        let text = r#"{"system": {"p": "3", "a": "1", "b": "odd: 2^n; even: 2^(n-1)"},
            "command": {"name": "theorem", "theorem": {"id": "thm15", "p": 3, "q": 2, "c": 1, "omega": "2*n-1"}}}"#;
        let c = RunConfig::parse(text).unwrap();
        assert!(matches!(
            c.command,
            Command::Theorem {
                theorem: TheoremParams::Thm15 { .. }
            }
        ));
    }
}
