//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use due_core::dnl::DnlConfig;
use due_core::schedule::Schedule;
use due_core::solvers::Algorithm;
use due_core::{SolverConfig, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Time unit of the network files, in seconds.
const SECONDS_PER_UNIT: f64 = 3600.0;

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

fn inertia_cap() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    /// `fb`, `fbf` or `ifbf`.
    pub algorithm: String,
    /// Initial step; the fixed step for `fb`.
    pub tau0: f64,
    #[serde(default = "half")]
    pub mu: f64,
    #[serde(default = "half")]
    pub lambda: f64,
    /// Inertia cap (`ifbf`).
    #[serde(default = "inertia_cap")]
    pub inertia: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    pub max_iterations: usize,
    #[serde(default)]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Label used in comparison tables; defaults to the config file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Free text, ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Instance directory, relative to the config file.
    pub network_dir: PathBuf,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    /// Number of departure intervals on `[t0, t1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_intervals: Option<usize>,
    /// Interval length in seconds; the count is rounded to fit `[t0, t1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_seconds: Option<f64>,
    /// Minimum loading time past `t1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_buffer: Option<f64>,
    /// Late-arrival penalty weight.
    #[serde(default = "one")]
    pub gamma: f64,
    /// Rate above which a cell counts as used in the gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_support: Option<f64>,
    /// Let unused cheaper cells widen the gap.
    #[serde(default)]
    pub strict_gap: bool,
    /// Output directory, relative to the config file.
    pub output_dir: PathBuf,
    #[serde(default)]
    pub dump_dnl: bool,
    pub solver: SolverBlock,
    #[serde(skip)]
    pub source: PathBuf,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })?;
        cfg.source = path.to_path_buf();
        Ok(cfg)
    }

    fn base_dir(&self) -> &Path {
        self.source.parent().unwrap_or(Path::new(""))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir().join(p)
        }
    }

    pub fn network_path(&self) -> PathBuf {
        self.resolve(&self.network_dir)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn run_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.source.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
        })
    }

    fn err(&self, msg: impl Into<String>) -> CliError {
        CliError::config(&self.source, msg)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        let span = self.t1 - self.t0;
        let k = match (self.num_intervals, self.dt_seconds) {
            (Some(k), None) => k,
            (None, Some(s)) => {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(self.err(format!("dt_seconds must be positive, got {s}")));
                }
                (span * SECONDS_PER_UNIT / s).round().max(1.0) as usize
            }
            (Some(_), Some(_)) => return Err(self.err("give either num_intervals or dt_seconds, not both")),
            (None, None) => return Err(self.err("the grid needs num_intervals or dt_seconds")),
        };
        Ok(TimeGrid::new(self.t0, self.t1, k)?)
    }

    pub fn dnl_config(&self) -> Result<DnlConfig<f64>> {
        if let Some(b) = self.horizon_buffer {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(self.err(format!("horizon_buffer must be non-negative, got {b}")));
            }
        }
        Ok(DnlConfig { horizon_buffer: self.horizon_buffer, ..DnlConfig::default() })
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        let schedule = |spec: &Option<String>| -> Result<Option<Schedule>> {
            Ok(match spec {
                Some(text) => Some(text.parse()?),
                None => None,
            })
        };
        let cfg = SolverConfig {
            algorithm: s.algorithm.parse::<Algorithm>()?,
            tau0: s.tau0,
            mu: s.mu,
            lambda: s.lambda,
            inertia: s.inertia,
            alpha: schedule(&s.alpha)?,
            beta: schedule(&s.beta)?,
            eps: schedule(&s.eps)?,
            max_iterations: s.max_iterations,
            tolerance: s.tolerance,
            seed: s.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without loading the network.
    pub fn check(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(self.err(format!("gamma must be finite and non-negative, got {}", self.gamma)));
        }
        if let Some(e) = self.eps_support {
            if !(e >= 0.0) {
                return Err(self.err(format!("eps_support must be non-negative, got {e}")));
            }
        }
        self.grid()?;
        self.dnl_config()?;
        self.solver_config()?;
        Ok(())
    }
}
