//! Experiment configuration: TOML schema, single-key overrides, and
//! exhaustive validation before any compute starts.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use leibenson::datum::DatumSpec;
use leibenson::evolution::EvolutionParams;
use leibenson::geometry::ModelManifold;
use leibenson::inequalities::{Inequality, TrialFamily};
use leibenson::ladder::LadderSpec;
use leibenson::numerics::MonotoneCubic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Campaign {
    Solve,
    DecayFit,
    FujitaScan,
    Ladder,
    VerifyInequality,
}

impl std::fmt::Display for Campaign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Campaign::Solve => "solve",
            Campaign::DecayFit => "decay_fit",
            Campaign::FujitaScan => "fujita_scan",
            Campaign::Ladder => "ladder",
            Campaign::VerifyInequality => "verify_inequality",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Euclidean,
    Hyperbolic,
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "R")]
    pub radius: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    /// Expected termination: "completed" | "blowup" | "step_underflow".
    #[serde(default)]
    pub expect_termination: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingConfig {
    /// Datum exponent of the bound.
    pub s: f64,
    /// Target exponent, r > s.
    pub r: f64,
    /// Optional budget for the minimal constant.
    #[serde(default)]
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayFitConfig {
    /// Norm to fit: finite exponent, absent = sup norm.
    #[serde(default)]
    pub fit_norm_exponent: Option<f64>,
    /// Fit window; default is the last decade `[t_end/10, t_end]`.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub expected_slope: Option<f64>,
    #[serde(default)]
    pub slope_tol: Option<f64>,
    /// Exponents whose monotone decrease is asserted.
    #[serde(default)]
    pub monotone_s: Vec<f64>,
    #[serde(default = "default_monotone_tol")]
    pub monotone_tol: f64,
    #[serde(default)]
    pub smoothing: Option<SmoothingConfig>,
}

fn default_monotone_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectConfig {
    /// "q" or "amplitude".
    pub axis: String,
    /// Value of the other coordinate during bisection.
    pub fixed: f64,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_bisect_steps")]
    pub max_steps: u32,
}

fn default_bisect_steps() -> u32 {
    12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FujitaConfig {
    pub q_values: Vec<f64>,
    /// Multiplicative factors applied to the configured datum.
    #[serde(default = "default_amplitudes")]
    pub amplitudes: Vec<f64>,
    /// Horizon as a multiple of the datum's reaction-ODE blow-up time.
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
    /// Explicit horizon overriding the factor rule.
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub expect_blowup_q: Vec<f64>,
    #[serde(default)]
    pub expect_global_q: Vec<f64>,
    #[serde(default)]
    pub bisect: Option<BisectConfig>,
}

fn default_amplitudes() -> Vec<f64> {
    vec![1.0]
}

fn default_horizon_factor() -> f64 {
    100.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderConfig {
    #[serde(flatten)]
    pub spec: LadderSpec,
    /// Assert that the last consecutive difference is below tolerance.
    #[serde(default)]
    pub require_converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityConfig {
    pub which: Inequality,
    pub p: f64,
    #[serde(flatten)]
    pub family: TrialFamily,
    #[serde(default = "default_search_cells")]
    pub n_cells: usize,
    #[serde(default = "default_padding")]
    pub padding: f64,
    /// Extra random family members per axis, drawn log-uniformly within the
    /// configured ranges from the run seed.
    #[serde(default)]
    pub random_trials: usize,
    #[serde(default)]
    pub max_infimum: Option<f64>,
    #[serde(default)]
    pub min_infimum: Option<f64>,
    /// Assert the relative change across the last two grid members is below
    /// this (stabilization).
    #[serde(default)]
    pub max_last_rel_change: Option<f64>,
    /// Assert grid-stage values decrease monotonically.
    #[serde(default)]
    pub require_monotone_decrease: bool,
}

fn default_search_cells() -> usize {
    4096
}

fn default_padding() -> f64 {
    1.25
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub campaign: Campaign,
    #[serde(default)]
    pub seed: u64,
    /// Worker-pool size for campaign-level parallelism; 0 = library default.
    #[serde(default)]
    pub workers: usize,
    pub manifold: ManifoldKind,
    #[serde(default)]
    pub curvature: Option<f64>,
    pub dimension: u32,
    /// Two-column (r, psi) table for `manifold = "custom"`.
    #[serde(default)]
    pub psi_file: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub evolution: Option<EvolutionParams>,
    #[serde(default)]
    pub datum: Option<DatumSpec>,
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    #[serde(default)]
    pub decay_fit: Option<DecayFitConfig>,
    #[serde(default)]
    pub fujita_scan: Option<FujitaConfig>,
    #[serde(default)]
    pub ladder: Option<LadderConfig>,
    #[serde(default)]
    pub verify_inequality: Option<InequalityConfig>,
}

impl ExperimentConfig {
    /// Parse a config file and apply `--override key=value` patches (dotted
    /// paths into the TOML tree).
    pub fn load(path: &Path, overrides: &[String]) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut value: toml::Value = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        for patch in overrides {
            apply_override(&mut value, patch)?;
        }
        let config: ExperimentConfig = value
            .try_into()
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    pub fn build_manifold(&self) -> anyhow::Result<ModelManifold> {
        match self.manifold {
            ManifoldKind::Euclidean => Ok(ModelManifold::euclidean(self.dimension)?),
            ManifoldKind::Hyperbolic => {
                let c = self
                    .curvature
                    .ok_or_else(|| anyhow!("hyperbolic manifold needs `curvature`"))?;
                Ok(ModelManifold::hyperbolic(self.dimension, c)?)
            }
            ManifoldKind::Custom => {
                let path = self
                    .psi_file
                    .as_ref()
                    .ok_or_else(|| anyhow!("custom manifold needs `psi_file`"))?;
                let table = leibenson::io::read_two_column(path)?;
                let (xs, ys): (Vec<f64>, Vec<f64>) = table.into_iter().unzip();
                Ok(ModelManifold::custom(
                    self.dimension,
                    MonotoneCubic::new(xs, ys)?,
                )?)
            }
        }
    }

    /// Every validation problem, collected before any compute.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.dimension < 2 {
            errs.push(format!("dimension must be >= 2, got {}", self.dimension));
        }
        match self.manifold {
            ManifoldKind::Hyperbolic => match self.curvature {
                None => errs.push("hyperbolic manifold needs `curvature`".into()),
                Some(c) if !(c > 0.0) => {
                    errs.push(format!("curvature must be positive, got {c}"))
                }
                _ => {}
            },
            ManifoldKind::Custom => match &self.psi_file {
                None => errs.push("custom manifold needs `psi_file`".into()),
                Some(p) if !p.exists() => {
                    errs.push(format!("psi table {} does not exist", p.display()))
                }
                _ => {}
            },
            ManifoldKind::Euclidean => {}
        }
        if let Some(grid) = &self.grid {
            if !(grid.radius > 0.0) {
                errs.push(format!("grid.R must be positive, got {}", grid.radius));
            }
            if grid.n_cells < 8 {
                errs.push(format!("grid.n_cells must be >= 8, got {}", grid.n_cells));
            }
        }
        if let Some(evo) = &self.evolution {
            errs.extend(evo.validation_errors(self.dimension));
        }
        if let Some(DatumSpec::File { path }) = &self.datum {
            if !path.exists() {
                errs.push(format!("datum table {} does not exist", path.display()));
            }
        }
        if let Some(DatumSpec::Bump { amplitude, radius }) = &self.datum {
            if !(*amplitude >= 0.0) || !(*radius > 0.0) {
                errs.push(format!(
                    "bump datum needs amplitude >= 0 and radius > 0, got ({amplitude}, {radius})"
                ));
            }
        }
        if let Some(DatumSpec::Barenblatt { mass, t0 }) = &self.datum {
            if !(*mass > 0.0) || !(*t0 > 0.0) {
                errs.push(format!(
                    "self-similar datum needs mass > 0 and t0 > 0, got ({mass}, {t0})"
                ));
            }
        }

        let needs_solver = matches!(
            self.campaign,
            Campaign::Solve | Campaign::DecayFit | Campaign::FujitaScan | Campaign::Ladder
        );
        if needs_solver {
            if self.grid.is_none() {
                errs.push(format!("campaign {} needs a [grid] block", self.campaign));
            }
            if self.evolution.is_none() {
                errs.push(format!("campaign {} needs an [evolution] block", self.campaign));
            }
            if self.datum.is_none() {
                errs.push(format!("campaign {} needs a [datum] block", self.campaign));
            }
        }
        match self.campaign {
            Campaign::DecayFit => {
                if self.decay_fit.is_none() {
                    errs.push("campaign decay_fit needs a [decay_fit] block".into());
                }
            }
            Campaign::FujitaScan => match &self.fujita_scan {
                None => errs.push("campaign fujita_scan needs a [fujita_scan] block".into()),
                Some(f) => {
                    if f.q_values.is_empty() {
                        errs.push("fujita_scan.q_values must not be empty".into());
                    }
                    if f.amplitudes.is_empty() || f.amplitudes.iter().any(|&a| !(a > 0.0)) {
                        errs.push("fujita_scan.amplitudes must be positive".into());
                    }
                    if let Some(b) = &f.bisect {
                        if b.axis != "q" && b.axis != "amplitude" {
                            errs.push(format!(
                                "bisect.axis must be \"q\" or \"amplitude\", got {}",
                                b.axis
                            ));
                        }
                        if !(b.lo < b.hi) {
                            errs.push(format!("bisect bracket needs lo < hi, got [{}, {}]", b.lo, b.hi));
                        }
                    }
                }
            },
            Campaign::Ladder => match &self.ladder {
                None => errs.push("campaign ladder needs a [ladder] block".into()),
                Some(l) => {
                    if let Some(grid) = &self.grid {
                        if let Some(&r_last) = l.spec.r_levels.last() {
                            if (grid.radius - r_last).abs() > 1e-12 * r_last.max(1.0) {
                                errs.push(format!(
                                    "grid.R = {} must equal the last ladder radius {r_last}",
                                    grid.radius
                                ));
                            }
                        }
                    }
                    let n = l.spec.k_levels.len();
                    if n < 2 || l.spec.r_levels.len() != n || l.spec.h_levels.len() != n {
                        errs.push("ladder level sequences must share a length >= 2".into());
                    }
                    for (name, seq) in [
                        ("k", &l.spec.k_levels),
                        ("R", &l.spec.r_levels),
                        ("h", &l.spec.h_levels),
                    ] {
                        if seq.windows(2).any(|w| w[1] < w[0]) {
                            errs.push(format!("ladder {name}-levels must be non-decreasing"));
                        }
                    }
                }
            },
            Campaign::VerifyInequality => match &self.verify_inequality {
                None => {
                    errs.push("campaign verify_inequality needs a [verify_inequality] block".into())
                }
                Some(v) => {
                    if !(v.p > 1.0) {
                        errs.push(format!("verify_inequality.p must exceed 1, got {}", v.p));
                    }
                    if v.n_cells < 8 {
                        errs.push("verify_inequality.n_cells must be >= 8".into());
                    }
                    if !(v.padding > 1.0) {
                        errs.push("verify_inequality.padding must exceed 1".into());
                    }
                }
            },
            Campaign::Solve => {}
        }
        errs
    }
}

/// Apply one `key=value` patch; `key` is a dotted path into the TOML tree,
/// `value` is parsed as a TOML literal (falling back to a string).
pub fn apply_override(root: &mut toml::Value, patch: &str) -> anyhow::Result<()> {
    let (key, raw) = patch
        .split_once('=')
        .ok_or_else(|| anyhow!("override must look like key=value, got `{patch}`"))?;
    let parsed: toml::Value = match toml::from_str::<toml::Value>(&format!("v = {raw}")) {
        Ok(toml::Value::Table(t)) => t.get("v").cloned().unwrap(),
        _ => toml::Value::String(raw.to_string()),
    };
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| anyhow!("override path `{key}` crosses a non-table value"))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
    }
    unreachable!("split always yields at least one part")
}
