//! Experiment configuration: a TOML file with sections, plus a small set
//! of command-line overrides (flags win).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ragd::Manifold;

/// A field that is either a literal number or a named rule such as
/// `"1/L"`, `"paper"` or `"ball(0.1)"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RealOrRule {
    Num(f64),
    Rule(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub kind: String,
    pub dimension: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub kind: String,
    /// Ball radius for distance-based objectives.
    pub radius: Option<f64>,
    /// Number of generated anchor points (Frechet mean).
    pub anchors: Option<usize>,
    /// Optional anchor file: one point per line, ambient coordinates,
    /// whitespace-separated.
    pub anchors_file: Option<PathBuf>,
    /// Anchor weights; uniform when omitted.
    pub weights: Option<Vec<f64>>,
    /// Diagonal of the quadratic form (Euclidean quadratic objective).
    pub diagonal: Option<Vec<f64>>,
    /// Multiplier applied to the strong-convexity constant after
    /// construction; values other than 1 deliberately break the
    /// inequality checks (used by grad-check as a violation finder).
    pub mu_scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: String,
    pub h: Option<RealOrRule>,
    pub beta: Option<RealOrRule>,
    pub gamma0: Option<RealOrRule>,
    pub max_iters: usize,
    #[serde(default)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Initial point rule, e.g. `"ball(0.1)"` or `"ball(paper)"`.
    pub x0: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradCheckConfig {
    /// Point pairs for the convexity/smoothness inequality sweep.
    pub pairs: Option<usize>,
    /// Base points for the finite-difference gradient comparison.
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldConfig,
    pub objective: ObjectiveConfig,
    pub algorithm: AlgorithmConfig,
    pub run: RunConfig,
    pub grad_check: Option<GradCheckConfig>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| format!("config parse error: {e}"))?;
        cfg.validate()?;
        if let Some(f) = &cfg.objective.anchors_file {
            let resolved = resolve_relative(path, f);
            if !resolved.exists() {
                return Err(format!("anchor file not found: {}", resolved.display()));
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        self.parse_manifold()?;
        match self.objective.kind.as_str() {
            "squared-distance" | "frechet-mean" | "quadratic" => {}
            other => return Err(format!("unknown objective kind '{other}'")),
        }
        match self.algorithm.kind.as_str() {
            "ragd-constant" | "ragd-general" | "rgd" | "both" => {}
            other => return Err(format!("unknown algorithm kind '{other}'")),
        }
        if self.algorithm.tolerance < 0.0 {
            return Err("tolerance must be nonnegative".into());
        }
        Ok(())
    }

    pub fn parse_manifold(&self) -> Result<Manifold, String> {
        let n = self.manifold.dimension;
        if n == 0 {
            return Err("manifold dimension must be positive".into());
        }
        match self.manifold.kind.as_str() {
            "euclidean" => Ok(Manifold::Euclidean(n)),
            "sphere" => Ok(Manifold::Sphere(n)),
            "hyperbolic" => Ok(Manifold::Hyperbolic(n)),
            "spd" => Ok(Manifold::Spd(n)),
            other => Err(format!("unknown manifold kind '{other}'")),
        }
    }
}

/// Interpret a path in the config file relative to the config's directory.
pub fn resolve_relative(config_path: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(file)
    }
}
