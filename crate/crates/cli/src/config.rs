//! TOML run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hypergroup::coefficients::{CoefficientModel, Family, Step, DEFAULT_DOMAIN_FLOOR};
use hypergroup::decision::{WeightSpec, DEFAULT_DIVERGENCE_EXPONENT};
use hypergroup::spectral::{SpectralOptions, Taper};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default = "default_floor")]
    pub domain_floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_DOMAIN_FLOOR
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { family: Family::Bessel { alpha: 0.5 }, steps: Vec::new(), domain_floor: DEFAULT_DOMAIN_FLOOR }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<CoefficientModel> {
        let model = CoefficientModel { family: self.family, steps: self.steps.clone(), domain_floor: self.domain_floor };
        model.validate()?;
        Ok(model)
    }
}

/// Spectral grid; `extent` is derived from the schedules when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub taper_scale: f64,
    pub taper: Taper,
    pub extent: Option<f64>,
    pub unitarity_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        let d = SpectralOptions::default();
        Self { taper_scale: 20.0, taper: d.taper, extent: None, unitarity_tol: d.unitarity_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointsConfig {
    /// Product-formula arguments.
    pub x: f64,
    pub y: f64,
    /// Spectral parameters for `eigen`.
    pub lambdas: Vec<f64>,
    /// `eigen` samples characters on `[0, eigen_x_max]`.
    pub eigen_x_max: f64,
    pub eigen_samples: usize,
    /// Check grid `[0, check_lambda_max]` for residuals and centre symbols.
    pub check_lambda_max: f64,
    pub check_samples: usize,
    /// Random `(x, y)` pairs drawn in `[0, beurling_max]²` for the Beurling check.
    pub beurling_pairs: usize,
    pub beurling_max: f64,
}

impl Default for PointsConfig {
    fn default() -> Self {
        Self {
            x: 1.0,
            y: 2.0,
            lambdas: vec![0.5, 1.0, 2.0, 5.0],
            eigen_x_max: 10.0,
            eigen_samples: 201,
            check_lambda_max: 10.0,
            check_samples: 101,
            beurling_pairs: 10,
            beurling_max: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedules {
    /// `y` values of the recentred families.
    pub y: Vec<f64>,
    /// `x` values of the `ν_∞` scan.
    pub x: Vec<f64>,
    pub centres_x: Vec<f64>,
    pub admissibility_x: Vec<f64>,
}

impl Default for Schedules {
    fn default() -> Self {
        Self { y: vec![10.0, 15.0, 22.5, 33.75], x: vec![1.0, 2.0, 4.0], centres_x: vec![1.0, 2.0], admissibility_x: vec![1.0, 2.0, 4.0, 8.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub cauchy: f64,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub centre: f64,
    pub beurling_cap: f64,
    pub divergence_exponent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { cauchy: 5e-2, eps: None, delta: None, centre: 1e-3, beurling_cap: 1.001, divergence_exponent: DEFAULT_DIVERGENCE_EXPONENT }
    }
}

/// Closed-form symbols accepted by `decide`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Injection {
    JacobiC,
    BesselCharacter,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecideConfig {
    /// Decide on an injected symbol instead of the computed `ν_∞`.
    pub inject: Option<Injection>,
    /// Evaluation point of the injected character symbol.
    pub x_star: f64,
}

impl Default for DecideConfig {
    fn default() -> Self {
        Self { inject: None, x_star: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Calibrate,
    Eigen,
    Product,
    Asym,
    Limit,
    Decide,
    Weights,
    Centres,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub spectral: SpectralConfig,
    pub points: PointsConfig,
    pub schedules: Schedules,
    pub tolerances: Tolerances,
    pub weight: WeightSpec,
    pub decide: DecideConfig,
    /// Stages executed by `run`, in order.
    pub pipeline: Vec<Stage>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            spectral: SpectralConfig::default(),
            points: PointsConfig::default(),
            schedules: Schedules::default(),
            tolerances: Tolerances::default(),
            weight: WeightSpec::Constant,
            decide: DecideConfig::default(),
            pipeline: vec![Stage::Calibrate, Stage::Product, Stage::Asym, Stage::Limit, Stage::Decide],
            output_dir: PathBuf::from("hypergroup-out"),
            seed: 0,
        }
    }
}

/// Sets `a.b.c = value` in `doc`; the value is read as a TOML literal, else as a string.
fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let Some((key, raw)) = assignment.split_once('=') else {
        bail!("override `{assignment}` is not of the form key=value");
    };
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` is malformed");
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().with_context(|| format!("override `{key}`: `{part}` is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn strictly_increasing(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|t| !t.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        bail!("schedules.{name} must be finite and strictly increasing, got {v:?}");
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name} must be positive and finite, got {v}");
    }
    Ok(())
}

impl RunConfig {
    /// Parses TOML, then applies `dotted.key=value` overrides on top of the result.
    /// Errors name the field path, and the line when it is known.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let mut config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let line = inner.span().map(|s| format!(" (line {})", text[..s.start].matches('\n').count() + 1)).unwrap_or_default();
            anyhow::anyhow!("invalid config at `{path}`{line}: {}", inner.message())
        })?;
        if !overrides.is_empty() {
            let mut doc = toml::Table::try_from(&config)?;
            for o in overrides {
                apply_override(&mut doc, o)?;
            }
            config = serde_path_to_error::deserialize(toml::Value::Table(doc)).map_err(|e| {
                let path = e.path().to_string();
                anyhow::anyhow!("invalid override at `{path}`: {}", e.into_inner().message())
            })?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml_with(&text, overrides).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.build()?;
        self.weight.validate()?;
        positive("spectral.taper_scale", self.spectral.taper_scale)?;
        positive("spectral.unitarity_tol", self.spectral.unitarity_tol)?;
        if let Some(e) = self.spectral.extent {
            positive("spectral.extent", e)?;
        }
        positive("tolerances.cauchy", self.tolerances.cauchy)?;
        positive("tolerances.centre", self.tolerances.centre)?;
        positive("tolerances.beurling_cap", self.tolerances.beurling_cap)?;
        positive("tolerances.divergence_exponent", self.tolerances.divergence_exponent)?;
        if let Some(eps) = self.tolerances.eps {
            positive("tolerances.eps", eps)?;
        }
        if let Some(delta) = self.tolerances.delta {
            positive("tolerances.delta", delta)?;
        }
        strictly_increasing("y", &self.schedules.y)?;
        strictly_increasing("x", &self.schedules.x)?;
        strictly_increasing("centres_x", &self.schedules.centres_x)?;
        strictly_increasing("admissibility_x", &self.schedules.admissibility_x)?;
        positive("points.check_lambda_max", self.points.check_lambda_max)?;
        positive("points.eigen_x_max", self.points.eigen_x_max)?;
        positive("points.beurling_max", self.points.beurling_max)?;
        if self.points.check_samples < 2 || self.points.eigen_samples < 2 {
            bail!("points.check_samples and points.eigen_samples must be at least 2");
        }
        if !(self.points.x >= 0.0 && self.points.y >= 0.0) {
            bail!("points.x and points.y must be non-negative");
        }
        Ok(())
    }

    /// Largest spatial point any stage needs, plus the smoothing pad.
    pub fn spectral_options(&self) -> SpectralOptions {
        let mut opts = SpectralOptions {
            taper_scale: self.spectral.taper_scale,
            extent: 1.0,
            unitarity_tol: self.spectral.unitarity_tol,
            taper: self.spectral.taper,
        };
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        let xs = max(&self.schedules.x).max(max(&self.schedules.centres_x)).max(max(&self.schedules.admissibility_x));
        let needed = (max(&self.schedules.y) + xs).max(self.points.x + self.points.y).max(self.points.eigen_x_max).max(2.0 * self.points.beurling_max);
        opts.extent = self.spectral.extent.unwrap_or(needed + opts.smoothing_radius() + 2.0 * opts.spatial_step());
        opts
    }
}
