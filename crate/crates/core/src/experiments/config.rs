//! Experiment configuration files.
//!
//! A run file holds either one experiment object or `{"experiments": [...]}`.
//! Every field except `experiment` has a default, so `{"experiment": "eta_bounds"}`
//! is a complete configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conifold_model::config::{ModelConfig, ModelSource};
use crate::conifold_model::{presets, ConifoldModel, GluedFamily};
use crate::error::{ConifoldError, Result};
use crate::weight_calculus::ConifoldKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    EmbeddingUniformity,
    InvertibilityUniformity,
    CompactInvertibility,
    PoincareUniformity,
    GnsUniformity,
    NeckConvergence,
    EtaBounds,
    WeightCrossing,
    RegionAtlas,
    NormIdentities,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::EmbeddingUniformity,
        ExperimentKind::InvertibilityUniformity,
        ExperimentKind::CompactInvertibility,
        ExperimentKind::PoincareUniformity,
        ExperimentKind::GnsUniformity,
        ExperimentKind::NeckConvergence,
        ExperimentKind::EtaBounds,
        ExperimentKind::WeightCrossing,
        ExperimentKind::RegionAtlas,
        ExperimentKind::NormIdentities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::EmbeddingUniformity => "embedding_uniformity",
            ExperimentKind::InvertibilityUniformity => "invertibility_uniformity",
            ExperimentKind::CompactInvertibility => "compact_invertibility",
            ExperimentKind::PoincareUniformity => "poincare_uniformity",
            ExperimentKind::GnsUniformity => "gns_uniformity",
            ExperimentKind::NeckConvergence => "neck_convergence",
            ExperimentKind::EtaBounds => "eta_bounds",
            ExperimentKind::WeightCrossing => "weight_crossing",
            ExperimentKind::RegionAtlas => "region_atlas",
            ExperimentKind::NormIdentities => "norm_identities",
        }
    }

    /// Preset used when the configuration names no model.
    pub fn default_model(self) -> Option<&'static str> {
        match self {
            ExperimentKind::CompactInvertibility => Some("spindle"),
            ExperimentKind::WeightCrossing => Some("capped_hyperboloid"),
            ExperimentKind::EtaBounds | ExperimentKind::RegionAtlas | ExperimentKind::NormIdentities => None,
            _ => Some("dumbbell"),
        }
    }
}

/// A preset name, a model file, or an inline model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Preset(String),
    File { file: PathBuf },
    Inline(ModelConfig),
}

/// Pass/fail thresholds. Defaults: uniformity ratio 2, identities 1e-10,
/// first-derivative slope 10 %, second-derivative slope 15 %, trend 0.1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on `max_t / min_t` of a swept constant.
    pub ratio: f64,
    /// Bound on `|slope|` of `log constant` against `log t`.
    pub trend: f64,
    /// Relative bound for identities and inequalities.
    pub identity: f64,
    /// Relative tolerance on the first-derivative exponent of the cutoff.
    pub slope: f64,
    /// Relative tolerance on the second-derivative exponent of the cutoff.
    pub slope_second: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ratio: 2.0, trend: 0.1, identity: 1e-10, slope: 0.1, slope_second: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Csv,
    Json,
    Plotdata,
}

impl std::str::FromStr for EmitFormat {
    type Err = ConifoldError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            "plotdata" => Ok(EmitFormat::Plotdata),
            _ => Err(ConifoldError::Config(format!("unknown output format '{s}' (csv, json, plotdata)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: Option<PathBuf>,
    pub formats: Vec<EmitFormat>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { dir: None, formats: vec![EmitFormat::Csv, EmitFormat::Json] }
    }
}

fn default_t_list() -> Vec<f64> {
    presets::T_SWEEP.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Output file stem; defaults to the experiment name.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub model: Option<ModelRef>,
    #[serde(default = "default_t_list")]
    pub t_list: Vec<f64>,
    #[serde(default = "ExperimentConfig::default_p")]
    pub p: f64,
    /// Derivative order where relevant (neck table depth).
    #[serde(default = "ExperimentConfig::default_k")]
    pub k: usize,
    /// Weight applied to presets.
    #[serde(default = "ExperimentConfig::default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
    /// Grid nodes per region for radial solvers.
    #[serde(default = "ExperimentConfig::default_grid")]
    pub grid: usize,
    /// Largest link eigenvalue included in mode sums.
    #[serde(default = "ExperimentConfig::default_max_eigenvalue")]
    pub max_eigenvalue: f64,
    /// Homogeneity degree and link eigenvalue for `weight_crossing`.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub eigenvalue: Option<f64>,
    /// `|log t|` values of the asymptotic cutoff sweep in `eta_bounds`.
    #[serde(default)]
    pub log_t_list: Option<Vec<f64>>,
    /// Region atlas parameters.
    #[serde(default)]
    pub atlas: AtlasConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtlasConfig {
    pub kind: ConifoldKind,
    pub link: String,
    pub m: usize,
    pub step: f64,
    pub range: (f64, f64),
}

impl Default for AtlasConfig {
    fn default() -> Self {
        AtlasConfig { kind: ConifoldKind::CSAC, link: "sphere:2".into(), m: 3, step: 0.05, range: (-3.0, 2.0) }
    }
}

impl ExperimentConfig {
    fn default_p() -> f64 {
        2.0
    }
    fn default_k() -> usize {
        1
    }
    fn default_beta() -> f64 {
        -0.5
    }
    fn default_grid() -> usize {
        2000
    }
    fn default_max_eigenvalue() -> f64 {
        12.0
    }

    /// A configuration with every default for `kind`.
    pub fn new(kind: ExperimentKind) -> ExperimentConfig {
        serde_json::from_value(serde_json::json!({ "experiment": kind })).expect("defaults deserialize")
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(ConifoldError::Config(format!("{}: {m}", self.label())));
        if self.t_list.is_empty() {
            return err("t_list is empty".into());
        }
        if self.t_list.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return err(format!("t_list entries must lie in (0, 1), got {:?}", self.t_list));
        }
        if self.t_list.windows(2).any(|w| w[1] >= w[0]) {
            return err(format!("t_list must be strictly decreasing, got {:?}", self.t_list));
        }
        let t = &self.tolerances;
        if [t.ratio, t.trend, t.identity, t.slope, t.slope_second].iter().any(|&v| !(v > 0.0)) {
            return err("tolerances must be positive".into());
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return err(format!("p = {} must be at least 1", self.p));
        }
        if !self.beta.is_finite() {
            return err("beta must be finite".into());
        }
        if self.grid < 50 {
            return err(format!("grid = {} nodes per region is too coarse", self.grid));
        }
        if let Some(l) = &self.log_t_list {
            if l.is_empty() || l.iter().any(|&v| !(v > 0.0)) || l.windows(2).any(|w| w[1] <= w[0]) {
                return err("log_t_list must be positive and strictly increasing".into());
            }
        }
        if !(self.atlas.step > 0.0) || !(self.atlas.range.1 > self.atlas.range.0) {
            return err("atlas step must be positive and its range non-empty".into());
        }
        Ok(())
    }

    /// Resolves the model, relative paths taken from `base`.
    pub fn model_source(&self, base: &Path) -> Result<ModelSource> {
        let preset = |name: &str| -> Result<ModelSource> {
            match name {
                "dumbbell" | "spindle" => Ok(ModelSource::Family(with_t_list(presets::family(name, self.beta)?, &self.t_list))),
                _ => Ok(ModelSource::Single(presets::model(name, self.beta)?)),
            }
        };
        match &self.model {
            None => match self.experiment.default_model() {
                Some(name) => preset(name),
                None => Err(ConifoldError::Config(format!("{} takes no model", self.label()))),
            },
            Some(ModelRef::Preset(name)) => preset(name),
            Some(ModelRef::File { file }) => {
                let path = if file.is_absolute() { file.clone() } else { base.join(file) };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ConifoldError::Config(format!("model file {}: {e}", path.display())))?;
                ModelConfig::from_json(&text)?.build()
            }
            Some(ModelRef::Inline(cfg)) => cfg.build(),
        }
    }
}

fn with_t_list(mut f: GluedFamily, t_list: &[f64]) -> GluedFamily {
    f.t_list = t_list.to_vec();
    f
}

/// The glued family of a source, or an error naming the experiment.
pub(crate) fn require_family(src: ModelSource, what: &str) -> Result<GluedFamily> {
    match src {
        ModelSource::Family(f) => Ok(f),
        ModelSource::Single(_) => Err(ConifoldError::Config(format!("{what} needs a glued family (host and partner)"))),
    }
}

pub(crate) fn require_single(src: ModelSource, what: &str) -> Result<ConifoldModel> {
    match src {
        ModelSource::Single(m) => Ok(m),
        ModelSource::Family(_) => Err(ConifoldError::Config(format!("{what} needs a single model"))),
    }
}

/// Parses a run file: one experiment object or `{"experiments": [...]}`.
pub fn parse_run_file(text: &str) -> Result<Vec<ExperimentConfig>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConifoldError::Config(format!("run file: {e}")))?;
    let list: Vec<ExperimentConfig> = match value.get("experiments") {
        Some(list) => serde_json::from_value(list.clone()),
        None => serde_json::from_value(value).map(|c| vec![c]),
    }
    .map_err(|e| ConifoldError::Config(format!("run file: {e}")))?;
    if list.is_empty() {
        return Err(ConifoldError::Config("run file lists no experiments".into()));
    }
    for c in &list {
        c.validate()?;
    }
    Ok(list)
}

pub fn load_run_file(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConifoldError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_run_file(&text)
}
