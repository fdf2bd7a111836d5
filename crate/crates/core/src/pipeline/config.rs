use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::classify::DEFAULT_THRESHOLD_DAYS;
use crate::ingest::{Category, InputFormat};
use crate::mobility::{DisplacementDenominator, DEFAULT_MIN_CHECKINS_RG};
use crate::profiles::{LdaParams, DEFAULT_BETA, DEFAULT_ITERATIONS, DEFAULT_TOPICS};
use crate::stgraph::{CentralityMetric, PathMetric, DEFAULT_DAY_ANCHOR_HOUR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaConfig {
    #[serde(default = "default_topics")]
    pub topics: usize,
    /// Defaults to 50 / topics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Subcategories reported per topic.
    #[serde(default = "default_top_m")]
    pub top_m: usize,
}

impl LdaConfig {
    pub fn params(&self) -> LdaParams {
        let base = LdaParams::with_topics(self.topics);
        LdaParams {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta,
            iterations: self.iterations,
            seed: self.seed,
            ..base
        }
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: default_topics(),
            alpha: None,
            beta: default_beta(),
            iterations: default_iterations(),
            seed: default_seed(),
            top_m: default_top_m(),
        }
    }
}

fn default_topics() -> usize {
    DEFAULT_TOPICS
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}
fn default_seed() -> u64 {
    42
}
fn default_top_m() -> usize {
    4
}
fn default_format() -> String {
    "csv".into()
}
fn default_threshold() -> i64 {
    DEFAULT_THRESHOLD_DAYS
}
fn default_min_rg() -> usize {
    DEFAULT_MIN_CHECKINS_RG
}
fn default_anchor() -> u32 {
    DEFAULT_DAY_ANCHOR_HOUR
}
fn default_metrics() -> Vec<CentralityMetric> {
    CentralityMetric::ALL.to_vec()
}
fn default_ranking() -> usize {
    5
}

/// Full parameter surface of a pipeline run. Relative paths in a config
/// file are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub checkins: PathBuf,
    #[serde(default = "default_format")]
    pub checkins_format: String,
    pub venues: PathBuf,
    /// Category rule table; the shipped table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_map: Option<PathBuf>,
    /// Overrides the rule table's fallback label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_category: Option<Category>,
    /// Synthetic ground truth; enables the accuracy figure in the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default = "default_threshold")]
    pub threshold_days: i64,
    #[serde(default = "default_min_rg")]
    pub min_checkins_rg: usize,
    #[serde(default)]
    pub displacement_denominator: DisplacementDenominator,
    #[serde(default = "default_anchor")]
    pub day_anchor_hour: u32,
    #[serde(default = "default_metrics")]
    pub graph_metrics: Vec<CentralityMetric>,
    #[serde(default)]
    pub path_metric: PathMetric,
    /// Rows per venue and centrality ranking.
    #[serde(default = "default_ranking")]
    pub ranking_size: usize,
    #[serde(default)]
    pub lda: LdaConfig,
}

impl PipelineConfig {
    /// Config with every tunable at its default.
    pub fn new(checkins: impl Into<PathBuf>, venues: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            checkins: checkins.into(),
            checkins_format: default_format(),
            venues: venues.into(),
            category_map: None,
            default_category: None,
            ground_truth: None,
            output_dir: output_dir.into(),
            threshold_days: default_threshold(),
            min_checkins_rg: default_min_rg(),
            displacement_denominator: DisplacementDenominator::default(),
            day_anchor_hour: default_anchor(),
            graph_metrics: default_metrics(),
            path_metric: PathMetric::default(),
            ranking_size: default_ranking(),
            lda: LdaConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(format!("invalid pipeline config: {e}")))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut cfg.checkins);
        resolve(&mut cfg.venues);
        resolve(&mut cfg.output_dir);
        cfg.category_map.iter_mut().for_each(resolve);
        cfg.ground_truth.iter_mut().for_each(resolve);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn input_format(&self) -> Result<InputFormat, PipelineError> {
        self.checkins_format
            .parse()
            .map_err(|e: crate::ingest::IngestError| PipelineError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        self.input_format()?;
        if self.threshold_days <= 0 {
            return bad("threshold_days must be positive");
        }
        if self.min_checkins_rg == 0 {
            return bad("min_checkins_rg must be positive");
        }
        if self.day_anchor_hour > 23 {
            return bad("day_anchor_hour must lie in [0, 23]");
        }
        if self.graph_metrics.is_empty() {
            return bad("graph_metrics must name at least one metric");
        }
        if self.ranking_size == 0 || self.lda.top_m == 0 {
            return bad("ranking_size and lda.top_m must be at least 1");
        }
        let p = self.lda.params();
        if p.topics == 0 || p.iterations == 0 || p.alpha.is_nan() || p.alpha <= 0.0 || p.beta.is_nan() || p.beta <= 0.0
        {
            return bad("lda needs topics >= 1, iterations >= 1 and positive alpha and beta");
        }
        Ok(())
    }
}
