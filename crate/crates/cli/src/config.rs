//! Run configuration: a declarative TOML file naming datasets, detector
//! parameters, and output locations. Every path is resolved against the
//! fixture root (`BOTWATCH_FIXTURES` env var, then the config's
//! `fixture_root`, then `fixtures`), absolute paths excepted.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fixture_root: Option<PathBuf>,
    pub snapshot_date: Option<chrono::NaiveDate>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default, rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
    pub dna: Option<DnaConfig>,
    pub graph: Option<GraphConfig>,
    pub dist: Option<DistConfig>,
    pub external: Option<ExternalConfig>,
    pub annotations: Option<AnnotationsConfig>,
    pub reference: Option<ReferenceConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DnaConfig {
    /// Directory with the accounts/tweets files of the group to analyze.
    pub dataset: PathBuf,
    /// Optional member-id manifest restricting the group.
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub dataset: PathBuf,
    pub manifest: Option<PathBuf>,
    /// `heuristic` or `calibrated`.
    #[serde(default = "default_labeling")]
    pub labeling: String,
    /// account_id,label rows used in calibrated mode.
    pub calibration: Option<PathBuf>,
}

fn default_labeling() -> String {
    "heuristic".to_owned()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistConfig {
    pub suspect: PathBuf,
    pub reference: PathBuf,
    /// `join_date` or `followers_count`.
    pub score: String,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// A number, or `"calibrate"` to take the 99th percentile of seeded
    /// bootstrap half-splits of the reference group.
    pub threshold: toml::Value,
    #[serde(default = "default_splits")]
    pub calibration_splits: usize,
}

fn default_bins() -> usize {
    16
}

fn default_splits() -> usize {
    200
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    /// Dataset whose account labels are the ground truth to score against.
    pub test_set: PathBuf,
    /// Optional manifest restricting the scored accounts.
    pub manifest: Option<PathBuf>,
    /// Per-account verdict file (account_id,verdict).
    pub verdicts: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationsConfig {
    pub answers: PathBuf,
    pub gold: PathBuf,
    pub truth: Option<PathBuf>,
    #[serde(default = "default_min_accuracy")]
    pub min_accuracy: f64,
}

fn default_min_accuracy() -> f64 {
    0.70
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub detector_scores: Option<PathBuf>,
    pub annotation_outcomes: Option<PathBuf>,
}

/// A parsed config with its resolution context.
pub struct Resolved {
    pub config: RunConfig,
    pub config_path: PathBuf,
    pub fixture_root: PathBuf,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Resolved {
    pub fn load(
        config_path: &Path,
        seed_flag: Option<u64>,
        out_flag: Option<&Path>,
    ) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(config_path).map_err(|e| {
            Failure::Config(format!("cannot read config {}: {e}", config_path.display()))
        })?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| {
            Failure::Config(format!("invalid config {}: {e}", config_path.display()))
        })?;
        if let Some(entry) = config.datasets.iter().find(|d| d.name.is_empty()) {
            return Err(Failure::Config(format!(
                "dataset entry with empty name (path {})",
                entry.path.display()
            )));
        }
        if let Some(dist) = &config.dist {
            if dist.bins < 2 {
                return Err(Failure::Config(format!(
                    "dist.bins must be at least 2, got {}",
                    dist.bins
                )));
            }
            match &dist.threshold {
                toml::Value::Float(_) | toml::Value::Integer(_) => {}
                toml::Value::String(s) if s == "calibrate" => {}
                other => {
                    return Err(Failure::Config(format!(
                        "dist.threshold must be a number or \"calibrate\", got {other}"
                    )))
                }
            }
        }
        if let Some(graph) = &config.graph {
            match graph.labeling.as_str() {
                "heuristic" => {}
                "calibrated" => {
                    if graph.calibration.is_none() {
                        return Err(Failure::Config(
                            "graph.labeling = \"calibrated\" needs graph.calibration".into(),
                        ));
                    }
                }
                other => {
                    return Err(Failure::Config(format!(
                        "graph.labeling must be heuristic or calibrated, got `{other}`"
                    )))
                }
            }
        }
        if let Some(ann) = &config.annotations {
            if !(0.0..=1.0).contains(&ann.min_accuracy) {
                return Err(Failure::Config(format!(
                    "annotations.min_accuracy must lie in [0, 1], got {}",
                    ann.min_accuracy
                )));
            }
        }

        let fixture_root = std::env::var_os("BOTWATCH_FIXTURES")
            .map(PathBuf::from)
            .or_else(|| config.fixture_root.clone())
            .unwrap_or_else(|| PathBuf::from("fixtures"));
        let seed = seed_flag.or(config.seed).unwrap_or(42);
        let out_dir = out_flag
            .map(Path::to_path_buf)
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Resolved {
            config,
            config_path: config_path.to_path_buf(),
            fixture_root,
            seed,
            out_dir,
        })
    }

    /// Resolves a configured path against the fixture root.
    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.fixture_root.join(p)
        }
    }

    pub fn require_datasets(&self) -> Result<(), Failure> {
        if self.config.datasets.is_empty() {
            return Err(Failure::Config(
                "config declares no [[dataset]] entries".into(),
            ));
        }
        Ok(())
    }
}
