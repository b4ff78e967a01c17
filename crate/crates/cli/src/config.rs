//! Pipeline configuration and deterministic artifact output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tubed_core::error::{Error, Result};
use tubed_core::models::{ManifoldKind, ManifoldModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Budgets for every sampled check; all checks record their seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckBudgets {
    pub max_points: u64,
    /// Pairs for the graph-vs-manifold distance comparison and the
    /// injectivity scan of the combined map.
    pub pair_checks: usize,
    pub lebesgue_centers: usize,
    pub growth_r_max: u32,
    pub epsilon_samples: usize,
    pub epsilon_directions: usize,
    pub distortion_balls: usize,
    pub distortion_pairs: usize,
    pub geodesic_count: usize,
    pub reach_points: usize,
    /// Far pairs for the separating-factor check.
    pub far_pair_checks: usize,
    /// Partition evaluations for the normalization and support checks.
    pub partition_checks: usize,
    /// Sampled clique pairs in the scale selection.
    pub calibration_samples: usize,
    /// Realized support pairs fed into the scale selection.
    pub realized_pairs: usize,
    pub search_node_budget: u64,
}

impl Default for CheckBudgets {
    fn default() -> Self {
        CheckBudgets {
            max_points: 30_000_000,
            pair_checks: 10_000,
            lebesgue_centers: 500,
            growth_r_max: 24,
            epsilon_samples: 60,
            epsilon_directions: 6,
            distortion_balls: 50,
            distortion_pairs: 2_000,
            geodesic_count: 48,
            reach_points: 700,
            far_pair_checks: 10_000,
            partition_checks: 4_000,
            calibration_samples: 600,
            realized_pairs: 4_000,
            search_node_budget: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub model: ManifoldKind,
    pub region: Region,
    /// Separation of the fine net carrying the partition of unity.
    pub net_r: f64,
    /// Inflations for the intersection graphs.
    pub lambdas: Vec<f64>,
    pub spacing: f64,
    pub seed: u64,
    /// Box radius for the exhaustive reference calibration (dimension <= 2).
    pub calibration_box: i64,
    pub epsilon_margin: f64,
    pub budgets: CheckBudgets,
}

impl PipelineConfig {
    /// The Euclidean-plane reference configuration.
    pub fn euclidean_default(region_radius: f64, seed: u64) -> PipelineConfig {
        PipelineConfig {
            model: ManifoldKind::Euclidean(2),
            region: Region {
                center: vec![0.0, 0.0],
                radius: region_radius,
            },
            net_r: 0.25,
            lambdas: vec![1.0, 2.0, 4.0],
            spacing: 0.1,
            seed,
            calibration_box: 4,
            epsilon_margin: 1.25,
            budgets: CheckBudgets::default(),
        }
    }

    pub fn model(&self) -> ManifoldModel {
        ManifoldModel::new(self.model.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.net_r > 0.0) {
            return Err(Error::Config("net_r must be positive".into()));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Config("spacing must be positive".into()));
        }
        if !(self.region.radius > 0.0) {
            return Err(Error::Config("region.radius must be positive".into()));
        }
        if self.lambdas.iter().any(|l| *l < 1.0) {
            return Err(Error::Config("lambdas must be >= 1".into()));
        }
        if !(self.epsilon_margin >= 1.0) {
            return Err(Error::Config("epsilon_margin must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses model labels like `euclidean2`, `hyperbolic`, `sphere:1.0`,
/// `torus:1.0,2.0`.
pub fn parse_model(label: &str) -> Result<ManifoldKind> {
    if let Some(rest) = label.strip_prefix("euclidean") {
        let n: usize = rest
            .parse()
            .map_err(|_| Error::Input(format!("bad dimension in {label}")))?;
        return Ok(ManifoldKind::Euclidean(n));
    }
    if label == "hyperbolic" {
        return Ok(ManifoldKind::HyperbolicPlane);
    }
    if let Some(rest) = label.strip_prefix("sphere:") {
        let a: f64 = rest
            .parse()
            .map_err(|_| Error::Input(format!("bad radius in {label}")))?;
        return Ok(ManifoldKind::Sphere(a));
    }
    if let Some(rest) = label.strip_prefix("torus:") {
        let periods: std::result::Result<Vec<f64>, _> =
            rest.split(',').map(|t| t.parse::<f64>()).collect();
        let periods = periods.map_err(|_| Error::Input(format!("bad periods in {label}")))?;
        return Ok(ManifoldKind::FlatTorus(periods));
    }
    Err(Error::Input(format!(
        "unknown model '{label}' (use euclidean<n>, hyperbolic, sphere:<r>, torus:<p1,..>)"
    )))
}

/// Atomic write: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes an artifact and returns its content hash.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<(PathBuf, String)> {
    let path = dir.join(name);
    write_atomic(&path, bytes)?;
    Ok((path, sha256_hex(bytes)))
}

/// Output directory resolution: flag, then environment, then default.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("TUBED_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("tubed-out"))
}
