//! Dataset manifests (JSON).
//!
//! ```json
//! {
//!   "name": "toy",
//!   "n": 200,
//!   "clusters": 4,
//!   "views": [
//!     { "view_name": "v0", "source": { "features": "v0.csv" },
//!       "kernel": { "type": "rbf", "sigma": null }, "normalization": "none" },
//!     { "view_name": "v1", "source": { "kernel": "v1.mvk1" } }
//!   ],
//!   "labels_path": "labels.txt"
//! }
//! ```
//!
//! Relative paths resolve against the manifest's directory. Feature files
//! hold one sample per row.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::matrix::{matrix_shape, read_labels, read_matrix};
use crate::error::{Error, Result};
use crate::kernels::{
    build_kernel, normalize_kernel, validate_kernel_set, FeatureMatrix, KernelSet, KernelSpec, NormalizeMode,
    ValidationReport,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewSource {
    /// Samples × features matrix file.
    Features(PathBuf),
    /// Precomputed `n × n` kernel file.
    Kernel(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub view_name: String,
    pub source: ViewSource,
    /// Kernel function for feature-sourced views (default: rbf, median
    /// heuristic). Ignored for kernel-sourced views.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub normalization: NormalizeMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub n: usize,
    pub clusters: usize,
    pub views: Vec<ViewEntry>,
    pub labels_path: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Structural checks that need no file access.
    pub fn check_invariants(&self) -> Result<()> {
        if self.views.is_empty() {
            return Err(Error::Parse(format!("manifest `{}` lists no views", self.name)));
        }
        if self.clusters < 2 {
            return Err(Error::Parse(format!("manifest `{}`: clusters must be ≥ 2, got {}", self.name, self.clusters)));
        }
        if self.n < self.clusters {
            return Err(Error::Parse(format!(
                "manifest `{}`: n = {} is smaller than clusters = {}",
                self.name, self.n, self.clusters
            )));
        }
        let mut names = HashSet::new();
        for v in &self.views {
            if !names.insert(&v.view_name) {
                return Err(Error::Parse(format!("duplicate view name `{}`", v.view_name)));
            }
        }
        Ok(())
    }

    /// Checks that every referenced file exists and agrees on `n`.
    pub fn check_files(&self) -> Result<()> {
        let labels = read_labels(self.resolve(&self.labels_path))?;
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "labels file has {} entries, manifest says n = {}",
                labels.len(),
                self.n
            )));
        }
        for v in &self.views {
            match &v.source {
                ViewSource::Features(p) => {
                    let (rows, _) = matrix_shape(self.resolve(p))?;
                    if rows != self.n {
                        return Err(Error::DimensionMismatch(format!(
                            "view `{}` features have {rows} samples, manifest says n = {}",
                            v.view_name, self.n
                        )));
                    }
                }
                ViewSource::Kernel(p) => {
                    let (rows, cols) = matrix_shape(self.resolve(p))?;
                    if rows != self.n || cols != self.n {
                        return Err(Error::DimensionMismatch(format!(
                            "view `{}` kernel is {rows}×{cols}, manifest says n = {}",
                            v.view_name, self.n
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Result<Vec<usize>> {
        read_labels(self.resolve(&self.labels_path))
    }

    /// Builds (or loads), normalizes and validates every view's kernel.
    pub fn load_kernels(&self) -> Result<(KernelSet, ValidationReport)> {
        let mut raw = Vec::with_capacity(self.views.len());
        for v in &self.views {
            let kernel = match &v.source {
                ViewSource::Features(p) => {
                    let samples = read_matrix(self.resolve(p))?;
                    let features = FeatureMatrix::from_samples(v.view_name.clone(), &samples)?;
                    build_kernel(&features, &v.kernel.unwrap_or_default())?
                }
                ViewSource::Kernel(p) => {
                    crate::kernels::KernelMatrix::new(v.view_name.clone(), read_matrix(self.resolve(p))?)?
                }
            };
            let kernel = normalize_kernel(&kernel, v.normalization)?;
            raw.push((v.view_name.clone(), kernel.into_data()));
        }
        let (ks, report) = validate_kernel_set(raw)?;
        if ks.n() != self.n {
            return Err(Error::DimensionMismatch(format!("kernels have n = {}, manifest says {}", ks.n(), self.n)));
        }
        Ok((ks, report))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Parses manifest text without touching referenced files.
pub fn parse_manifest(text: &str, base_dir: impl Into<PathBuf>) -> Result<DatasetManifest> {
    let mut m: DatasetManifest = serde_json::from_str(text)?;
    m.base_dir = base_dir.into();
    m.check_invariants()?;
    Ok(m)
}

/// Loads and fully validates a manifest, including referenced files.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let m = parse_manifest(&text, base)?;
    m.check_files()?;
    Ok(m)
}

pub fn save_manifest(path: impl AsRef<Path>, m: &DatasetManifest) -> Result<()> {
    let mut text = m.to_json()?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
