//! Per-view kernel construction, normalization and validation.
//!
//! A [`KernelSet`] is the only input the solvers consume. Kernels are built
//! from feature matrices (`d_v × n`, one column per sample) or loaded from
//! precomputed files and run through [`validate_kernel_set`], which repairs
//! rounding-level asymmetry and rejects anything worse.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest `|K_ij − K_ji|` silently repaired by symmetrization.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// One view's raw features, `d_v × n` (features × samples).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: DMatrix<f64>,
    view_name: String,
}

impl FeatureMatrix {
    pub fn new(view_name: impl Into<String>, data: DMatrix<f64>) -> Result<Self> {
        let view_name = view_name.into();
        if data.nrows() < 1 || data.ncols() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "view `{view_name}` needs d ≥ 1 features and n ≥ 2 samples, got {}×{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some(bad) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("view `{view_name}` feature entry {bad}")));
        }
        Ok(Self { data, view_name })
    }

    /// Builds a view from a samples × features matrix (one row per sample).
    pub fn from_samples(view_name: impl Into<String>, rows: &DMatrix<f64>) -> Result<Self> {
        Self::new(view_name, rows.transpose())
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn view_name(&self) -> &str {
        &self.view_name
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.data.nrows()
    }
}

/// Kernel function applied to feature columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// Gaussian kernel; `sigma = None` selects the median heuristic.
    Rbf {
        #[serde(default)]
        sigma: Option<f64>,
    },
    Polynomial { c: f64, degree: u32 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf { sigma: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    #[default]
    None,
    Cosine,
    Center,
}

/// A symmetric `n × n` kernel for one view.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    data: DMatrix<f64>,
    view_name: String,
}

impl KernelMatrix {
    /// Checks shape and finiteness, then symmetrizes within [`SYMMETRY_TOL`].
    pub fn new(view_name: impl Into<String>, data: DMatrix<f64>) -> Result<Self> {
        let (k, _) = inspect(view_name.into(), data)?;
        Ok(k)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    pub fn view_name(&self) -> &str {
        &self.view_name
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }
}

/// The kernels of all views over one sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    kernels: Vec<KernelMatrix>,
}

impl KernelSet {
    pub fn new(kernels: Vec<KernelMatrix>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::BadParam("a kernel set needs at least one view".into()));
        }
        let n = kernels[0].n();
        let mut names = HashSet::new();
        for k in &kernels {
            if k.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "view `{}` has n = {} but view `{}` has n = {n}",
                    k.view_name,
                    k.n(),
                    kernels[0].view_name
                )));
            }
            if !names.insert(k.view_name.clone()) {
                return Err(Error::BadParam(format!("duplicate view name `{}`", k.view_name)));
            }
        }
        Ok(Self { kernels })
    }

    pub fn n(&self) -> usize {
        self.kernels[0].n()
    }

    pub fn n_views(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernels(&self) -> &[KernelMatrix] {
        &self.kernels
    }

    pub fn view_names(&self) -> Vec<&str> {
        self.kernels.iter().map(|k| k.view_name()).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, KernelMatrix> {
        self.kernels.iter()
    }
}

/// Per-view findings from [`validate_kernel_set`].
#[derive(Debug, Clone, PartialEq)]
pub struct ViewReport {
    pub view_name: String,
    /// `max |K_ij − K_ji|` before repair.
    pub asymmetry: f64,
    /// Whether symmetrization changed any entry.
    pub repaired: bool,
    /// Power-iteration estimate of the smallest eigenvalue.
    pub min_eigenvalue: f64,
    /// Non-finite entries found (a nonzero count is also an error).
    pub nan_count: usize,
}

impl ViewReport {
    /// Indefinite kernels are accepted; the flag is informational only.
    pub fn is_indefinite(&self) -> bool {
        self.min_eigenvalue < -1e-8 * self.min_eigenvalue.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub views: Vec<ViewReport>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.views.iter().all(|v| !v.repaired && v.nan_count == 0 && !v.is_indefinite())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in &self.views {
            if v.repaired {
                out.push(format!(
                    "view `{}`: symmetrized (asymmetry {:e})",
                    v.view_name, v.asymmetry
                ));
            }
            if v.is_indefinite() {
                out.push(format!(
                    "view `{}`: indefinite kernel (min eigenvalue ≈ {:e})",
                    v.view_name, v.min_eigenvalue
                ));
            }
        }
        out
    }
}

fn inspect(view_name: String, mut data: DMatrix<f64>) -> Result<(KernelMatrix, ViewReport)> {
    if data.nrows() != data.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "kernel `{view_name}` is {}×{}, not square",
            data.nrows(),
            data.ncols()
        )));
    }
    let nan_count = data.iter().filter(|x| !x.is_finite()).count();
    if nan_count > 0 {
        return Err(Error::NonFinite(format!(
            "kernel `{view_name}` has {nan_count} non-finite entries"
        )));
    }
    let asymmetry = linalg::max_asymmetry(&data);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::AsymmetricKernel { view: view_name, asymmetry });
    }
    let repaired = asymmetry > 0.0;
    if repaired {
        linalg::symmetrize(&mut data);
    }
    let min_eigenvalue = min_eigenvalue_estimate(&data);
    let report = ViewReport { view_name: view_name.clone(), asymmetry, repaired, min_eigenvalue, nan_count };
    Ok((KernelMatrix { data, view_name }, report))
}

/// Validates raw per-view kernels and assembles them into a [`KernelSet`].
///
/// Asymmetry up to [`SYMMETRY_TOL`] is repaired by `(K + Kᵀ)/2`; larger
/// asymmetry, non-finite entries, or disagreement on `n` are errors.
pub fn validate_kernel_set<I, S>(raw: I) -> Result<(KernelSet, ValidationReport)>
where
    I: IntoIterator<Item = (S, DMatrix<f64>)>,
    S: Into<String>,
{
    let mut kernels = Vec::new();
    let mut report = ValidationReport::default();
    for (name, data) in raw {
        let (k, r) = inspect(name.into(), data)?;
        kernels.push(k);
        report.views.push(r);
    }
    Ok((KernelSet::new(kernels)?, report))
}

/// Dominant eigenvalue magnitude by power iteration from a fixed start.
fn power_iteration(apply: impl Fn(&DVector<f64>) -> DVector<f64>, n: usize) -> f64 {
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sqrt().fract());
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = apply(&v);
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - lambda).abs() <= 1e-12 * next.abs().max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Estimates `λ_min(K)` by power iteration on the shifted matrix `ρI − K`.
fn min_eigenvalue_estimate(k: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    // ρ ≥ spectral radius (Gershgorin), so ρI − K is PSD and its top
    // eigenvalue is ρ − λ_min.
    let rho = (0..n).map(|i| k.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    if rho == 0.0 {
        return 0.0;
    }
    let top = power_iteration(|v| v * rho - k * v, n);
    rho - top
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

/// Median of the nonzero pairwise Euclidean distances between samples.
pub fn median_heuristic(features: &FeatureMatrix) -> Option<f64> {
    let x = features.data();
    let n = x.ncols();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (x.column(i) - x.column(j)).norm();
            if d > 0.0 {
                dists.push(d);
            }
        }
    }
    median(dists)
}

/// Builds one view's kernel from its features.
pub fn build_kernel(features: &FeatureMatrix, spec: &KernelSpec) -> Result<KernelMatrix> {
    let x = features.data();
    let n = x.ncols();
    let gram = x.transpose() * x;
    let entry: Box<dyn Fn(usize, usize) -> f64> = match *spec {
        KernelSpec::Linear => Box::new(|i, j| gram[(i, j)]),
        KernelSpec::Rbf { sigma } => {
            let sigma = match sigma {
                Some(s) if s > 0.0 && s.is_finite() => s,
                Some(s) => return Err(Error::BadParam(format!("rbf sigma must be > 0, got {s}"))),
                None => median_heuristic(features).ok_or_else(|| {
                    Error::BadParam(format!(
                        "median heuristic undefined for view `{}`: all samples coincide",
                        features.view_name()
                    ))
                })?,
            };
            let denom = 2.0 * sigma * sigma;
            let gram = &gram;
            Box::new(move |i, j| {
                let sq = (gram[(i, i)] + gram[(j, j)] - 2.0 * gram[(i, j)]).max(0.0);
                (-sq / denom).exp()
            })
        }
        KernelSpec::Polynomial { c, degree } => {
            if degree < 1 {
                return Err(Error::BadParam("polynomial degree must be ≥ 1".into()));
            }
            if !c.is_finite() {
                return Err(Error::BadParam(format!("polynomial offset must be finite, got {c}")));
            }
            let gram = &gram;
            Box::new(move |i, j| (gram[(i, j)] + c).powi(degree as i32))
        }
    };
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = entry(i, j);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    if let Some(bad) = k.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "kernel `{}` overflowed at entry {bad}",
            features.view_name()
        )));
    }
    Ok(KernelMatrix { data: k, view_name: features.view_name().to_owned() })
}

/// Applies cosine normalization or double centering.
pub fn normalize_kernel(k: &KernelMatrix, mode: NormalizeMode) -> Result<KernelMatrix> {
    let n = k.n();
    let src = k.data();
    let data = match mode {
        NormalizeMode::None => src.clone(),
        NormalizeMode::Cosine => {
            if let Some(index) = (0..n).find(|&i| src[(i, i)] <= 0.0) {
                return Err(Error::ZeroDiagonal { view: k.view_name.clone(), index });
            }
            let scale: Vec<f64> = (0..n).map(|i| src[(i, i)].sqrt()).collect();
            let mut out = DMatrix::from_fn(n, n, |i, j| src[(i, j)] / (scale[i] * scale[j]));
            for i in 0..n {
                out[(i, i)] = 1.0;
            }
            out
        }
        NormalizeMode::Center => {
            let nf = n as f64;
            let row_means: Vec<f64> = (0..n).map(|i| src.row(i).sum() / nf).collect();
            let col_means: Vec<f64> = (0..n).map(|j| src.column(j).sum() / nf).collect();
            let grand = row_means.iter().sum::<f64>() / nf;
            let mut out =
                DMatrix::from_fn(n, n, |i, j| src[(i, j)] - row_means[i] - col_means[j] + grand);
            linalg::symmetrize(&mut out);
            out
        }
    };
    Ok(KernelMatrix { data, view_name: k.view_name.clone() })
}
