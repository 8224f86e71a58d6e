//! Fit → embed → k-means → score, shared by the CLI and the examples.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelMatrix, KernelSet};
use crate::kmeans::{kmeans, KMeansConfig};
use crate::metrics::MetricReport;
use crate::solver::{self, fit_kkm, fit_mkkm, ObjectiveVariant, SolverConfig, SolverState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "umklmf")]
    Umklmf,
    /// Ablation without the quadratic `G_v − Hᵀ` regularizer.
    #[serde(rename = "umklmf-nonsp")]
    UmklmfNonsparse,
    /// Kernel k-means on the uniform average of the view kernels.
    #[serde(rename = "kkm")]
    Kkm,
    #[serde(rename = "mkkm")]
    Mkkm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Umklmf, Algorithm::UmklmfNonsparse, Algorithm::Kkm, Algorithm::Mkkm];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Umklmf => "umklmf",
            Algorithm::UmklmfNonsparse => "umklmf-nonsp",
            Algorithm::Kkm => "kkm",
            Algorithm::Mkkm => "mkkm",
        }
    }

    /// Whether α changes the result.
    pub fn uses_alpha(self) -> bool {
        matches!(self, Algorithm::Umklmf | Algorithm::UmklmfNonsparse)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::BadParam(format!("unknown algorithm `{s}` (expected umklmf, umklmf-nonsp, kkm or mkkm)")))
    }
}

/// Everything a single fit produces.
#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub algorithm: Algorithm,
    /// `k × n` embedding; column `j` represents sample `j`.
    pub h: DMatrix<f64>,
    /// Per-view coefficient matrices (empty for the baselines).
    pub g: Vec<DMatrix<f64>>,
    /// View weights: ω for the factorization, γ for MKKM, uniform for KKM.
    pub weights: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub labels: Vec<usize>,
    /// Present when ground truth was supplied.
    pub metrics: Option<MetricReport>,
    pub wall_time_seconds: f64,
}

impl ClusteringResult {
    pub fn objective_final(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Uniform average of all view kernels.
pub fn average_kernel(ks: &KernelSet) -> Result<KernelMatrix> {
    let n = ks.n();
    let mut avg = DMatrix::zeros(n, n);
    for k_v in ks.iter() {
        avg += k_v.data();
    }
    avg /= ks.n_views() as f64;
    KernelMatrix::new("average", avg)
}

/// Clusters the columns of `h` with multi-restart k-means.
pub fn assign_labels(h: &DMatrix<f64>, clusters: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    let cfg = KMeansConfig::new(clusters).with_restarts(restarts).with_seed(seed);
    Ok(kmeans(h, &cfg)?.labels)
}

/// Runs `algorithm`, then k-means on its embedding, then scores against
/// `truth` if given. `cfg.k` is the number of clusters and `cfg.seed`
/// seeds k-means.
pub fn run_algorithm(
    ks: &KernelSet,
    algorithm: Algorithm,
    cfg: &SolverConfig,
    restarts: usize,
    truth: Option<&[usize]>,
) -> Result<ClusteringResult> {
    if let Some(t) = truth {
        if t.len() != ks.n() {
            return Err(Error::LengthMismatch { left: t.len(), right: ks.n() });
        }
    }
    let start = Instant::now();
    let (h, g, weights, objective_trace, iterations) = match algorithm {
        Algorithm::Umklmf | Algorithm::UmklmfNonsparse => {
            let variant = if algorithm == Algorithm::Umklmf {
                ObjectiveVariant::Sparse
            } else {
                ObjectiveVariant::Nonsparse
            };
            let st = solver::fit(ks, &cfg.clone().with_variant(variant))?;
            (st.h, st.g, st.omega, st.objective_trace, st.iterations)
        }
        Algorithm::Kkm => {
            cfg.validate(ks.n())?;
            let avg = average_kernel(ks)?;
            let h = fit_kkm(&avg, cfg.k)?;
            let j = solver::kkm_objective(avg.data(), &h);
            let uniform = vec![1.0 / ks.n_views() as f64; ks.n_views()];
            (h, Vec::new(), uniform, vec![j], 0)
        }
        Algorithm::Mkkm => {
            cfg.validate(ks.n())?;
            let r = fit_mkkm(ks, cfg.k, cfg.max_iters, cfg.rel_tol)?;
            (r.h, Vec::new(), r.gamma, r.objective_trace, r.iterations)
        }
    };
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{algorithm} embedding")));
    }
    let labels = assign_labels(&h, cfg.k, restarts, cfg.seed)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    let metrics = truth.map(|t| MetricReport::compute(t, &labels)).transpose()?;
    Ok(ClusteringResult { algorithm, h, g, weights, objective_trace, iterations, labels, metrics, wall_time_seconds })
}

/// One row of a per-iteration trace: objective plus metrics of the
/// k-means labeling of the current embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRow {
    pub iteration: usize,
    pub objective: f64,
    pub metrics: MetricReport,
}

/// Runs the factorization and scores the embedding after initialization
/// and after every iteration.
pub fn evolve(
    ks: &KernelSet,
    cfg: &SolverConfig,
    restarts: usize,
    truth: &[usize],
) -> Result<(SolverState, Vec<EvolutionRow>)> {
    if truth.len() != ks.n() {
        return Err(Error::LengthMismatch { left: truth.len(), right: ks.n() });
    }
    let mut rows = Vec::new();
    let mut failure = None;
    let st = solver::fit_with_observer(ks, cfg, |st| {
        if failure.is_some() {
            return;
        }
        let scored = assign_labels(&st.h, cfg.k, restarts, cfg.seed).and_then(|l| MetricReport::compute(truth, &l));
        match scored {
            Ok(metrics) => rows.push(EvolutionRow { iteration: st.iterations, objective: st.final_objective(), metrics }),
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok((st, rows)),
    }
}

/// CSV with header `iteration,objective,acc,nmi,purity,ari`.
pub fn evolution_csv(rows: &[EvolutionRow]) -> String {
    let mut out = String::from("iteration,objective,acc,nmi,purity,ari\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?}\n",
            r.iteration, r.objective, r.metrics.acc, r.metrics.nmi, r.metrics.purity, r.metrics.ari
        ));
    }
    out
}
