//! Kernel k-means and multiple kernel k-means spectral relaxations.

use nalgebra::DMatrix;

use super::LOSS_FLOOR;
use crate::error::{Error, Result};
use crate::kernels::{KernelMatrix, KernelSet};
use crate::linalg::top_eigenvectors;

fn check_clusters(clusters: usize, n: usize) -> Result<()> {
    if clusters == 0 || clusters > n {
        return Err(Error::BadParam(format!("need 1 ≤ clusters ≤ n, got {clusters} with n = {n}")));
    }
    Ok(())
}

/// Relaxed kernel k-means: rows of the returned `k × n` matrix are the
/// leading eigenvectors of `K`, which maximize `tr(H K Hᵀ)` under
/// `H Hᵀ = I`.
pub fn fit_kkm(k: &KernelMatrix, clusters: usize) -> Result<DMatrix<f64>> {
    check_clusters(clusters, k.n())?;
    Ok(top_eigenvectors(k.data(), clusters).1.transpose())
}

/// `tr(K − H K Hᵀ)`.
pub fn kkm_objective(k: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    k.trace() - (h * k * h.transpose()).trace()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MkkmResult {
    pub h: DMatrix<f64>,
    /// Kernel weights; the combined kernel is `Σ γ_v² K_v`.
    pub gamma: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

fn combined(ks: &KernelSet, gamma: &[f64]) -> DMatrix<f64> {
    let n = ks.n();
    let mut out = DMatrix::zeros(n, n);
    for (k_v, g) in ks.iter().zip(gamma) {
        out += k_v.data() * (g * g);
    }
    out
}

/// γ-step for a fixed `H`: minimizes `Σ γ_v² c_v` on the simplex with
/// `c_v = tr(K_v (I − HᵀH))`, clamped at the loss floor.
pub fn mkkm_weights(ks: &KernelSet, h: &DMatrix<f64>) -> Vec<f64> {
    let inv: Vec<f64> = ks
        .iter()
        .map(|k_v| 1.0 / kkm_objective(k_v.data(), h).max(LOSS_FLOOR))
        .collect();
    let total: f64 = inv.iter().sum();
    inv.iter().map(|x| x / total).collect()
}

/// Multiple kernel k-means with `K_γ = Σ γ_v² K_v`, alternating the
/// eigenvector H-step and the closed-form γ-step.
pub fn fit_mkkm(ks: &KernelSet, clusters: usize, max_iters: usize, rel_tol: f64) -> Result<MkkmResult> {
    check_clusters(clusters, ks.n())?;
    let mut gamma = vec![1.0 / ks.n_views() as f64; ks.n_views()];
    let mut h = top_eigenvectors(&combined(ks, &gamma), clusters).1.transpose();
    let mut trace = vec![kkm_objective(&combined(ks, &gamma), &h)];
    let mut iterations = 0;
    while iterations < max_iters {
        gamma = mkkm_weights(ks, &h);
        let k_gamma = combined(ks, &gamma);
        if k_gamma.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("combined kernel".into()));
        }
        h = top_eigenvectors(&k_gamma, clusters).1.transpose();
        let j = kkm_objective(&k_gamma, &h);
        if !j.is_finite() {
            return Err(Error::NonFinite(format!("MKKM objective at iteration {}", iterations + 1)));
        }
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(j);
        iterations += 1;
        if (prev - j).abs() / prev.abs().max(1e-12) < rel_tol {
            break;
        }
    }
    Ok(MkkmResult { h, gamma, objective_trace: trace, iterations })
}
