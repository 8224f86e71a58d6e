//! Alternating optimization of the unified multi-kernel factorization.
//!
//! The model minimizes
//!
//! ```text
//! J(H, {G_v}, ω) = Σ_v ω_v² [ ‖K_v − G_v H‖_F² + α ‖G_v − Hᵀ‖_F² ]
//! s.t. H Hᵀ = I_k,  ω ≥ 0,  Σ ω_v = 1
//! ```
//!
//! over a consensus embedding `H` (`k × n`, orthonormal rows), per-view
//! coefficient matrices `G_v` (`n × k`, unconstrained) and view weights `ω`.
//! Each block has a closed-form minimizer, so every sweep of
//! [`update_g`] → [`update_h`] → [`update_weights`] is non-increasing in `J`.
//! The cost of one sweep is dominated by `n² k` kernel-times-embedding
//! products; only the initialization performs an `n × n` eigensolve.

mod baselines;

pub use baselines::{fit_kkm, fit_mkkm, kkm_objective, mkkm_weights, MkkmResult};

use nalgebra::{Cholesky, DMatrix, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelMatrix, KernelSet};
use crate::linalg::{self, polar_factor};

/// α used when none is given; the middle of the high-α plateau of the
/// `2⁰..2⁹` grid.
pub const DEFAULT_ALPHA: f64 = 128.0;

/// Losses are clamped here before inversion in [`update_weights`].
pub const LOSS_FLOOR: f64 = 1e-12;

/// Singular values below this mark the H-step as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// The objective being minimized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveVariant {
    /// Frobenius reconstruction plus `α‖G_v − Hᵀ‖²` regularizer.
    #[default]
    Sparse,
    /// Trace form `tr(−2 H K G + Gᵀ K G) − 2α tr(G H)` without the
    /// quadratic regularizer (ablation).
    Nonsparse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Number of clusters (rows of `H`).
    pub k: usize,
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once `|J_t − J_{t+1}| / max(|J_t|, 1e-12)` drops below this.
    pub rel_tol: f64,
    pub objective_variant: ObjectiveVariant,
    /// Seeds the k-means step that follows the fit; the fit itself is
    /// fully deterministic.
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            alpha: DEFAULT_ALPHA,
            max_iters: 100,
            rel_tol: 1e-6,
            objective_variant: ObjectiveVariant::Sparse,
            seed: 0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_variant(mut self, variant: ObjectiveVariant) -> Self {
        self.objective_variant = variant;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k > n {
            return Err(Error::BadParam(format!("need 2 ≤ k ≤ n, got k = {} with n = {n}", self.k)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::BadParam(format!("alpha must be finite and ≥ 0, got {}", self.alpha)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::BadParam(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Consensus embedding, `k × n` with orthonormal rows.
    pub h: DMatrix<f64>,
    /// Per-view coefficient matrices, each `n × k`.
    pub g: Vec<DMatrix<f64>>,
    /// View weights on the probability simplex.
    pub omega: Vec<f64>,
    /// Objective at initialization followed by one value per iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of H-steps whose `k`-th singular value fell below [`RANK_TOL`].
    pub rank_deficient_steps: usize,
}

impl SolverState {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }
}

/// Row-sum matrix `D` used by the initialization: `D_ij = A_max(i,j)` where
/// `A_i` is the `i`-th row sum of the kernel (diagonal `D_ii = A_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryD {
    pub d: DMatrix<f64>,
}

impl AuxiliaryD {
    pub fn from_kernel(k: &KernelMatrix) -> Self {
        let n = k.n();
        let sums: Vec<f64> = (0..n).map(|i| k.data().row(i).sum()).collect();
        Self { d: DMatrix::from_fn(n, n, |i, j| sums[i.max(j)]) }
    }
}

fn check_h(h: &DMatrix<f64>, n: usize) -> Result<()> {
    if h.ncols() != n || h.nrows() > n {
        return Err(Error::DimensionMismatch(format!(
            "H is {}×{}, expected k×{n} with k ≤ {n}",
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(())
}

fn check_g(g: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<()> {
    if g.nrows() != h.ncols() || g.ncols() != h.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "G is {}×{}, expected {}×{}",
            g.nrows(),
            g.ncols(),
            h.ncols(),
            h.nrows()
        )));
    }
    Ok(())
}

/// `d_v = ‖K_v − G_v H‖_F² + α ‖G_v − Hᵀ‖_F²`.
pub fn per_view_loss(k_v: &KernelMatrix, g_v: &DMatrix<f64>, h: &DMatrix<f64>, alpha: f64) -> Result<f64> {
    check_h(h, k_v.n())?;
    check_g(g_v, h)?;
    let mut residual = g_v * h;
    residual -= k_v.data();
    let mut reg = 0.0;
    if alpha != 0.0 {
        for (i, row) in g_v.row_iter().enumerate() {
            for (a, x) in row.iter().enumerate() {
                let d = x - h[(a, i)];
                reg += d * d;
            }
        }
    }
    Ok(linalg::frobenius_sq(&residual) + alpha * reg)
}

/// Ridge added to `K_v` in the ablation G-step: `1e-8 · tr(K_v)/n`.
pub fn nonsparse_ridge(k_v: &KernelMatrix) -> f64 {
    let scale = k_v.trace() / k_v.n() as f64;
    if scale > 0.0 && scale.is_finite() {
        1e-8 * scale
    } else {
        1e-8
    }
}

/// Ablation per-view value
/// `tr(−2 H K G) + tr(Gᵀ (K + εI) G) − 2α tr(G H)`, with `ε` from
/// [`nonsparse_ridge`]. Unlike [`per_view_loss`] this can be negative.
pub fn nonsparse_view_loss(k_v: &KernelMatrix, g_v: &DMatrix<f64>, h: &DMatrix<f64>, alpha: f64) -> Result<f64> {
    check_h(h, k_v.n())?;
    check_g(g_v, h)?;
    let kg = k_v.data() * g_v;
    let eps = nonsparse_ridge(k_v);
    let cross = (h * &kg).trace();
    let quad = (g_v.transpose() * &kg).trace() + eps * linalg::frobenius_sq(g_v);
    let link = (h * g_v).trace();
    Ok(-2.0 * cross + quad - 2.0 * alpha * link)
}

fn view_loss(variant: ObjectiveVariant, k_v: &KernelMatrix, g_v: &DMatrix<f64>, h: &DMatrix<f64>, alpha: f64) -> Result<f64> {
    match variant {
        ObjectiveVariant::Sparse => per_view_loss(k_v, g_v, h, alpha),
        ObjectiveVariant::Nonsparse => nonsparse_view_loss(k_v, g_v, h, alpha),
    }
}

/// Value of the configured objective at `st`.
pub fn objective(ks: &KernelSet, st: &SolverState, cfg: &SolverConfig) -> Result<f64> {
    if st.g.len() != ks.n_views() || st.omega.len() != ks.n_views() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} G blocks and {} weights for {} views",
            st.g.len(),
            st.omega.len(),
            ks.n_views()
        )));
    }
    let mut total = 0.0;
    for ((k_v, g_v), w) in ks.iter().zip(&st.g).zip(&st.omega) {
        total += w * w * view_loss(cfg.objective_variant, k_v, g_v, &st.h, cfg.alpha)?;
    }
    Ok(total)
}

/// Closed-form G-step: `G_v = (K_vᵀ Hᵀ + α Hᵀ) / (α + 1)`.
pub fn update_g(k_v: &KernelMatrix, h: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    check_h(h, k_v.n())?;
    let ht = h.transpose();
    // K is symmetric, so Kᵀ Hᵀ = K Hᵀ; the plain product is the faster kernel.
    let mut g = k_v.data() * &ht;
    g += &ht * alpha;
    g /= alpha + 1.0;
    Ok(g)
}

/// Ablation G-step: solves `(K_v + εI) G_v = K_v Hᵀ + α Hᵀ`.
pub fn update_g_nonsparse(k_v: &KernelMatrix, h: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    check_h(h, k_v.n())?;
    let n = k_v.n();
    let ht = h.transpose();
    let rhs = k_v.data() * &ht + &ht * alpha;
    let mut lhs = k_v.data().clone();
    let eps = nonsparse_ridge(k_v);
    for i in 0..n {
        lhs[(i, i)] += eps;
    }
    if let Some(chol) = Cholesky::new(lhs.clone()) {
        return Ok(chol.solve(&rhs));
    }
    LU::new(lhs).solve(&rhs).ok_or_else(|| {
        Error::NonFinite(format!("kernel `{}` + ridge is singular", k_v.view_name()))
    })
}

/// Output of [`update_h`].
#[derive(Debug, Clone)]
pub struct HStep {
    pub h: DMatrix<f64>,
    /// Singular values of the aggregated matrix `A`, descending.
    pub singular_values: Vec<f64>,
    /// The `k`-th singular value was below [`RANK_TOL`]; `H` is then one
    /// of several maximizers.
    pub rank_deficient: bool,
}

/// Aggregated H-step matrix `A = Σ_v ω_v² (G_vᵀ K_v + α G_vᵀ)`, summed in
/// view order.
pub fn h_step_matrix(ks: &KernelSet, g: &[DMatrix<f64>], omega: &[f64], alpha: f64) -> Result<DMatrix<f64>> {
    if g.len() != ks.n_views() || omega.len() != ks.n_views() {
        return Err(Error::DimensionMismatch(format!(
            "{} G blocks and {} weights for {} views",
            g.len(),
            omega.len(),
            ks.n_views()
        )));
    }
    let n = ks.n();
    let k = g.first().map_or(0, |g| g.ncols());
    let mut a = DMatrix::zeros(k, n);
    for ((k_v, g_v), w) in ks.iter().zip(g).zip(omega) {
        if g_v.nrows() != n || g_v.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "G for view `{}` is {}×{}, expected {n}×{k}",
                k_v.view_name(),
                g_v.nrows(),
                g_v.ncols()
            )));
        }
        let w2 = w * w;
        // Gᵀ K = (K G)ᵀ for symmetric K.
        let mut term = k_v.data() * g_v;
        term += g_v * alpha;
        a += term.transpose() * w2;
    }
    Ok(a)
}

/// Orthogonal Procrustes: `argmax tr(Hᵀ A)` over row-orthonormal `H` is
/// `U Vᵀ` from the thin SVD `A = U Σ Vᵀ`.
pub fn procrustes(a: &DMatrix<f64>) -> HStep {
    let p = polar_factor(a);
    let rank_deficient = p.min_singular_value() < RANK_TOL;
    HStep { h: p.h, singular_values: p.singular_values.iter().copied().collect(), rank_deficient }
}

/// Closed-form H-step.
pub fn update_h(ks: &KernelSet, g: &[DMatrix<f64>], omega: &[f64], alpha: f64) -> Result<HStep> {
    let a = h_step_matrix(ks, g, omega, alpha)?;
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("H-step matrix".into()));
    }
    Ok(procrustes(&a))
}

/// Minimizer of `Σ_v ω_v² d_v` over the probability simplex.
///
/// For nonnegative losses this is `ω_v ∝ 1/d_v`, with each `d_v` first
/// clamped to [`LOSS_FLOOR`]. If any loss is negative (possible only for
/// the ablation objective) the minimum sits at the vertex of the most
/// negative loss, lowest index on ties.
pub fn update_weights(d: &[f64]) -> Vec<f64> {
    let most_negative = d
        .iter()
        .enumerate()
        .filter(|(_, &x)| x < 0.0)
        .fold(None::<(usize, f64)>, |best, (i, &x)| match best {
            Some((_, b)) if b <= x => best,
            _ => Some((i, x)),
        });
    if let Some((vertex, _)) = most_negative {
        return (0..d.len()).map(|i| if i == vertex { 1.0 } else { 0.0 }).collect();
    }
    let inv: Vec<f64> = d.iter().map(|&x| 1.0 / x.max(LOSS_FLOOR)).collect();
    let total: f64 = inv.iter().sum();
    inv.iter().map(|x| x / total).collect()
}

/// Initial `G_v`: the `k` leading eigenvectors of `D_v + K_v`.
pub fn init_g(k_v: &KernelMatrix, k: usize) -> Result<DMatrix<f64>> {
    if k > k_v.n() {
        return Err(Error::BadParam(format!("k = {k} exceeds n = {}", k_v.n())));
    }
    let mut m = AuxiliaryD::from_kernel(k_v).d;
    m += k_v.data();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("initialization matrix for `{}`", k_v.view_name())));
    }
    Ok(linalg::top_eigenvectors(&m, k).1)
}

/// Initial state: `G_v` from [`init_g`], `H` the polar factor of the mean
/// `Ḡᵀ`, uniform weights.
pub fn init_state(ks: &KernelSet, cfg: &SolverConfig) -> Result<SolverState> {
    cfg.validate(ks.n())?;
    let g = ks.iter().map(|k_v| init_g(k_v, cfg.k)).collect::<Result<Vec<_>>>()?;
    let v = ks.n_views() as f64;
    let mut mean = DMatrix::zeros(ks.n(), cfg.k);
    for g_v in &g {
        mean += g_v;
    }
    mean /= v;
    let h = polar_factor(&mean.transpose()).h;
    let omega = vec![1.0 / v; ks.n_views()];
    let mut st = SolverState {
        h,
        g,
        omega,
        objective_trace: Vec::new(),
        iterations: 0,
        converged: false,
        rank_deficient_steps: 0,
    };
    let j0 = objective(ks, &st, cfg)?;
    if !j0.is_finite() {
        return Err(Error::NonFinite("objective at initialization".into()));
    }
    st.objective_trace.push(j0);
    Ok(st)
}

/// One full sweep of the three block updates; returns the new objective.
pub fn step(ks: &KernelSet, st: &mut SolverState, cfg: &SolverConfig) -> Result<f64> {
    let g_update = match cfg.objective_variant {
        ObjectiveVariant::Sparse => update_g,
        ObjectiveVariant::Nonsparse => update_g_nonsparse,
    };
    st.g = ks.iter().map(|k_v| g_update(k_v, &st.h, cfg.alpha)).collect::<Result<Vec<_>>>()?;
    let hs = update_h(ks, &st.g, &st.omega, cfg.alpha)?;
    if hs.rank_deficient {
        st.rank_deficient_steps += 1;
    }
    st.h = hs.h;
    let d = ks
        .iter()
        .zip(&st.g)
        .map(|(k_v, g_v)| view_loss(cfg.objective_variant, k_v, g_v, &st.h, cfg.alpha))
        .collect::<Result<Vec<_>>>()?;
    st.omega = update_weights(&d);
    let j: f64 = st.omega.iter().zip(&d).map(|(w, d)| w * w * d).sum();
    if !j.is_finite() {
        return Err(Error::NonFinite(format!("objective at iteration {}", st.iterations + 1)));
    }
    st.objective_trace.push(j);
    st.iterations += 1;
    Ok(j)
}

/// Runs the alternating optimization to convergence.
pub fn fit(ks: &KernelSet, cfg: &SolverConfig) -> Result<SolverState> {
    fit_with_observer(ks, cfg, |_| {})
}

/// Like [`fit`], calling `observer` after initialization and after every
/// iteration.
pub fn fit_with_observer(
    ks: &KernelSet,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&SolverState),
) -> Result<SolverState> {
    let mut st = init_state(ks, cfg)?;
    observer(&st);
    while st.iterations < cfg.max_iters {
        let prev = st.final_objective();
        let j = step(ks, &mut st, cfg)?;
        observer(&st);
        if (prev - j).abs() / prev.abs().max(1e-12) < cfg.rel_tol {
            st.converged = true;
            break;
        }
    }
    Ok(st)
}
