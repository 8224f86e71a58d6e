//! Dense linear-algebra helpers with deterministic sign conventions.
//!
//! Eigenvectors and singular vectors are only defined up to sign. Every
//! vector returned from here has its largest-magnitude entry made positive,
//! with near-ties (within a relative 1e-12) resolved toward the lowest index.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

const TIE_RTOL: f64 = 1e-12;

/// Index of the largest-magnitude entry, lowest index among near-ties.
fn dominant_index(v: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    let max = v.clone().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return None;
    }
    v.enumerate()
        .find(|(_, x)| x.abs() >= max * (1.0 - TIE_RTOL))
        .map(|(i, _)| i)
}

/// Flips each column so that its dominant entry is positive.
pub fn fix_column_signs(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        if let Some(i) = dominant_index(m.column(j).iter().copied()) {
            if m[(i, j)] < 0.0 {
                m.column_mut(j).neg_mut();
            }
        }
    }
}

/// Flips each row so that its dominant entry is positive.
pub fn fix_row_signs(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        if let Some(j) = dominant_index(m.row(i).iter().copied()) {
            if m[(i, j)] < 0.0 {
                m.row_mut(i).neg_mut();
            }
        }
    }
}

/// Leading `k` eigenpairs of a symmetric matrix, eigenvalues descending.
///
/// Returns the eigenvalues and an `n × k` matrix of unit-norm eigenvectors.
pub fn top_eigenvectors(sym: &DMatrix<f64>, k: usize) -> (DVector<f64>, DMatrix<f64>) {
    let n = sym.nrows();
    assert!(k <= n, "requested {k} eigenvectors of a {n}×{n} matrix");
    let eig = SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the solver's index order on exact ties.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(k, order[..k].iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, k);
    for (j, &i) in order[..k].iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    fix_column_signs(&mut vectors);
    (values, vectors)
}

/// Result of the orthogonal Procrustes step `max tr(Hᵀ A) s.t. H Hᵀ = I`.
#[derive(Debug, Clone)]
pub struct PolarFactor {
    /// Row-orthonormal maximizer `U Vᵀ`, same shape as `A`.
    pub h: DMatrix<f64>,
    /// Singular values of `A`, descending.
    pub singular_values: DVector<f64>,
}

impl PolarFactor {
    /// Smallest singular value of `A`; zero for an empty matrix.
    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.iter().copied().reduce(f64::min).unwrap_or(0.0)
    }
}

/// Orthonormal polar factor of a wide (`rows ≤ cols`) matrix via thin SVD.
pub fn polar_factor(a: &DMatrix<f64>) -> PolarFactor {
    assert!(a.nrows() <= a.ncols(), "polar_factor expects a wide matrix");
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let h = u * v_t;
    let mut singular_values = svd.singular_values.clone();
    singular_values.as_mut_slice().sort_by(|a, b| b.total_cmp(a));
    PolarFactor { h, singular_values }
}

/// `max |H Hᵀ − I|` entrywise.
pub fn orthonormality_error(h: &DMatrix<f64>) -> f64 {
    let gram = h * h.transpose();
    let k = gram.nrows();
    let mut worst = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// `‖A‖_F²`.
pub fn frobenius_sq(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// `max |A − Aᵀ|` entrywise for a square matrix.
pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Replaces `A` by `(A + Aᵀ)/2`, leaving it exactly symmetric.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}
