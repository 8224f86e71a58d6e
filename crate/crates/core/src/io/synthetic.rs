//! Seeded multi-view Gaussian blob generator.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::FeatureMatrix;

/// Generates `views` feature views of `clusters × n_per_cluster` samples.
///
/// In every view the cluster centers sit at the scaled simplex vertices
/// `(separation·noise/√2)·e_c`, so any two centers are `separation·noise`
/// apart, and samples get isotropic `N(0, noise²)` jitter. View `v` lives
/// in `clusters + v` dimensions and is rotated by its own random orthogonal
/// matrix. Samples are ordered cluster by cluster; labels are `0..clusters`.
pub fn make_synthetic(
    n_per_cluster: usize,
    clusters: usize,
    views: usize,
    separation: f64,
    noise: f64,
    seed: u64,
) -> Result<(Vec<FeatureMatrix>, Vec<usize>)> {
    if n_per_cluster == 0 || clusters == 0 || views == 0 {
        return Err(Error::BadParam("synthetic sizes must be positive".into()));
    }
    if !(separation > 0.0) || !(noise > 0.0) || !separation.is_finite() || !noise.is_finite() {
        return Err(Error::BadParam(format!(
            "need separation > 0 and noise > 0, got {separation} and {noise}"
        )));
    }
    let n = n_per_cluster * clusters;
    if n < 2 {
        return Err(Error::BadParam("need at least two samples".into()));
    }
    let labels: Vec<usize> = (0..n).map(|i| i / n_per_cluster).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || -> f64 { StandardNormal.sample(&mut rng) };
    let radius = separation * noise / 2f64.sqrt();
    let mut out = Vec::with_capacity(views);
    for v in 0..views {
        let dim = clusters + v;
        let rotation = DMatrix::from_fn(dim, dim, |_, _| gauss()).qr().q();
        let mut x = DMatrix::from_fn(dim, n, |_, _| noise * gauss());
        for (j, &c) in labels.iter().enumerate() {
            x[(c, j)] += radius;
        }
        out.push(FeatureMatrix::new(format!("view{v}"), rotation * x)?);
    }
    Ok((out, labels))
}
