//! Multi-restart Lloyd k-means with k-means++ seeding.
//!
//! Points are the columns of a `dim × n` matrix, which is how the consensus
//! embedding `H` is laid out. Each restart draws from its own ChaCha stream
//! keyed by `(seed, restart)`, so results do not depend on execution order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when no center moves farther than this (Euclidean).
    pub tol: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self { k, restarts: 50, max_iters: 300, tol: 1e-10, seed: 0 }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub labels: Vec<usize>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
    /// `dim × k` cluster centers.
    pub centers: DMatrix<f64>,
    /// Restart that produced this labeling.
    pub restart: usize,
}

/// One Lloyd run from fixed initial centers.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub labels: Vec<usize>,
    pub centers: DMatrix<f64>,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
}

impl LloydRun {
    pub fn inertia(&self) -> f64 {
        *self.inertia_trace.last().unwrap_or(&0.0)
    }
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points.column(i).iter().zip(centers.column(c).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Nearest center, lowest index on ties.
fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.ncols() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding.
pub fn kmeans_plus_plus(points: &DMatrix<f64>, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = points.ncols();
    let mut centers = DMatrix::zeros(points.nrows(), k);
    let first = rng.random_range(0..n);
    centers.set_column(0, &points.column(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = i;
                    break;
                }
            }
            // Floating round-off can overshoot; never land on a zero-weight point.
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.set_column(c, &points.column(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

/// Lloyd iterations from `centers` until assignments stop changing, no
/// center moves more than `tol`, or `max_iters` is reached.
///
/// An emptied cluster is re-seeded at the point farthest from its current
/// center (distinct points for several empty clusters).
pub fn lloyd(points: &DMatrix<f64>, mut centers: DMatrix<f64>, max_iters: usize, tol: f64) -> LloydRun {
    let n = points.ncols();
    let k = centers.ncols();
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut inertia_trace = Vec::new();
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for i in 0..n {
            let (c, d) = nearest(points, i, &centers);
            changed |= labels[i] != c;
            labels[i] = c;
            dists[i] = d;
        }
        inertia_trace.push(dists.iter().sum());
        if !changed {
            break;
        }

        let mut counts = vec![0usize; k];
        let mut sums = DMatrix::zeros(points.nrows(), k);
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            let mut col = sums.column_mut(c);
            col += points.column(i);
        }
        let mut taken = vec![false; n];
        let mut shift = 0.0_f64;
        for c in 0..k {
            if counts[c] > 0 {
                let mean = sums.column(c) / counts[c] as f64;
                shift = shift.max((&mean - centers.column(c)).norm());
                centers.set_column(c, &mean);
            } else {
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .fold(None::<(usize, f64)>, |best, i| match best {
                        Some((_, b)) if b >= dists[i] => best,
                        _ => Some((i, dists[i])),
                    });
                if let Some((i, _)) = far {
                    taken[i] = true;
                    shift = f64::INFINITY;
                    centers.set_column(c, &points.column(i));
                }
            }
        }
        if shift <= tol {
            // Centers are the means of the current assignment already.
            break;
        }
    }
    // If the loop ended on an update step, report inertia against the new centers.
    let final_inertia: f64 = (0..n).map(|i| sq_dist(points, i, &centers, labels[i])).sum();
    if inertia_trace.last().is_some_and(|&last| final_inertia < last) {
        inertia_trace.push(final_inertia);
    }
    LloydRun { labels, centers, inertia_trace }
}

/// Best-of-`restarts` k-means over the columns of `points`.
pub fn kmeans(points: &DMatrix<f64>, cfg: &KMeansConfig) -> Result<Labeling> {
    let n = points.ncols();
    if cfg.k < 1 || cfg.restarts < 1 {
        return Err(Error::BadParam("k-means needs k ≥ 1 and restarts ≥ 1".into()));
    }
    if n < cfg.k {
        return Err(Error::TooFewPoints { n, k: cfg.k });
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    let runs: Vec<LloydRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let init = kmeans_plus_plus(points, cfg.k, &mut rng);
            lloyd(points, init, cfg.max_iters, cfg.tol)
        })
        .collect();
    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1.inertia() < best.1.inertia() { cur } else { best })
        .expect("at least one restart");
    Ok(Labeling { inertia: best.inertia(), labels: best.labels, centers: best.centers, restart })
}
