#![allow(dead_code)]

use mvkmf::kernels::{build_kernel, FeatureMatrix, KernelMatrix, KernelSet, KernelSpec};
use mvkmf::io::make_synthetic;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut *rng))
}

/// Random `k × n` matrix with orthonormal rows (QR of a Gaussian).
pub fn random_orthonormal_rows(k: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    gaussian(n, k, rng).qr().q().transpose()
}

/// Seeded `clusters`-cluster multi-view instance with one kernel per view.
pub fn clustered_instance(
    n_per_cluster: usize,
    clusters: usize,
    views: usize,
    separation: f64,
    spec: KernelSpec,
    seed: u64,
) -> (KernelSet, Vec<usize>) {
    let (features, truth) = make_synthetic(n_per_cluster, clusters, views, separation, 1.0, seed).unwrap();
    let kernels = features.iter().map(|f| build_kernel(f, &spec).unwrap()).collect();
    (KernelSet::new(kernels).unwrap(), truth)
}

/// RBF kernels on unstructured Gaussian features.
pub fn unstructured_instance(n: usize, views: usize, seed: u64) -> KernelSet {
    let mut r = rng(seed);
    let kernels: Vec<KernelMatrix> = (0..views)
        .map(|v| {
            let f = FeatureMatrix::new(format!("v{v}"), gaussian(3 + v, n, &mut r)).unwrap();
            build_kernel(&f, &KernelSpec::Rbf { sigma: None }).unwrap()
        })
        .collect();
    KernelSet::new(kernels).unwrap()
}

/// Block-diagonal kernel of all-ones blocks with the given sizes.
pub fn ones_blocks(sizes: &[usize]) -> (DMatrix<f64>, Vec<usize>) {
    let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect();
    let n = labels.len();
    (DMatrix::from_fn(n, n, |i, j| if labels[i] == labels[j] { 1.0 } else { 0.0 }), labels)
}

/// All permutations of `0..m` (Heap's algorithm).
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            let j = if k % 2 == 0 { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    let mut out = Vec::new();
    heap(m, &mut (0..m).collect(), &mut out);
    out
}

/// Best fraction of agreements over all one-to-one relabelings of `pred`.
pub fn brute_force_accuracy(truth: &[usize], pred: &[usize]) -> f64 {
    let m = truth.iter().chain(pred).max().map_or(0, |x| x + 1);
    let best = permutations(m)
        .into_iter()
        .map(|p| truth.iter().zip(pred).filter(|(t, q)| p[**q] == **t).count())
        .max()
        .unwrap_or(0);
    best as f64 / truth.len() as f64
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// ARI by explicit enumeration of all sample pairs, evaluated as a reduced
/// exact fraction.
pub fn brute_force_ari(truth: &[usize], pred: &[usize]) -> f64 {
    let n = truth.len();
    let (mut both, mut same_t, mut same_p, mut total) = (0i128, 0i128, 0i128, 0i128);
    for i in 0..n {
        for j in i + 1..n {
            let t = truth[i] == truth[j];
            let p = pred[i] == pred[j];
            total += 1;
            same_t += i128::from(t);
            same_p += i128::from(p);
            both += i128::from(t && p);
        }
    }
    // ARI = (both − st·sp/T) / ((st + sp)/2 − st·sp/T)
    let num = 2 * both * total - 2 * same_t * same_p;
    let den = (same_t + same_p) * total - 2 * same_t * same_p;
    if den == 0 {
        // Only reachable when both partitions are all-singletons or
        // all-in-one, i.e. identical.
        return 1.0;
    }
    let g = gcd(num, den).max(1);
    (num / g) as f64 / (den / g) as f64
}
