//! Compare the factorization with kernel k-means and multiple kernel k-means.
//!
//! One view is replaced by pure noise; per-view weighting should notice.

use mvkmf::prelude::*;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let (mut views, truth) = make_synthetic(30, 3, 2, 6.0, 1.0, 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let noise = DMatrix::from_fn(4, truth.len(), |_, _| StandardNormal.sample(&mut rng));
    views.push(FeatureMatrix::new("noise", noise)?);

    let kernels = views
        .iter()
        .map(|f| build_kernel(f, &KernelSpec::Linear).and_then(|k| normalize_kernel(&k, NormalizeMode::Cosine)))
        .collect::<Result<Vec<_>>>()?;
    let ks = KernelSet::new(kernels)?;
    let cfg = SolverConfig::new(3).with_alpha(16.0).with_seed(1);

    println!("{:<14} {:>6} {:>6} {:>6} {:>6}  weights", "algorithm", "acc", "nmi", "purity", "ari");
    for alg in Algorithm::ALL {
        let res = run_algorithm(&ks, alg, &cfg, 20, Some(&truth))?;
        let m = res.metrics.expect("truth was supplied");
        let w: Vec<String> = res.weights.iter().map(|w| format!("{w:.3}")).collect();
        println!("{:<14} {:>6.3} {:>6.3} {:>6.3} {:>6.3}  [{}]", alg, m.acc, m.nmi, m.purity, m.ari, w.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("baselines example failed");
}
