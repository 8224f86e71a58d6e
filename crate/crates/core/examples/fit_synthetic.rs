//! Fit the factorization on a separable synthetic dataset and score it.

use mvkmf::prelude::*;

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let (views, truth) = make_synthetic(50, 4, 3, 10.0, 1.0, 7)?;
    let kernels = views
        .iter()
        .map(|f| build_kernel(f, &KernelSpec::default()))
        .collect::<Result<Vec<_>>>()?;
    let ks = KernelSet::new(kernels)?;

    let cfg = SolverConfig::new(4).with_alpha(128.0).with_seed(7);
    let res = run_algorithm(&ks, Algorithm::Umklmf, &cfg, 50, Some(&truth))?;
    let m = res.metrics.expect("truth was supplied");

    println!("iterations: {}", res.iterations);
    println!("objective:  {:.6e} -> {:.6e}", res.objective_trace[0], res.objective_final());
    println!("weights:    {:?}", res.weights);
    println!("acc={:.3} nmi={:.3} purity={:.3} ari={:.3}", m.acc, m.nmi, m.purity, m.ari);
    assert_eq!(m.acc, 1.0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("fit_synthetic example failed");
}
