//! The regularized objective against its trace-form ablation.

use mvkmf::prelude::*;

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    println!("{:<10} {:<14} {:>6} {:>6} {:>10}", "dataset", "objective", "acc", "nmi", "iterations");
    for (name, separation) in [("easy", 8.0), ("hard", 2.0)] {
        let (views, truth) = make_synthetic(30, 3, 3, separation, 1.0, 21)?;
        let kernels = views
            .iter()
            .map(|f| build_kernel(f, &KernelSpec::default()))
            .collect::<Result<Vec<_>>>()?;
        let ks = KernelSet::new(kernels)?;
        let cfg = SolverConfig::new(3).with_alpha(32.0).with_seed(21);
        for alg in [Algorithm::Umklmf, Algorithm::UmklmfNonsparse] {
            let res = run_algorithm(&ks, alg, &cfg, 20, Some(&truth))?;
            let m = res.metrics.expect("truth was supplied");
            println!("{:<10} {:<14} {:>6.3} {:>6.3} {:>10}", name, alg, m.acc, m.nmi, res.iterations);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ablation example failed");
}
