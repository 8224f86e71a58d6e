//! Per-iteration objective and clustering metrics of one fit.

use mvkmf::pipeline::{evolution_csv, evolve};
use mvkmf::prelude::*;

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let (views, truth) = make_synthetic(25, 4, 3, 2.5, 1.0, 11)?;
    let kernels = views
        .iter()
        .map(|f| build_kernel(f, &KernelSpec::default()))
        .collect::<Result<Vec<_>>>()?;
    let ks = KernelSet::new(kernels)?;

    let cfg = SolverConfig::new(4).with_alpha(8.0).with_max_iters(30).with_seed(11);
    let (state, rows) = evolve(&ks, &cfg, 10, &truth)?;
    print!("{}", evolution_csv(&rows));
    println!("converged: {} after {} iterations", state.converged, state.iterations);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("convergence example failed");
}
