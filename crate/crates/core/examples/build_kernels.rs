//! Build, normalize and validate per-view kernels from feature matrices.

use mvkmf::kernels::{median_heuristic, validate_kernel_set};
use mvkmf::prelude::*;

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let (views, _) = make_synthetic(20, 3, 3, 8.0, 1.0, 5)?;

    let specs = [
        KernelSpec::Linear,
        KernelSpec::Rbf { sigma: None },
        KernelSpec::Polynomial { c: 1.0, degree: 2 },
    ];
    let mut raw = Vec::new();
    for (features, spec) in views.iter().zip(specs) {
        let kernel = build_kernel(features, &spec)?;
        let kernel = normalize_kernel(&kernel, NormalizeMode::Cosine)?;
        println!(
            "{}: {}×{} features, {spec:?}, median distance {:.3}, trace after cosine = {:.1}",
            features.view_name(),
            features.n_features(),
            features.n_samples(),
            median_heuristic(features).unwrap_or(0.0),
            kernel.trace()
        );
        raw.push((features.view_name().to_string(), kernel.into_data()));
    }

    let (ks, report) = validate_kernel_set(raw)?;
    println!("{} views over {} samples; clean = {}", ks.n_views(), ks.n(), report.is_clean());
    for w in report.warnings() {
        println!("  warning: {w}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("build_kernels example failed");
}
