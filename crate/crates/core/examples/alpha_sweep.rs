//! Grid experiment over α with best-α selection, driven through the CLI.

use mvkmf::bench::{run_plan, ExperimentPlan};
use mvkmf::metrics::Metric;
use mvkmf::pipeline::Algorithm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let data = dir.path().join("blobs");
    let code = mvkmf::cli::run([
        "mvkmf", "--quiet", "--seed", "4", "--out", data.to_str().unwrap(),
        "synth", "--n-per-cluster", "15", "--clusters", "3", "--views", "2",
        "--separation", "3", "--name", "blobs",
    ]);
    assert_eq!(code, 0);

    let mut plan = ExperimentPlan::new(
        vec![data.join("manifest.json")],
        vec![Algorithm::Umklmf, Algorithm::Mkkm],
        dir.path().join("results"),
    );
    plan.alphas = vec![1.0, 8.0, 64.0, 512.0];
    plan.seeds = vec![0, 1];
    plan.restarts = 10;

    let outcome = run_plan(&plan)?;
    for rec in outcome.records() {
        println!(
            "{:<7} alpha={:<5} seed={} acc={:.3}",
            rec.algorithm,
            rec.alpha.map_or("-".into(), |a| a.to_string()),
            rec.seed,
            rec.metrics.acc
        );
    }
    for (alg, cell) in outcome.algorithms.iter().zip(&outcome.cells[0]) {
        if let Some(c) = cell {
            println!("best {alg}: alpha={:?} mean acc={:.3}", c.alpha, c.metrics.acc);
        }
    }
    print!("{}", outcome.table(Metric::Acc)?.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("alpha_sweep example failed");
}
