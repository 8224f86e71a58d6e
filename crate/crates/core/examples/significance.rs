//! Friedman / Iman–Davenport test and Nemenyi critical difference on a
//! table of nine algorithms over ten datasets.

use mvkmf::stats::{friedman, nemenyi_cd, significance_csv, ResultsTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Algorithm j has a true mean of 0.5 + 0.03 j plus per-dataset noise.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let algorithms: Vec<String> = (0..9).map(|j| format!("alg{j}")).collect();
    let datasets: Vec<String> = (0..10).map(|i| format!("data{i}")).collect();
    let scores = (0..10)
        .map(|_| (0..9).map(|j| 0.5 + 0.03 * j as f64 + rng.random_range(-0.05..0.05)).collect())
        .collect();
    let table = ResultsTable::complete(datasets, algorithms, scores)?;

    let summary = friedman(&table, true)?;
    print!("{}", summary.to_key_values());
    println!("critical difference for k=9, n=10: {:.4}", nemenyi_cd(9, 10, 1.96));
    print!("{}", significance_csv(&summary));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("significance example failed");
}
