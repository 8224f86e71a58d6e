//! Fit through the CLI, then render label-ordered similarity heatmaps.

use std::fs;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let data = dir.path().join("data");
    let state = dir.path().join("state");
    let run = |args: &[&str]| mvkmf::cli::run(std::iter::once("mvkmf").chain(args.iter().copied()));

    assert_eq!(run(&["--quiet", "--out", data.to_str().unwrap(), "synth", "--n-per-cluster", "20", "--clusters", "3", "--views", "2"]), 0);
    let manifest = data.join("manifest.json");
    assert_eq!(run(&["--quiet", "--out", state.to_str().unwrap(), "fit", "--manifest", manifest.to_str().unwrap(), "--restarts", "10"]), 0);
    assert_eq!(run(&["--quiet", "heatmap", "--state", state.to_str().unwrap()]), 0);

    let mut names: Vec<String> = fs::read_dir(&state)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    println!("state directory: {}", names.join(" "));

    // The PGM payload follows a three-line header.
    let pgm = fs::read(state.join("similarity_H.pgm"))?;
    let mut newlines = 0;
    let start = pgm.iter().position(|&b| {
        newlines += usize::from(b == b'\n');
        newlines == 3
    });
    let pixels = &pgm[start.expect("PGM header") + 1..];
    let side = (pixels.len() as f64).sqrt() as usize;
    let block = side / 3;
    let (mut inside, mut outside, mut n_in, mut n_out) = (0.0, 0.0, 0usize, 0usize);
    for i in 0..side {
        for j in 0..side {
            let p = f64::from(pixels[i * side + j]);
            if i / block == j / block {
                inside += p;
                n_in += 1;
            } else {
                outside += p;
                n_out += 1;
            }
        }
    }
    println!("mean pixel in-block {:.1}, off-block {:.1}", inside / n_in as f64, outside / n_out as f64);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("heatmap example failed");
}
