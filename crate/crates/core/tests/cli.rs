use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mvkmf::io::{read_labels, read_matrix, read_records, write_labels, write_matrix, RunRecord};
use nalgebra::DMatrix;

fn mvkmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvkmf")).args(args).env("MVKMF_THREADS", "2").output().expect("spawn mvkmf")
}

fn ok(args: &[&str]) -> Output {
    let out = mvkmf(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three well-separated clusters of 15 samples in two views.
fn synth(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    ok(&[
        "synth", "--n-per-cluster", "15", "--clusters", "3", "--views", "2", "--separation", "12", "--seed", "3",
        "--quiet", "--out", s(&data),
    ]);
    data.join("manifest.json")
}

/// A one-view dataset whose kernel contains a NaN.
fn broken(dir: &Path) -> PathBuf {
    let data = dir.join("broken");
    fs::create_dir_all(&data).unwrap();
    let mut k = DMatrix::<f64>::identity(6, 6);
    k[(2, 2)] = f64::NAN;
    write_matrix(data.join("k.mvk1"), &k).unwrap();
    write_labels(data.join("labels.txt"), &[0, 0, 0, 1, 1, 1]).unwrap();
    let manifest = r#"{"name":"broken","n":6,"clusters":2,"labels_path":"labels.txt",
        "views":[{"view_name":"k","source":{"kernel":"k.mvk1"}}]}"#;
    fs::write(data.join("manifest.json"), manifest).unwrap();
    data.join("manifest.json")
}

#[test]
fn synth_writes_a_loadable_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(tmp.path());
    let data = manifest.parent().unwrap();
    assert_eq!(read_labels(data.join("labels.txt")).unwrap().len(), 45);
    assert_eq!(read_matrix(data.join("view0.csv")).unwrap().shape(), (45, 3));
    assert_eq!(read_matrix(data.join("view1.csv")).unwrap().shape(), (45, 4));
}

#[test]
fn fit_recovers_clusters_and_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        ok(&["fit", "--manifest", s(&manifest), "--alpha", "16", "--restarts", "10", "--quiet", "--out", s(dir)]);
    }
    let rec: RunRecord = serde_json::from_str(&fs::read_to_string(a.join("record.json")).unwrap()).unwrap();
    assert_eq!(rec.metrics.acc, 1.0);
    assert_eq!(rec.alpha, Some(16.0));
    assert_eq!(fs::read(a.join("labels.txt")).unwrap(), fs::read(b.join("labels.txt")).unwrap());

    let h = read_matrix(a.join("H.mvk1")).unwrap();
    assert_eq!(h.shape(), (3, 45));
    assert!((&h * h.transpose() - DMatrix::identity(3, 3)).amax() < 1e-10);
    assert_eq!(read_matrix(a.join("G_view0.mvk1")).unwrap().shape(), (45, 3));
    let omega = read_matrix(a.join("omega.mvk1")).unwrap();
    assert!((omega.sum() - 1.0).abs() < 1e-12);
    let trace = read_matrix(a.join("objective_trace.mvk1")).unwrap();
    assert_eq!(trace.ncols(), rec.iterations + 1);
    assert_eq!(read_records(a.join("records.jsonl")).unwrap(), vec![rec]);
}

#[test]
fn fit_rejects_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(tmp.path());
    let out = s(&tmp.path().join("x")).to_string();
    assert_eq!(mvkmf(&["fit", "--manifest", s(&manifest), "--alpha", "-1", "--out", &out]).status.code(), Some(2));
    assert_eq!(mvkmf(&["fit", "--manifest", "/no/such/manifest.json", "--out", &out]).status.code(), Some(2));
    assert_eq!(mvkmf(&["fit", "--bogus-flag"]).status.code(), Some(2));
    let nan = broken(tmp.path());
    assert_eq!(mvkmf(&["fit", "--manifest", s(&nan), "--out", &out]).status.code(), Some(3));
}

#[test]
fn kernels_are_byte_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(tmp.path());
    let (a, b) = (tmp.path().join("ka"), tmp.path().join("kb"));
    ok(&["kernels", "--manifest", s(&manifest), "--quiet", "--out", s(&a)]);
    ok(&["kernels", "--manifest", s(&manifest), "--quiet", "--out", s(&b)]);
    for view in ["view0.mvk1", "view1.mvk1"] {
        let bytes = fs::read(a.join(view)).unwrap();
        assert!(bytes.starts_with(b"MVK1 45 45\n"));
        assert_eq!(bytes, fs::read(b.join(view)).unwrap());
    }
}

#[test]
fn bench_tables_and_best_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(tmp.path());
    let nan = broken(tmp.path());
    let results = tmp.path().join("results");
    ok(&[
        "bench", "--manifest", s(&manifest), s(&nan), "--algorithms", "umklmf,kkm", "--alphas", "1,16,256",
        "--seeds", "0,1", "--restarts", "5", "--experiment", "exp", "--quiet", "--out", s(&results),
    ]);
    let dir = results.join("exp");
    let table = fs::read_to_string(dir.join("table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3, "{table}");
    assert_eq!(lines[0], "dataset,umklmf,kkm");
    assert!(lines[1].starts_with("synthetic,"));
    assert_eq!(lines[2], "broken,-,-");
    for metric in ["acc", "nmi", "purity", "ari"] {
        assert!(dir.join(format!("table_{metric}.csv")).exists());
    }

    // The table's umklmf score is the best seed-averaged ACC over the grid.
    let records = read_records(dir.join("records.jsonl")).unwrap();
    assert_eq!(records.len(), 3 * 2 + 2);
    let mut best = f64::NEG_INFINITY;
    for alpha in [1.0, 16.0, 256.0] {
        let accs: Vec<f64> =
            records.iter().filter(|r| r.algorithm == "umklmf" && r.alpha == Some(alpha)).map(|r| r.metrics.acc).collect();
        assert_eq!(accs.len(), 2);
        best = best.max(accs.iter().sum::<f64>() / 2.0);
    }
    let cell: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((cell - best).abs() < 1e-12, "{cell} vs {best}");

    // Nothing succeeds → numeric failure.
    let code = mvkmf(&["bench", "--manifest", s(&nan), "--algorithms", "kkm", "--quiet", "--out", s(&results)]);
    assert_eq!(code.status.code(), Some(3));
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key}="))).unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn stats_reports_friedman_and_cd() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = String::from("dataset");
    for j in 0..9 {
        csv += &format!(",a{j}");
    }
    csv.push('\n');
    for i in 0..10 {
        csv += &format!("d{i}");
        for j in 0..9 {
            csv += &format!(",{}", 0.5 + 0.01 * j as f64 + 0.003 * ((i * 7 + j * 3) % 5) as f64);
        }
        csv.push('\n');
    }
    csv += "d10,-,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n";
    let table = tmp.path().join("t.csv");
    fs::write(&table, &csv).unwrap();
    let out_dir = tmp.path().join("stats");
    let text = stdout(&ok(&["stats", "--table", s(&table), "--out", s(&out_dir)]));
    assert!(value(&text, "cd").starts_with("2.4004"), "{text}");
    assert_eq!(value(&text, "datasets_used"), "10");
    assert_eq!(value(&text, "datasets_excluded"), "1");
    assert_eq!((value(&text, "df1"), value(&text, "df2")), ("8", "72"));
    assert!(value(&text, "p_value").parse::<f64>().unwrap() < 1e-6);
    assert!(text.contains("significance:\n"));
    assert!(out_dir.join("stats.txt").exists() && out_dir.join("significance.csv").exists());

    let flat = tmp.path().join("flat.csv");
    fs::write(&flat, "dataset,a,b,c\nx,0.5,0.5,0.5\ny,0.2,0.2,0.2\nz,0.9,0.9,0.9\n").unwrap();
    let text = stdout(&ok(&["stats", "--table", s(&flat)]));
    assert_eq!(value(&text, "f_stat").parse::<f64>().unwrap(), 0.0);
    assert_eq!(value(&text, "p_value").parse::<f64>().unwrap(), 1.0);

    assert_eq!(mvkmf(&["stats", "--table", "/no/such.csv"]).status.code(), Some(2));
}

#[test]
fn heatmap_of_a_fitted_state() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(tmp.path());
    let state = tmp.path().join("state");
    ok(&["fit", "--manifest", s(&manifest), "--alpha", "16", "--restarts", "10", "--quiet", "--out", s(&state)]);
    ok(&["heatmap", "--state", s(&state), "--quiet"]);
    let sim = read_matrix(state.join("similarity_H.csv")).unwrap();
    assert_eq!(sim.shape(), (45, 45));
    assert!((&sim - sim.transpose()).amax() < 1e-12);
    let labels = read_labels(state.join("labels.txt")).unwrap();
    let mut sorted = labels.clone();
    sorted.sort();
    let (mut inside, mut outside, mut n_in, mut n_out) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..45 {
        for j in 0..45 {
            if sorted[i] == sorted[j] {
                inside += sim[(i, j)];
                n_in += 1.0;
            } else {
                outside += sim[(i, j)];
                n_out += 1.0;
            }
        }
    }
    assert!(inside / n_in > outside / n_out);
    for view in ["view0", "view1"] {
        let pgm = fs::read(state.join(format!("similarity_G_{view}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n45 45\n255\n"));
        assert_eq!(pgm.len(), b"P5\n45 45\n255\n".len() + 45 * 45);
    }
}

#[test]
fn heatmap_of_identity_embedding() {
    let tmp = tempfile::tempdir().unwrap();
    write_matrix(tmp.path().join("H.mvk1"), &DMatrix::identity(4, 4)).unwrap();
    write_labels(tmp.path().join("labels.txt"), &[1, 0, 1, 0]).unwrap();
    ok(&["heatmap", "--state", s(tmp.path()), "--quiet"]);
    assert_eq!(read_matrix(tmp.path().join("similarity_H.csv")).unwrap(), DMatrix::identity(4, 4));

    let empty = tempfile::tempdir().unwrap();
    assert_eq!(mvkmf(&["heatmap", "--state", s(empty.path())]).status.code(), Some(2));
}

#[test]
fn evolve_traces_a_monotone_objective() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(tmp.path());
    let out = tmp.path().join("ev");
    ok(&["evolve", "--manifest", s(&manifest), "--alpha", "16", "--restarts", "5", "--quiet", "--out", s(&out)]);
    let csv = fs::read_to_string(out.join("evolve.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[..2], ["iteration", "objective"]);
    let objectives: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(objectives.len() >= 2);
    for w in objectives.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }

    let zero = tmp.path().join("ev0");
    ok(&["evolve", "--manifest", s(&manifest), "--max-iters", "0", "--restarts", "2", "--quiet", "--out", s(&zero)]);
    assert_eq!(fs::read_to_string(zero.join("evolve.csv")).unwrap().lines().count(), 2);

    let kkm = mvkmf(&["evolve", "--manifest", s(&manifest), "--algorithm", "kkm", "--out", s(&zero)]);
    assert_eq!(kkm.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(mvkmf(&["--help"]).status.code(), Some(0));
    assert_eq!(mvkmf(&[]).status.code(), Some(2));
}
