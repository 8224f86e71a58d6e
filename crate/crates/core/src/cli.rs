//! Command-line front end.
//!
//! Exit codes: `0` success, `2` usage or validation failure, `3` numerical
//! failure. `MVKMF_THREADS` caps the worker pool.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use crate::bench::{default_alpha_grid, run_plan, ExperimentPlan};
use crate::error::{Error, Result};
use crate::io::{
    append_record, load_manifest, make_synthetic, read_labels, read_matrix, save_manifest, write_labels, write_matrix,
    DatasetManifest, RunRecord, ViewEntry, ViewSource,
};
use crate::kernels::{KernelSpec, NormalizeMode};
use crate::metrics::Metric;
use crate::pipeline::{evolution_csv, evolve, run_algorithm, Algorithm};
use crate::solver::{ObjectiveVariant, SolverConfig, DEFAULT_ALPHA};
use crate::stats::{friedman_with_q, significance_csv, ResultsTable, DEFAULT_Q_ALPHA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mvkmf", version, about = "Multi-view kernel clustering toolkit")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (each command has its own default).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress progress and warnings on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Materialize every view kernel of a dataset as MVK1 files.
    Kernels {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Fit one model and write its state, labels and run record.
    Fit(FitArgs),
    /// Grid experiment over datasets, algorithms, α and seeds.
    Bench(BenchArgs),
    /// Friedman / Iman–Davenport test and Nemenyi CD on a results table.
    Stats {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value_t = DEFAULT_Q_ALPHA)]
        q_alpha: f64,
        /// Treat smaller scores as better.
        #[arg(long)]
        lower_is_better: bool,
    },
    /// Label-ordered similarity images of a stored fit.
    Heatmap {
        /// Directory written by `fit`.
        #[arg(long)]
        state: PathBuf,
    },
    /// Per-iteration objective and metrics trace.
    Evolve(FitArgs),
    /// Generate a synthetic multi-view dataset with manifest.
    Synth {
        #[arg(long, default_value_t = 50)]
        n_per_cluster: usize,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 3)]
        views: usize,
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value = "synthetic")]
        name: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Sparse,
    Nonsparse,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "umklmf", value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = DEFAULT_ALPHA, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Objective of the factorization; `nonsparse` is the ablation.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Sparse)]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One or more dataset manifests.
    #[arg(long = "manifest", required = true, num_args = 1..)]
    pub manifests: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "umklmf,kkm,mkkm", value_parser = parse_algorithm)]
    pub algorithms: Vec<Algorithm>,
    /// α grid; defaults to 2⁰..2⁹.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Vec<f64>,
    /// Seeds to repeat each configuration with; defaults to `--seed`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = Metric::Acc)]
    pub select_metric: Metric,
    /// Subdirectory of `--out` receiving the results.
    #[arg(long, default_value = "bench")]
    pub experiment: String,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("MVKMF_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails harmlessly if a pool was already installed in this process.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn out_dir(cli: &Cli, default: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| default.as_ref().to_path_buf());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Runs a parsed command, returning the exit code for non-error outcomes.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Kernels { manifest } => cmd_kernels(cli, manifest),
        Command::Fit(args) => cmd_fit(cli, args),
        Command::Bench(args) => cmd_bench(cli, args),
        Command::Stats { table, q_alpha, lower_is_better } => cmd_stats(cli, table, *q_alpha, !lower_is_better),
        Command::Heatmap { state } => cmd_heatmap(cli, state),
        Command::Evolve(args) => cmd_evolve(cli, args),
        Command::Synth { n_per_cluster, clusters, views, separation, noise, name } => {
            cmd_synth(cli, *n_per_cluster, *clusters, *views, *separation, *noise, name)
        }
    }
}

fn cmd_kernels(cli: &Cli, manifest: &Path) -> Result<i32> {
    let m = load_manifest(manifest)?;
    let (ks, report) = m.load_kernels()?;
    if !cli.quiet {
        for w in report.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let dir = out_dir(cli, "kernels")?;
    for k_v in ks.iter() {
        let path = dir.join(format!("{}.mvk1", k_v.view_name()));
        write_matrix(&path, k_v.data())?;
        if !cli.quiet {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(EXIT_OK)
}

fn solver_config(m: &DatasetManifest, args: &FitArgs, seed: u64) -> SolverConfig {
    let variant = match args.objective {
        ObjectiveArg::Sparse => ObjectiveVariant::Sparse,
        ObjectiveArg::Nonsparse => ObjectiveVariant::Nonsparse,
    };
    SolverConfig::new(m.clusters)
        .with_alpha(args.alpha)
        .with_max_iters(args.max_iters)
        .with_rel_tol(args.rel_tol)
        .with_variant(variant)
        .with_seed(seed)
}

/// `--objective nonsparse` turns `umklmf` into its ablation.
fn effective_algorithm(args: &FitArgs) -> Algorithm {
    match (args.algorithm, args.objective) {
        (Algorithm::Umklmf, ObjectiveArg::Nonsparse) => Algorithm::UmklmfNonsparse,
        (a, _) => a,
    }
}

fn row_vector(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, values.len(), values)
}

fn cmd_fit(cli: &Cli, args: &FitArgs) -> Result<i32> {
    let m = load_manifest(&args.manifest)?;
    let cfg = solver_config(&m, args, cli.seed);
    cfg.validate(m.n)?;
    let (ks, report) = m.load_kernels()?;
    if !cli.quiet {
        for w in report.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let truth = m.labels()?;
    let algorithm = effective_algorithm(args);
    let res = run_algorithm(&ks, algorithm, &cfg, args.restarts, Some(&truth))?;
    let metrics = res.metrics.expect("truth supplied");

    let dir = out_dir(cli, Path::new("results").join("fit"))?;
    write_matrix(dir.join("H.mvk1"), &res.h)?;
    for (k_v, g_v) in ks.iter().zip(&res.g) {
        write_matrix(dir.join(format!("G_{}.mvk1", k_v.view_name())), g_v)?;
    }
    write_matrix(dir.join("omega.mvk1"), &row_vector(&res.weights))?;
    write_matrix(dir.join("objective_trace.mvk1"), &row_vector(&res.objective_trace))?;
    write_labels(dir.join("labels.txt"), &res.labels)?;
    let record = RunRecord {
        dataset: m.name.clone(),
        algorithm: algorithm.name().to_string(),
        alpha: algorithm.uses_alpha().then_some(cfg.alpha),
        seed: cli.seed,
        metrics,
        iterations: res.iterations,
        wall_time_seconds: res.wall_time_seconds,
        objective_final: res.objective_final(),
    };
    fs::write(dir.join("record.json"), serde_json::to_string_pretty(&record)? + "\n")?;
    append_record(dir.join("records.jsonl"), &record)?;
    if !cli.quiet {
        println!(
            "{} {} iterations={} objective={:e} acc={:.4} nmi={:.4} purity={:.4} ari={:.4}",
            m.name,
            algorithm,
            res.iterations,
            res.objective_final(),
            metrics.acc,
            metrics.nmi,
            metrics.purity,
            metrics.ari
        );
    }
    Ok(EXIT_OK)
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<i32> {
    let base = out_dir(cli, "results")?;
    let dir = base.join(&args.experiment);
    fs::create_dir_all(&dir)?;
    let mut plan = ExperimentPlan::new(args.manifests.clone(), args.algorithms.clone(), &dir);
    if !args.alphas.is_empty() {
        plan.alphas = args.alphas.clone();
    } else {
        plan.alphas = default_alpha_grid();
    }
    plan.seeds = if args.seeds.is_empty() { vec![cli.seed] } else { args.seeds.clone() };
    plan.restarts = args.restarts;
    plan.max_iters = args.max_iters;
    plan.select_metric = args.select_metric;

    let outcome = run_plan(&plan)?;
    let records_path = dir.join("records.jsonl");
    for rec in outcome.records() {
        append_record(&records_path, rec)?;
    }
    for run in &outcome.runs {
        if let (Err(e), false) = (&run.outcome, cli.quiet) {
            let alpha = run.alpha.map_or_else(|| "-".to_string(), |a| a.to_string());
            eprintln!(
                "failed: dataset={} algorithm={} alpha={alpha} seed={}: {e}",
                outcome.dataset_names[run.dataset], run.algorithm, run.seed
            );
        }
    }
    fs::write(dir.join("table.csv"), outcome.table(plan.select_metric)?.to_csv())?;
    for metric in Metric::ALL {
        fs::write(dir.join(format!("table_{}.csv", metric.name())), outcome.table(metric)?.to_csv())?;
    }
    if !cli.quiet {
        eprintln!("{} of {} runs succeeded; results in {}", outcome.succeeded(), outcome.runs.len(), dir.display());
    }
    Ok(if outcome.succeeded() > 0 { EXIT_OK } else { EXIT_NUMERIC })
}

fn cmd_stats(cli: &Cli, table: &Path, q_alpha: f64, higher_is_better: bool) -> Result<i32> {
    if !table.exists() {
        return Err(Error::MissingFile(table.to_path_buf()));
    }
    let rt = ResultsTable::from_csv(&fs::read_to_string(table)?)?;
    let rs = friedman_with_q(&rt, higher_is_better, q_alpha)?;
    let text = format!("{}significance:\n{}", rs.to_key_values(), significance_csv(&rs));
    print!("{text}");
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("stats.txt"), rs.to_key_values())?;
        fs::write(dir.join("significance.csv"), significance_csv(&rs))?;
    }
    Ok(EXIT_OK)
}

/// Indices sorted by label, stable within a label.
pub fn label_order(labels: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..labels.len()).collect();
    idx.sort_by_key(|&i| labels[i]);
    idx
}

/// Binary PGM (P5) with per-matrix min–max scaling to 0..=255.
pub fn encode_pgm(m: &DMatrix<f64>) -> Vec<u8> {
    let (lo, hi) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n255\n", m.ncols(), m.nrows()).into_bytes();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = if span > 0.0 { (m[(i, j)] - lo) / span } else { 0.0 };
            out.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// `XᵀX` for a `k × n` embedding (or `X Xᵀ` for an `n × k` one), with rows
/// and columns permuted by `order`.
fn ordered_gram(samples_as_columns: &DMatrix<f64>, order: &[usize]) -> DMatrix<f64> {
    let x = samples_as_columns.select_columns(order);
    x.transpose() * x
}

fn cmd_heatmap(cli: &Cli, state: &Path) -> Result<i32> {
    let h_path = state.join("H.mvk1");
    let labels_path = state.join("labels.txt");
    for p in [&h_path, &labels_path] {
        if !p.exists() {
            return Err(Error::MissingFile(p.clone()));
        }
    }
    let h = read_matrix(&h_path)?;
    let labels = read_labels(&labels_path)?;
    if labels.len() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "H has {} columns but {} labels",
            h.ncols(),
            labels.len()
        )));
    }
    let order = label_order(&labels);
    let dir = out_dir(cli, state)?;
    let emit = |stem: String, gram: DMatrix<f64>| -> Result<()> {
        write_matrix(dir.join(format!("{stem}.csv")), &gram)?;
        fs::write(dir.join(format!("{stem}.pgm")), encode_pgm(&gram))?;
        if !cli.quiet {
            eprintln!("wrote {}", dir.join(format!("{stem}.pgm")).display());
        }
        Ok(())
    };
    emit("similarity_H".into(), ordered_gram(&h, &order))?;
    let mut g_files: Vec<PathBuf> = fs::read_dir(state)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "mvk1")
                && p.file_stem().is_some_and(|s| s.to_string_lossy().starts_with("G_"))
        })
        .collect();
    g_files.sort();
    for p in g_files {
        let g = read_matrix(&p)?;
        if g.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!("{} has {} rows, expected {}", p.display(), g.nrows(), labels.len())));
        }
        let view = p.file_stem().expect("filtered above").to_string_lossy()[2..].to_string();
        emit(format!("similarity_G_{view}"), ordered_gram(&g.transpose(), &order))?;
    }
    Ok(EXIT_OK)
}

fn cmd_evolve(cli: &Cli, args: &FitArgs) -> Result<i32> {
    let algorithm = effective_algorithm(args);
    if !algorithm.uses_alpha() {
        return Err(Error::BadParam(format!("evolve traces the factorization; `{algorithm}` is not iterative here")));
    }
    let m = load_manifest(&args.manifest)?;
    let mut cfg = solver_config(&m, args, cli.seed);
    if algorithm == Algorithm::UmklmfNonsparse {
        cfg = cfg.with_variant(ObjectiveVariant::Nonsparse);
    }
    cfg.validate(m.n)?;
    let (ks, _) = m.load_kernels()?;
    let truth = m.labels()?;
    let (_, rows) = evolve(&ks, &cfg, args.restarts, &truth)?;
    let csv = evolution_csv(&rows);
    let dir = out_dir(cli, Path::new("results").join("evolve"))?;
    fs::write(dir.join("evolve.csv"), &csv)?;
    if !cli.quiet {
        print!("{csv}");
    }
    Ok(EXIT_OK)
}

fn cmd_synth(
    cli: &Cli,
    n_per_cluster: usize,
    clusters: usize,
    views: usize,
    separation: f64,
    noise: f64,
    name: &str,
) -> Result<i32> {
    let (features, labels) = make_synthetic(n_per_cluster, clusters, views, separation, noise, cli.seed)?;
    let dir = out_dir(cli, Path::new("data").join(name))?;
    let mut entries = Vec::with_capacity(views);
    for f in &features {
        let file = format!("{}.csv", f.view_name());
        write_matrix(dir.join(&file), &f.data().transpose())?;
        entries.push(ViewEntry {
            view_name: f.view_name().to_string(),
            source: ViewSource::Features(PathBuf::from(file)),
            kernel: Some(KernelSpec::Rbf { sigma: None }),
            normalization: NormalizeMode::None,
        });
    }
    write_labels(dir.join("labels.txt"), &labels)?;
    let manifest = DatasetManifest {
        name: name.to_string(),
        n: labels.len(),
        clusters,
        views: entries,
        labels_path: PathBuf::from("labels.txt"),
        base_dir: dir.clone(),
    };
    save_manifest(dir.join("manifest.json"), &manifest)?;
    if !cli.quiet {
        eprintln!("wrote {}", dir.join("manifest.json").display());
    }
    Ok(EXIT_OK)
}
