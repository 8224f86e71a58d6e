//! Grid experiments: datasets × algorithms × α × seeds, with best-α
//! selection per (dataset, algorithm).

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{load_manifest, RunRecord};
use crate::kernels::KernelSet;
use crate::metrics::{Metric, MetricReport};
use crate::pipeline::{run_algorithm, Algorithm};
use crate::solver::SolverConfig;
use crate::stats::ResultsTable;

/// `2⁰, 2¹, …, 2⁹`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..10).map(|e| f64::from(1u32 << e)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub manifests: Vec<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub restarts: usize,
    pub max_iters: usize,
    /// Metric used to pick the best α (ties go to the smaller α).
    pub select_metric: Metric,
    pub out_dir: PathBuf,
}

impl ExperimentPlan {
    pub fn new(manifests: Vec<PathBuf>, algorithms: Vec<Algorithm>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifests,
            algorithms,
            alphas: default_alpha_grid(),
            seeds: vec![0],
            restarts: 50,
            max_iters: 100,
            select_metric: Metric::Acc,
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.manifests.is_empty() {
            return Err(Error::BadParam("plan lists no manifests".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::BadParam("plan lists no algorithms".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::BadParam("plan lists no seeds".into()));
        }
        if self.restarts == 0 {
            return Err(Error::BadParam("restarts must be ≥ 1".into()));
        }
        if self.alphas.is_empty() && self.algorithms.iter().any(|a| a.uses_alpha()) {
            return Err(Error::BadParam("empty α grid".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::BadParam(format!("α grid values must be finite and > 0, got {a}")));
        }
        Ok(())
    }
}

/// Outcome of one (dataset, algorithm, α, seed) job.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub dataset: usize,
    pub algorithm: Algorithm,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub outcome: std::result::Result<RunRecord, String>,
}

/// Seed-averaged metrics of the selected α for one table cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub alpha: Option<f64>,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub dataset_names: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    /// Every job in (dataset, algorithm, α, seed) order.
    pub runs: Vec<CellRun>,
    /// `cells[d][a]`, `None` when no configuration succeeded.
    pub cells: Vec<Vec<Option<CellSummary>>>,
}

impl BenchOutcome {
    pub fn succeeded(&self) -> usize {
        self.runs.iter().filter(|r| r.outcome.is_ok()).count()
    }

    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    /// The table of `metric` at each cell's selected α.
    pub fn table(&self, metric: Metric) -> Result<ResultsTable> {
        let scores = self
            .cells
            .iter()
            .map(|row| row.iter().map(|c| c.as_ref().map(|c| c.metrics.get(metric))).collect())
            .collect();
        ResultsTable::new(
            self.dataset_names.clone(),
            self.algorithms.iter().map(|a| a.name().to_string()).collect(),
            scores,
        )
    }
}

fn mean_report(reports: &[&MetricReport]) -> MetricReport {
    let n = reports.len() as f64;
    let avg = |f: fn(&MetricReport) -> f64| reports.iter().map(|r| f(r)).sum::<f64>() / n;
    MetricReport { acc: avg(|r| r.acc), nmi: avg(|r| r.nmi), purity: avg(|r| r.purity), ari: avg(|r| r.ari) }
}

/// Picks the α whose seed-averaged `metric` is largest; α values with any
/// failed seed are skipped, and ties go to the smaller α.
pub fn select_best(runs: &[&CellRun], metric: Metric) -> Option<CellSummary> {
    let mut alphas: Vec<Option<f64>> = Vec::new();
    for r in runs {
        if !alphas.contains(&r.alpha) {
            alphas.push(r.alpha);
        }
    }
    alphas.sort_by(|a, b| a.partial_cmp(b).expect("finite α"));
    let mut best: Option<CellSummary> = None;
    for alpha in alphas {
        let group: Vec<&CellRun> = runs.iter().copied().filter(|r| r.alpha == alpha).collect();
        let ok: Vec<&MetricReport> = group.iter().filter_map(|r| r.outcome.as_ref().ok().map(|rec| &rec.metrics)).collect();
        if ok.is_empty() || ok.len() != group.len() {
            continue;
        }
        let summary = CellSummary { alpha, metrics: mean_report(&ok) };
        if best.as_ref().is_none_or(|b| summary.metrics.get(metric) > b.metrics.get(metric)) {
            best = Some(summary);
        }
    }
    best
}

fn dataset_label(path: &Path) -> String {
    path.parent()
        .and_then(|p| p.file_name())
        .or_else(|| path.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

struct Loaded {
    name: String,
    data: std::result::Result<(KernelSet, Vec<usize>, usize), String>,
}

fn load(path: &Path) -> Loaded {
    match load_manifest(path).and_then(|m| {
        let (ks, _) = m.load_kernels()?;
        Ok((m.name.clone(), ks, m.labels()?, m.clusters))
    }) {
        Ok((name, ks, labels, k)) => Loaded { name, data: Ok((ks, labels, k)) },
        Err(e) => Loaded { name: dataset_label(path), data: Err(e.to_string()) },
    }
}

/// Runs every job of the plan on the rayon pool. Results come back in
/// deterministic (dataset, algorithm, α, seed) order regardless of
/// scheduling.
pub fn run_plan(plan: &ExperimentPlan) -> Result<BenchOutcome> {
    plan.validate()?;
    let datasets: Vec<Loaded> = plan.manifests.iter().map(|p| load(p)).collect();
    let mut jobs = Vec::new();
    for d in 0..datasets.len() {
        for &alg in &plan.algorithms {
            let alphas: Vec<Option<f64>> =
                if alg.uses_alpha() { plan.alphas.iter().map(|&a| Some(a)).collect() } else { vec![None] };
            for alpha in alphas {
                for &seed in &plan.seeds {
                    jobs.push((d, alg, alpha, seed));
                }
            }
        }
    }
    let runs: Vec<CellRun> = jobs
        .par_iter()
        .map(|&(d, algorithm, alpha, seed)| {
            let ds = &datasets[d];
            let outcome = ds.data.clone().and_then(|(ks, truth, k)| {
                let mut cfg = SolverConfig::new(k).with_seed(seed).with_max_iters(plan.max_iters);
                if let Some(a) = alpha {
                    cfg = cfg.with_alpha(a);
                }
                let res = run_algorithm(&ks, algorithm, &cfg, plan.restarts, Some(&truth)).map_err(|e| e.to_string())?;
                Ok(RunRecord {
                    dataset: ds.name.clone(),
                    algorithm: algorithm.name().to_string(),
                    alpha,
                    seed,
                    metrics: res.metrics.expect("truth supplied"),
                    iterations: res.iterations,
                    wall_time_seconds: res.wall_time_seconds,
                    objective_final: res.objective_final(),
                })
            });
            CellRun { dataset: d, algorithm, alpha, seed, outcome }
        })
        .collect();
    let cells = (0..datasets.len())
        .map(|d| {
            plan.algorithms
                .iter()
                .map(|&alg| {
                    let group: Vec<&CellRun> = runs.iter().filter(|r| r.dataset == d && r.algorithm == alg).collect();
                    select_best(&group, plan.select_metric)
                })
                .collect()
        })
        .collect();
    Ok(BenchOutcome {
        dataset_names: datasets.into_iter().map(|d| d.name).collect(),
        algorithms: plan.algorithms.clone(),
        runs,
        cells,
    })
}
