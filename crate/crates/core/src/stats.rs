//! Friedman rank test with the Iman–Davenport F correction, and the Nemenyi
//! critical difference for pairwise comparisons.

use std::collections::HashSet;
use std::fmt::Write as _;

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Constant used for the critical difference unless overridden.
pub const DEFAULT_Q_ALPHA: f64 = 1.96;

/// Scores of `k` algorithms on `n` datasets (rows = datasets).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub dataset_names: Vec<String>,
    pub algorithm_names: Vec<String>,
    /// `scores[dataset][algorithm]`; `None` marks a missing result.
    pub scores: Vec<Vec<Option<f64>>>,
}

fn check_unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::Parse(format!("duplicate {what} name `{n}`")));
        }
    }
    Ok(())
}

impl ResultsTable {
    pub fn new(
        dataset_names: Vec<String>,
        algorithm_names: Vec<String>,
        scores: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        check_unique(&dataset_names, "dataset")?;
        check_unique(&algorithm_names, "algorithm")?;
        if scores.len() != dataset_names.len() || scores.iter().any(|r| r.len() != algorithm_names.len()) {
            return Err(Error::DimensionMismatch(format!(
                "score matrix does not match {} datasets × {} algorithms",
                dataset_names.len(),
                algorithm_names.len()
            )));
        }
        Ok(Self { dataset_names, algorithm_names, scores })
    }

    /// Builds a table with no missing entries.
    pub fn complete(dataset_names: Vec<String>, algorithm_names: Vec<String>, scores: Vec<Vec<f64>>) -> Result<Self> {
        let scores = scores.into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
        Self::new(dataset_names, algorithm_names, scores)
    }

    /// Parses the CSV layout: header `dataset,<alg>,...`, then one row per
    /// dataset with decimal scores or `-`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty results table".into()))?;
        let algorithm_names: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_owned()).collect();
        if algorithm_names.is_empty() {
            return Err(Error::Parse("results table header lists no algorithms".into()));
        }
        let mut dataset_names = Vec::new();
        let mut scores = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != algorithm_names.len() + 1 {
                return Err(Error::Parse(format!(
                    "row {} has {} cells, expected {}",
                    lineno + 2,
                    cells.len(),
                    algorithm_names.len() + 1
                )));
            }
            dataset_names.push(cells[0].to_owned());
            let row = cells[1..]
                .iter()
                .map(|c| match *c {
                    "-" => Ok(None),
                    s => s
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .map(Some)
                        .ok_or_else(|| Error::Parse(format!("bad score `{s}` in row {}", lineno + 2))),
                })
                .collect::<Result<Vec<_>>>()?;
            scores.push(row);
        }
        Self::new(dataset_names, algorithm_names, scores)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset");
        for a in &self.algorithm_names {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for (name, row) in self.dataset_names.iter().zip(&self.scores) {
            out.push_str(name);
            for cell in row {
                match cell {
                    Some(x) => write!(out, ",{x}").unwrap(),
                    None => out.push_str(",-"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Rows without missing entries.
    pub fn complete_rows(&self) -> Vec<Vec<f64>> {
        self.scores
            .iter()
            .filter_map(|r| r.iter().copied().collect::<Option<Vec<f64>>>())
            .collect()
    }
}

/// Outcome of [`friedman`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankSummary {
    pub algorithm_names: Vec<String>,
    /// Average rank per algorithm; rank 1 is best.
    pub mean_ranks: Vec<f64>,
    pub chi2: f64,
    /// Iman–Davenport statistic; infinite when the ranking is perfectly
    /// consistent across datasets.
    pub f_stat: f64,
    pub df1: usize,
    pub df2: usize,
    pub p_value: f64,
    pub q_alpha: f64,
    pub cd: f64,
    pub datasets_used: usize,
    pub datasets_dropped: usize,
}

impl RankSummary {
    /// Flat `key=value` rendering, one entry per line.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "datasets_used={}", self.datasets_used).unwrap();
        writeln!(out, "datasets_excluded={}", self.datasets_dropped).unwrap();
        writeln!(out, "algorithms={}", self.mean_ranks.len()).unwrap();
        writeln!(out, "chi2={}", self.chi2).unwrap();
        writeln!(out, "f_stat={}", self.f_stat).unwrap();
        writeln!(out, "df1={}", self.df1).unwrap();
        writeln!(out, "df2={}", self.df2).unwrap();
        writeln!(out, "p_value={:e}", self.p_value).unwrap();
        writeln!(out, "q_alpha={}", self.q_alpha).unwrap();
        writeln!(out, "cd={}", self.cd).unwrap();
        for (name, r) in self.algorithm_names.iter().zip(&self.mean_ranks) {
            writeln!(out, "mean_rank.{name}={r}").unwrap();
        }
        out
    }
}

/// Ranks of one row, 1 = best, ties sharing their mean rank.
pub fn rank_row(row: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = row[a].total_cmp(&row[b]);
        if higher_is_better { ord.reverse() } else { ord }
    });
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // Positions start..end share ranks start+1..=end.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// `P(F > f)` for an F(df1, df2) variable, via the regularized incomplete
/// beta function.
pub fn f_survival(f: f64, df1: f64, df2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = df2 / (df2 + df1 * f);
    beta_reg(df2 / 2.0, df1 / 2.0, x)
}

/// Nemenyi critical difference `q_α √(k(k+1)/(6n))`.
pub fn nemenyi_cd(k: usize, n: usize, q_alpha: f64) -> f64 {
    let (k, n) = (k as f64, n as f64);
    q_alpha * (k * (k + 1.0) / (6.0 * n)).sqrt()
}

/// Friedman test with the default `q_α`.
pub fn friedman(rt: &ResultsTable, higher_is_better: bool) -> Result<RankSummary> {
    friedman_with_q(rt, higher_is_better, DEFAULT_Q_ALPHA)
}

/// Friedman test over complete rows; rows with a missing entry are dropped.
pub fn friedman_with_q(rt: &ResultsTable, higher_is_better: bool, q_alpha: f64) -> Result<RankSummary> {
    let k = rt.algorithm_names.len();
    let rows = rt.complete_rows();
    let n = rows.len();
    if k < 2 || n < 2 {
        return Err(Error::BadParam(format!(
            "Friedman test needs ≥ 2 algorithms and ≥ 2 complete datasets, got {k} and {n}"
        )));
    }
    let mut mean_ranks = vec![0.0; k];
    for row in &rows {
        for (m, r) in mean_ranks.iter_mut().zip(rank_row(row, higher_is_better)) {
            *m += r;
        }
    }
    for m in &mut mean_ranks {
        *m /= n as f64;
    }
    let (kf, nf) = (k as f64, n as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let denom = nf * (kf - 1.0) - chi2;
    let f_stat = if denom <= 0.0 { f64::INFINITY } else { (nf - 1.0) * chi2 / denom };
    let df1 = k - 1;
    let df2 = (k - 1) * (n - 1);
    Ok(RankSummary {
        algorithm_names: rt.algorithm_names.clone(),
        mean_ranks,
        chi2,
        f_stat,
        df1,
        df2,
        p_value: f_survival(f_stat, df1 as f64, df2 as f64),
        q_alpha,
        cd: nemenyi_cd(k, n, q_alpha),
        datasets_used: n,
        datasets_dropped: rt.scores.len() - n,
    })
}

/// `sig[i][j]` is true iff `|rank_i − rank_j| ≥ cd`.
pub fn pairwise_significance(rs: &RankSummary) -> Vec<Vec<bool>> {
    let k = rs.mean_ranks.len();
    (0..k)
        .map(|i| (0..k).map(|j| i != j && (rs.mean_ranks[i] - rs.mean_ranks[j]).abs() >= rs.cd).collect())
        .collect()
}

/// CSV rendering of the pairwise matrix with algorithm names as headers.
pub fn significance_csv(rs: &RankSummary) -> String {
    let sig = pairwise_significance(rs);
    let mut out = String::from("algorithm");
    for a in &rs.algorithm_names {
        out.push(',');
        out.push_str(a);
    }
    out.push('\n');
    for (a, row) in rs.algorithm_names.iter().zip(&sig) {
        out.push_str(a);
        for &s in row {
            out.push_str(if s { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}
