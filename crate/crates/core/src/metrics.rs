//! External clustering metrics: ACC, NMI, Purity and ARI.
//!
//! All four are computed from a [`ContingencyTable`] and are invariant
//! under relabeling of either argument. Label values need not be
//! contiguous.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of samples per (true class, predicted cluster).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[r][c]`: true class `r`, predicted cluster `c`.
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

/// Renumbers labels by order of first appearance, so any relabeling of the
/// input yields the same table and bit-identical scores.
fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

impl ContingencyTable {
    pub fn new(truth: &[usize], pred: &[usize]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::LengthMismatch { left: truth.len(), right: pred.len() });
        }
        let (t, r) = relabel(truth);
        let (p, c) = relabel(pred);
        let mut counts = vec![vec![0u64; c]; r];
        for (&a, &b) in t.iter().zip(&p) {
            counts[a][b] += 1;
        }
        Ok(Self { counts, n: truth.len() as u64 })
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols()).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian
/// algorithm with potentials, `O(m³)`). Returns `assign[row] = col`.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let m = cost.len();
    if m == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; column 0 is a sentinel.
    let mut u = vec![0i64; m + 1];
    let mut v = vec![0i64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for row in 1..=m {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; m];
    for j in 1..=m {
        if owner[j] > 0 {
            assign[owner[j] - 1] = j - 1;
        }
    }
    assign
}

/// Clustering accuracy under the best one-to-one cluster→class matching.
pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    Ok(accuracy_from(&t))
}

fn accuracy_from(t: &ContingencyTable) -> f64 {
    if t.n == 0 {
        return 1.0;
    }
    let m = t.rows().max(t.cols());
    // Pad to square with zero counts.
    let cost: Vec<Vec<i64>> = (0..m)
        .map(|r| {
            (0..m)
                .map(|c| -(t.counts.get(r).and_then(|row| row.get(c)).copied().unwrap_or(0) as i64))
                .collect()
        })
        .collect();
    let assign = hungarian(&cost);
    let matched: i64 = assign.iter().enumerate().map(|(r, &c)| -cost[r][c]).sum();
    matched as f64 / t.n as f64
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, `I(U;V) / √(H(U) H(V))`, natural log.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    Ok(nmi_from(&t))
}

fn nmi_from(t: &ContingencyTable) -> f64 {
    if t.n == 0 {
        return 1.0;
    }
    let n = t.n as f64;
    let rows = t.row_sums();
    let cols = t.col_sums();
    let hu = entropy(&rows, n);
    let hv = entropy(&cols, n);
    if hu == 0.0 && hv == 0.0 {
        // Both partitions are a single block, hence identical.
        return 1.0;
    }
    if hu == 0.0 || hv == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for (r, row) in t.counts.iter().enumerate() {
        for (c, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (rows[r] as f64 * cols[c] as f64)).ln();
            }
        }
    }
    (mi / (hu * hv).sqrt()).clamp(0.0, 1.0)
}

/// Fraction of samples belonging to the majority class of their cluster.
pub fn purity(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    Ok(purity_from(&t))
}

fn purity_from(t: &ContingencyTable) -> f64 {
    if t.n == 0 {
        return 1.0;
    }
    let majority: u64 = (0..t.cols()).map(|c| t.counts.iter().map(|r| r[c]).max().unwrap_or(0)).sum();
    majority as f64 / t.n as f64
}

fn pairs(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Adjusted Rand index from pair counts.
///
/// `index` counts pairs together in both partitions, `same_truth` and
/// `same_pred` count pairs together in each, `total` is `C(n, 2)`.
pub fn adjusted_rand(index: u64, same_truth: u64, same_pred: u64, total: u64, identical: bool) -> f64 {
    // (index − E) / (max − E) with E = st·sp/total and max = (st + sp)/2,
    // scaled by 2·total so numerator and denominator are exact integers
    // and the result is a single correctly rounded division.
    let (index, st, sp, total) = (index as i128, same_truth as i128, same_pred as i128, total as i128);
    let num = 2 * (index * total - st * sp);
    let den = (st + sp) * total - 2 * st * sp;
    if den == 0 {
        return if identical { 1.0 } else { 0.0 };
    }
    num as f64 / den as f64
}

/// Adjusted Rand index.
pub fn ari(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    Ok(ari_from(&t))
}

fn same_partition(t: &ContingencyTable) -> bool {
    // Identical up to relabeling iff every row and column has one nonzero cell.
    t.rows() == t.cols()
        && t.counts.iter().all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
        && (0..t.cols()).all(|c| t.counts.iter().filter(|r| r[c] > 0).count() == 1)
}

fn ari_from(t: &ContingencyTable) -> f64 {
    let index: u64 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let same_truth: u64 = t.row_sums().into_iter().map(pairs).sum();
    let same_pred: u64 = t.col_sums().into_iter().map(pairs).sum();
    adjusted_rand(index, same_truth, same_pred, pairs(t.n), same_partition(t))
}

/// All four scores for one labeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub ari: f64,
}

impl MetricReport {
    pub fn compute(truth: &[usize], pred: &[usize]) -> Result<Self> {
        let t = ContingencyTable::new(truth, pred)?;
        Ok(Self { acc: accuracy_from(&t), nmi: nmi_from(&t), purity: purity_from(&t), ari: ari_from(&t) })
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Acc => self.acc,
            Metric::Nmi => self.nmi,
            Metric::Purity => self.purity,
            Metric::Ari => self.ari,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Acc,
    Nmi,
    Purity,
    Ari,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Acc, Metric::Nmi, Metric::Purity, Metric::Ari];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Acc => "acc",
            Metric::Nmi => "nmi",
            Metric::Purity => "purity",
            Metric::Ari => "ari",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert_eq!(accuracy(&[3, 1, 4, 1, 5], &[3, 1, 4, 1, 5]).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_with_more_clusters_than_classes() {
        // Best matching keeps the two large cells: (2 + 2)/5.
        assert_eq!(accuracy(&[0, 0, 1, 1, 1], &[0, 0, 1, 1, 2]).unwrap(), 0.8);
    }

    #[test]
    fn nmi_examples() {
        assert!((nmi(&[0, 0, 1, 1], &[5, 5, 9, 9]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.0);
        assert_eq!(nmi(&[0, 0, 1, 1], &[2, 2, 2, 2]).unwrap(), 0.0);
        assert_eq!(nmi(&[1, 1, 1], &[0, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert_eq!(purity(&[0, 0, 1, 1, 2], &[0, 1, 2, 3, 4]).unwrap(), 1.0);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&[0, 0, 1, 1, 2], &[0, 0, 1, 1, 2]).unwrap(), 1.0);
        assert_eq!(ari(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), -0.5);
        assert_eq!(ari(&[0, 0, 1, 2, 2], &[7, 7, 3, 1, 1]).unwrap(), 1.0);
        // Single-sample and all-singleton degenerate denominators.
        assert_eq!(ari(&[0], &[0]).unwrap(), 1.0);
        assert_eq!(ari(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(accuracy(&[0, 1], &[0]), Err(Error::LengthMismatch { left: 2, right: 1 })));
        assert!(nmi(&[0], &[]).is_err());
        assert!(purity(&[], &[1]).is_err());
        assert!(ari(&[0, 0], &[0]).is_err());
    }

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = hungarian(&cost);
        let total: i64 = a.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        assert_eq!(total, 5);
    }
}
