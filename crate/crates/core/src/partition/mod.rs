//! Modularity-based partitioning of respondent graphs.

mod eigen;
mod louvain;
mod newman;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjacency::AdjacencyMatrix;
use crate::error::{Error, Result};

pub use louvain::louvain_partition;
pub use newman::newman_partition;

/// Assignment of respondents to clusters `0..n_clusters`, all non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    /// Validates contiguous, non-empty labels.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("partition of zero respondents".into()));
        }
        let n_clusters = labels.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; n_clusters];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("cluster {c} is empty")));
        }
        Ok(Partition { labels, n_clusters })
    }

    /// Relabels arbitrary cluster keys to `0, 1, ...` in order of first appearance.
    pub fn canonical<T: Eq + std::hash::Hash + Clone>(keys: &[T]) -> Result<Self> {
        let mut ids = std::collections::HashMap::new();
        let labels = keys
            .iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k.clone()).or_insert(next)
            })
            .collect();
        Self::from_labels(labels)
    }

    /// Every respondent in cluster 0.
    pub fn single(n: usize) -> Result<Self> {
        Self::from_labels(vec![0; n])
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Indices of the members of each cluster, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }

    /// Same labels with clusters renumbered by first appearance.
    pub fn canonicalized(&self) -> Partition {
        Self::canonical(&self.labels).expect("non-empty partition")
    }

    /// Equal up to renaming of clusters.
    pub fn equivalent(&self, other: &Partition) -> bool {
        self.len() == other.len() && self.canonicalized() == other.canonicalized()
    }

    /// Restriction to the respondents in `keep` (in that order), relabelled.
    pub fn select(&self, keep: &[usize]) -> Result<Partition> {
        let keys: Vec<usize> = keep.iter().map(|&i| self.labels[i]).collect();
        Self::canonical(&keys)
    }

    /// Two-column CSV `respondent_id,cluster_id`.
    pub fn to_csv(&self, ids: &[String]) -> Result<String> {
        if ids.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} ids for {} labels",
                ids.len(),
                self.len()
            )));
        }
        let mut out = String::from("respondent_id,cluster_id\n");
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for (id, l) in ids.iter().zip(&self.labels) {
            w.write_record([id.as_str(), &l.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("partition csv", e.into_error()))?;
        out.push_str(std::str::from_utf8(&bytes).expect("utf-8 csv"));
        Ok(out)
    }

    /// Parses a `respondent_id,cluster_id` CSV. Cluster ids may be any strings.
    pub fn from_csv(text: &str) -> Result<(Vec<String>, Partition)> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut ids = Vec::new();
        let mut keys = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Responses(format!(
                    "partition rows need 2 fields, got {}",
                    rec.len()
                )));
            }
            ids.push(rec[0].to_string());
            keys.push(rec[1].to_string());
        }
        if ids.is_empty() {
            return Err(Error::Responses("partition file has no rows".into()));
        }
        let mut uniq = std::collections::HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !uniq.insert(id.as_str())) {
            return Err(Error::Responses(format!("duplicate respondent id {dup:?}")));
        }
        Ok((ids, Self::canonical(&keys)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Newman,
    Louvain,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Newman => "newman",
            Algorithm::Louvain => "louvain",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "newman" | "n" => Ok(Algorithm::Newman),
            "louvain" | "l" => Ok(Algorithm::Louvain),
            other => Err(Error::Config(format!("unknown partitioner {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionerConfig {
    pub algorithm: Algorithm,
    pub louvain_seed: u64,
    /// Maximum number of aggregation levels.
    pub louvain_passes: usize,
    /// Smallest modularity gain accepted as an improvement.
    pub modularity_tolerance: f64,
    /// Polish each spectral bisection with Kernighan–Lin vertex moves.
    pub newman_refinement: bool,
}

impl Default for PartitionerConfig {
    fn default() -> Self {
        PartitionerConfig {
            algorithm: Algorithm::Newman,
            louvain_seed: 0,
            louvain_passes: 100,
            modularity_tolerance: 1e-12,
            newman_refinement: false,
        }
    }
}

impl PartitionerConfig {
    pub fn newman() -> Self {
        Self::default()
    }

    /// Newman bisection with vertex-move refinement of every split.
    pub fn newman_refined() -> Self {
        PartitionerConfig {
            newman_refinement: true,
            ..Self::default()
        }
    }

    pub fn louvain(seed: u64) -> Self {
        PartitionerConfig {
            algorithm: Algorithm::Louvain,
            louvain_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.modularity_tolerance > 0.0) || !self.modularity_tolerance.is_finite() {
            return Err(Error::Config(format!(
                "modularity_tolerance must be positive, got {}",
                self.modularity_tolerance
            )));
        }
        if self.louvain_passes == 0 {
            return Err(Error::Config("louvain_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs the configured partitioner.
pub fn partition(adj: &AdjacencyMatrix, config: &PartitionerConfig) -> Result<Partition> {
    match config.algorithm {
        Algorithm::Newman => newman_partition(adj, config),
        Algorithm::Louvain => louvain_partition(adj, config),
    }
}

/// Weighted modularity of `part` on `adj`.
pub fn modularity(adj: &AdjacencyMatrix, part: &Partition) -> Result<f64> {
    let n = adj.n();
    if part.len() != n {
        return Err(Error::Dimension(format!(
            "partition of {} respondents for {n}×{n} adjacency",
            part.len()
        )));
    }
    let two_m = adj.total_weight();
    if !(two_m > 0.0) {
        return Err(Error::EmptyAdjacency);
    }
    let mut internal = vec![0.0; part.n_clusters()];
    let mut degree = vec![0.0; part.n_clusters()];
    for i in 0..n {
        let ci = part.label(i);
        let row = adj.row(i);
        degree[ci] += row.iter().sum::<f64>();
        internal[ci] += row
            .iter()
            .enumerate()
            .filter(|&(j, _)| part.label(j) == ci)
            .map(|(_, a)| a)
            .sum::<f64>();
    }
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(e, d)| e / two_m - (d / two_m) * (d / two_m))
        .sum())
}

/// Checks shared by both partitioners. Returns the degrees.
pub(crate) fn prepare(adj: &AdjacencyMatrix, config: &PartitionerConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let n = adj.n();
    if n < 2 {
        return Err(Error::InsufficientRespondents { needed: 2, got: n });
    }
    let degrees: Vec<f64> = (0..n).map(|i| adj.degree(i)).collect();
    if degrees.iter().all(|&k| k == 0.0) {
        return Err(Error::EmptyAdjacency);
    }
    Ok(degrees)
}
