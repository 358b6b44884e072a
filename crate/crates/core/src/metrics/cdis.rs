//! Correlational dissimilarity between estimated and true construal
//! correlation matrices.

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::simulate::{CorrelationMatrix, SyntheticDataset};
use crate::survey::{numeric_map, NumericMatrix};

use super::ratio;

/// Frobenius distance between two correlation matrices.
pub fn frobenius(a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "{}×{0} and {}×{1} matrices",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Pearson correlation matrix of the numeric answers in each cluster, in
/// cluster order. Pairs involving a column that is constant within the
/// cluster get 0; clusters with fewer than two members get the identity.
pub fn estimate_cluster_correlations(
    numeric: &NumericMatrix,
    part: &Partition,
) -> Result<Vec<CorrelationMatrix>> {
    if numeric.n_rows() != part.len() {
        return Err(Error::Dimension(format!(
            "{} rows for a partition of {}",
            numeric.n_rows(),
            part.len()
        )));
    }
    let q = numeric.n_cols();
    part.members()
        .iter()
        .map(|members| {
            if members.len() < 2 {
                return Ok(CorrelationMatrix::identity(q));
            }
            let m = members.len() as f64;
            let mut centered = vec![vec![0.0; members.len()]; q];
            let mut norms = vec![0.0; q];
            for j in 0..q {
                let mean = members.iter().map(|&i| numeric.get(i, j)).sum::<f64>() / m;
                let constant = members.iter().all(|&i| numeric.get(i, j) == numeric.get(members[0], j));
                for (c, &i) in centered[j].iter_mut().zip(members) {
                    *c = if constant { 0.0 } else { numeric.get(i, j) - mean };
                }
                norms[j] = centered[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            }
            let mut rows = vec![vec![0.0; q]; q];
            for a in 0..q {
                rows[a][a] = 1.0;
                for b in (a + 1)..q {
                    let r = if norms[a] > 0.0 && norms[b] > 0.0 {
                        let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
                        (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0)
                    } else {
                        0.0
                    };
                    rows[a][b] = r;
                    rows[b][a] = r;
                }
            }
            CorrelationMatrix::new(rows)
        })
        .collect()
}

/// Assignment of estimated matrices to (possibly identity-augmented) true
/// matrices minimizing the largest pairwise distance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingResult {
    /// `assignment[k]` is the true index paired with estimate `k`; indices at
    /// or above the number of true matrices denote identity augmentations.
    pub assignment: Vec<usize>,
    pub bottleneck_value: f64,
}

fn try_assign(
    row: usize,
    allowed: &[Vec<bool>],
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for col in 0..seen.len() {
        if allowed[row][col] && !seen[col] {
            seen[col] = true;
            if owner[col].is_none_or(|r| try_assign(r, allowed, seen, owner)) {
                owner[col] = Some(row);
                return true;
            }
        }
    }
    false
}

/// Perfect matching of rows into columns using only allowed edges.
fn matching(allowed: &[Vec<bool>], n_cols: usize) -> Option<Vec<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; n_cols];
    for row in 0..allowed.len() {
        let mut seen = vec![false; n_cols];
        if !try_assign(row, allowed, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut assignment = vec![0; allowed.len()];
    for (col, r) in owner.iter().enumerate() {
        if let Some(r) = r {
            assignment[*r] = col;
        }
    }
    Some(assignment)
}

/// Bottleneck pairing. When there are more estimates than true matrices the
/// truth is padded with identity matrices.
///
/// Solved exactly as a bottleneck assignment: the smallest distance threshold
/// admitting a matching that covers every estimate.
pub fn pairing(estimated: &[CorrelationMatrix], truth: &[CorrelationMatrix]) -> Result<PairingResult> {
    if estimated.is_empty() || truth.is_empty() {
        return Err(Error::InvalidArgument("empty list of correlation matrices".into()));
    }
    let q = truth[0].dim();
    let n_cols = truth.len().max(estimated.len());
    let identity = CorrelationMatrix::identity(q);
    let targets: Vec<&CorrelationMatrix> =
        truth.iter().chain(std::iter::repeat_n(&identity, n_cols - truth.len())).collect();
    let dist: Vec<Vec<f64>> = estimated
        .iter()
        .map(|e| targets.iter().map(|t| frobenius(e, t)).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let mut candidates: Vec<f64> = dist.iter().flatten().copied().collect();
    candidates.sort_by(|a, b| a.total_cmp(b));
    candidates.dedup();
    let feasible = |t: f64| {
        let allowed: Vec<Vec<bool>> =
            dist.iter().map(|row| row.iter().map(|&d| d <= t).collect()).collect();
        matching(&allowed, n_cols)
    };
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let bottleneck_value = candidates[lo];
    let assignment = feasible(bottleneck_value).expect("largest threshold is feasible");
    Ok(PairingResult {
        assignment,
        bottleneck_value,
    })
}

/// Minimum over pairings of the largest Frobenius distance.
pub fn collection_dissimilarity(
    estimated: &[CorrelationMatrix],
    truth: &[CorrelationMatrix],
) -> Result<f64> {
    Ok(pairing(estimated, truth)?.bottleneck_value)
}

/// Dissimilarity achieved when estimating with the true membership.
pub fn benchmark_dissimilarity(dataset: &SyntheticDataset) -> Result<f64> {
    let numeric = numeric_map(&dataset.responses);
    let estimated = estimate_cluster_correlations(&numeric, &dataset.true_membership)?;
    collection_dissimilarity(&estimated, &dataset.correlations())
}

/// `(ratio, raw)`: raw dissimilarity of the clusters of `part` (all
/// respondents kept) and its ratio to the known-membership benchmark. The
/// ratio is infinite when the benchmark is zero.
pub fn cdis(dataset: &SyntheticDataset, part: &Partition) -> Result<(f64, f64)> {
    let numeric = numeric_map(&dataset.responses);
    let estimated = estimate_cluster_correlations(&numeric, part)?;
    let raw = collection_dissimilarity(&estimated, &dataset.correlations())?;
    Ok((ratio(raw, benchmark_dissimilarity(dataset)?), raw))
}
