//! Scoring estimated partitions against the known construal structure.

mod cdis;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::simulate::SyntheticDataset;
use crate::survey::numeric_map;

pub use cdis::{
    benchmark_dissimilarity, cdis, collection_dissimilarity, estimate_cluster_correlations,
    frobenius, pairing, PairingResult,
};
pub use report::{Aggregate, AggregateBlock, DatasetRecord, MetricsReport, Restricted};

/// Result of removing single-respondent clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Stripped {
    /// Partition of the kept respondents, relabelled.
    pub partition: Partition,
    /// Number of clusters removed.
    pub removed: usize,
    /// Indices (into the input partition) of the kept respondents.
    pub kept: Vec<usize>,
}

/// Drops clusters with one member. Fails when nothing would remain.
pub fn strip_unit_clusters(part: &Partition) -> Result<Stripped> {
    let sizes = part.sizes();
    let kept: Vec<usize> = (0..part.len()).filter(|&i| sizes[part.label(i)] > 1).collect();
    if kept.is_empty() {
        return Err(Error::OnlyUnitClusters);
    }
    Ok(Stripped {
        partition: part.select(&kept)?,
        removed: sizes.iter().filter(|&&s| s == 1).count(),
        kept,
    })
}

fn check_records(records: &[(usize, usize)]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to aggregate".into()));
    }
    Ok(())
}

/// Share of records whose estimated count equals the true count.
pub fn cpa(records: &[(usize, usize)]) -> Result<f64> {
    check_records(records)?;
    Ok(records.iter().filter(|(e, t)| e == t).count() as f64 / records.len() as f64)
}

/// Mean absolute deviation between estimated and true counts.
pub fn mad(records: &[(usize, usize)]) -> Result<f64> {
    check_records(records)?;
    Ok(records.iter().map(|&(e, t)| e.abs_diff(t) as f64).sum::<f64>() / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmiNormalization {
    /// Arithmetic mean of the two entropies.
    #[default]
    Mean,
    /// Larger of the two entropies.
    Max,
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information between two partitions of the same
/// respondents.
pub fn nmi_with(est: &Partition, truth: &Partition, norm: NmiNormalization) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "partitions of {} and {} respondents",
            est.len(),
            truth.len()
        )));
    }
    let n = est.len() as f64;
    let (ka, kb) = (est.n_clusters(), truth.n_clusters());
    let mut joint = vec![0usize; ka * kb];
    for i in 0..est.len() {
        joint[est.label(i) * kb + truth.label(i)] += 1;
    }
    let (ha, hb) = (entropy(&est.sizes(), n), entropy(&truth.sizes(), n));
    if ka == 1 && kb == 1 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let (sa, sb) = (est.sizes(), truth.sizes());
    let mut mi = 0.0;
    for a in 0..ka {
        for b in 0..kb {
            let c = joint[a * kb + b];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (sa[a] as f64 * sb[b] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNormalization::Mean => 0.5 * (ha + hb),
        NmiNormalization::Max => ha.max(hb),
    };
    Ok((mi / denom).clamp(0.0, 1.0))
}

pub fn nmi(est: &Partition, truth: &Partition) -> Result<f64> {
    nmi_with(est, truth, NmiNormalization::Mean)
}

/// NMI scaled down by the ratio of the smaller to the larger cluster count.
pub fn snmi(nmi_value: f64, k_est: usize, k_true: usize) -> f64 {
    if k_est == 0 || k_true == 0 {
        return 0.0;
    }
    nmi_value * (k_est.min(k_true) as f64 / k_est.max(k_true) as f64)
}

/// Membership measures of an estimated partition against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub k_true: usize,
    pub k_est_raw: usize,
    pub k_est: usize,
    pub unit_clusters: usize,
    /// Respondents left out: adjacency exclusions plus unit-cluster members.
    pub excluded: usize,
    pub nmi: f64,
    pub snmi: f64,
    /// Estimated partition of the kept respondents.
    pub stripped: Partition,
    /// Indices of the kept respondents.
    pub kept: Vec<usize>,
}

/// Compares `part` with `truth` over the same respondents. Respondents in
/// `excluded` and members of unit-clusters are left out before comparing;
/// `k_true` counts clusters of the full truth.
pub fn agreement(
    part: &Partition,
    truth: &Partition,
    excluded: &[usize],
    norm: NmiNormalization,
) -> Result<Agreement> {
    let n = truth.len();
    if part.len() != n {
        return Err(Error::Dimension(format!(
            "partition of {} respondents against a truth of {n}",
            part.len()
        )));
    }
    let mut is_excluded = vec![false; n];
    for &i in excluded {
        if i >= n {
            return Err(Error::Dimension(format!("excluded respondent {i} out of range")));
        }
        is_excluded[i] = true;
    }
    let active: Vec<usize> = (0..n).filter(|&i| !is_excluded[i]).collect();
    if active.is_empty() {
        return Err(Error::OnlyUnitClusters);
    }
    let restricted = part.select(&active)?;
    let stripped = strip_unit_clusters(&restricted)?;
    let kept: Vec<usize> = stripped.kept.iter().map(|&i| active[i]).collect();
    let k_true = truth.n_clusters();
    let k_est = stripped.partition.n_clusters();
    let nmi_value = nmi_with(&stripped.partition, &truth.select(&kept)?, norm)?;
    Ok(Agreement {
        k_true,
        k_est_raw: restricted.n_clusters(),
        k_est,
        unit_clusters: stripped.removed,
        excluded: n - kept.len(),
        nmi: nmi_value,
        snmi: snmi(nmi_value, k_est, k_true),
        stripped: stripped.partition,
        kept,
    })
}

/// Every measure for one estimated partition of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub k_true: usize,
    pub k_est_raw: usize,
    pub k_est: usize,
    pub unit_clusters: usize,
    pub excluded: usize,
    pub nmi: f64,
    pub snmi: f64,
    pub cdis_ratio: f64,
    pub cdis_raw: f64,
}

/// Scores `part` (over all respondents of `dataset`). Respondents listed in
/// `excluded` were dropped by the adjacency step; they and the members of
/// unit-clusters are left out of every measure.
///
/// `benchmark` is the known-membership dissimilarity; pass `None` to compute it.
pub fn score(
    dataset: &SyntheticDataset,
    part: &Partition,
    excluded: &[usize],
    benchmark: Option<f64>,
    norm: NmiNormalization,
) -> Result<Score> {
    let a = agreement(part, &dataset.true_membership, excluded, norm)?;
    let numeric = numeric_map(&dataset.responses.select(&a.kept));
    let estimated = estimate_cluster_correlations(&numeric, &a.stripped)?;
    let raw = collection_dissimilarity(&estimated, &dataset.correlations())?;
    let bench = match benchmark {
        Some(b) => b,
        None => benchmark_dissimilarity(dataset)?,
    };
    Ok(Score {
        k_true: a.k_true,
        k_est_raw: a.k_est_raw,
        k_est: a.k_est,
        unit_clusters: a.unit_clusters,
        excluded: a.excluded,
        nmi: a.nmi,
        snmi: a.snmi,
        cdis_ratio: ratio(raw, bench),
        cdis_raw: raw,
    })
}

pub(crate) fn ratio(raw: f64, bench: f64) -> f64 {
    if bench > 0.0 {
        raw / bench
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(labels: &[usize]) -> Partition {
        Partition::from_labels(labels.to_vec()).unwrap()
    }

    #[test]
    fn strip_examples() {
        let s = strip_unit_clusters(&part(&[0, 0, 1, 2])).unwrap();
        assert_eq!(s.removed, 2);
        assert_eq!(s.kept, vec![0, 1]);
        assert_eq!(s.partition.n_clusters(), 1);
        let p = part(&[0, 1, 0, 1]);
        let s = strip_unit_clusters(&p).unwrap();
        assert_eq!((s.removed, &s.partition), (0, &p));
        assert!(matches!(strip_unit_clusters(&part(&[0, 1, 2])), Err(Error::OnlyUnitClusters)));
    }

    #[test]
    fn count_measures() {
        assert_eq!(cpa(&[(2, 2), (3, 2)]).unwrap(), 0.5);
        assert_eq!(cpa(&[(2, 2), (4, 4)]).unwrap(), 1.0);
        assert_eq!(mad(&[(2, 2), (4, 2)]).unwrap(), 1.0);
        assert_eq!(mad(&[(3, 3)]).unwrap(), 0.0);
        assert!(cpa(&[]).is_err());
        assert!(mad(&[]).is_err());
    }

    #[test]
    fn nmi_examples() {
        let truth = part(&[0, 0, 1, 1]);
        assert!((nmi(&part(&[1, 1, 0, 0]), &truth).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmi(&part(&[0, 0, 0, 0]), &truth).unwrap(), 0.0);
        assert_eq!(nmi(&part(&[0, 0, 0]), &part(&[0, 0, 0])).unwrap(), 1.0);

        // One respondent moved: contingency [[2,0],[1,1]].
        let est = part(&[0, 0, 0, 1]);
        let h_est = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let h_truth = 2f64.ln();
        let mi = 0.5 * (0.5f64 / (0.75 * 0.5)).ln() + 0.25 * (0.25f64 / (0.75 * 0.5)).ln()
            + 0.25 * (0.25f64 / (0.25 * 0.5)).ln();
        let expect = mi / (0.5 * (h_est + h_truth));
        assert!((nmi(&est, &truth).unwrap() - expect).abs() < 1e-14);
        let expect_max = mi / h_truth;
        assert!((nmi_with(&est, &truth, NmiNormalization::Max).unwrap() - expect_max).abs() < 1e-14);
        assert_eq!(nmi(&est, &truth).unwrap(), nmi(&truth, &est).unwrap());
    }

    #[test]
    fn snmi_examples() {
        assert_eq!(snmi(0.7, 3, 3), 0.7);
        assert!((snmi(0.6, 4, 2) - 0.3).abs() < 1e-15);
        assert_eq!(snmi(0.0, 5, 2), 0.0);
    }

    #[test]
    fn agreement_leaves_out_excluded_and_units() {
        let truth = part(&[0, 0, 1, 1, 1, 0]);
        // Respondent 4 forms a unit-cluster; respondent 5 is excluded upstream.
        let est = part(&[0, 0, 1, 1, 2, 3]);
        let a = agreement(&est, &truth, &[5], NmiNormalization::Mean).unwrap();
        assert_eq!((a.k_true, a.k_est_raw, a.k_est), (2, 3, 2));
        assert_eq!((a.unit_clusters, a.excluded), (1, 2));
        assert_eq!(a.kept, vec![0, 1, 2, 3]);
        assert!((a.nmi - 1.0).abs() < 1e-15);
        assert!(agreement(&part(&[0, 1]), &truth, &[], NmiNormalization::Mean).is_err());
    }
}
