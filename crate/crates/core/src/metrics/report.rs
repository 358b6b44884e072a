//! Per-dataset records and their aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{cpa, mad, Agreement, Score};

/// One method applied to one dataset. Measures are empty when `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub dataset: usize,
    pub seed: u64,
    pub method: String,
    pub partitioner: String,
    pub k_true: usize,
    pub k_est_raw: Option<usize>,
    pub k_est: Option<usize>,
    pub unit_clusters: Option<usize>,
    pub excluded: Option<usize>,
    pub nmi: Option<f64>,
    pub snmi: Option<f64>,
    pub cdis_ratio: Option<f64>,
    pub cdis_raw: Option<f64>,
    pub error_step: Option<String>,
    pub error: Option<String>,
}

impl DatasetRecord {
    pub fn ok(dataset: usize, seed: u64, method: &str, partitioner: &str, s: &Score) -> Self {
        DatasetRecord {
            dataset,
            seed,
            method: method.to_string(),
            partitioner: partitioner.to_string(),
            k_true: s.k_true,
            k_est_raw: Some(s.k_est_raw),
            k_est: Some(s.k_est),
            unit_clusters: Some(s.unit_clusters),
            excluded: Some(s.excluded),
            nmi: Some(s.nmi),
            snmi: Some(s.snmi),
            cdis_ratio: Some(s.cdis_ratio),
            cdis_raw: Some(s.cdis_raw),
            error_step: None,
            error: None,
        }
    }

    /// Record without the dissimilarity measures.
    pub fn from_agreement(dataset: usize, seed: u64, method: &str, partitioner: &str, a: &Agreement) -> Self {
        DatasetRecord {
            dataset,
            seed,
            method: method.to_string(),
            partitioner: partitioner.to_string(),
            k_true: a.k_true,
            k_est_raw: Some(a.k_est_raw),
            k_est: Some(a.k_est),
            unit_clusters: Some(a.unit_clusters),
            excluded: Some(a.excluded),
            nmi: Some(a.nmi),
            snmi: Some(a.snmi),
            cdis_ratio: None,
            cdis_raw: None,
            error_step: None,
            error: None,
        }
    }

    pub fn failed(
        dataset: usize,
        seed: u64,
        method: &str,
        partitioner: &str,
        k_true: usize,
        step: &str,
        message: &str,
    ) -> Self {
        DatasetRecord {
            dataset,
            seed,
            method: method.to_string(),
            partitioner: partitioner.to_string(),
            k_true,
            k_est_raw: None,
            k_est: None,
            unit_clusters: None,
            excluded: None,
            nmi: None,
            snmi: None,
            cdis_ratio: None,
            cdis_raw: None,
            error_step: Some(step.to_string()),
            error: Some(message.to_string()),
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some() || self.k_est.is_none()
    }
}

/// Table-style summary of a group of records. Error-flagged records count
/// towards `errors` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Records in the group, including failures.
    pub n: usize,
    pub errors: usize,
    pub error_rate: f64,
    #[serde(rename = "CPA")]
    pub cpa: Option<f64>,
    #[serde(rename = "MAD")]
    pub mad: Option<f64>,
    /// Mean ratio over records with a finite ratio.
    #[serde(rename = "CDIS")]
    pub cdis: Option<f64>,
    #[serde(rename = "CDIS (Raw)")]
    pub cdis_raw: Option<f64>,
    /// Records whose benchmark was zero.
    pub cdis_infinite: usize,
    #[serde(rename = "SNMI")]
    pub snmi: Option<f64>,
    #[serde(rename = "NMI")]
    pub nmi: Option<f64>,
    /// Share of records with at least one unit-cluster.
    #[serde(rename = "Unit-construals")]
    pub unit_construals: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

impl Aggregate {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a DatasetRecord>) -> Self {
        let all: Vec<&DatasetRecord> = records.into_iter().collect();
        let ok: Vec<&DatasetRecord> = all.iter().copied().filter(|r| !r.is_error()).collect();
        let counts: Vec<(usize, usize)> =
            ok.iter().map(|r| (r.k_est.unwrap_or(0), r.k_true)).collect();
        let errors = all.len() - ok.len();
        Aggregate {
            n: all.len(),
            errors,
            error_rate: if all.is_empty() { 0.0 } else { errors as f64 / all.len() as f64 },
            cpa: cpa(&counts).ok(),
            mad: mad(&counts).ok(),
            cdis: mean(ok.iter().filter_map(|r| r.cdis_ratio).filter(|v| v.is_finite())),
            cdis_raw: mean(ok.iter().filter_map(|r| r.cdis_raw)),
            cdis_infinite: ok
                .iter()
                .filter(|r| r.cdis_ratio.is_some_and(|v| v.is_infinite()))
                .count(),
            snmi: mean(ok.iter().filter_map(|r| r.snmi)),
            nmi: mean(ok.iter().filter_map(|r| r.nmi)),
            unit_construals: mean(
                ok.iter()
                    .map(|r| f64::from(u8::from(r.unit_clusters.unwrap_or(0) > 0))),
            ),
        }
    }
}

/// Aggregates keyed by method label (`method:partitioner`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateBlock {
    pub overall: BTreeMap<String, Aggregate>,
    /// Present when a true-K filter was requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub restricted: Option<Restricted>,
    pub by_k: BTreeMap<String, BTreeMap<usize, Aggregate>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Restricted {
    pub k_min: usize,
    pub k_max: usize,
    pub aggregates: BTreeMap<String, Aggregate>,
}

/// Records of a batch run, sorted by dataset then method.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub records: Vec<DatasetRecord>,
}

impl MetricsReport {
    pub fn new(mut records: Vec<DatasetRecord>) -> Self {
        records.sort_by(|a, b| {
            (a.dataset, &a.method, &a.partitioner).cmp(&(b.dataset, &b.method, &b.partitioner))
        });
        MetricsReport { records }
    }

    fn label(r: &DatasetRecord) -> String {
        format!("{}:{}", r.method, r.partitioner)
    }

    fn grouped<'a>(
        records: impl Iterator<Item = &'a DatasetRecord>,
    ) -> BTreeMap<String, Aggregate> {
        let mut groups: BTreeMap<String, Vec<&DatasetRecord>> = BTreeMap::new();
        for r in records {
            groups.entry(Self::label(r)).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|(k, v)| (k, Aggregate::from_records(v)))
            .collect()
    }

    /// Aggregates per method over every record.
    pub fn aggregates(&self) -> BTreeMap<String, Aggregate> {
        Self::grouped(self.records.iter())
    }

    /// Aggregates per method over records with `k_min <= k_true <= k_max`.
    pub fn aggregates_for_k(&self, k_min: usize, k_max: usize) -> BTreeMap<String, Aggregate> {
        Self::grouped(self.records.iter().filter(|r| (k_min..=k_max).contains(&r.k_true)))
    }

    pub fn by_k(&self) -> BTreeMap<String, BTreeMap<usize, Aggregate>> {
        let mut groups: BTreeMap<String, BTreeMap<usize, Vec<&DatasetRecord>>> = BTreeMap::new();
        for r in &self.records {
            groups
                .entry(Self::label(r))
                .or_default()
                .entry(r.k_true)
                .or_default()
                .push(r);
        }
        groups
            .into_iter()
            .map(|(m, ks)| {
                let ks = ks.into_iter().map(|(k, v)| (k, Aggregate::from_records(v))).collect();
                (m, ks)
            })
            .collect()
    }

    pub fn aggregate_block(&self, k_filter: Option<(usize, usize)>) -> AggregateBlock {
        AggregateBlock {
            overall: self.aggregates(),
            restricted: k_filter.map(|(k_min, k_max)| Restricted {
                k_min,
                k_max,
                aggregates: self.aggregates_for_k(k_min, k_max),
            }),
            by_k: self.by_k(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record(RECORD_HEADER)?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let records = rd.deserialize().collect::<std::result::Result<Vec<DatasetRecord>, _>>()?;
        Ok(MetricsReport::new(records))
    }

    /// Pretty JSON of the aggregate block; key order is fixed.
    pub fn aggregates_json(&self, k_filter: Option<(usize, usize)>) -> String {
        serde_json::to_string_pretty(&self.aggregate_block(k_filter)).expect("aggregates serialize")
            + "\n"
    }
}

const RECORD_HEADER: [&str; 15] = [
    "dataset",
    "seed",
    "method",
    "partitioner",
    "k_true",
    "k_est_raw",
    "k_est",
    "unit_clusters",
    "excluded",
    "nmi",
    "snmi",
    "cdis_ratio",
    "cdis_raw",
    "error_step",
    "error",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn record(dataset: usize, method: &str, k_true: usize, k_est: usize, units: usize, ratio: f64) -> DatasetRecord {
        let s = Score {
            k_true,
            k_est_raw: k_est + units,
            k_est,
            unit_clusters: units,
            excluded: units,
            nmi: 0.5,
            snmi: 0.5 * k_est.min(k_true) as f64 / k_est.max(k_true) as f64,
            cdis_ratio: ratio,
            cdis_raw: 0.1 * ratio,
        };
        DatasetRecord::ok(dataset, dataset as u64 * 7, method, "newman", &s)
    }

    fn sample() -> MetricsReport {
        MetricsReport::new(vec![
            record(1, "bca", 2, 2, 0, 1.5),
            record(0, "bca", 2, 3, 1, f64::INFINITY),
            record(0, "rca", 2, 2, 2, 2.0),
            DatasetRecord::failed(1, 7, "rca", "newman", 3, "partition", "empty adjacency"),
            record(2, "bca", 3, 3, 0, 2.5),
        ])
    }

    #[test]
    fn records_sorted() {
        let r = sample();
        let order: Vec<(usize, &str)> = r.records.iter().map(|r| (r.dataset, r.method.as_str())).collect();
        assert_eq!(order, vec![(0, "bca"), (0, "rca"), (1, "bca"), (1, "rca"), (2, "bca")]);
    }

    #[test]
    fn aggregate_arithmetic() {
        let agg = sample().aggregates();
        let bca = &agg["bca:newman"];
        assert_eq!((bca.n, bca.errors), (3, 0));
        assert!((bca.cpa.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((bca.mad.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(bca.cdis, Some(2.0));
        assert_eq!(bca.cdis_infinite, 1);
        assert!((bca.unit_construals.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let rca = &agg["rca:newman"];
        assert_eq!((rca.n, rca.errors, rca.error_rate), (2, 1, 0.5));
        assert_eq!((rca.cpa, rca.unit_construals), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn restricted_and_by_k() {
        let r = sample();
        let only2 = r.aggregates_for_k(2, 2);
        assert_eq!(only2["bca:newman"].n, 2);
        assert_eq!(only2["rca:newman"].n, 1);
        let by_k = r.by_k();
        assert_eq!(by_k["bca:newman"][&3].cpa, Some(1.0));
        assert_eq!(by_k["rca:newman"][&3].errors, 1);
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let text = r.to_csv().unwrap();
        assert!(text.starts_with("dataset,seed,method,partitioner,k_true,"));
        let back = MetricsReport::from_csv(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_csv().unwrap(), text);
        let empty = MetricsReport::default().to_csv().unwrap();
        assert_eq!(MetricsReport::from_csv(&empty).unwrap(), MetricsReport::default());
    }

    #[test]
    fn aggregates_recomputable_from_csv() {
        let r = sample();
        let back = MetricsReport::from_csv(&r.to_csv().unwrap()).unwrap();
        assert_eq!(back.aggregates_json(Some((2, 4))), r.aggregates_json(Some((2, 4))));
        let json: serde_json::Value = serde_json::from_str(&r.aggregates_json(None)).unwrap();
        assert!(json["overall"]["bca:newman"]["CPA"].is_number());
        assert!(json.get("restricted").is_none());
    }
}
