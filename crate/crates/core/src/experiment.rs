//! Seeded batch runs: generate datasets, run methods, score them.
//!
//! Each dataset index is an independent unit of work; results are gathered
//! in index order so the worker count never changes the output.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjacency::MethodConfig;
use crate::error::{Error, Result};
use crate::io::{read_text, write_atomic, DatasetStatus, RunManifest, Status};
use crate::metrics::{benchmark_dissimilarity, score, DatasetRecord, MetricsReport, NmiNormalization};
use crate::pipeline::{run_method, MethodSpec};
use crate::simulate::{dataset_seed, generate_dataset, DgpConfig, SyntheticDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub config: DgpConfig,
    pub n_datasets: usize,
    pub master_seed: u64,
    pub methods: Vec<MethodSpec>,
    pub method_config: MethodConfig,
    pub nmi: NmiNormalization,
}

impl ExperimentSpec {
    pub fn new(config: DgpConfig, n_datasets: usize, master_seed: u64, methods: Vec<MethodSpec>) -> Self {
        ExperimentSpec {
            config,
            n_datasets,
            master_seed,
            methods,
            method_config: MethodConfig::default(),
            nmi: NmiNormalization::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.method_config.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        Ok(())
    }

    pub fn manifest(&self, datasets: Vec<DatasetStatus>) -> RunManifest {
        RunManifest {
            config_hash: self.config.hash(),
            master_seed: self.master_seed,
            n_datasets: self.n_datasets,
            methods: self.methods.iter().map(|m| m.method.to_string()).collect(),
            partitioners: self.methods.iter().map(|m| m.partitioner.to_string()).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            datasets,
        }
    }
}

/// Splits a pipeline error into the failing step and its message.
pub fn error_parts(e: &Error) -> (String, String) {
    match e {
        Error::Step { step, source } => (step.to_string(), source.to_string()),
        other => ("unknown".to_string(), other.to_string()),
    }
}

fn score_method(
    spec: &ExperimentSpec,
    dataset: &SyntheticDataset,
    benchmark: f64,
    m: MethodSpec,
    index: usize,
    seed: u64,
) -> DatasetRecord {
    let (method, part) = (m.method.name(), m.partitioner.name());
    let result = run_method(&dataset.responses, m, &spec.method_config, seed).and_then(|run| {
        score(dataset, &run.partition, run.excluded(), Some(benchmark), spec.nmi).map_err(|e| e.at("score"))
    });
    match result {
        Ok(s) => DatasetRecord::ok(index, seed, method, part, &s),
        Err(e) => {
            let (step, msg) = error_parts(&e);
            DatasetRecord::failed(index, seed, method, part, dataset.n_construals(), &step, &msg)
        }
    }
}

/// Records for every method on dataset `index`. Failures become
/// error-flagged records.
pub fn run_dataset(spec: &ExperimentSpec, index: usize) -> Vec<DatasetRecord> {
    let seed = dataset_seed(spec.master_seed, index as u64);
    let fail_all = |k_true: usize, e: Error| {
        let (step, msg) = error_parts(&e);
        spec.methods
            .iter()
            .map(|m| DatasetRecord::failed(index, seed, m.method.name(), m.partitioner.name(), k_true, &step, &msg))
            .collect()
    };
    let dataset = match generate_dataset(&spec.config, seed) {
        Ok(d) => d,
        Err(e) => return fail_all(0, e.at("generate")),
    };
    let benchmark = match benchmark_dissimilarity(&dataset) {
        Ok(b) => b,
        Err(e) => return fail_all(dataset.n_construals(), e.at("benchmark")),
    };
    spec.methods
        .iter()
        .map(|&m| score_method(spec, &dataset, benchmark, m, index, seed))
        .collect()
}

fn record_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("{index:05}.csv"))
}

/// Runs the experiment on `workers` threads. With a `journal` directory,
/// each dataset's records are stored there and reused on a later run.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize, journal: Option<&Path>) -> Result<MetricsReport> {
    spec.validate()?;
    if let Some(dir) = journal {
        crate::io::create_dir(dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let per_dataset: Vec<Vec<DatasetRecord>> = pool.install(|| {
        (0..spec.n_datasets)
            .into_par_iter()
            .map(|i| {
                let Some(dir) = journal else {
                    return Ok(run_dataset(spec, i));
                };
                let path = record_path(dir, i);
                if path.exists() {
                    let records = MetricsReport::from_csv(&read_text(&path)?)?.records;
                    if records.len() == spec.methods.len() {
                        return Ok(records);
                    }
                }
                let records = run_dataset(spec, i);
                write_atomic(&path, MetricsReport::new(records.clone()).to_csv()?.as_bytes())?;
                Ok(records)
            })
            .collect::<Result<_>>()
    })?;
    Ok(MetricsReport::new(per_dataset.into_iter().flatten().collect()))
}

/// Manifest entries for every record of `report`.
pub fn statuses(report: &MetricsReport) -> Vec<DatasetStatus> {
    report
        .records
        .iter()
        .map(|r| DatasetStatus {
            dataset: r.dataset,
            seed: r.seed,
            method: Some(format!("{}:{}", r.method, r.partitioner)),
            status: match &r.error {
                None => Status::Ok,
                Some(msg) => Status::Error {
                    step: r.error_step.clone().unwrap_or_default(),
                    message: msg.clone(),
                },
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjacency::Method;
    use crate::partition::Algorithm;
    use crate::simulate::experiment1_config;

    fn small() -> ExperimentSpec {
        let mut cfg = experiment1_config();
        cfg.construal_population = crate::simulate::IntRange::new(30, 40);
        ExperimentSpec::new(
            cfg,
            4,
            11,
            vec![
                MethodSpec::new(Method::Bca, Algorithm::Newman),
                MethodSpec::new(Method::Rrca, Algorithm::Louvain),
            ],
        )
    }

    #[test]
    fn worker_count_does_not_matter() {
        let spec = small();
        let a = run_experiment(&spec, 1, None).unwrap();
        let b = run_experiment(&spec, 3, None).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.records.len(), 8);
    }

    #[test]
    fn journal_resumes() {
        let spec = small();
        let dir = tempfile::tempdir().unwrap();
        let first = run_experiment(&spec, 2, Some(dir.path())).unwrap();
        // A doctored journal entry is picked up instead of recomputed.
        let path = record_path(dir.path(), 2);
        let mut entry = MetricsReport::from_csv(&read_text(&path).unwrap()).unwrap();
        entry.records[0].nmi = Some(0.123);
        write_atomic(&path, entry.to_csv().unwrap().as_bytes()).unwrap();
        let second = run_experiment(&spec, 2, Some(dir.path())).unwrap();
        assert_ne!(first, second);
        let changed = second.records.iter().find(|r| r.dataset == 2 && r.method == "bca").unwrap();
        assert_eq!(changed.nmi, Some(0.123));
        std::fs::remove_file(&path).unwrap();
        assert_eq!(run_experiment(&spec, 2, Some(dir.path())).unwrap(), first);
    }

    #[test]
    fn no_methods_is_config_error() {
        let mut spec = small();
        spec.methods.clear();
        assert!(run_experiment(&spec, 1, None).unwrap_err().is_config_error());
    }
}
