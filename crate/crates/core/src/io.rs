//! On-disk layout of synthetic datasets and run manifests.
//!
//! A dataset directory holds `responses.csv`, `schema.json`, `truth.csv`,
//! one `sigma_{k}.csv` per construal, `thresholds.json` and `manifest.json`.
//! Every file is written to a temporary name and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::simulate::{ConstrualSpec, CorrelationMatrix, SyntheticDataset, ThresholdSet};
use crate::survey::{load_responses, parse_survey_schema};

/// Writes `contents` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Identity of a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub config_hash: String,
    pub n_respondents: usize,
    pub n_questions: usize,
    pub populations: Vec<usize>,
}

fn matrix_csv(m: &CorrelationMatrix, ids: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ids)?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

fn parse_matrix(text: &str, q: usize) -> Result<CorrelationMatrix> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let rows = rd
        .records()
        .map(|r| {
            r?.iter()
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Responses(format!("matrix entry {c:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != q {
        return Err(Error::Dimension(format!("{} matrix rows for {q} questions", rows.len())));
    }
    CorrelationMatrix::new(rows)
}

/// Ground-truth membership CSV with header `respondent_id,construal_id`.
pub fn truth_csv(ids: &[String], part: &Partition) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["respondent_id", "construal_id"])?;
    for (id, &l) in ids.iter().zip(part.labels()) {
        w.write_record([id.as_str(), &l.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

/// Reads a two-column `id,label` CSV (any header names). Labels are kept as
/// given when they are contiguous integers and relabelled otherwise.
pub fn read_membership(text: &str) -> Result<(Vec<String>, Partition)> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut ids = Vec::new();
    let mut keys = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Responses(format!("membership row {} has {} cells", i + 1, rec.len())));
        }
        ids.push(rec[0].trim().to_string());
        keys.push(rec[1].trim().to_string());
    }
    let numeric: Option<Vec<usize>> = keys.iter().map(|k| k.parse().ok()).collect();
    let part = match numeric.map(Partition::from_labels) {
        Some(Ok(p)) => p,
        _ => Partition::canonical(&keys)?,
    };
    Ok((ids, part))
}

/// Writes `dataset` into `dir`, creating it. The manifest is written last.
pub fn write_dataset(dir: &Path, dataset: &SyntheticDataset, config_hash: &str) -> Result<()> {
    create_dir(dir)?;
    let responses = &dataset.responses;
    let qids: Vec<String> = responses.survey().questions().iter().map(|q| q.id.clone()).collect();
    write_atomic(&dir.join("responses.csv"), responses.to_csv().as_bytes())?;
    write_atomic(&dir.join("schema.json"), (responses.survey().to_json_pretty() + "\n").as_bytes())?;
    write_atomic(
        &dir.join("truth.csv"),
        truth_csv(responses.respondent_ids(), &dataset.true_membership)?.as_bytes(),
    )?;
    for (k, spec) in dataset.construal_specs.iter().enumerate() {
        write_atomic(&dir.join(format!("sigma_{k}.csv")), matrix_csv(&spec.correlation, &qids)?.as_bytes())?;
    }
    let thresholds = serde_json::to_string_pretty(&dataset.thresholds)? + "\n";
    write_atomic(&dir.join("thresholds.json"), thresholds.as_bytes())?;
    let manifest = DatasetManifest {
        seed: dataset.master_seed,
        config_hash: config_hash.to_string(),
        n_respondents: responses.n_respondents(),
        n_questions: responses.n_questions(),
        populations: dataset.construal_specs.iter().map(|c| c.population).collect(),
    };
    write_atomic(&dir.join("manifest.json"), (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())
}

/// Reads a directory written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<(SyntheticDataset, DatasetManifest)> {
    let manifest: DatasetManifest = serde_json::from_str(&read_text(&dir.join("manifest.json"))?)?;
    let survey = parse_survey_schema(&read_text(&dir.join("schema.json"))?)?;
    let responses = load_responses(&read_text(&dir.join("responses.csv"))?, &survey)?;
    let (ids, truth) = read_membership(&read_text(&dir.join("truth.csv"))?)?;
    if ids != responses.respondent_ids() {
        return Err(Error::Responses("truth.csv ids differ from responses.csv".into()));
    }
    let construal_specs = manifest
        .populations
        .iter()
        .enumerate()
        .map(|(k, &population)| {
            let text = read_text(&dir.join(format!("sigma_{k}.csv")))?;
            Ok(ConstrualSpec {
                correlation: parse_matrix(&text, survey.len())?,
                population,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if truth.n_clusters() != construal_specs.len() {
        return Err(Error::Dimension(format!(
            "{} construals in truth.csv, {} in manifest",
            truth.n_clusters(),
            construal_specs.len()
        )));
    }
    let thresholds: Vec<ThresholdSet> = serde_json::from_str(&read_text(&dir.join("thresholds.json"))?)?;
    let dataset = SyntheticDataset {
        responses,
        true_membership: truth,
        construal_specs,
        thresholds,
        latent_positions: None,
        master_seed: manifest.seed,
    };
    Ok((dataset, manifest))
}

/// Directory name of dataset `index` in a batch.
pub fn dataset_dir(root: &Path, index: usize) -> PathBuf {
    root.join(format!("dataset_{index:05}"))
}

/// Outcome of one unit of work in a batch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error { step: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatus {
    pub dataset: usize,
    pub seed: u64,
    /// Label of the method, absent for generation-only runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<String>,
    #[serde(flatten)]
    pub status: Status,
}

/// Everything needed to reproduce a batch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub master_seed: u64,
    pub n_datasets: usize,
    pub methods: Vec<String>,
    pub partitioners: Vec<String>,
    pub version: String,
    pub datasets: Vec<DatasetStatus>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{experiment2_config, generate_dataset};

    #[test]
    fn dataset_round_trip() {
        let cfg = experiment2_config();
        let d = generate_dataset(&cfg, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d");
        write_dataset(&path, &d, &cfg.hash()).unwrap();
        let (back, manifest) = read_dataset(&path).unwrap();
        assert_eq!(manifest.seed, 5);
        assert_eq!(manifest.config_hash, cfg.hash());
        assert_eq!(back.responses, d.responses);
        assert_eq!(back.true_membership, d.true_membership);
        assert_eq!(back.construal_specs, d.construal_specs);
        assert_eq!(back.thresholds, d.thresholds);
        assert_eq!(back, d);
        let leftovers = fs::read_dir(&path)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
            .count();
        assert_eq!(leftovers, 0);
    }

    #[test]
    fn membership_labels() {
        let (ids, p) = read_membership("id,c\na,1\nb,0\nc,1\n").unwrap();
        assert_eq!(ids, vec!["a", "b", "c"]);
        assert_eq!(p.labels(), &[1, 0, 1]);
        let (_, p) = read_membership("id,c\na,x\nb,y\nc,x\n").unwrap();
        assert_eq!(p.labels(), &[0, 1, 0]);
        let (_, p) = read_membership("id,c\na,5\nb,7\n").unwrap();
        assert_eq!(p.labels(), &[0, 1]);
    }

    #[test]
    fn manifest_status_json() {
        let m = RunManifest {
            config_hash: "h".into(),
            master_seed: 1,
            n_datasets: 1,
            methods: vec!["bca".into()],
            partitioners: vec!["newman".into()],
            version: "0".into(),
            datasets: vec![DatasetStatus {
                dataset: 0,
                seed: 9,
                method: Some("bca:newman".into()),
                status: Status::Error {
                    step: "partition".into(),
                    message: "no edges".into(),
                },
            }],
        };
        let text = m.to_json();
        assert!(text.contains("\"status\": \"error\""));
        assert_eq!(RunManifest::from_json(&text).unwrap(), m);
    }
}
