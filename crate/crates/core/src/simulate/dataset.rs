//! Synthetic survey datasets with known construal membership.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::survey::{AnswerSpace, Question, ResponseMatrix, Survey};

use super::config::{DependenceStructure, DgpConfig, IntRange};
use super::copula::sample_copula;
use super::correlation::{random_correlation, CorrelationMatrix};
use super::rng::{substream, Stream};
use super::thresholds::{gen_thresholds, latent_to_response, ThresholdSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrualSpec {
    pub correlation: CorrelationMatrix,
    pub population: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub responses: ResponseMatrix,
    /// Construal of each respondent; cluster `k` corresponds to `construal_specs[k]`.
    pub true_membership: Partition,
    pub construal_specs: Vec<ConstrualSpec>,
    pub thresholds: Vec<ThresholdSet>,
    pub latent_positions: Option<Vec<Vec<f64>>>,
    pub master_seed: u64,
}

impl SyntheticDataset {
    pub fn n_construals(&self) -> usize {
        self.construal_specs.len()
    }

    pub fn correlations(&self) -> Vec<CorrelationMatrix> {
        self.construal_specs.iter().map(|c| c.correlation.clone()).collect()
    }
}

/// Option labels for an agreement scale with `h` options.
pub fn agreement_labels(h: usize) -> Vec<String> {
    let labels: &[&str] = match h {
        3 => &["Disagree", "Neutral", "Agree"],
        5 => &[
            "Strongly Disagree",
            "Somewhat Disagree",
            "Neutral",
            "Somewhat Agree",
            "Strongly Agree",
        ],
        7 => &[
            "Strongly Disagree",
            "Disagree",
            "Somewhat Disagree",
            "Neutral",
            "Somewhat Agree",
            "Agree",
            "Strongly Agree",
        ],
        _ => return (1..=h).map(|i| i.to_string()).collect(),
    };
    labels.iter().map(|s| s.to_string()).collect()
}

fn draw<R: Rng + ?Sized>(range: IntRange, rng: &mut R) -> usize {
    rng.random_range(range.min..=range.max)
}

/// Generates one dataset. Equal `(config, seed)` pairs give identical output.
pub fn generate_dataset(config: &DgpConfig, seed: u64) -> Result<SyntheticDataset> {
    config.validate()?;
    let mut structure = substream(seed, Stream::Structure);
    let k = draw(config.n_construals, &mut structure);
    let q = draw(config.n_questions, &mut structure);

    let correlations: Vec<CorrelationMatrix> = match &config.dependence {
        DependenceStructure::Fixed { matrices } => matrices.clone(),
        DependenceStructure::Random => {
            let mut rng = substream(seed, Stream::Correlations);
            (0..k)
                .map(|_| random_correlation(q, &mut rng))
                .collect::<Result<_>>()
                .map_err(|e| e.at("correlation matrices"))?
        }
    };

    let mut pop_rng = substream(seed, Stream::Populations);
    let populations: Vec<usize> = (0..k)
        .map(|_| draw(config.construal_population, &mut pop_rng))
        .collect();

    let mut copula_rng = substream(seed, Stream::Copula);
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (c, (corr, &n)) in correlations.iter().zip(&populations).enumerate() {
        rows.extend(sample_copula(corr, n, &mut copula_rng).into_iter().map(|x| (c, x)));
    }
    rows.shuffle(&mut pop_rng);

    let mut threshold_rng = substream(seed, Stream::Thresholds);
    let mut questions = Vec::with_capacity(q);
    let mut thresholds = Vec::with_capacity(q);
    for j in 0..q {
        let h = *config.n_options.choose(&mut threshold_rng).expect("options validated");
        let b = threshold_rng.random_range(config.skewness[0]..=config.skewness[1]);
        let id = format!("Q{}", j + 1);
        thresholds.push(gen_thresholds(&id, h, b, &mut threshold_rng).map_err(|e| e.at("thresholds"))?);
        questions.push(Question {
            id,
            answers: AnswerSpace::new(agreement_labels(h), Some(h / 2))?,
        });
    }

    let answers: Vec<Vec<usize>> = rows
        .iter()
        .map(|(_, x)| x.iter().zip(&thresholds).map(|(&v, t)| latent_to_response(v, t)).collect())
        .collect();
    let survey = Survey::new(questions)?;
    let responses = ResponseMatrix::with_default_ids(survey, answers).map_err(|e| e.at("responses"))?;
    let labels: Vec<usize> = rows.iter().map(|(c, _)| *c).collect();
    let true_membership = Partition::from_labels(labels)
        .map_err(|e| Error::Numerical(format!("membership: {e}")))?;

    Ok(SyntheticDataset {
        responses,
        true_membership,
        construal_specs: correlations
            .into_iter()
            .zip(populations)
            .map(|(correlation, population)| ConstrualSpec {
                correlation,
                population,
            })
            .collect(),
        thresholds,
        latent_positions: config
            .retain_latent
            .then(|| rows.into_iter().map(|(_, x)| x).collect()),
        master_seed: seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::config::{experiment1_config, experiment2_config};

    #[test]
    fn experiment1_shape() {
        let mut cfg = experiment1_config();
        cfg.retain_latent = true;
        let d = generate_dataset(&cfg, 17).unwrap();
        assert_eq!(d.responses.n_questions(), 3);
        assert_eq!(d.n_construals(), 2);
        assert!(d.responses.survey().questions().iter().all(|q| q.answers.len() == 5));
        let sizes = d.true_membership.sizes();
        for (spec, size) in d.construal_specs.iter().zip(&sizes) {
            assert_eq!(spec.population, *size);
            assert!((200..=400).contains(size));
        }
        let latent = d.latent_positions.as_ref().unwrap();
        for (i, x) in latent.iter().enumerate() {
            for (j, &v) in x.iter().enumerate() {
                assert_eq!(d.responses.row(i)[j], latent_to_response(v, &d.thresholds[j]));
            }
        }
    }

    #[test]
    fn experiment2_ranges() {
        let cfg = experiment2_config();
        for seed in 0..5 {
            let d = generate_dataset(&cfg, seed).unwrap();
            assert!((10..=20).contains(&d.responses.n_questions()));
            assert!((2..=6).contains(&d.n_construals()));
            for t in &d.thresholds {
                assert!([3, 5, 7].contains(&t.n_options()));
                assert!(t.skewness.abs() <= 0.2 + 1e-15);
            }
        }
    }

    #[test]
    fn deterministic() {
        let cfg = experiment2_config();
        let a = generate_dataset(&cfg, 99).unwrap();
        let b = generate_dataset(&cfg, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.responses.to_csv(), b.responses.to_csv());
        let c = generate_dataset(&cfg, 100).unwrap();
        assert_ne!(a.responses.to_csv(), c.responses.to_csv());
    }

    #[test]
    fn perfectly_correlated_questions_agree() {
        // Questions 1 and 2 share their latent position in both construals.
        let mut cfg = experiment1_config();
        cfg.retain_latent = true;
        let d = generate_dataset(&cfg, 3).unwrap();
        for x in d.latent_positions.unwrap() {
            assert_eq!(x[0], x[1]);
        }
    }
}
