//! Data generating process parameters.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::correlation::CorrelationMatrix;

/// Inclusive integer range; each value is equally likely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: usize,
    pub max: usize,
}

impl IntRange {
    pub fn fixed(v: usize) -> Self {
        IntRange { min: v, max: v }
    }

    pub fn new(min: usize, max: usize) -> Self {
        IntRange { min, max }
    }

    pub fn contains(&self, v: usize) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DependenceStructure {
    /// One matrix per construal, used as given.
    Fixed { matrices: Vec<CorrelationMatrix> },
    /// Fresh random matrices for every dataset.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub name: String,
    pub n_questions: IntRange,
    pub construal_population: IntRange,
    pub n_construals: IntRange,
    pub dependence: DependenceStructure,
    /// Candidate numbers of options, each equally likely. All must be odd.
    pub n_options: Vec<usize>,
    /// Closed interval of the uniform skewness draw.
    pub skewness: [f64; 2],
    #[serde(default)]
    pub retain_latent: bool,
}

fn eq5(sign: f64) -> CorrelationMatrix {
    CorrelationMatrix::new(vec![
        vec![1.0, 1.0, 0.7 * sign],
        vec![1.0, 1.0, 0.7 * sign],
        vec![0.7 * sign, 0.7 * sign, 1.0],
    ])
    .expect("fixed experiment matrix is valid")
}

/// The two construal matrices of the first experiment: questions 1 and 2
/// move together, and question 3 follows them in one construal and opposes
/// them in the other.
pub fn experiment1_matrices() -> [CorrelationMatrix; 2] {
    [eq5(1.0), eq5(-1.0)]
}

pub fn experiment1_config() -> DgpConfig {
    DgpConfig {
        name: "exp1".into(),
        n_questions: IntRange::fixed(3),
        construal_population: IntRange::new(200, 400),
        n_construals: IntRange::fixed(2),
        dependence: DependenceStructure::Fixed {
            matrices: experiment1_matrices().to_vec(),
        },
        n_options: vec![5],
        skewness: [-0.2, 0.2],
        retain_latent: false,
    }
}

pub fn experiment2_config() -> DgpConfig {
    DgpConfig {
        name: "exp2".into(),
        n_questions: IntRange::new(10, 20),
        construal_population: IntRange::new(200, 400),
        n_construals: IntRange::new(2, 6),
        dependence: DependenceStructure::Random,
        n_options: vec![3, 5, 7],
        skewness: [-0.2, 0.2],
        retain_latent: false,
    }
}

impl DgpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("{}: {m}", self.name)));
        for (label, r) in [
            ("n_questions", self.n_questions),
            ("construal_population", self.construal_population),
            ("n_construals", self.n_construals),
        ] {
            if r.min > r.max {
                return bad(format!("{label} has min > max"));
            }
        }
        if self.n_questions.min < 2 {
            return bad("at least 2 questions are required".into());
        }
        if self.n_construals.min < 1 || self.construal_population.min < 1 {
            return bad("construal counts and populations must be at least 1".into());
        }
        if self.n_options.is_empty() || self.n_options.iter().any(|&h| h < 3 || h % 2 == 0) {
            return bad("n_options must be a non-empty list of odd numbers ≥ 3".into());
        }
        let [lo, hi] = self.skewness;
        if !(lo <= hi) || lo < -0.2 || hi > 0.2 {
            return bad("skewness must be an interval within [-0.2, 0.2]".into());
        }
        if let DependenceStructure::Fixed { matrices } = &self.dependence {
            if self.n_construals.min != self.n_construals.max
                || matrices.len() != self.n_construals.min
            {
                return bad("fixed dependence needs a fixed K equal to the number of matrices".into());
            }
            if self.n_questions.min != self.n_questions.max
                || matrices.iter().any(|m| m.dim() != self.n_questions.min)
            {
                return bad("fixed matrices must match a fixed number of questions".into());
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: DgpConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Restricts the number of construals, e.g. to the 2–4 range.
    pub fn with_construals(mut self, range: IntRange) -> Self {
        self.n_construals = range;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment1_is_fixed() {
        let c = experiment1_config();
        c.validate().unwrap();
        assert_eq!(c.n_construals, IntRange::fixed(2));
        assert_eq!(c.n_questions, IntRange::fixed(3));
        assert_eq!(c.n_options, vec![5]);
        let [s1, s2] = experiment1_matrices();
        assert_eq!(s1.get(0, 2), 0.7);
        assert_eq!(s2.get(0, 2), -0.7);
        assert_eq!(s1.get(0, 1), 1.0);
    }

    #[test]
    fn experiment2_ranges() {
        let c = experiment2_config();
        c.validate().unwrap();
        assert_eq!(c.skewness, [-0.2, 0.2]);
        assert_eq!(c.n_questions, IntRange::new(10, 20));
        assert_eq!(c.n_construals, IntRange::new(2, 6));
        assert_eq!(c.construal_population, IntRange::new(200, 400));
        assert_eq!(c.n_options, vec![3, 5, 7]);
    }

    #[test]
    fn json_round_trip_and_hash() {
        for c in [experiment1_config(), experiment2_config()] {
            let back = DgpConfig::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
        assert_ne!(experiment1_config().hash(), experiment2_config().hash());
    }

    #[test]
    fn invalid_configs() {
        let mut c = experiment2_config();
        c.n_options = vec![4];
        assert!(c.validate().is_err());
        let c = experiment1_config().with_construals(IntRange::new(2, 3));
        assert!(c.validate().is_err());
        let mut c = experiment2_config();
        c.skewness = [0.1, -0.1];
        assert!(c.validate().is_err());
    }
}
