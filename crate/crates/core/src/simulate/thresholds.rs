//! Question thresholds mapping latent positions in [0, 1] to answer options.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::normal::sample_truncated_normal;

const SIGMA: f64 = 0.025;
const EXACT_GRID: f64 = (1u64 << 53) as f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub question_id: String,
    /// Strictly increasing cut points inside (0, 1), one fewer than options.
    pub thresholds: Vec<f64>,
    /// Share of positive minus share of negative answers.
    pub skewness: f64,
    /// Midpoint of the neutral subinterval.
    pub neutral_position: f64,
}

impl ThresholdSet {
    pub fn n_options(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.thresholds;
        let inside = t.iter().all(|&x| x > 0.0 && x < 1.0);
        let increasing = t.windows(2).all(|w| w[0] < w[1]);
        if t.is_empty() || !inside || !increasing {
            return Err(Error::InvalidArgument(format!(
                "thresholds for {} must be strictly increasing inside (0, 1)",
                self.question_id
            )));
        }
        Ok(())
    }
}

/// Draws thresholds for a question with an odd number `h` of options and
/// skewness `b`.
///
/// The neutral position is `(1 − b)/2`, snapped to a multiple of 2⁻⁵³ so that
/// `1 − 2n*` and `(1 − n*) − n*` both reproduce the stored skewness exactly.
pub fn gen_thresholds<R: Rng + ?Sized>(
    question_id: &str,
    h: usize,
    b: f64,
    rng: &mut R,
) -> Result<ThresholdSet> {
    if h < 3 || h % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "threshold generation needs an odd number of options ≥ 3, got {h}"
        )));
    }
    if !(-0.2..=0.2).contains(&b) {
        return Err(Error::InvalidArgument(format!("skewness {b} outside [-0.2, 0.2]")));
    }
    let neutral = ((1.0 - b) / 2.0 * EXACT_GRID).round() / EXACT_GRID;
    let skewness = 1.0 - 2.0 * neutral;
    let half = (h - 1) / 2;

    let l1 = neutral.min(1.0 - neutral);
    let mut pi = l1 * sample_truncated_normal(1.0 / h as f64, 0.0, 1.0, SIGMA, rng)?;
    let mut lower = vec![neutral - pi];
    let mut upper = vec![neutral + pi];
    let mut remaining = l1;
    for _ in 2..=half {
        remaining -= pi;
        pi = sample_truncated_normal(l1 / half as f64, 0.0, remaining, SIGMA, rng)?;
        lower.push(lower.last().unwrap() - pi);
        upper.push(upper.last().unwrap() + pi);
    }
    lower.reverse();
    lower.extend(upper);
    let set = ThresholdSet {
        question_id: question_id.to_string(),
        thresholds: lower,
        skewness,
        neutral_position: neutral,
    };
    set.validate()?;
    Ok(set)
}

/// 0-based option index of a latent position: the number of thresholds
/// strictly below it, so boundary hits fall in the lower interval.
pub fn latent_to_response(x_star: f64, thresholds: &ThresholdSet) -> usize {
    thresholds.thresholds.partition_point(|&t| t < x_star)
}
