//! Relationality (RCA) and its binarized, squared variant (RRCA).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::survey::{numeric_map, NumericMatrix, ResponseMatrix};

use super::{question_pairs, require_respondents, AdjacencyMatrix, EdgeRemoval, Method, MethodConfig};

fn direction(du: f64, dv: f64) -> f64 {
    if du * dv >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn relationality_term(du: f64, dv: f64) -> f64 {
    direction(du, dv) * (1.0 - (du.abs() - dv.abs()).abs())
}

fn binarized_term(du: f64, dv: f64) -> f64 {
    let sign_mag = |d: f64| if d == 0.0 { 0.0f64 } else { 1.0 };
    direction(du, dv) * (1.0 - (sign_mag(du) - sign_mag(dv)).abs())
}

// Flag-gated second-difference form: the pair counts (with the sign of the
// first differences) only when both respondents move by the same magnitude.
fn second_difference_term(du: f64, dv: f64) -> f64 {
    let second = du.abs() - dv.abs();
    direction(du, dv) * (1.0 - if second == 0.0 { 0.0 } else { 1.0 })
}

fn pair_differences(row: &[f64], pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs.iter().map(|&(k, l)| row[k] - row[l]).collect()
}

fn mean_term(du: &[f64], dv: &[f64], term: impl Fn(f64, f64) -> f64) -> f64 {
    let sum: f64 = du.iter().zip(dv).map(|(&a, &b)| term(a, b)).sum();
    sum / du.len() as f64
}

fn check_rows(u: &[f64], v: &[f64]) -> Result<usize> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "numeric rows of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::InsufficientQuestions {
            needed: 2,
            got: u.len(),
        });
    }
    Ok(u.len())
}

/// Relationality between two numeric answer rows, in `[-1, 1]`.
pub fn relationality(u: &[f64], v: &[f64]) -> Result<f64> {
    let q = check_rows(u, v)?;
    let pairs = question_pairs(q);
    Ok(mean_term(
        &pair_differences(u, &pairs),
        &pair_differences(v, &pairs),
        relationality_term,
    ))
}

/// Signed RRCA similarity before squaring.
pub fn rrca_similarity(u: &[f64], v: &[f64], second_difference: bool) -> Result<f64> {
    let q = check_rows(u, v)?;
    let pairs = question_pairs(q);
    let term = if second_difference {
        second_difference_term
    } else {
        binarized_term
    };
    Ok(mean_term(
        &pair_differences(u, &pairs),
        &pair_differences(v, &pairs),
        term,
    ))
}

fn differences(numeric: &NumericMatrix) -> Vec<Vec<f64>> {
    let pairs = question_pairs(numeric.n_cols());
    (0..numeric.n_rows())
        .map(|i| pair_differences(numeric.row(i), &pairs))
        .collect()
}

/// Sorted absolute null relationalities between respondents whose
/// answers are resampled independently within each question.
fn bootstrap_null(numeric: &NumericMatrix, iterations: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, q) = (numeric.n_rows(), numeric.n_cols());
    let pairs = question_pairs(q);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..q).map(|k| numeric.get(rng.random_range(0..n), k)).collect()
    };
    let mut null: Vec<f64> = (0..iterations)
        .map(|_| {
            let u = draw(&mut rng);
            let v = draw(&mut rng);
            mean_term(
                &pair_differences(&u, &pairs),
                &pair_differences(&v, &pairs),
                relationality_term,
            )
        })
        .collect();
    null.iter_mut().for_each(|x| *x = x.abs());
    null.sort_by(|a, b| a.total_cmp(b));
    null
}

/// Two-sided empirical p-value of `r`: the share of the null at least as far
/// from zero as `r`. Expects the null sorted by absolute value.
fn two_sided_p(null_abs: &[f64], r: f64) -> f64 {
    let below = null_abs.partition_point(|&x| x < r.abs());
    (null_abs.len() - below) as f64 / null_abs.len() as f64
}

/// RCA adjacency: |relationality| after the configured edge-removal step.
pub fn rca_adjacency(responses: &ResponseMatrix, config: &MethodConfig) -> Result<AdjacencyMatrix> {
    require_respondents(responses)?;
    let numeric = numeric_map(responses);
    let q = numeric.n_cols();
    if q < 2 {
        return Err(Error::InsufficientQuestions { needed: 2, got: q });
    }
    let diffs = differences(&numeric);
    let null = match config.rca_edge_removal {
        EdgeRemoval::Off => None,
        EdgeRemoval::Bootstrap {
            iterations,
            alpha,
            seed,
        } => Some((bootstrap_null(&numeric, iterations, seed), alpha)),
    };
    Ok(AdjacencyMatrix::from_pairs(
        responses.n_respondents(),
        Method::Rca,
        |i, j| {
            let r = mean_term(&diffs[i], &diffs[j], relationality_term);
            match &null {
                Some((null, alpha)) if two_sided_p(null, r) >= *alpha => 0.0,
                _ => r.abs(),
            }
        },
    ))
}

/// RRCA adjacency: the squared binarized relationality, without edge removal.
pub fn rrca_adjacency(
    responses: &ResponseMatrix,
    config: &MethodConfig,
) -> Result<AdjacencyMatrix> {
    require_respondents(responses)?;
    let numeric = numeric_map(responses);
    let q = numeric.n_cols();
    if q < 2 {
        return Err(Error::InsufficientQuestions { needed: 2, got: q });
    }
    let diffs = differences(&numeric);
    let term = if config.rrca_second_difference {
        second_difference_term
    } else {
        binarized_term
    };
    Ok(AdjacencyMatrix::from_pairs(
        responses.n_respondents(),
        Method::Rrca,
        |i, j| {
            let s = mean_term(&diffs[i], &diffs[j], term);
            s * s
        },
    ))
}
