//! Correlational adjacency (CCA): absolute Pearson correlation between
//! respondents' numeric answer vectors, with insignificant values zeroed.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::survey::{numeric_map, ResponseMatrix};

use super::{require_respondents, AdjacencyMatrix, ConstantPolicy, Method, MethodConfig};

fn is_constant(row: &[f64]) -> bool {
    row.iter().all(|&x| x == row[0])
}

fn centered(row: &[f64]) -> (Vec<f64>, f64) {
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    let c: Vec<f64> = row.iter().map(|x| x - mean).collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    (c, norm)
}

fn correlation_of_centered(a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Pearson correlation of two equally long rows; `None` if either is constant.
pub fn pearson(u: &[f64], v: &[f64]) -> Option<f64> {
    if u.len() != v.len() || u.len() < 2 || is_constant(u) || is_constant(v) {
        return None;
    }
    let (cu, nu) = centered(u);
    let (cv, nv) = centered(v);
    Some(correlation_of_centered(&cu, nu, &cv, nv))
}

/// Smallest |r| that is significant in a two-sided t-test with `q` paired
/// observations. `None` when there are too few observations to test.
fn critical_correlation(q: usize, alpha: f64) -> Result<Option<f64>> {
    if q < 3 {
        return Ok(None);
    }
    let df = (q - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::Numerical(format!("student t: {e}")))?
        .inverse_cdf(1.0 - alpha / 2.0);
    Ok(Some(t / (df + t * t).sqrt()))
}

/// CCA adjacency.
///
/// Two constant respondents get adjacency 1; a constant and a non-constant
/// respondent get 0 under [`ConstantPolicy::ZeroEdge`]. Under
/// [`ConstantPolicy::DropRespondent`] constant respondents have no edges and
/// are listed in [`AdjacencyMatrix::excluded`].
pub fn cca_adjacency(responses: &ResponseMatrix, config: &MethodConfig) -> Result<AdjacencyMatrix> {
    require_respondents(responses)?;
    let numeric = numeric_map(responses);
    let n = numeric.n_rows();
    let q = numeric.n_cols();
    if q < 2 {
        return Err(Error::InsufficientQuestions { needed: 2, got: q });
    }
    let critical = critical_correlation(q, config.cca_significance_alpha)?;
    let constant: Vec<bool> = (0..n).map(|i| is_constant(numeric.row(i))).collect();
    let rows: Vec<(Vec<f64>, f64)> = (0..n).map(|i| centered(numeric.row(i))).collect();
    let drop = config.cca_constant_policy == ConstantPolicy::DropRespondent;

    let mut adj = AdjacencyMatrix::from_pairs(n, Method::Cca, |i, j| {
        match (constant[i], constant[j]) {
            (true, true) => return if drop { 0.0 } else { 1.0 },
            (true, false) | (false, true) => return 0.0,
            (false, false) => {}
        }
        let r = correlation_of_centered(&rows[i].0, rows[i].1, &rows[j].0, rows[j].1).abs();
        match critical {
            Some(c) if r < 1.0 && r <= c => 0.0,
            _ => r,
        }
    });
    if drop {
        adj.set_excluded((0..n).filter(|&i| constant[i]).collect());
    }
    Ok(adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjacency::EdgeRemoval;
    use crate::survey::{AnswerSpace, Question, Survey};

    fn survey(q: usize, h: usize) -> Survey {
        Survey::new(
            (0..q)
                .map(|i| Question {
                    id: format!("q{i}"),
                    answers: AnswerSpace::new((0..h).map(|o| format!("o{o}")).collect(), None)
                        .unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn motivating_example() {
        let m = ResponseMatrix::with_default_ids(
            survey(3, 7),
            vec![vec![4, 4, 4], vec![4, 4, 2], vec![4, 4, 6]],
        )
        .unwrap();
        let adj = cca_adjacency(&m, &MethodConfig::default()).unwrap();
        assert_eq!(adj.get(0, 1), 0.0);
        assert_eq!(adj.get(0, 2), 0.0);
        assert!((adj.get(1, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_correlation_is_one() {
        let u = [0.0, 0.25, 1.0, 0.5];
        assert!((pearson(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[0.5, 0.5, 0.5], &u[..3]), None);
    }

    #[test]
    fn constant_policies() {
        let rows = vec![vec![2, 2, 2, 2], vec![1, 1, 1, 1], vec![0, 1, 2, 3], vec![0, 1, 2, 4]];
        let m = ResponseMatrix::with_default_ids(survey(4, 5), rows).unwrap();
        let adj = cca_adjacency(&m, &MethodConfig::default()).unwrap();
        assert_eq!(adj.get(0, 1), 1.0);
        assert_eq!(adj.get(0, 2), 0.0);
        assert!(adj.excluded().is_empty());

        let cfg = MethodConfig {
            cca_constant_policy: ConstantPolicy::DropRespondent,
            rca_edge_removal: EdgeRemoval::Off,
            ..MethodConfig::default()
        };
        let adj = cca_adjacency(&m, &cfg).unwrap();
        assert_eq!(adj.get(0, 1), 0.0);
        assert_eq!(adj.excluded(), &[0, 1]);
    }

    #[test]
    fn critical_value_matches_t_table() {
        // t(0.975, 1) = 12.706; r = t / sqrt(1 + t^2).
        let c = critical_correlation(3, 0.05).unwrap().unwrap();
        assert!((c - 0.996917).abs() < 1e-5);
        // t(0.975, 8) = 2.306; r = 0.6319.
        let c = critical_correlation(10, 0.05).unwrap().unwrap();
        assert!((c - 0.6319).abs() < 1e-3);
        assert_eq!(critical_correlation(2, 0.05).unwrap(), None);
    }

    #[test]
    fn weak_correlations_are_removed() {
        let rows = vec![
            vec![0, 1, 2, 3, 4, 0, 1, 2, 3, 4],
            vec![4, 0, 3, 1, 2, 2, 4, 0, 1, 3],
            vec![0, 1, 2, 3, 4, 0, 1, 2, 3, 3],
        ];
        let m = ResponseMatrix::with_default_ids(survey(10, 5), rows).unwrap();
        let num = numeric_map(&m);
        let r01 = pearson(num.row(0), num.row(1)).unwrap().abs();
        assert!(r01 < 0.63);
        let adj = cca_adjacency(&m, &MethodConfig::default()).unwrap();
        assert_eq!(adj.get(0, 1), 0.0);
        assert!(adj.get(0, 2) > 0.9);
    }
}
