//! Respondent adjacency matrices for the four clustering methods.

mod correlational;
mod polarity;
mod relational;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::ResponseMatrix;

pub use correlational::{cca_adjacency, pearson};
pub use polarity::{bca_adjacency, movement, pairwise_polarity, polarity, Movement, PairwisePolarity};
pub use relational::{rca_adjacency, relationality, rrca_adjacency, rrca_similarity};

/// The adjacency construction a matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bca,
    Rca,
    Cca,
    Rrca,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rca, Method::Cca, Method::Rrca, Method::Bca];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bca => "bca",
            Method::Rca => "rca",
            Method::Cca => "cca",
            Method::Rrca => "rrca",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bca" => Ok(Method::Bca),
            "rca" => Ok(Method::Rca),
            "cca" => Ok(Method::Cca),
            "rrca" => Ok(Method::Rrca),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// RCA edge-removal step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EdgeRemoval {
    Off,
    /// Zero relationalities that are not significant against a null
    /// distribution built from respondents resampled within each question.
    Bootstrap {
        iterations: usize,
        alpha: f64,
        seed: u64,
    },
}

/// How CCA treats respondents who give the same numeric answer everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantPolicy {
    /// Constant respondents get zero adjacency to non-constant ones and
    /// adjacency 1 among themselves.
    ZeroEdge,
    /// Constant respondents are excluded from the analysis.
    DropRespondent,
}

/// Per-method knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub rca_edge_removal: EdgeRemoval,
    pub cca_significance_alpha: f64,
    pub cca_constant_policy: ConstantPolicy,
    pub rrca_second_difference: bool,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            rca_edge_removal: EdgeRemoval::Bootstrap {
                iterations: 1000,
                alpha: 0.05,
                seed: 0,
            },
            cca_significance_alpha: 0.05,
            cca_constant_policy: ConstantPolicy::ZeroEdge,
            rrca_second_difference: false,
        }
    }
}

impl MethodConfig {
    pub fn validate(&self) -> Result<()> {
        if let EdgeRemoval::Bootstrap {
            iterations, alpha, ..
        } = self.rca_edge_removal
        {
            if iterations < 1 {
                return Err(Error::Config("bootstrap iterations must be at least 1".into()));
            }
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Config(format!("bootstrap alpha {alpha} not in (0,1)")));
            }
        }
        let a = self.cca_significance_alpha;
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Config(format!("cca alpha {a} not in (0,1)")));
        }
        Ok(())
    }

    /// Configuration with every edge-removal step switched off where possible.
    pub fn without_edge_removal() -> Self {
        MethodConfig {
            rca_edge_removal: EdgeRemoval::Off,
            ..MethodConfig::default()
        }
    }

    /// Same configuration with the RCA bootstrap reseeded.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let EdgeRemoval::Bootstrap { seed: s, .. } = &mut self.rca_edge_removal {
            *s = seed;
        }
        self
    }
}

/// Symmetric nonnegative N×N respondent similarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    values: Vec<f64>,
    method: Option<Method>,
    excluded: Vec<usize>,
}

impl AdjacencyMatrix {
    /// Validates a dense row-major matrix supplied from outside the library.
    ///
    /// The diagonal is ignored and stored as zero.
    pub fn from_dense(n: usize, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidAdjacency(format!(
                "expected {} entries, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            values[i * n + i] = 0.0;
            for j in 0..n {
                let a = values[i * n + j];
                if !a.is_finite() {
                    return Err(Error::InvalidAdjacency(format!("entry ({i},{j}) is not finite")));
                }
                if a < 0.0 {
                    return Err(Error::InvalidAdjacency(format!("entry ({i},{j}) is negative")));
                }
                if j > i && a != values[j * n + i] {
                    return Err(Error::InvalidAdjacency(format!(
                        "not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(AdjacencyMatrix {
            n,
            values,
            method: None,
            excluded: Vec::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidAdjacency("matrix is not square".into()));
        }
        Self::from_dense(n, rows.concat())
    }

    /// Fills the upper triangle with `kernel(i, j)` in parallel and mirrors it.
    pub(crate) fn from_pairs<F>(n: usize, method: Method, kernel: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, cell) in row.iter_mut().enumerate().skip(i + 1) {
                *cell = kernel(i, j);
            }
        });
        for i in 0..n {
            for j in (i + 1)..n {
                values[j * n + i] = values[i * n + j];
            }
        }
        AdjacencyMatrix {
            n,
            values,
            method: Some(method),
            excluded: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn method(&self) -> Option<Method> {
        self.method
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Respondents removed from the analysis by the adjacency step.
    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub(crate) fn set_excluded(&mut self, excluded: Vec<usize>) {
        self.excluded = excluded;
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Multiplies every entry by `c > 0`.
    pub fn scaled(&self, c: f64) -> AdjacencyMatrix {
        AdjacencyMatrix {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Re-orders respondents so that new index `k` is old index `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> AdjacencyMatrix {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                values[a * n + b] = self.values[i * n + j];
            }
        }
        AdjacencyMatrix {
            n,
            values,
            method: self.method,
            excluded: Vec::new(),
        }
    }

    /// Dense CSV with a header of respondent ids and one row per respondent.
    pub fn to_csv(&self, ids: &[String]) -> Result<String> {
        if ids.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} ids for a {}×{} matrix",
                ids.len(),
                self.n,
                self.n
            )));
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(ids.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("adjacency csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 csv"))
    }
}

pub(crate) fn require_respondents(responses: &ResponseMatrix) -> Result<()> {
    let n = responses.n_respondents();
    if n < 2 {
        return Err(Error::InsufficientRespondents { needed: 2, got: n });
    }
    Ok(())
}

/// Computes the adjacency matrix of `method`.
pub fn adjacency(
    method: Method,
    responses: &ResponseMatrix,
    config: &MethodConfig,
) -> Result<AdjacencyMatrix> {
    config.validate()?;
    match method {
        Method::Bca => bca_adjacency(responses),
        Method::Rca => rca_adjacency(responses, config),
        Method::Cca => cca_adjacency(responses, config),
        Method::Rrca => rrca_adjacency(responses, config),
    }
}

/// Index pairs `(k, l)` with `k < l`, in row-major order.
pub(crate) fn question_pairs(q: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(q * q.saturating_sub(1) / 2);
    for k in 0..q {
        for l in (k + 1)..q {
            pairs.push((k, l));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn external_matrix_validation() {
        assert!(AdjacencyMatrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]).is_err());
        assert!(AdjacencyMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(AdjacencyMatrix::from_rows(&[vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).is_err());
        let a = AdjacencyMatrix::from_rows(&[vec![5.0, 1.0], vec![1.0, 5.0]]).unwrap();
        assert_eq!(a.get(0, 0), 0.0);
        assert_eq!(a.degree(0), 1.0);
    }

    #[test]
    fn csv_export_has_header_of_ids() {
        let a = AdjacencyMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let csv = a.to_csv(&["x".into(), "y".into()]).unwrap();
        assert_eq!(csv, ",x,y\nx,0,0.5\ny,0.5,0\n");
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("xyz".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(MethodConfig::default().validate().is_ok());
        let mut c = MethodConfig::default();
        c.cca_significance_alpha = 1.0;
        assert!(c.validate().is_err());
        let c = MethodConfig {
            rca_edge_removal: EdgeRemoval::Bootstrap {
                iterations: 0,
                alpha: 0.05,
                seed: 1,
            },
            ..MethodConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
