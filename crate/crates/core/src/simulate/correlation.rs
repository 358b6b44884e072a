//! Correlation matrices: validation, factorization, and random generation
//! through partial correlations on a C-vine.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivots below this are treated as exact zeros by the factorization.
const PIVOT_TOLERANCE: f64 = 1e-12;
const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;
const JITTER: f64 = 1e-8;
const MAX_REDRAWS: usize = 1000;

/// Symmetric, unit-diagonal, positive semidefinite matrix with entries in
/// `[-1, 1]`. Semidefinite matrices are admitted because fixed designs may
/// contain perfectly correlated questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CorrelationMatrix {
    q: usize,
    entries: Vec<f64>,
    /// Lower-triangular factor, row-major.
    factor: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let q = rows.len();
        if q == 0 || rows.iter().any(|r| r.len() != q) {
            return Err(Error::Dimension("correlation matrix must be square and non-empty".into()));
        }
        let entries = rows.concat();
        for i in 0..q {
            if entries[i * q + i] != 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {i} is {}, not 1",
                    entries[i * q + i]
                )));
            }
            for j in 0..q {
                let v = entries[i * q + j];
                if !v.is_finite() || v.abs() > 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i},{j}) = {v} is outside [-1, 1]"
                    )));
                }
                if v != entries[j * q + i] {
                    return Err(Error::InvalidArgument(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let factor = semidefinite_cholesky(q, &entries)?;
        Ok(CorrelationMatrix { q, entries, factor })
    }

    pub fn identity(q: usize) -> Self {
        Self::new(
            (0..q)
                .map(|i| (0..q).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
        .expect("identity is a correlation matrix")
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.q + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.q).map(|r| r.to_vec()).collect()
    }

    /// `L` with `L Lᵀ` equal to the matrix.
    pub fn factor(&self, i: usize, j: usize) -> f64 {
        self.factor[i * self.q + j]
    }

    /// `L z` for a standard normal vector `z`.
    pub fn correlate(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.factor[i * self.q..i * self.q + i + 1];
            *o = row.iter().zip(z).map(|(l, z)| l * z).sum();
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(self.q, &self.entries)
    }
}

impl TryFrom<Vec<Vec<f64>>> for CorrelationMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<CorrelationMatrix> for Vec<Vec<f64>> {
    fn from(m: CorrelationMatrix) -> Self {
        m.rows()
    }
}

/// Cholesky factorization that tolerates zero pivots by emitting a zero
/// column, as long as the remaining entries are consistent.
fn semidefinite_cholesky(q: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0; q * q];
    for j in 0..q {
        let s: f64 = (0..j).map(|k| l[j * q + k] * l[j * q + k]).sum();
        let pivot = a[j * q + j] - s;
        if pivot < -RECONSTRUCTION_TOLERANCE {
            return Err(Error::Numerical(format!(
                "correlation matrix is not positive semidefinite (pivot {pivot} at {j})"
            )));
        }
        let d = if pivot > PIVOT_TOLERANCE { pivot.sqrt() } else { 0.0 };
        l[j * q + j] = d;
        for i in (j + 1)..q {
            let s: f64 = (0..j).map(|k| l[i * q + k] * l[j * q + k]).sum();
            let r = a[i * q + j] - s;
            if d > 0.0 {
                l[i * q + j] = r / d;
            } else if r.abs() > RECONSTRUCTION_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "correlation matrix is not positive semidefinite (column {j})"
                )));
            }
        }
    }
    Ok(l)
}

fn min_eigenvalue(q: usize, entries: &[f64]) -> f64 {
    SymmetricEigen::new(DMatrix::from_row_slice(q, q, entries))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Draws `Q(Q−1)/2` partial correlations from the three-component beta
/// mixture centered at −1, 0 and 1.
pub fn gen_partial_correlations<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<Vec<f64>> {
    if q < 2 {
        return Err(Error::InsufficientQuestions { needed: 2, got: q });
    }
    let components = [
        Beta::new(1.0, 40.0).expect("valid beta"),
        Beta::new(40.0, 40.0).expect("valid beta"),
        Beta::new(40.0, 1.0).expect("valid beta"),
    ];
    Ok((0..q * (q - 1) / 2)
        .map(|_| {
            let u: f64 = rng.random();
            let c = if u < 0.3 {
                0
            } else if u < 0.7 {
                1
            } else {
                2
            };
            loop {
                let r: f64 = 2.0 * components[c].sample(rng) - 1.0;
                if r.abs() < 1.0 {
                    break r;
                }
            }
        })
        .collect())
}

/// Maps partial correlations, ordered `(0,1), (0,2), …, (0,Q−1), (1,2), …`,
/// to a correlation matrix via the C-vine recursion.
///
/// Results whose smallest eigenvalue lies in (−1e−10, 1e−8] get a small
/// diagonal jitter and are rescaled to unit diagonal; anything more negative
/// is an error.
pub fn partials_to_correlation(partials: &[f64], q: usize) -> Result<CorrelationMatrix> {
    if q < 1 || partials.len() != q * (q - 1) / 2 {
        return Err(Error::Dimension(format!(
            "{} partial correlations for Q = {q}",
            partials.len()
        )));
    }
    if let Some(p) = partials.iter().find(|p| !(p.abs() < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "partial correlation {p} is outside (-1, 1)"
        )));
    }
    let mut p = vec![0.0; q * q];
    let mut idx = 0;
    for k in 0..q {
        for i in (k + 1)..q {
            p[k * q + i] = partials[idx];
            idx += 1;
        }
    }
    let mut r = vec![0.0; q * q];
    for i in 0..q {
        r[i * q + i] = 1.0;
    }
    for k in 0..q {
        for i in (k + 1)..q {
            let mut v = p[k * q + i];
            for l in (0..k).rev() {
                let (pli, plk) = (p[l * q + i], p[l * q + k]);
                v = v * ((1.0 - pli * pli) * (1.0 - plk * plk)).sqrt() + pli * plk;
            }
            let v = v.clamp(-1.0, 1.0);
            r[k * q + i] = v;
            r[i * q + k] = v;
        }
    }

    let lambda = min_eigenvalue(q, &r);
    if lambda <= -1e-10 {
        return Err(Error::Numerical(format!(
            "vine construction produced a matrix with eigenvalue {lambda}"
        )));
    }
    if lambda <= JITTER {
        let scale = 1.0 + JITTER;
        for i in 0..q {
            for j in 0..q {
                if i != j {
                    r[i * q + j] /= scale;
                }
            }
        }
    }
    CorrelationMatrix::new(r.chunks(q).map(|c| c.to_vec()).collect())
}

/// Random positive definite correlation matrix, redrawing on numerical failure.
pub fn random_correlation<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<CorrelationMatrix> {
    let mut last = None;
    for _ in 0..MAX_REDRAWS {
        let partials = gen_partial_correlations(q, rng)?;
        match partials_to_correlation(&partials, q) {
            Ok(m) => return Ok(m),
            Err(e @ Error::Numerical(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Numerical("no correlation matrix drawn".into())))
}
