//! Leading eigenpair of a symmetric operator by restarted Lanczos with full
//! reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};

/// Upper bound on operator applications before giving up.
pub(crate) const MAX_MATVECS: usize = 10_000;
const MAX_BASIS: usize = 150;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed pseudo-random vector, so that runs are reproducible.
fn probe(n: usize, salt: u64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let h = splitmix(salt.wrapping_mul(0x1000_0000_01B3) ^ i as u64);
            (h >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(w, v);
            w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Algebraically largest eigenvalue and a unit eigenvector of the `n×n`
/// symmetric operator `apply`, or `None` if the residual does not drop below
/// `tol · max(1, |λ|)` within [`MAX_MATVECS`] applications.
pub(crate) fn leading_eigenpair<F>(n: usize, tol: f64, mut apply: F) -> Option<(f64, Vec<f64>)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if n == 0 {
        return None;
    }
    let basis_cap = n.min(MAX_BASIS);
    let mut start = probe(n, 0);
    normalize(&mut start);
    let mut matvecs = 0;
    let mut salt = 1;
    let mut w = vec![0.0; n];

    while matvecs < MAX_MATVECS {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut exhausted = false;

        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            if basis.len() == basis_cap || matvecs >= MAX_MATVECS {
                beta.push(b);
                break;
            }
            let scale = alpha.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if b > 1e-12 * scale {
                w.iter_mut().for_each(|x| *x /= b);
                beta.push(b);
                basis.push(w.clone());
                continue;
            }
            // Invariant subspace found; continue with a fresh direction.
            let mut fresh = probe(n, salt);
            salt += 1;
            orthogonalize(&mut fresh, &basis);
            if normalize(&mut fresh) < 1e-8 {
                beta.push(0.0);
                exhausted = true;
                break;
            }
            beta.push(0.0);
            basis.push(fresh);
        }

        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (k, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        let y = eig.eigenvectors.column(k);
        let mut x = vec![0.0; n];
        for (v, &c) in basis.iter().zip(y.iter()) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += c * vi);
        }
        normalize(&mut x);
        let residual = (beta[m - 1] * y[m - 1]).abs();
        if exhausted || m == n || residual <= tol * theta.abs().max(1.0) {
            return Some((theta, x));
        }
        start = x;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(a: &[Vec<f64>]) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for (yi, row) in y.iter_mut().zip(a) {
                *yi = dot(row, x);
            }
        }
    }

    #[test]
    fn diagonal_matrix() {
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, -5.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ];
        let (l, x) = leading_eigenpair(3, 1e-12, dense(&a)).unwrap();
        assert!((l - 3.0).abs() < 1e-12);
        assert!((x[2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_solver_on_large_matrix() {
        let n = 400;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let (p, q) = (i.min(j) as u64, i.max(j) as u64);
                        (splitmix(p * 1_000_003 + q) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                    })
                    .collect()
            })
            .collect();
        let (l, x) = leading_eigenpair(n, 1e-10, dense(&a)).unwrap();
        let full = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| a[i][j]));
        let expect = full.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        assert!((l - expect).abs() < 1e-8, "{l} vs {expect}");
        let mut ax = vec![0.0; n];
        dense(&a)(&x, &mut ax);
        let r: f64 = ax.iter().zip(&x).map(|(u, v)| (u - l * v).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-7);
    }

    #[test]
    fn handles_invariant_start() {
        // Rank-one operator: the Krylov space collapses after one step.
        let n = 5;
        let u = [1.0, 2.0, 0.0, -1.0, 0.5];
        let a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| -u[i] * u[j]).collect()).collect();
        let (l, _) = leading_eigenpair(n, 1e-12, dense(&a)).unwrap();
        assert!(l.abs() < 1e-10);
    }
}
