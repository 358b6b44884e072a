//! Gaussian copula sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use super::correlation::CorrelationMatrix;
use super::normal::phi;

/// `n` draws from the Gaussian copula with correlation `corr`: rows are
/// `Φ(L z)` for standard normal `z`, so every marginal is uniform on [0, 1].
pub fn sample_copula<R: Rng + ?Sized>(corr: &CorrelationMatrix, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let q = corr.dim();
    let mut z = vec![0.0; q];
    let mut x = vec![0.0; q];
    (0..n)
        .map(|_| {
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            corr.correlate(&z, &mut x);
            x.iter().map(|&v| phi(v)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn comonotone_coordinates_coincide() {
        let corr = CorrelationMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for row in sample_copula(&corr, 500, &mut rng) {
            assert_eq!(row[0], row[1]);
            assert!((0.0..=1.0).contains(&row[0]));
        }
    }

    #[test]
    fn marginal_means() {
        let corr = CorrelationMatrix::identity(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = sample_copula(&corr, 20_000, &mut rng);
        for q in 0..3 {
            let m = rows.iter().map(|r| r[q]).sum::<f64>() / rows.len() as f64;
            assert!((m - 0.5).abs() < 0.01);
        }
    }
}
