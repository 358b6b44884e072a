//! Leading-eigenvector modularity bisection with vertex-move refinement.

use crate::adjacency::AdjacencyMatrix;
use crate::error::Result;

use super::eigen::leading_eigenpair;
use super::{prepare, Partition, PartitionerConfig};

/// A group is indivisible when its leading eigenvalue is at most this value
/// (on the adjacency rescaled to unit mean degree).
const EIGENVALUE_TOLERANCE: f64 = 1e-10;
const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-10;
const MAX_REFINEMENT_SWEEPS: usize = 1000;

/// Generalized modularity matrix of a vertex group, applied implicitly.
struct GroupMatrix {
    n: usize,
    /// Dense adjacency restricted to the group.
    sub: Vec<f64>,
    k: Vec<f64>,
    /// Σ_{j∈g} B_ij, subtracted on the diagonal.
    row_sums: Vec<f64>,
    two_m: f64,
}

impl GroupMatrix {
    fn new(adj: &[f64], n_all: usize, degrees: &[f64], two_m: f64, group: &[usize]) -> Self {
        let n = group.len();
        let mut sub = Vec::with_capacity(n * n);
        for &i in group {
            let row = &adj[i * n_all..(i + 1) * n_all];
            sub.extend(group.iter().map(|&j| row[j]));
        }
        let k: Vec<f64> = group.iter().map(|&i| degrees[i]).collect();
        let k_total: f64 = k.iter().sum();
        let row_sums = (0..n)
            .map(|a| sub[a * n..(a + 1) * n].iter().sum::<f64>() - k[a] * k_total / two_m)
            .collect();
        GroupMatrix {
            n,
            sub,
            k,
            row_sums,
            two_m,
        }
    }

    fn entry(&self, a: usize, b: usize) -> f64 {
        let v = self.sub[a * self.n + b] - self.k[a] * self.k[b] / self.two_m;
        if a == b {
            v - self.row_sums[a]
        } else {
            v
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let kx: f64 = self.k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() / self.two_m;
        for (a, ya) in y.iter_mut().enumerate() {
            let row = &self.sub[a * self.n..(a + 1) * self.n];
            let ax: f64 = row.iter().zip(x).map(|(r, x)| r * x).sum();
            *ya = ax - self.k[a] * kx - self.row_sums[a] * x[a];
        }
    }
}

/// Newman's method: repeated bisection along the sign pattern of the leading
/// eigenvector of the generalized modularity matrix, refined by single-vertex
/// moves. Vertices without edges become singleton clusters.
///
/// The adjacency is rescaled to unit mean degree first, so the result does not
/// depend on the overall scale of the weights.
pub fn newman_partition(adj: &AdjacencyMatrix, config: &PartitionerConfig) -> Result<Partition> {
    let raw_degrees = prepare(adj, config)?;
    let n = adj.n();
    let scale = n as f64 / raw_degrees.iter().sum::<f64>();
    let values: Vec<f64> = adj.values().iter().map(|a| a * scale).collect();
    let degrees: Vec<f64> = values.chunks(n).map(|row| row.iter().sum()).collect();
    let two_m: f64 = degrees.iter().sum();

    let mut key = vec![usize::MAX; n];
    let mut next_key = 0;
    let connected: Vec<usize> = (0..n).filter(|&i| degrees[i] > 0.0).collect();
    for i in (0..n).filter(|&i| degrees[i] == 0.0) {
        key[i] = next_key;
        next_key += 1;
    }

    let mut stack = vec![connected];
    while let Some(group) = stack.pop() {
        match bisect(&values, n, &degrees, two_m, &group, config) {
            Some((left, right)) => {
                stack.push(right);
                stack.push(left);
            }
            None => {
                for &i in &group {
                    key[i] = next_key;
                }
                next_key += 1;
            }
        }
    }
    Partition::canonical(&key)
}

fn bisect(
    adj: &[f64],
    n_all: usize,
    degrees: &[f64],
    two_m: f64,
    group: &[usize],
    config: &PartitionerConfig,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if group.len() < 2 {
        return None;
    }
    let b = GroupMatrix::new(adj, n_all, degrees, two_m, group);
    let (lambda, mut x) = leading_eigenpair(b.n, EIGEN_RESIDUAL_TOLERANCE, |x, y| b.apply(x, y))?;
    if lambda <= EIGENVALUE_TOLERANCE {
        return None;
    }
    // Orient the eigenvector so its largest component is positive, then treat
    // components indistinguishable from zero as positive.
    let pivot = (0..b.n).fold(0, |p, a| if x[a].abs() > x[p].abs() { a } else { p });
    if x[pivot] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let floor = -1e-10 * x[pivot].abs();
    let mut s: Vec<f64> = x.iter().map(|&v| if v >= floor { 1.0 } else { -1.0 }).collect();

    // Gains are in units of sᵀBs; modularity is sᵀBs / 4m.
    let unit_tolerance = config.modularity_tolerance * 2.0 * two_m;
    if config.newman_refinement {
        refine(&b, &mut s, unit_tolerance);
    }

    let mut w = vec![0.0; b.n];
    b.apply(&s, &mut w);
    let gain: f64 = s.iter().zip(&w).map(|(s, w)| s * w).sum();
    if gain <= unit_tolerance {
        return None;
    }
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (&i, &si) in group.iter().zip(&s) {
        if si > 0.0 {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    if left.is_empty() || right.is_empty() {
        return None;
    }
    Some((left, right))
}

fn flip(b: &GroupMatrix, s: &mut [f64], w: &mut [f64], a: usize) {
    s[a] = -s[a];
    let two_s = 2.0 * s[a];
    for (c, wc) in w.iter_mut().enumerate() {
        *wc += two_s * b.entry(c, a);
    }
}

/// Kernighan–Lin style refinement: each sweep moves every vertex once,
/// greedily by best gain, then keeps the best prefix of moves.
fn refine(b: &GroupMatrix, s: &mut [f64], tolerance: f64) {
    let n = b.n;
    let mut w = vec![0.0; n];
    b.apply(s, &mut w);
    let diag: Vec<f64> = (0..n).map(|a| b.entry(a, a)).collect();
    // Gains closer than this are treated as equal and resolved by index.
    let tie = 1e-10 * diag.iter().fold(1.0f64, |m, d| m.max(d.abs()));

    for _ in 0..MAX_REFINEMENT_SWEEPS {
        let mut moved = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let (mut total, mut best, mut best_len) = (0.0, 0.0, 0);
        for step in 0..n {
            let mut pick: Option<(usize, f64)> = None;
            for a in (0..n).filter(|&a| !moved[a]) {
                let delta = 4.0 * (diag[a] - s[a] * w[a]);
                if pick.is_none_or(|(_, d)| delta > d + tie) {
                    pick = Some((a, delta));
                }
            }
            let (a, delta) = pick.expect("unmoved vertex");
            moved[a] = true;
            order.push(a);
            flip(b, s, &mut w, a);
            total += delta;
            if total > best + tolerance {
                best = total;
                best_len = step + 1;
            }
        }
        for &a in order[best_len..].iter().rev() {
            flip(b, s, &mut w, a);
        }
        if best_len == 0 {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::modularity;
    use crate::partition::tests::blocks;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_adjacency(n: usize, seed: u64) -> AdjacencyMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = rng.random();
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        AdjacencyMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn separates_blocks() {
        let adj = blocks(&[10, 10], 1.0, 0.0);
        let p = newman_partition(&adj, &PartitionerConfig::default()).unwrap();
        let expect = Partition::from_labels([vec![0; 10], vec![1; 10]].concat()).unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn separates_noisy_blocks() {
        let adj = blocks(&[12, 7, 9], 0.9, 0.2);
        let p = newman_partition(&adj, &PartitionerConfig::default()).unwrap();
        assert_eq!(p.sizes(), vec![12, 7, 9]);
    }

    #[test]
    fn complete_graph_stays_whole() {
        let adj = blocks(&[15], 1.0, 0.0);
        let p = newman_partition(&adj, &PartitionerConfig::default()).unwrap();
        assert_eq!(p.n_clusters(), 1);
    }

    #[test]
    fn isolated_vertices_are_singletons() {
        let mut rows = vec![vec![0.0; 6]; 6];
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    rows[i][j] = 1.0;
                }
            }
        }
        let adj = AdjacencyMatrix::from_rows(&rows).unwrap();
        let p = newman_partition(&adj, &PartitionerConfig::default()).unwrap();
        assert_eq!(p.labels(), &[0, 0, 0, 0, 1, 2]);
    }

    #[test]
    fn motivating_matrix_is_not_split() {
        // Every split of the three respondents has negative modularity, and
        // the leading eigenvalue of the modularity matrix is 0.
        let t = 1.0 / 3.0;
        let adj =
            AdjacencyMatrix::from_rows(&[vec![0.0, t, 1.0], vec![t, 0.0, t], vec![1.0, t, 0.0]])
                .unwrap();
        let split = Partition::from_labels(vec![0, 1, 0]).unwrap();
        assert!((modularity(&adj, &split).unwrap() + 0.08).abs() < 1e-12);
        let p = newman_partition(&adj, &PartitionerConfig::default()).unwrap();
        assert_eq!(p.n_clusters(), 1);
    }

    fn both() -> [PartitionerConfig; 2] {
        [PartitionerConfig::default(), PartitionerConfig::newman_refined()]
    }

    #[test]
    fn rescaling_gives_identical_labels() {
        let adj = random_adjacency(40, 11);
        for cfg in both() {
            let base = newman_partition(&adj, &cfg).unwrap();
            for c in [0.37, 1e-3, 1e3] {
                let p = newman_partition(&adj.scaled(c), &cfg).unwrap();
                assert_eq!(p, base, "scale {c}");
            }
        }
    }

    #[test]
    fn improves_on_single_cluster() {
        for seed in 0..5 {
            let adj = random_adjacency(30, seed);
            for cfg in both() {
                let p = newman_partition(&adj, &cfg).unwrap();
                assert!(modularity(&adj, &p).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn refinement_keeps_clean_splits() {
        let adj = blocks(&[12, 7, 9], 0.9, 0.2);
        let p = newman_partition(&adj, &PartitionerConfig::newman_refined()).unwrap();
        assert_eq!(p.sizes(), vec![12, 7, 9]);
    }

    #[test]
    fn rejects_empty_graph() {
        let adj = AdjacencyMatrix::from_dense(3, vec![0.0; 9]).unwrap();
        assert!(newman_partition(&adj, &PartitionerConfig::default()).is_err());
    }
}
