//! Louvain method: greedy local moves followed by community aggregation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adjacency::AdjacencyMatrix;
use crate::error::Result;

use super::{prepare, Partition, PartitionerConfig};

/// Weighted graph in adjacency-list form. `self_loops[i]` holds the total
/// weight of edges folded into node `i`, counted in both directions.
struct Graph {
    neighbors: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
    two_m: f64,
}

impl Graph {
    fn from_adjacency(adj: &AdjacencyMatrix) -> Self {
        let n = adj.n();
        let neighbors: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                adj.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, &w)| j != i && w > 0.0)
                    .map(|(j, &w)| (j, w))
                    .collect()
            })
            .collect();
        Self::build(neighbors, vec![0.0; n])
    }

    fn build(neighbors: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let degrees: Vec<f64> = neighbors
            .iter()
            .zip(&self_loops)
            .map(|(nb, s)| s + nb.iter().map(|(_, w)| w).sum::<f64>())
            .collect();
        let two_m = degrees.iter().sum();
        Graph {
            neighbors,
            self_loops,
            degrees,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.degrees.len()
    }

    /// Collapses each community into a single node.
    fn aggregate(&self, community: &[usize], n_comm: usize) -> Graph {
        let mut self_loops = vec![0.0; n_comm];
        let mut maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n_comm];
        for i in 0..self.len() {
            let ci = community[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.neighbors[i] {
                let cj = community[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    *maps[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let neighbors = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        Self::build(neighbors, self_loops)
    }
}

/// One level of local moves. Returns the community of every node, numbered
/// by first appearance, and whether any node moved.
fn local_moves(g: &Graph, order: &[usize], tolerance: f64) -> (Vec<usize>, usize, bool) {
    let n = g.len();
    let mut community: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = g.degrees.clone();
    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    // Gains are in weight units; modularity changes by 2·gain / 2m.
    let unit_tolerance = tolerance * g.two_m / 2.0;
    let mut moved_any = false;

    loop {
        let mut moved = false;
        for &i in order {
            let ki = g.degrees[i];
            let old = community[i];
            for &(j, w) in &g.neighbors[i] {
                let c = community[j];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += w;
            }
            total[old] -= ki;
            let gain = |c: usize, link: f64| link - total[c] * ki / g.two_m;
            let stay = gain(old, links[old]);
            let mut best: Option<(usize, f64)> = None;
            touched.sort_unstable();
            for &c in &touched {
                let gc = gain(c, links[c]);
                if best.is_none_or(|(_, b)| gc > b) {
                    best = Some((c, gc));
                }
            }
            let target = match best {
                Some((c, gc)) if c != old && gc > stay + unit_tolerance => c,
                _ => old,
            };
            total[target] += ki;
            if target != old {
                community[i] = target;
                moved = true;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    let canonical = Partition::canonical(&community).expect("non-empty graph");
    let n_comm = canonical.n_clusters();
    (canonical.labels().to_vec(), n_comm, moved_any)
}

/// Louvain partition. Node visit order at each level is a permutation drawn
/// from `louvain_seed`; equal seeds give equal partitions.
pub fn louvain_partition(adj: &AdjacencyMatrix, config: &PartitionerConfig) -> Result<Partition> {
    prepare(adj, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.louvain_seed);
    let mut graph = Graph::from_adjacency(adj);
    let mut membership: Vec<usize> = (0..adj.n()).collect();

    for _ in 0..config.louvain_passes {
        let mut order: Vec<usize> = (0..graph.len()).collect();
        order.shuffle(&mut rng);
        let (community, n_comm, moved) =
            local_moves(&graph, &order, config.modularity_tolerance);
        if !moved {
            break;
        }
        for m in membership.iter_mut() {
            *m = community[*m];
        }
        graph = graph.aggregate(&community, n_comm);
    }
    Partition::canonical(&membership)
}
