//! Adjacency construction followed by partitioning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjacency::{adjacency, AdjacencyMatrix, Method, MethodConfig};
use crate::error::{Error, Result};
use crate::partition::{partition, Algorithm, Partition, PartitionerConfig};
use crate::simulate::method_seed;
use crate::survey::ResponseMatrix;

/// A method paired with a partitioner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub partitioner: Algorithm,
}

impl MethodSpec {
    /// RRCA runs with Louvain, every other method with Newman.
    pub fn default_for(method: Method) -> Self {
        let partitioner = match method {
            Method::Rrca => Algorithm::Louvain,
            _ => Algorithm::Newman,
        };
        MethodSpec { method, partitioner }
    }

    pub fn new(method: Method, partitioner: Algorithm) -> Self {
        MethodSpec { method, partitioner }
    }

    /// The four methods with their default partitioners.
    pub fn defaults() -> Vec<MethodSpec> {
        Method::ALL.iter().map(|&m| Self::default_for(m)).collect()
    }

    fn salt(self) -> u64 {
        let m = Method::ALL.iter().position(|&x| x == self.method).unwrap_or(0) as u64;
        let p = match self.partitioner {
            Algorithm::Newman => 0,
            Algorithm::Louvain => 1,
        };
        m * 2 + p
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.method, self.partitioner)
    }
}

/// Accepts `bca`, `bca:louvain`, `bca-l` and similar.
impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.split_once(':').or_else(|| s.rsplit_once('-'));
        match split {
            None => Ok(Self::default_for(s.parse()?)),
            Some((m, p)) => Ok(MethodSpec::new(m.parse()?, p.parse()?)),
        }
    }
}

/// Output of one method on one response matrix.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub adjacency: AdjacencyMatrix,
    pub partition: Partition,
}

impl MethodRun {
    /// Respondents the adjacency step left out.
    pub fn excluded(&self) -> &[usize] {
        self.adjacency.excluded()
    }
}

/// Runs `spec` on `responses`. Random steps draw from seeds derived from
/// `seed`, so equal inputs give equal partitions.
pub fn run_method(
    responses: &ResponseMatrix,
    spec: MethodSpec,
    config: &MethodConfig,
    seed: u64,
) -> Result<MethodRun> {
    let config = config.clone().with_seed(method_seed(seed, spec.salt() * 2));
    let adjacency = adjacency(spec.method, responses, &config).map_err(|e| e.at("adjacency"))?;
    let pcfg = match spec.partitioner {
        Algorithm::Newman => PartitionerConfig::newman(),
        Algorithm::Louvain => PartitionerConfig::louvain(method_seed(seed, spec.salt() * 2 + 1)),
    };
    let partition = partition(&adjacency, &pcfg).map_err(|e| e.at("partition"))?;
    Ok(MethodRun {
        adjacency,
        partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        let p = |s: &str| s.parse::<MethodSpec>().unwrap();
        assert_eq!(p("bca"), MethodSpec::new(Method::Bca, Algorithm::Newman));
        assert_eq!(p("rrca"), MethodSpec::new(Method::Rrca, Algorithm::Louvain));
        assert_eq!(p("bca-l"), MethodSpec::new(Method::Bca, Algorithm::Louvain));
        assert_eq!(p("RCA:louvain"), MethodSpec::new(Method::Rca, Algorithm::Louvain));
        assert_eq!(p("rrca:newman"), MethodSpec::new(Method::Rrca, Algorithm::Newman));
        assert!("bca:spectral".parse::<MethodSpec>().is_err());
        assert!("xyz".parse::<MethodSpec>().is_err());
        for spec in MethodSpec::defaults() {
            assert_eq!(p(&spec.to_string()), spec);
        }
    }

    #[test]
    fn salts_distinct() {
        let mut salts: Vec<u64> = Method::ALL
            .iter()
            .flat_map(|&m| [Algorithm::Newman, Algorithm::Louvain].map(|a| MethodSpec::new(m, a).salt()))
            .collect();
        salts.sort();
        salts.dedup();
        assert_eq!(salts.len(), 8);
    }
}
