//! Synthetic data: random correlation matrices, Gaussian-copula latent
//! positions, and thresholds turning positions into ordered answers.

mod config;
mod copula;
mod correlation;
mod dataset;
mod normal;
pub mod rng;
mod thresholds;

pub use config::{
    experiment1_config, experiment1_matrices, experiment2_config, DependenceStructure, DgpConfig,
    IntRange,
};
pub use copula::sample_copula;
pub use correlation::{
    gen_partial_correlations, partials_to_correlation, random_correlation, CorrelationMatrix,
};
pub use dataset::{agreement_labels, generate_dataset, ConstrualSpec, SyntheticDataset};
pub use normal::{phi, phi_inv, sample_truncated_normal};
pub use rng::{dataset_seed, method_seed, substream, Stream};
pub use thresholds::{gen_thresholds, latent_to_response, ThresholdSet};
