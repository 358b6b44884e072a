//! Bipolar Class Analysis: clustering survey respondents by how their
//! opinions move between the negative and positive semispaces of each
//! question, with relational and correlational baselines.

pub mod adjacency;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod pipeline;
pub mod simulate;
pub mod survey;

pub use adjacency::{adjacency, AdjacencyMatrix, Method, MethodConfig};
pub use error::{Error, Result};
pub use survey::{load_responses, parse_survey_schema, AnswerSpace, ResponseMatrix, Survey};
pub use partition::{modularity, partition, Partition, PartitionerConfig};
pub use simulate::{generate_dataset, DgpConfig, SyntheticDataset};
pub use metrics::{score, MetricsReport};
pub use pipeline::{run_method, MethodSpec};
pub use experiment::{run_experiment, ExperimentSpec};
