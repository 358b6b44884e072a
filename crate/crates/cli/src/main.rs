//! `bca`: simulate survey datasets, cluster respondents, score partitions and
//! run the benchmark experiments.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or I/O
//! error, 3 numerical failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bca::adjacency::{ConstantPolicy, EdgeRemoval};
use bca::experiment::{run_experiment, statuses, ExperimentSpec};
use bca::io::{
    create_dir, dataset_dir, read_dataset, read_membership, read_text, write_atomic, write_dataset,
    DatasetStatus, RunManifest, Status,
};
use bca::metrics::{agreement, score, DatasetRecord, MetricsReport, NmiNormalization};
use bca::partition::Algorithm;
use bca::pipeline::{run_method, MethodSpec};
use bca::simulate::{dataset_seed, experiment1_config, experiment2_config, generate_dataset, DgpConfig};
use bca::{load_responses, parse_survey_schema, Error, Method, MethodConfig, Partition};

#[derive(Parser)]
#[command(name = "bca", version, about = "Construal clustering of bipolar survey responses")]
struct Cli {
    /// Master seed for every random step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for batch commands.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output directory (`cluster` and `evaluate` print to stdout without it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic datasets.
    Simulate {
        /// `exp1`, `exp2` or a JSON config file.
        #[arg(long, default_value = "exp1")]
        config: String,
        #[arg(long, short = 'n')]
        n_datasets: usize,
    },
    /// Cluster the respondents of a response file or dataset directory.
    Cluster {
        /// Dataset directory, or a response CSV used with --schema.
        input: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Bca)]
        method: MethodArg,
        /// Defaults to louvain for rrca and newman otherwise.
        #[arg(long, value_enum)]
        partitioner: Option<PartitionerArg>,
        #[command(flatten)]
        knobs: MethodKnobs,
    },
    /// Score a partition against the true membership.
    Evaluate {
        /// CSV of `respondent_id,cluster_id`.
        partition: PathBuf,
        /// CSV of `respondent_id,construal_id`; defaults to the dataset's truth.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Dataset directory supplying the true correlation matrices.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Require the dissimilarity measures.
        #[arg(long)]
        cdis: bool,
        #[arg(long, value_enum, default_value_t = NmiArg::Mean)]
        nmi: NmiArg,
    },
    /// Run a simulation experiment and write per-dataset and aggregate reports.
    Experiment {
        /// `exp1`, `exp2` or a JSON config file.
        name: String,
        #[arg(long, short = 'n')]
        n_datasets: usize,
        /// Comma-separated methods, e.g. `bca,rca,cca,rrca,bca-l`.
        #[arg(long, value_delimiter = ',', default_value = "rca,cca,rrca,bca")]
        methods: Vec<String>,
        /// Only generate datasets whose number of construals lies in this range.
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = NmiArg::Mean)]
        nmi: NmiArg,
        #[command(flatten)]
        knobs: MethodKnobs,
    },
}

#[derive(Args)]
struct MethodKnobs {
    /// Skip the RCA bootstrap edge removal.
    #[arg(long)]
    no_edge_removal: bool,
    #[arg(long, default_value_t = 1000)]
    bootstrap_iterations: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = ConstantArg::ZeroEdge)]
    cca_constant: ConstantArg,
}

impl MethodKnobs {
    fn config(&self) -> MethodConfig {
        MethodConfig {
            rca_edge_removal: if self.no_edge_removal {
                EdgeRemoval::Off
            } else {
                EdgeRemoval::Bootstrap {
                    iterations: self.bootstrap_iterations,
                    alpha: self.alpha,
                    seed: 0,
                }
            },
            cca_significance_alpha: self.alpha,
            cca_constant_policy: match self.cca_constant {
                ConstantArg::ZeroEdge => ConstantPolicy::ZeroEdge,
                ConstantArg::Drop => ConstantPolicy::DropRespondent,
            },
            ..MethodConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bca,
    Rca,
    Cca,
    Rrca,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartitionerArg {
    Newman,
    Louvain,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantArg {
    ZeroEdge,
    Drop,
}

#[derive(Clone, Copy, ValueEnum)]
enum NmiArg {
    Mean,
    Max,
}

impl From<NmiArg> for NmiNormalization {
    fn from(a: NmiArg) -> Self {
        match a {
            NmiArg::Mean => NmiNormalization::Mean,
            NmiArg::Max => NmiNormalization::Max,
        }
    }
}

fn method_spec(method: MethodArg, partitioner: Option<PartitionerArg>) -> MethodSpec {
    let method = match method {
        MethodArg::Bca => Method::Bca,
        MethodArg::Rca => Method::Rca,
        MethodArg::Cca => Method::Cca,
        MethodArg::Rrca => Method::Rrca,
    };
    match partitioner {
        None => MethodSpec::default_for(method),
        Some(PartitionerArg::Newman) => MethodSpec::new(method, Algorithm::Newman),
        Some(PartitionerArg::Louvain) => MethodSpec::new(method, Algorithm::Louvain),
    }
}

fn load_config(name: &str) -> anyhow::Result<DgpConfig> {
    match name {
        "exp1" => Ok(experiment1_config()),
        "exp2" => Ok(experiment2_config()),
        path => Ok(DgpConfig::from_json(&read_text(Path::new(path))?)?),
    }
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            create_dir(dir)?;
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn simulate(cli: &Cli, config: &str, n: usize) -> anyhow::Result<()> {
    let Some(out) = cli.out.as_deref() else {
        bail!(Error::Config("simulate needs --out".into()));
    };
    let config = load_config(config)?;
    config.validate()?;
    let hash = config.hash();
    create_dir(out)?;
    let pool = rayon_pool(cli.workers)?;
    let results: Vec<anyhow::Result<DatasetStatus>> = pool.install(|| {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let seed = dataset_seed(cli.seed, i as u64);
                let status = match generate_dataset(&config, seed) {
                    Ok(d) => {
                        write_dataset(&dataset_dir(out, i), &d, &hash)?;
                        Status::Ok
                    }
                    Err(e) => {
                        let (step, message) = bca::experiment::error_parts(&e.at("generate"));
                        Status::Error { step, message }
                    }
                };
                Ok(DatasetStatus {
                    dataset: i,
                    seed,
                    method: None,
                    status,
                })
            })
            .collect()
    });
    let datasets = results.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    let manifest = RunManifest {
        config_hash: hash,
        master_seed: cli.seed,
        n_datasets: n,
        methods: vec![],
        partitioners: vec![],
        version: env!("CARGO_PKG_VERSION").to_string(),
        datasets,
    };
    write_atomic(&out.join("config.json"), (config.to_json() + "\n").as_bytes())?;
    write_atomic(&out.join("manifest.json"), manifest.to_json().as_bytes())?;
    eprintln!("wrote {n} datasets to {}", out.display());
    Ok(())
}

fn rayon_pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")).into())
}

fn cluster(
    cli: &Cli,
    input: &Path,
    schema: Option<&Path>,
    spec: MethodSpec,
    config: &MethodConfig,
) -> anyhow::Result<()> {
    let (responses_path, schema_path) = if input.is_dir() {
        (input.join("responses.csv"), schema.map_or_else(|| input.join("schema.json"), Path::to_path_buf))
    } else {
        let Some(schema) = schema else {
            bail!(Error::Config("a response CSV needs --schema".into()));
        };
        (input.to_path_buf(), schema.to_path_buf())
    };
    let survey = parse_survey_schema(&read_text(&schema_path)?)?;
    let responses = load_responses(&read_text(&responses_path)?, &survey)?;
    let run = run_method(&responses, spec, config, cli.seed)?;
    let csv = run.partition.to_csv(responses.respondent_ids())?;
    emit(cli.out.as_deref(), "partition.csv", &csv)?;
    if let Some(out) = cli.out.as_deref() {
        let echo = serde_json::json!({
            "input": input.display().to_string(),
            "method": spec.method,
            "partitioner": spec.partitioner,
            "seed": cli.seed,
            "method_config": config,
            "n_respondents": responses.n_respondents(),
            "n_clusters": run.partition.n_clusters(),
            "excluded": run.excluded().iter().map(|&i| &responses.respondent_ids()[i]).collect::<Vec<_>>(),
        });
        write_atomic(&out.join("method.json"), (serde_json::to_string_pretty(&echo)? + "\n").as_bytes())?;
        write_atomic(&out.join("adjacency.csv"), run.adjacency.to_csv(responses.respondent_ids())?.as_bytes())?;
    }
    eprintln!("{spec}: {} clusters", run.partition.n_clusters());
    Ok(())
}

/// Reorders `part` (listed under `ids`) to follow `order`.
fn align(ids: &[String], part: &Partition, order: &[String]) -> anyhow::Result<Partition> {
    if ids.len() != order.len() {
        bail!(Error::Responses(format!(
            "partition lists {} respondents, truth lists {}",
            ids.len(),
            order.len()
        )));
    }
    let position: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    if position.len() != ids.len() {
        bail!(Error::Responses("duplicate respondent ids in partition".into()));
    }
    let labels = order
        .iter()
        .map(|id| {
            position
                .get(id.as_str())
                .map(|&i| part.label(i))
                .ok_or_else(|| Error::Responses(format!("respondent {id:?} missing from partition")))
        })
        .collect::<Result<Vec<usize>, Error>>()?;
    Ok(Partition::canonical(&labels)?)
}

fn evaluate(
    cli: &Cli,
    partition: &Path,
    truth: Option<&Path>,
    dataset: Option<&Path>,
    want_cdis: bool,
    norm: NmiNormalization,
) -> anyhow::Result<()> {
    let (pids, part) = read_membership(&read_text(partition)?).context("reading partition")?;
    let record = match (dataset, truth) {
        (Some(dir), _) => {
            let (data, manifest) = read_dataset(dir)?;
            let order = data.responses.respondent_ids().to_vec();
            if let Some(t) = truth {
                let (tids, tpart) = read_membership(&read_text(t)?)?;
                if align(&tids, &tpart, &order)? != data.true_membership.canonicalized() {
                    bail!(Error::Responses("truth file disagrees with the dataset".into()));
                }
            }
            let part = align(&pids, &part, &order)?;
            let s = score(&data, &part, &[], None, norm)?;
            DatasetRecord::ok(0, manifest.seed, "external", "external", &s)
        }
        (None, Some(t)) => {
            if want_cdis {
                bail!(Error::Config(
                    "dissimilarity needs the true correlation matrices: pass --dataset".into()
                ));
            }
            let (tids, tpart) = read_membership(&read_text(t)?)?;
            let part = align(&pids, &part, &tids)?;
            let a = agreement(&part, &tpart, &[], norm)?;
            DatasetRecord::from_agreement(0, 0, "external", "external", &a)
        }
        (None, None) => bail!(Error::Config("evaluate needs --truth or --dataset".into())),
    };
    let report = MetricsReport::new(vec![record]);
    emit(cli.out.as_deref(), "metrics.csv", &report.to_csv()?)?;
    if let Some(out) = cli.out.as_deref() {
        write_atomic(&out.join("aggregates.json"), report.aggregates_json(None).as_bytes())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    cli: &Cli,
    name: &str,
    n: usize,
    methods: &[String],
    k_range: (Option<usize>, Option<usize>),
    norm: NmiNormalization,
    config: MethodConfig,
) -> anyhow::Result<()> {
    let Some(out) = cli.out.as_deref() else {
        bail!(Error::Config("experiment needs --out".into()));
    };
    let mut dgp = load_config(name)?;
    let k_filter = match k_range {
        (None, None) => None,
        (lo, hi) => {
            let range = bca::simulate::IntRange::new(
                lo.unwrap_or(dgp.n_construals.min),
                hi.unwrap_or(dgp.n_construals.max),
            );
            dgp = dgp.with_construals(range);
            Some((range.min, range.max))
        }
    };
    let methods = methods
        .iter()
        .map(|m| m.parse::<MethodSpec>())
        .collect::<Result<Vec<_>, Error>>()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut spec = ExperimentSpec::new(dgp, n, cli.seed, methods);
    spec.method_config = config;
    spec.nmi = norm;
    spec.validate()?;

    create_dir(out)?;
    let spec_json = serde_json::to_string_pretty(&spec)? + "\n";
    let spec_path = out.join("experiment.json");
    if spec_path.exists() && read_text(&spec_path)? != spec_json {
        bail!(Error::Config(format!(
            "{} holds a different experiment; use a fresh --out",
            out.display()
        )));
    }
    write_atomic(&spec_path, spec_json.as_bytes())?;
    let report = run_experiment(&spec, cli.workers, Some(&out.join("records")))?;
    write_atomic(&out.join("records.csv"), report.to_csv()?.as_bytes())?;
    let k_filter = k_filter.or(if name == "exp2" { Some((2, 4)) } else { None });
    write_atomic(&out.join("aggregates.json"), report.aggregates_json(k_filter).as_bytes())?;
    write_atomic(&out.join("manifest.json"), spec.manifest(statuses(&report)).to_json().as_bytes())?;

    for (label, agg) in report.aggregates() {
        let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        eprintln!(
            "{label:>14}  CPA {}  MAD {}  CDIS {}  SNMI {}  unit {}  errors {}",
            f(agg.cpa),
            f(agg.mad),
            f(agg.cdis),
            f(agg.snmi),
            f(agg.unit_construals),
            agg.errors
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Simulate { config, n_datasets } => simulate(cli, config, *n_datasets),
        Command::Cluster {
            input,
            schema,
            method,
            partitioner,
            knobs,
        } => cluster(cli, input, schema.as_deref(), method_spec(*method, *partitioner), &knobs.config()),
        Command::Evaluate {
            partition,
            truth,
            dataset,
            cdis,
            nmi,
        } => evaluate(cli, partition, truth.as_deref(), dataset.as_deref(), *cdis, (*nmi).into()),
        Command::Experiment {
            name,
            n_datasets,
            methods,
            k_min,
            k_max,
            nmi,
            knobs,
        } => experiment(cli, name, *n_datasets, methods, (*k_min, *k_max), (*nmi).into(), knobs.config()),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_config_error() => 1,
        Some(err) if err.is_data_error() => 2,
        Some(Error::Io { .. }) => 2,
        Some(_) => 3,
        None if e.downcast_ref::<serde_json::Error>().is_some() => 2,
        None => 3,
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
