//! Subcommand definitions and dispatch.

use std::borrow::Cow;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cbound::bounds::{compute_bound, kl_qp_vs_uniform, BoundId, BoundInputs, EmpiricalStats};
use cbound::evaluation::{
    bound_curve, cross_validate, log_grid, split_train_test, stopping_experiment,
    write_bound_curve_csv, BoundCurveRecord, StoppingConfig, StoppingExperiment,
};
use cbound::io::{load_dataset, load_model, write_json_file, Format};
use cbound::learners::{adaboost_train, train_mincq_model, VoteModel};
use cbound::types::MarginSummary;
use cbound::voters::{
    build_kernel_voters, build_stumps, tanh_normalize, vote_matrix, AttributeStats, KernelSpec,
    SelfComplementedVoterSet,
};
use cbound::{Dataset, Error, Result};

use crate::config::Config;

/// Majority-vote risk analysis: margin statistics, PAC risk bounds, and the
/// margin-constrained quadratic learner.
#[derive(Debug, Parser)]
#[command(name = "cbound", version, about)]
pub struct Cli {
    /// Flat key=value file supplying defaults for omitted options.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute risk bounds from explicit statistics or a model on data.
    Bound(BoundArgs),
    /// Train a weighted majority vote by margin-constrained quadratic
    /// programming.
    TrainMincq(TrainMincqArgs),
    /// Train a boosted majority vote over decision stumps.
    TrainAdaboost(TrainAdaboostArgs),
    /// Evaluate a trained model on a dataset.
    Evaluate(EvaluateArgs),
    /// Multi-stage experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Compare rules for choosing the boosting round to stop at.
    StoppingCriterion(StoppingArgs),
    /// Track every bound along a boosting run against the test risk.
    BoundCurve(BoundCurveArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Bound to compute (repeatable); all applicable ones when omitted.
    #[arg(long = "bound", value_name = "ID")]
    pub bounds: Vec<String>,
    /// Gibbs risk of the posterior on the sample.
    #[arg(long)]
    pub gibbs_risk: Option<f64>,
    /// Expected pairwise voter disagreement.
    #[arg(long)]
    pub disagreement: Option<f64>,
    /// Expected pairwise joint voter error.
    #[arg(long)]
    pub joint_error: Option<f64>,
    /// First margin moment.
    #[arg(long)]
    pub mu1: Option<f64>,
    /// Second margin moment.
    #[arg(long)]
    pub mu2: Option<f64>,
    /// KL divergence of the posterior from the uniform prior.
    #[arg(long)]
    pub kl: Option<f64>,
    /// Labeled sample size.
    #[arg(long)]
    pub m: Option<u64>,
    /// Unlabeled sample size (semi-supervised bound).
    #[arg(long = "m-u")]
    pub m_u: Option<u64>,
    /// Confidence parameter.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Sample-compression size of the voters.
    #[arg(long)]
    pub compression: Option<u32>,
    /// Mark the posterior quasi-uniform.
    #[arg(long)]
    pub aligned: bool,
    /// Derive statistics from this model instead of explicit flags.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Dataset to evaluate the model on.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Dataset layout: csv or sparse.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainMincqArgs {
    /// Training dataset.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Dataset layout: csv or sparse.
    #[arg(long)]
    pub format: Option<String>,
    /// Voter family: stumps, rbf or linear.
    #[arg(long)]
    pub voters: Option<String>,
    /// Stump thresholds per attribute.
    #[arg(long)]
    pub per_attribute: Option<usize>,
    /// RBF kernel width.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Fixed first-moment target; grid search when omitted.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Comma-separated explicit grid of first-moment targets.
    #[arg(long, value_name = "LIST")]
    pub mu_grid: Option<String>,
    /// Cross-validation folds for the grid search.
    #[arg(long)]
    pub cv_folds: Option<usize>,
    /// Attribute squashing: none or tanh.
    #[arg(long)]
    pub normalize: Option<String>,
    /// Seed for the cross-validation shuffle.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the trained model.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainAdaboostArgs {
    /// Training dataset.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Dataset layout: csv or sparse.
    #[arg(long)]
    pub format: Option<String>,
    /// Boosting rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Stump thresholds per attribute.
    #[arg(long)]
    pub per_attribute: Option<usize>,
    /// Where to write the trained model.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Trained model file.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Evaluation dataset.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Dataset layout: csv or sparse.
    #[arg(long)]
    pub format: Option<String>,
    /// Also compute every applicable risk bound.
    #[arg(long)]
    pub bounds: bool,
    /// Confidence parameter for the bounds.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Unlabeled sample size for the semi-supervised bound.
    #[arg(long = "m-u")]
    pub m_u: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StoppingArgs {
    /// Dataset to split and boost on.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Dataset layout: csv or sparse.
    #[arg(long)]
    pub format: Option<String>,
    /// Boosting rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Stump thresholds per attribute.
    #[arg(long)]
    pub per_attribute: Option<usize>,
    /// Fraction of examples used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Cap on the training side; 0 disables the cap.
    #[arg(long)]
    pub train_cap: Option<usize>,
    /// Holdout fraction for the validation criterion.
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    /// Folds for the cross-validation criterion.
    #[arg(long)]
    pub cv_folds: Option<usize>,
    /// Seed for all shuffles.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the report to this file.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundCurveArgs {
    /// Dataset to split and boost on.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Dataset layout: csv or sparse.
    #[arg(long)]
    pub format: Option<String>,
    /// Boosting rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Stump thresholds per attribute.
    #[arg(long)]
    pub per_attribute: Option<usize>,
    /// Fraction of examples used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Cap on the training side; 0 disables the cap.
    #[arg(long)]
    pub train_cap: Option<usize>,
    /// Seed for the split.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence parameter for the bounds.
    #[arg(long)]
    pub delta: Option<f64>,
    /// CSV file to write the per-round curve to.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    match cli.command {
        Command::Bound(args) => run_bound(args, &config),
        Command::TrainMincq(args) => run_train_mincq(args, &config),
        Command::TrainAdaboost(args) => run_train_adaboost(args, &config),
        Command::Evaluate(args) => run_evaluate(args, &config),
        Command::Experiment(ExperimentCommand::StoppingCriterion(args)) => {
            run_stopping(args, &config)
        }
        Command::Experiment(ExperimentCommand::BoundCurve(args)) => run_bound_curve(args, &config),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, value).map_err(|e| Error::InvalidInput {
        context: format!("serialization failed: {e}"),
    })?;
    writeln!(lock)?;
    Ok(())
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidInput {
        context: format!("missing required option --{flag}"),
    })
}

fn load_data(
    path: &std::path::Path,
    format: Option<String>,
    config: &Config,
) -> Result<Dataset> {
    let format: Format = config
        .resolve(format, "format", "csv".to_string())?
        .parse()?;
    load_dataset(path, format)
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

fn run_bound(args: BoundArgs, config: &Config) -> Result<()> {
    let model_path = config.resolve_opt(args.model, "model")?;
    let data_path = config.resolve_opt(args.data, "data")?;
    let mut inputs = match &model_path {
        Some(model_path) => {
            let model = load_model(model_path)?;
            let data = load_data(
                &require(data_path.clone(), "data")?,
                args.format.clone(),
                config,
            )?;
            let summary = model.summary(&data)?;
            BoundInputs {
                m: data.len() as u64,
                m_u: None,
                delta: 0.05,
                kl_qp: kl_qp_vs_uniform(&model.posterior),
                stats: EmpiricalStats::from_summary(&summary),
                compression: model.voters.compression(),
                aligned: model.posterior.is_quasi_uniform(),
            }
        }
        None => BoundInputs {
            m: 0,
            m_u: None,
            delta: 0.05,
            kl_qp: 0.0,
            stats: EmpiricalStats::default(),
            compression: 0,
            aligned: false,
        },
    };
    // Explicit flags override anything model-derived.
    if let Some(m) = config.resolve_opt(args.m, "m")? {
        inputs.m = m;
    }
    inputs.m_u = config.resolve_opt(args.m_u, "m-u")?.or(inputs.m_u);
    inputs.delta = config.resolve(args.delta, "delta", inputs.delta)?;
    if let Some(kl) = config.resolve_opt(args.kl, "kl")? {
        inputs.kl_qp = kl;
    }
    if let Some(v) = config.resolve_opt(args.gibbs_risk, "gibbs-risk")? {
        inputs.stats.gibbs_risk = Some(v);
    }
    if let Some(v) = config.resolve_opt(args.disagreement, "disagreement")? {
        inputs.stats.disagreement = Some(v);
    }
    if let Some(v) = config.resolve_opt(args.joint_error, "joint-error")? {
        inputs.stats.joint_error = Some(v);
    }
    if let Some(v) = config.resolve_opt(args.mu1, "mu1")? {
        inputs.stats.mu1 = Some(v);
    }
    if let Some(v) = config.resolve_opt(args.mu2, "mu2")? {
        inputs.stats.mu2 = Some(v);
    }
    if let Some(c) = config.resolve_opt(args.compression, "compression")? {
        inputs.compression = c;
    }
    if config.resolve_flag(args.aligned, "aligned")? {
        inputs.aligned = true;
    }
    if inputs.m == 0 && model_path.is_none() {
        return Err(Error::InvalidInput {
            context: "bound computations need --m (or --model with --data)".into(),
        });
    }

    let requested: Vec<String> = if args.bounds.is_empty() {
        match config.resolve_opt::<String>(None, "bound")? {
            Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
            None => Vec::new(),
        }
    } else {
        args.bounds
    };
    let reports = if requested.is_empty() {
        // All bounds whose inputs suffice; surface the first failure only if
        // nothing at all applies.
        let mut reports = Vec::new();
        let mut first_error = None;
        for id in BoundId::ALL {
            match compute_bound(id, &inputs) {
                Ok(report) => reports.push(report),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        if reports.is_empty() {
            return Err(first_error.expect("no bounds and no error"));
        }
        reports
    } else {
        requested
            .iter()
            .map(|name| compute_bound(name.parse()?, &inputs))
            .collect::<Result<Vec<_>>>()?
    };
    print_json(&reports)
}

// ---------------------------------------------------------------------------
// train-mincq
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VoterChoice {
    Stumps,
    Rbf,
    Linear,
}

impl std::str::FromStr for VoterChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stumps" => Ok(VoterChoice::Stumps),
            "rbf" => Ok(VoterChoice::Rbf),
            "linear" => Ok(VoterChoice::Linear),
            other => Err(Error::InvalidInput {
                context: format!("unknown voter family {other:?}; expected stumps, rbf or linear"),
            }),
        }
    }
}

impl VoterChoice {
    fn as_str(self) -> &'static str {
        match self {
            VoterChoice::Stumps => "stumps",
            VoterChoice::Rbf => "rbf",
            VoterChoice::Linear => "linear",
        }
    }
}

/// Builds the voter family on (possibly squashed) training data; returns the
/// squashing statistics so models can replay them on raw features.
fn build_voters(
    choice: VoterChoice,
    data: &Dataset,
    per_attribute: usize,
    gamma: f64,
    normalize: bool,
    warnings: Option<&mut Vec<String>>,
) -> Result<(SelfComplementedVoterSet, Option<AttributeStats>)> {
    let stats = normalize.then(|| AttributeStats::from_dataset(data));
    let prepared: Cow<'_, Dataset> = match &stats {
        Some(s) => Cow::Owned(tanh_normalize(data, s)?),
        None => Cow::Borrowed(data),
    };
    let voters = match choice {
        VoterChoice::Stumps => {
            let build = build_stumps(&prepared, per_attribute)?;
            if let Some(sink) = warnings {
                sink.extend(build.warnings);
            }
            build.voters
        }
        VoterChoice::Rbf => build_kernel_voters(&prepared, KernelSpec::Rbf { gamma })?,
        VoterChoice::Linear => build_kernel_voters(&prepared, KernelSpec::Linear)?,
    };
    Ok((voters, stats))
}

#[derive(Debug, Serialize)]
struct CvReport {
    grid: Vec<f64>,
    mean_risks: Vec<Option<f64>>,
    best_index: usize,
    failures: usize,
}

#[derive(Debug, Serialize)]
struct TrainMincqReport {
    dataset: String,
    train_size: usize,
    voter_kind: &'static str,
    voter_count: usize,
    normalized: bool,
    selected_mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cv: Option<CvReport>,
    train_risk: f64,
    kl: f64,
    aligned: bool,
    summary: MarginSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_path: Option<String>,
}

fn parse_mu_list(raw: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = raw
        .split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| Error::InvalidInput {
                context: format!("mu grid entry {t:?} is not a number"),
            })
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(Error::InvalidInput {
            context: "empty mu grid".into(),
        });
    }
    Ok(grid)
}

fn run_train_mincq(args: TrainMincqArgs, config: &Config) -> Result<()> {
    let data_path = require(config.resolve_opt(args.data, "data")?, "data")?;
    let train = load_data(&data_path, args.format, config)?;
    let choice: VoterChoice = config
        .resolve(args.voters, "voters", "stumps".to_string())?
        .parse()?;
    let per_attribute = config.resolve(args.per_attribute, "per-attribute", 10)?;
    let gamma = config.resolve(args.gamma, "gamma", 1.0)?;
    let cv_folds = config.resolve(args.cv_folds, "cv-folds", 5)?;
    let seed = config.resolve(args.seed, "seed", 7)?;
    let normalize_default = match choice {
        VoterChoice::Stumps => "none",
        _ => "tanh",
    };
    let normalize = match config
        .resolve(args.normalize, "normalize", normalize_default.to_string())?
        .as_str()
    {
        "none" => false,
        "tanh" => true,
        other => {
            return Err(Error::InvalidInput {
                context: format!("unknown normalization {other:?}; expected none or tanh"),
            })
        }
    };
    let mu_fixed = config.resolve_opt(args.mu, "mu")?;
    let mu_grid_raw = config.resolve_opt(args.mu_grid, "mu-grid")?;
    let output = config.resolve_opt(args.output, "output")?;

    let (selected_mu, cv_report) = match mu_fixed {
        Some(mu) => (mu, None),
        None => {
            let grid = match mu_grid_raw {
                Some(raw) => parse_mu_list(&raw)?,
                None => match choice {
                    VoterChoice::Stumps => log_grid(1e-4, 1.0, 15)?,
                    _ => log_grid(1e-4, 1e-2, 15)?,
                },
            };
            let outcome = cross_validate(&grid, &train, cv_folds, seed, |mu, part, valid| {
                let (voters, stats) =
                    build_voters(choice, part, per_attribute, gamma, normalize, None)?;
                let model = train_mincq_model(voters, part, *mu, stats)?;
                model.risk(valid)
            })?;
            (
                outcome.best,
                Some(CvReport {
                    grid,
                    mean_risks: outcome.mean_risks,
                    best_index: outcome.best_index,
                    failures: outcome.failures,
                }),
            )
        }
    };

    let mut warnings = Vec::new();
    let (voters, stats) = build_voters(
        choice,
        &train,
        per_attribute,
        gamma,
        normalize,
        Some(&mut warnings),
    )?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let voter_count = voters.half_count();
    let model = train_mincq_model(voters, &train, selected_mu, stats)?;
    let summary = model.summary(&train)?;
    let report = TrainMincqReport {
        dataset: train.name.clone(),
        train_size: train.len(),
        voter_kind: choice.as_str(),
        voter_count,
        normalized: normalize,
        selected_mu,
        cv: cv_report,
        train_risk: model.risk(&train)?,
        kl: kl_qp_vs_uniform(&model.posterior),
        aligned: model.posterior.is_quasi_uniform(),
        summary,
        model_path: output.as_ref().map(|p: &PathBuf| p.display().to_string()),
    };
    if let Some(path) = &output {
        write_json_file(path, &model)?;
    }
    print_json(&report)
}

// ---------------------------------------------------------------------------
// train-adaboost
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct TrainAdaboostReport {
    dataset: String,
    train_size: usize,
    voter_count: usize,
    rounds_requested: usize,
    rounds_run: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    stopped_early: Option<usize>,
    train_risk: f64,
    kl: f64,
    summary: MarginSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_path: Option<String>,
}

fn run_train_adaboost(args: TrainAdaboostArgs, config: &Config) -> Result<()> {
    let data_path = require(config.resolve_opt(args.data, "data")?, "data")?;
    let train = load_data(&data_path, args.format, config)?;
    let rounds = config.resolve(args.rounds, "rounds", 100)?;
    let per_attribute = config.resolve(args.per_attribute, "per-attribute", 10)?;
    let output = config.resolve_opt(args.output, "output")?;

    let build = build_stumps(&train, per_attribute)?;
    for warning in &build.warnings {
        eprintln!("warning: {warning}");
    }
    let votes = vote_matrix(&build.voters, &train)?;
    let run = adaboost_train(&votes, rounds)?;
    let posterior = run.posteriors.last().expect("completed rounds").clone();
    let voter_count = build.voters.half_count();
    let model = VoteModel::new(build.voters, posterior)?;
    let summary = model.summary(&train)?;
    let report = TrainAdaboostReport {
        dataset: train.name.clone(),
        train_size: train.len(),
        voter_count,
        rounds_requested: run.requested,
        rounds_run: run.rounds.len(),
        stopped_early: run.stopped_early,
        train_risk: model.risk(&train)?,
        kl: kl_qp_vs_uniform(&model.posterior),
        summary,
        model_path: output.as_ref().map(|p: &PathBuf| p.display().to_string()),
    };
    if let Some(path) = &output {
        write_json_file(path, &model)?;
    }
    print_json(&report)
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct EvaluateReport {
    dataset: String,
    examples: usize,
    risk: f64,
    kl: f64,
    aligned: bool,
    summary: MarginSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<Vec<cbound::BoundReport>>,
}

fn run_evaluate(args: EvaluateArgs, config: &Config) -> Result<()> {
    let model_path = require(config.resolve_opt(args.model, "model")?, "model")?;
    let data_path = require(config.resolve_opt(args.data, "data")?, "data")?;
    let model = load_model(&model_path)?;
    let data = load_data(&data_path, args.format, config)?;
    let delta = config.resolve(args.delta, "delta", 0.05)?;
    let m_u = config.resolve_opt(args.m_u, "m-u")?;
    let with_bounds = config.resolve_flag(args.bounds, "bounds")?;

    let summary = model.summary(&data)?;
    let aligned = model.posterior.is_quasi_uniform();
    let kl = kl_qp_vs_uniform(&model.posterior);
    let bounds = if with_bounds {
        let inputs = BoundInputs {
            m: data.len() as u64,
            m_u,
            delta,
            kl_qp: kl,
            stats: EmpiricalStats::from_summary(&summary),
            compression: model.voters.compression(),
            aligned,
        };
        let reports: Vec<_> = BoundId::ALL
            .iter()
            .filter_map(|&id| compute_bound(id, &inputs).ok())
            .collect();
        Some(reports)
    } else {
        None
    };
    let report = EvaluateReport {
        dataset: data.name.clone(),
        examples: data.len(),
        risk: model.risk(&data)?,
        kl,
        aligned,
        summary,
        bounds,
    };
    print_json(&report)
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

fn run_stopping(args: StoppingArgs, config: &Config) -> Result<()> {
    let data_path = require(config.resolve_opt(args.data, "data")?, "data")?;
    let data = load_data(&data_path, args.format, config)?;
    let defaults = StoppingConfig::default();
    let train_cap = match config.resolve_opt(args.train_cap, "train-cap")? {
        Some(0) => None,
        Some(cap) => Some(cap),
        None => defaults.train_cap,
    };
    let experiment_config = StoppingConfig {
        rounds: config.resolve(args.rounds, "rounds", defaults.rounds)?,
        per_attribute: config.resolve(args.per_attribute, "per-attribute", defaults.per_attribute)?,
        train_fraction: config.resolve(
            args.train_fraction,
            "train-fraction",
            defaults.train_fraction,
        )?,
        train_cap,
        validation_fraction: config.resolve(
            args.validation_fraction,
            "validation-fraction",
            defaults.validation_fraction,
        )?,
        cv_folds: config.resolve(args.cv_folds, "cv-folds", defaults.cv_folds)?,
        seed: config.resolve(args.seed, "seed", defaults.seed)?,
    };
    let report: StoppingExperiment = stopping_experiment(&data, &experiment_config)?;
    if let Some(path) = config.resolve_opt::<PathBuf>(args.output, "output")? {
        write_json_file(&path, &report)?;
    }
    print_json(&report)
}

#[derive(Debug, Serialize)]
struct BoundCurveSummary {
    dataset: String,
    train_size: usize,
    test_size: usize,
    rounds_run: usize,
    output: String,
    final_record: BoundCurveRecord,
}

fn run_bound_curve(args: BoundCurveArgs, config: &Config) -> Result<()> {
    let data_path = require(config.resolve_opt(args.data, "data")?, "data")?;
    let data = load_data(&data_path, args.format, config)?;
    let rounds = config.resolve(args.rounds, "rounds", 100)?;
    let per_attribute = config.resolve(args.per_attribute, "per-attribute", 10)?;
    let train_fraction = config.resolve(args.train_fraction, "train-fraction", 0.5)?;
    let train_cap = match config.resolve_opt(args.train_cap, "train-cap")? {
        Some(0) | None => None,
        Some(cap) => Some(cap),
    };
    let seed = config.resolve(args.seed, "seed", 7)?;
    let delta = config.resolve(args.delta, "delta", 0.05)?;
    let output = require(config.resolve_opt(args.output, "output")?, "output")?;

    let (train, test) = split_train_test(&data, train_fraction, train_cap, seed)?;
    let build = build_stumps(&train, per_attribute)?;
    for warning in &build.warnings {
        eprintln!("warning: {warning}");
    }
    let records = bound_curve(&build.voters, &train, &test, rounds, delta)?;
    let file = std::fs::File::create(&output)?;
    write_bound_curve_csv(&records, file)?;
    let summary = BoundCurveSummary {
        dataset: data.name.clone(),
        train_size: train.len(),
        test_size: test.len(),
        rounds_run: records.len(),
        output: output.display().to_string(),
        final_record: *records.last().expect("at least one round"),
    };
    print_json(&summary)
}
