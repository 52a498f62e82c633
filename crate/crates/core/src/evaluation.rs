//! Experiment machinery: deterministic splits, cross-validation, boosting
//! stopping criteria, paired sign tests and risk-bound curves.
//!
//! Everything randomized takes an explicit seed and uses a counter-based
//! generator, so runs are reproducible across platforms and thread counts.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds::{compute_bound, BoundId, BoundInputs, EmpiricalStats, kl_qp_vs_uniform};
use crate::error::{Error, Result};
use crate::learners::adaboost_train;
use crate::margins::{margins, summarize};
use crate::types::{Dataset, Posterior, VoteMatrix};
use crate::voters::{build_stumps, vote_matrix, SelfComplementedVoterSet};

// ---------------------------------------------------------------------------
// Splits and grids
// ---------------------------------------------------------------------------

/// A seeded permutation of `0..len`.
pub fn shuffled_indices(len: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices
}

/// Seeded train/test split. The train side takes `round(fraction * len)`
/// examples, optionally capped; both sides must end up non-empty.
pub fn split_train_test(
    data: &Dataset,
    fraction: f64,
    train_cap: Option<usize>,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "fraction",
            value: fraction,
            range: "(0, 1)",
        });
    }
    let len = data.len();
    let mut take = ((fraction * len as f64).round() as usize).clamp(1, len.saturating_sub(1));
    if let Some(cap) = train_cap {
        take = take.min(cap).max(1);
    }
    if take >= len {
        return Err(Error::InvalidInput {
            context: format!("cannot split {len} examples into non-empty train and test sides"),
        });
    }
    let indices = shuffled_indices(len, seed);
    let train = data.subset(format!("{}-train", data.name), &indices[..take])?;
    let test = data.subset(format!("{}-test", data.name), &indices[take..])?;
    Ok((train, test))
}

/// Geometric grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidInput {
            context: format!("log grid needs 0 < lo <= hi, got [{lo}, {hi}]"),
        });
    }
    if count == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "count",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    Ok((0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                lo * ratio.powi(k as i32)
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// Outcome of a grid search by k-fold cross-validation.
#[derive(Debug, Clone)]
pub struct CvOutcome<T> {
    /// Index into the grid of the selected parameter.
    pub best_index: usize,
    pub best: T,
    /// Mean validation risk per grid point; `None` when every fold failed.
    pub mean_risks: Vec<Option<f64>>,
    /// Total failed (parameter, fold) cells.
    pub failures: usize,
}

fn fold_ranges(len: usize, folds: usize) -> Vec<(usize, usize)> {
    (0..folds)
        .map(|f| (f * len / folds, (f + 1) * len / folds))
        .collect()
}

/// Seeded k-fold cross-validation of an arbitrary train/evaluate closure
/// over a parameter grid. Folds are contiguous chunks of one shared
/// shuffle, so every parameter sees identical splits. Individual cells may
/// fail (for example an infeasible parameter on one fold); a parameter
/// scores only over its surviving folds, and the search fails only when
/// every cell fails. Ties pick the earliest grid point.
pub fn cross_validate<T, F>(
    grid: &[T],
    data: &Dataset,
    folds: usize,
    seed: u64,
    eval: F,
) -> Result<CvOutcome<T>>
where
    T: Clone + Sync,
    F: Fn(&T, &Dataset, &Dataset) -> Result<f64> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidInput {
            context: "empty parameter grid".into(),
        });
    }
    if folds < 2 || folds > data.len() {
        return Err(Error::ParameterOutOfRange {
            name: "folds",
            value: folds as f64,
            range: "[2, len]",
        });
    }
    let indices = shuffled_indices(data.len(), seed);
    let splits: Vec<(Dataset, Dataset)> = fold_ranges(data.len(), folds)
        .into_iter()
        .enumerate()
        .map(|(f, (lo, hi))| {
            let held: Vec<usize> = indices[lo..hi].to_vec();
            let kept: Vec<usize> = indices[..lo]
                .iter()
                .chain(&indices[hi..])
                .copied()
                .collect();
            let train = data.subset(format!("{}-fold{f}-train", data.name), &kept)?;
            let valid = data.subset(format!("{}-fold{f}-valid", data.name), &held)?;
            Ok((train, valid))
        })
        .collect::<Result<_>>()?;

    let cell = |pi: usize, fi: usize| -> std::result::Result<f64, String> {
        let (train, valid) = &splits[fi];
        eval(&grid[pi], train, valid).map_err(|e| e.to_string())
    };
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|pi| (0..folds).map(move |fi| (pi, fi)))
        .collect();
    #[cfg(feature = "parallel")]
    let outcomes: Vec<std::result::Result<f64, String>> =
        cells.par_iter().map(|&(pi, fi)| cell(pi, fi)).collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<std::result::Result<f64, String>> =
        cells.iter().map(|&(pi, fi)| cell(pi, fi)).collect();

    let mut mean_risks = Vec::with_capacity(grid.len());
    let mut failures = 0usize;
    let mut sample_error = None;
    for pi in 0..grid.len() {
        let mut sum = 0.0;
        let mut ok = 0usize;
        for fi in 0..folds {
            match &outcomes[pi * folds + fi] {
                Ok(risk) => {
                    sum += risk;
                    ok += 1;
                }
                Err(message) => {
                    failures += 1;
                    sample_error.get_or_insert_with(|| message.clone());
                }
            }
        }
        mean_risks.push((ok > 0).then(|| sum / ok as f64));
    }
    let best_index = mean_risks
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .min_by(|(i, a), (j, b)| a.total_cmp(b).then(i.cmp(j)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::AllCellsFailed {
            summary: sample_error.unwrap_or_default(),
        })?;
    Ok(CvOutcome {
        best_index,
        best: grid[best_index].clone(),
        mean_risks,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Stopping criteria for boosting
// ---------------------------------------------------------------------------

/// How to pick the boosting round to stop at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingCriterion {
    /// Empirical C-bound of the round's posterior on the training sample.
    CBoundTrain,
    /// Majority-vote risk on the training sample.
    BayesTrain,
    /// Majority-vote risk on a held-out slice of the training sample.
    Validation,
    /// Cross-validated majority-vote risk across boosting rounds.
    CrossValidation,
}

impl StoppingCriterion {
    pub const ALL: [StoppingCriterion; 4] = [
        StoppingCriterion::CBoundTrain,
        StoppingCriterion::BayesTrain,
        StoppingCriterion::Validation,
        StoppingCriterion::CrossValidation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StoppingCriterion::CBoundTrain => "c_bound_train",
            StoppingCriterion::BayesTrain => "bayes_train",
            StoppingCriterion::Validation => "validation",
            StoppingCriterion::CrossValidation => "cross_validation",
        }
    }
}

impl std::fmt::Display for StoppingCriterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The round a criterion series selects: the earliest minimum among defined
/// entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectedRound {
    /// 1-based boosting round.
    pub round: usize,
    pub value: f64,
    /// Entries that were undefined (for example a C-bound without positive
    /// first moment).
    pub excluded: usize,
}

pub fn select_round(series: &[Option<f64>]) -> Result<SelectedRound> {
    let mut best: Option<(usize, f64)> = None;
    let mut excluded = 0usize;
    for (i, entry) in series.iter().enumerate() {
        match entry {
            None => excluded += 1,
            Some(v) => {
                if best.map_or(true, |(_, bv)| *v < bv) {
                    best = Some((i, *v));
                }
            }
        }
    }
    let (index, value) = best.ok_or(Error::CriterionUndefined)?;
    Ok(SelectedRound {
        round: index + 1,
        value,
        excluded,
    })
}

/// Test-side result of one stopping criterion in the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub criterion: StoppingCriterion,
    pub selection: SelectedRound,
    pub test_risk: f64,
    /// Set when an auxiliary run selected a round past the end of the main
    /// run (early stop), and the last main round was used instead.
    pub clamped: bool,
}

/// One dataset's stopping-criterion comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingExperiment {
    pub dataset: String,
    pub train_size: usize,
    pub test_size: usize,
    /// Rounds the main boosting run actually completed.
    pub rounds_run: usize,
    pub outcomes: Vec<CriterionOutcome>,
    /// Criteria that could not be evaluated, with the reason.
    pub skipped: Vec<(StoppingCriterion, String)>,
}

/// Knobs for [`stopping_experiment`].
#[derive(Debug, Clone, Copy)]
pub struct StoppingConfig {
    pub rounds: usize,
    pub per_attribute: usize,
    pub train_fraction: f64,
    pub train_cap: Option<usize>,
    pub validation_fraction: f64,
    pub cv_folds: usize,
    pub seed: u64,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            per_attribute: 10,
            train_fraction: 0.5,
            train_cap: Some(400),
            validation_fraction: 0.1,
            cv_folds: 5,
            seed: 7,
        }
    }
}

/// Risk of each round's posterior on an evaluation vote matrix.
fn risk_series(run_posteriors: &[Posterior], votes: &VoteMatrix) -> Result<Vec<f64>> {
    run_posteriors
        .iter()
        .map(|p| {
            let m = margins(votes, p)?;
            Ok(m.iter().filter(|&&v| v <= 0.0).count() as f64 / m.len() as f64)
        })
        .collect()
}

/// Boosts once on the training sample, then compares stopping criteria by
/// the test risk of the round each one selects. Auxiliary runs (validation
/// holdout, cross-validation) re-boost on reduced training data; their
/// selected round indexes into the main run, clamped to its length.
pub fn stopping_experiment(data: &Dataset, config: &StoppingConfig) -> Result<StoppingExperiment> {
    let (train, test) =
        split_train_test(data, config.train_fraction, config.train_cap, config.seed)?;
    let build = build_stumps(&train, config.per_attribute)?;
    let votes_train = vote_matrix(&build.voters, &train)?;
    let votes_test = vote_matrix(&build.voters, &test)?;
    let run = adaboost_train(&votes_train, config.rounds)?;
    let rounds_run = run.posteriors.len();

    let mut c_bound_series = Vec::with_capacity(rounds_run);
    let mut bayes_series = Vec::with_capacity(rounds_run);
    for p in &run.posteriors {
        let summary = summarize(&margins(&votes_train, p)?)?;
        c_bound_series.push(summary.c_bound);
        bayes_series.push(Some(summary.bayes_risk));
    }
    let test_risks = risk_series(&run.posteriors, &votes_test)?;

    let mut experiment = StoppingExperiment {
        dataset: data.name.clone(),
        train_size: train.len(),
        test_size: test.len(),
        rounds_run,
        outcomes: Vec::new(),
        skipped: Vec::new(),
    };
    let mut push = |criterion: StoppingCriterion, selection: Result<SelectedRound>| {
        match selection {
            Ok(sel) => {
                let clamped = sel.round > rounds_run;
                let round = sel.round.min(rounds_run);
                experiment.outcomes.push(CriterionOutcome {
                    criterion,
                    selection: sel,
                    test_risk: test_risks[round - 1],
                    clamped,
                });
            }
            Err(e) => experiment.skipped.push((criterion, e.to_string())),
        }
    };

    push(StoppingCriterion::CBoundTrain, select_round(&c_bound_series));
    push(StoppingCriterion::BayesTrain, select_round(&bayes_series));

    // Validation: re-boost on the unheld part of the training sample and
    // score each round on the holdout.
    let validation = (|| -> Result<SelectedRound> {
        let (core, holdout) = split_train_test(
            &train,
            1.0 - config.validation_fraction,
            None,
            config.seed.wrapping_add(1),
        )?;
        let votes_core = vote_matrix(&build.voters, &core)?;
        let votes_hold = vote_matrix(&build.voters, &holdout)?;
        let aux = adaboost_train(&votes_core, config.rounds)?;
        let series: Vec<Option<f64>> = risk_series(&aux.posteriors, &votes_hold)?
            .into_iter()
            .map(Some)
            .collect();
        select_round(&series)
    })();
    push(StoppingCriterion::Validation, validation);

    // Cross-validation: per-fold boosting runs, scored per round on the held
    // fold; rounds average over the folds that reached them.
    let cv = (|| -> Result<SelectedRound> {
        let folds = config.cv_folds;
        if folds < 2 || folds > train.len() {
            return Err(Error::ParameterOutOfRange {
                name: "cv_folds",
                value: folds as f64,
                range: "[2, len]",
            });
        }
        let indices = shuffled_indices(train.len(), config.seed.wrapping_add(2));
        let mut per_round: Vec<Vec<f64>> = vec![Vec::new(); config.rounds];
        for (f, (lo, hi)) in fold_ranges(train.len(), folds).into_iter().enumerate() {
            let held: Vec<usize> = indices[lo..hi].to_vec();
            let kept: Vec<usize> = indices[..lo]
                .iter()
                .chain(&indices[hi..])
                .copied()
                .collect();
            let part = train.subset(format!("{}-cv{f}", train.name), &kept)?;
            let hold = train.subset(format!("{}-cv{f}-held", train.name), &held)?;
            let votes_part = vote_matrix(&build.voters, &part)?;
            let votes_hold = vote_matrix(&build.voters, &hold)?;
            let aux = adaboost_train(&votes_part, config.rounds)?;
            for (t, risk) in risk_series(&aux.posteriors, &votes_hold)?.into_iter().enumerate() {
                per_round[t].push(risk);
            }
        }
        let series: Vec<Option<f64>> = per_round
            .into_iter()
            .map(|risks| {
                (!risks.is_empty()).then(|| risks.iter().sum::<f64>() / risks.len() as f64)
            })
            .collect();
        select_round(&series)
    })();
    push(StoppingCriterion::CrossValidation, cv);

    Ok(experiment)
}

// ---------------------------------------------------------------------------
// Paired sign test
// ---------------------------------------------------------------------------

/// One-sided paired sign test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTestResult {
    /// Pairs where the first method's value is strictly smaller.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// Probability that a fair coin produces at least `wins` successes in
    /// `wins + losses` tosses.
    pub p_value: f64,
    pub all_ties: bool,
}

fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if n <= 120 {
        // Exact in integer arithmetic: C(120, 60) and the partial sums fit
        // comfortably in 128 bits.
        let mut coeff: u128 = 1;
        let mut tail: u128 = 0;
        for j in 0..=n {
            if j >= k {
                tail += coeff;
            }
            if j < n {
                coeff = coeff * (n - j) as u128 / (j + 1) as u128;
            }
        }
        return tail as f64 / 2f64.powi(n as i32);
    }
    let ln_half = std::f64::consts::LN_2;
    let mut ln_coeff = 0.0;
    let mut tail = 0.0;
    for j in 0..=n {
        if j >= k {
            tail += (ln_coeff - n as f64 * ln_half).exp();
        }
        if j < n {
            ln_coeff += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        }
    }
    tail.min(1.0)
}

/// One-sided sign test that the first method of each `(first, second)` pair
/// is better (smaller). Ties are excluded from the toss count; a pair set
/// that is all ties yields `p = 1`.
pub fn sign_test(pairs: &[(f64, f64)]) -> Result<SignTestResult> {
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let mut wins = 0usize;
    let mut losses = 0usize;
    for &(first, second) in pairs {
        if first < second {
            wins += 1;
        } else if first > second {
            losses += 1;
        }
    }
    let ties = pairs.len() - wins - losses;
    let all_ties = wins + losses == 0;
    let p_value = if all_ties {
        1.0
    } else {
        binomial_upper_tail(wins + losses, wins)
    };
    Ok(SignTestResult {
        wins,
        losses,
        ties,
        p_value,
        all_ties,
    })
}

// ---------------------------------------------------------------------------
// Bound curves along a boosting run
// ---------------------------------------------------------------------------

/// Risk bounds and reference quantities for one boosting round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCurveRecord {
    /// 1-based boosting round.
    pub round: usize,
    pub test_risk: f64,
    pub kl: f64,
    pub mu1_train: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_bound_train: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b1s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2p: Option<f64>,
}

/// Boosts on the training sample and reports, per round, the test risk next
/// to every applicable bound computed from training statistics. The
/// semi-supervised variant treats the test features as the unlabeled sample
/// (its disagreement needs no labels).
pub fn bound_curve(
    voters: &SelfComplementedVoterSet,
    train: &Dataset,
    test: &Dataset,
    rounds: usize,
    delta: f64,
) -> Result<Vec<BoundCurveRecord>> {
    let votes_train = vote_matrix(voters, train)?;
    let votes_test = vote_matrix(voters, test)?;
    let run = adaboost_train(&votes_train, rounds)?;
    let record = |(t, posterior): (usize, &Posterior)| -> Result<BoundCurveRecord> {
        let train_summary = summarize(&margins(&votes_train, posterior)?)?;
        let test_margins = margins(&votes_test, posterior)?;
        let test_summary = summarize(&test_margins)?;
        let kl = kl_qp_vs_uniform(posterior);
        let inputs = BoundInputs {
            m: train.len() as u64,
            m_u: Some(test.len() as u64),
            delta,
            kl_qp: kl,
            stats: EmpiricalStats::from_summary(&train_summary),
            compression: 0,
            aligned: false,
        };
        // The unlabeled-disagreement variant swaps in the test estimate.
        let mut semi = inputs;
        semi.stats.disagreement = Some(test_summary.disagreement);
        semi.stats.mu2 = Some(test_summary.mu2);
        let value = |id: BoundId, inp: &BoundInputs| compute_bound(id, inp).ok().map(|r| r.value);
        Ok(BoundCurveRecord {
            round: t + 1,
            test_risk: test_summary.bayes_risk,
            kl,
            mu1_train: train_summary.mu1,
            c_bound_train: train_summary.c_bound,
            b0: value(BoundId::B0, &inputs),
            b1: value(BoundId::B1, &inputs),
            b1s: value(BoundId::B1s, &semi),
            b2: value(BoundId::B2, &inputs),
            b2p: value(BoundId::B2p, &inputs),
        })
    };
    let indexed: Vec<(usize, &Posterior)> = run.posteriors.iter().enumerate().collect();
    #[cfg(feature = "parallel")]
    {
        indexed.par_iter().map(|&(t, p)| record((t, p))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        indexed.iter().map(|&(t, p)| record((t, p))).collect()
    }
}

/// Writes a bound curve as CSV with stable headers; undefined cells are
/// empty.
pub fn write_bound_curve_csv<W: std::io::Write>(
    records: &[BoundCurveRecord],
    writer: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "round",
        "test_risk",
        "kl",
        "mu1_train",
        "c_bound_train",
        "B0",
        "B1",
        "B1s",
        "B2",
        "B2p",
    ])
    .map_err(csv_error)?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        out.write_record([
            r.round.to_string(),
            r.test_risk.to_string(),
            r.kl.to_string(),
            r.mu1_train.to_string(),
            cell(r.c_bound_train),
            cell(r.b0),
            cell(r.b1),
            cell(r.b1s),
            cell(r.b2),
            cell(r.b2p),
        ])
        .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput {
        context: format!("csv write failed: {e}"),
    }
}
