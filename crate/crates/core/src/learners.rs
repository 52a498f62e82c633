//! Learning algorithms over self-complemented voter sets.
//!
//! The main learner solves a box/equality quadratic program that minimizes
//! the second margin moment while pinning the first to a target `mu`; by the
//! moment form of the C-bound this minimizes the empirical C-bound among all
//! posteriors with that first moment. Posterior transformations
//! ([`quasi_uniformize`], [`rescale_margin`]) map arbitrary posteriors into
//! the quasi-uniform family without changing the majority vote. A boosting
//! baseline ([`adaboost_train`]) produces the posterior sequences used by the
//! stopping-criterion and bound-curve experiments.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::margins::{margins, summarize};
use crate::numerics::{solve_box_eq_qp, QpProblem};
use crate::types::{Dataset, MarginSummary, Posterior, VoteMatrix};
use crate::voters::{tanh_normalize, vote_matrix, AttributeStats, SelfComplementedVoterSet};

/// Convergence record of a quadratic-program solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub iterations: u32,
    pub kkt_residual: f64,
}

/// A trained weighted majority vote: voters, a posterior over the doubled
/// set, and everything needed to reproduce predictions on raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteModel {
    pub voters: SelfComplementedVoterSet,
    pub posterior: Posterior,
    /// Attribute statistics when the model was trained on squashed features.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<AttributeStats>,
    /// First-moment target the posterior was trained for.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverInfo>,
}

impl VoteModel {
    pub fn new(voters: SelfComplementedVoterSet, posterior: Posterior) -> Result<Self> {
        let expected = 2 * voters.half_count();
        if posterior.len() != expected {
            return Err(Error::WeightCountMismatch {
                expected,
                got: posterior.len(),
            });
        }
        Ok(Self {
            voters,
            posterior,
            normalization: None,
            target_margin: None,
            objective: None,
            solver: None,
        })
    }

    /// Net weight on each first-half voter: `q_i - q_{i+n}`. The majority
    /// vote only depends on these differences.
    pub fn half_weights(&self) -> Vec<f64> {
        let w = self.posterior.weights();
        let n = w.len() / 2;
        (0..n).map(|i| w[i] - w[i + n]).collect()
    }

    fn normalized<'a>(&self, data: &'a Dataset) -> Result<std::borrow::Cow<'a, Dataset>> {
        match &self.normalization {
            None => Ok(std::borrow::Cow::Borrowed(data)),
            Some(stats) => Ok(std::borrow::Cow::Owned(tanh_normalize(data, stats)?)),
        }
    }

    /// Vote matrix of this model's voters on (possibly squashed) data.
    pub fn vote_matrix(&self, data: &Dataset) -> Result<VoteMatrix> {
        let prepared = self.normalized(data)?;
        vote_matrix(&self.voters, &prepared)
    }

    /// Margin `y * E_Q f(x)` per example.
    pub fn margins(&self, data: &Dataset) -> Result<Vec<f64>> {
        let votes = self.vote_matrix(data)?;
        margins(&votes, &self.posterior)
    }

    pub fn summary(&self, data: &Dataset) -> Result<MarginSummary> {
        summarize(&self.margins(data)?)
    }

    /// Zero-one risk of the majority vote; an exactly zero margin counts as
    /// an error.
    pub fn risk(&self, data: &Dataset) -> Result<f64> {
        let margin_values = self.margins(data)?;
        let errors = margin_values.iter().filter(|&&m| m <= 0.0).count();
        Ok(errors as f64 / margin_values.len() as f64)
    }

    /// Weighted vote output for one raw feature vector, in `[-1, 1]`.
    pub fn decision_value(&self, features: &[f64]) -> Result<f64> {
        let squashed;
        let features = match &self.normalization {
            None => features,
            Some(stats) => {
                if stats.mean.len() != features.len() {
                    return Err(Error::DimensionMismatch {
                        context: format!(
                            "normalization statistics cover {} attributes, example has {}",
                            stats.mean.len(),
                            features.len()
                        ),
                    });
                }
                squashed = features
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        if stats.std_dev[j] == 0.0 {
                            0.0
                        } else {
                            ((x - stats.mean[j]) / stats.std_dev[j]).tanh()
                        }
                    })
                    .collect::<Vec<f64>>();
                &squashed
            }
        };
        let mut outputs = Vec::new();
        self.voters.evaluate_first_half(features, &mut outputs)?;
        let weights = self.half_weights();
        if weights.len() != outputs.len() {
            return Err(Error::WeightCountMismatch {
                expected: outputs.len(),
                got: weights.len(),
            });
        }
        let value: f64 = weights.iter().zip(&outputs).map(|(w, f)| w * f).sum();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// Majority-vote label for one raw feature vector; 0 on an exact tie.
    pub fn predict(&self, features: &[f64]) -> Result<i8> {
        let v = self.decision_value(features)?;
        Ok(if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        })
    }
}

// ---------------------------------------------------------------------------
// Margin-constrained quadratic learner
// ---------------------------------------------------------------------------

/// Mean label-correlation of each first-half voter: `(1/m) sum_x y f_i(x)`.
fn label_correlations(votes: &VoteMatrix) -> Vec<f64> {
    let n = votes.half();
    let m = votes.rows() as f64;
    let labels = votes.labels();
    let mut corr = vec![0.0; n];
    for i in 0..votes.rows() {
        let row = votes.row(i);
        let y = f64::from(labels[i]);
        for (c, &f) in corr.iter_mut().zip(&row[..n]) {
            *c += y * f;
        }
    }
    for c in corr.iter_mut() {
        *c /= m;
    }
    corr
}

/// First-half voter Gram matrix `(1/m) sum_x F_i(x) F_j(x)`; positive
/// semidefinite by construction.
fn voter_gram(votes: &VoteMatrix) -> Vec<Vec<f64>> {
    let n = votes.half();
    let m = votes.rows() as f64;
    let rows: Vec<&[f64]> = (0..votes.rows()).map(|i| &votes.row(i)[..n]).collect();
    let fill = |i: usize| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for row in &rows {
            let fi = row[i];
            if fi == 0.0 {
                continue;
            }
            for (o, &fj) in out.iter_mut().zip(*row) {
                *o += fi * fj;
            }
        }
        for o in out.iter_mut() {
            *o /= m;
        }
        out
    };
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(fill).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(fill).collect()
    }
}

/// Largest achievable first margin moment over the quasi-uniform family on
/// these voters; the achievable range is symmetric around zero.
pub fn max_feasible_margin(votes: &VoteMatrix) -> f64 {
    let n = votes.half() as f64;
    label_correlations(votes).iter().map(|c| c.abs()).sum::<f64>() / n
}

/// Assembles the margin-constrained quadratic program: minimize
/// `q' M q - a' q` over `0 <= q_i <= 1/n` with `corr' q` pinned so the
/// resulting quasi-uniform posterior has first moment exactly `mu`.
pub fn mincq_build(votes: &VoteMatrix, mu: f64) -> Result<QpProblem> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "mu",
            value: mu,
            range: "(0, 1]",
        });
    }
    let n = votes.half();
    let gram = voter_gram(votes);
    let corr = label_correlations(votes);
    let nf = n as f64;
    // Uniform-posterior pull: a_i = (1/n) sum_j M_ji.
    let linear: Vec<f64> = (0..n)
        .map(|i| gram.iter().map(|row| row[i]).sum::<f64>() / nf)
        .collect();
    let mean_corr = corr.iter().sum::<f64>() / nf;
    let rhs = mu / 2.0 + mean_corr / 2.0;
    Ok(QpProblem {
        quadratic: gram,
        linear,
        equality: corr,
        rhs,
        upper: 1.0 / nf,
    })
}

/// Outcome of a margin-constrained solve: the full quasi-uniform posterior
/// over `2n` voters plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct MinCqOutcome {
    pub posterior: Posterior,
    pub objective: f64,
    pub solver: SolverInfo,
}

/// Minimizes the second margin moment at first moment exactly `mu`.
///
/// Errors with the achievable margin range when `mu` cannot be realized on
/// this sample.
pub fn mincq_train(votes: &VoteMatrix, mu: f64) -> Result<MinCqOutcome> {
    let problem = mincq_build(votes, mu)?;
    let reach = max_feasible_margin(votes);
    if mu > reach + 1e-12 {
        return Err(Error::InfeasibleTarget {
            lo: -reach,
            hi: reach,
        });
    }
    let solution = solve_box_eq_qp(&problem)?;
    let n = solution.q.len();
    let mut weights = vec![0.0; 2 * n];
    let upper = 1.0 / n as f64;
    for (i, &q) in solution.q.iter().enumerate() {
        weights[i] = q;
        weights[i + n] = upper - q;
    }
    Ok(MinCqOutcome {
        posterior: Posterior::new(weights)?,
        objective: solution.objective,
        solver: SolverInfo {
            iterations: solution.iterations,
            kkt_residual: solution.kkt_residual,
        },
    })
}

/// End-to-end convenience: optionally squash features, build the vote
/// matrix, solve at margin `mu`, and assemble a reusable model.
pub fn train_mincq_model(
    voters: SelfComplementedVoterSet,
    train: &Dataset,
    mu: f64,
    normalization: Option<AttributeStats>,
) -> Result<VoteModel> {
    let prepared = match &normalization {
        None => std::borrow::Cow::Borrowed(train),
        Some(stats) => std::borrow::Cow::Owned(tanh_normalize(train, stats)?),
    };
    let votes = vote_matrix(&voters, &prepared)?;
    let outcome = mincq_train(&votes, mu)?;
    let mut model = VoteModel::new(voters, outcome.posterior)?;
    model.normalization = normalization;
    model.target_margin = Some(mu);
    model.objective = Some(outcome.objective);
    model.solver = Some(outcome.solver);
    Ok(model)
}

// ---------------------------------------------------------------------------
// Posterior transformations
// ---------------------------------------------------------------------------

/// A posterior mapped into the quasi-uniform family, with the factor by
/// which every margin shrinks.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiUniformized {
    pub posterior: Posterior,
    /// Every example margin is multiplied by this positive factor, so signs,
    /// the majority vote and the C-bound are unchanged.
    pub margin_scale: f64,
}

/// Maps any posterior on a doubled voter set to a quasi-uniform one with the
/// same majority vote: each pair keeps its net weight direction, rescaled by
/// the largest net weight so the pair sums stay at `1/n`.
pub fn quasi_uniformize(posterior: &Posterior) -> Result<QuasiUniformized> {
    let w = posterior.weights();
    if w.len() % 2 != 0 || w.is_empty() {
        return Err(Error::InvalidInput {
            context: format!(
                "posterior covers {} voters; a doubled set has even size",
                w.len()
            ),
        });
    }
    let n = w.len() / 2;
    let diffs: Vec<f64> = (0..n).map(|i| w[i] - w[i + n]).collect();
    let spread = diffs.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    if spread == 0.0 {
        return Err(Error::ZeroMarginSpread);
    }
    let half = 1.0 / (2.0 * n as f64);
    let mut weights = vec![0.0; 2 * n];
    for (i, &d) in diffs.iter().enumerate() {
        let shift = d / spread * half;
        weights[i] = half + shift;
        weights[i + n] = half - shift;
    }
    Ok(QuasiUniformized {
        posterior: Posterior::new(weights)?,
        margin_scale: 1.0 / (n as f64 * spread),
    })
}

/// Shrinks a quasi-uniform posterior toward uniform so its first margin
/// moment drops from `current` to exactly `target`; every margin scales by
/// `target / current`, so signs and the C-bound are preserved.
pub fn rescale_margin(posterior: &Posterior, current: f64, target: f64) -> Result<Posterior> {
    if !posterior.is_quasi_uniform() {
        return Err(Error::NotAligned);
    }
    if !(target > 0.0 && target <= current) {
        return Err(Error::MarginTargetTooLarge { current, target });
    }
    let ratio = target / current;
    let len = posterior.len() as f64;
    let weights = posterior
        .weights()
        .iter()
        .map(|&w| ratio * w + (1.0 - ratio) / len)
        .collect();
    Posterior::new(weights)
}

// ---------------------------------------------------------------------------
// Boosting baseline
// ---------------------------------------------------------------------------

/// One boosting round: chosen column, its vote weight, and the weighted
/// error that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostRound {
    pub voter: usize,
    pub alpha: f64,
    pub weighted_error: f64,
}

/// A full boosting run with the normalized posterior after every round.
#[derive(Debug, Clone)]
pub struct AdaBoostRun {
    pub rounds: Vec<AdaBoostRound>,
    /// `posteriors[t]` is the cumulative vote weight after round `t + 1`,
    /// normalized over the doubled voter set.
    pub posteriors: Vec<Posterior>,
    pub requested: usize,
    /// Round at which no voter beat chance, if boosting stopped early.
    pub stopped_early: Option<usize>,
}

const ADABOOST_ERROR_CLAMP: f64 = 1e-10;
const ADABOOST_CHANCE_MARGIN: f64 = 1e-12;

/// Discrete boosting over all `2n` columns of the vote matrix, with the
/// linear-loss weighted error `sum_x w_x (1 - y_x f(x)) / 2` (equal to the
/// zero-one weighted error for binary voters). Ties pick the smallest column
/// index; stops early once the best column is within `1e-12` of chance.
pub fn adaboost_train(votes: &VoteMatrix, rounds: usize) -> Result<AdaBoostRun> {
    if rounds == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "rounds",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let m = votes.rows();
    let width = votes.width();
    let labels = votes.labels();
    let mut weights = vec![1.0 / m as f64; m];
    let mut alphas = vec![0.0; width];
    let mut run = AdaBoostRun {
        rounds: Vec::new(),
        posteriors: Vec::new(),
        requested: rounds,
        stopped_early: None,
    };
    for round in 1..=rounds {
        // Weighted label correlation per column; error = (1 - corr) / 2.
        let mut best_col = 0usize;
        let mut best_corr = f64::NEG_INFINITY;
        for j in 0..width {
            let mut corr = 0.0;
            for i in 0..m {
                corr += weights[i] * f64::from(labels[i]) * votes.get(i, j);
            }
            if corr > best_corr {
                best_corr = corr;
                best_col = j;
            }
        }
        let error = ((1.0 - best_corr) / 2.0)
            .clamp(ADABOOST_ERROR_CLAMP, 1.0 - ADABOOST_ERROR_CLAMP);
        if error >= 0.5 - ADABOOST_CHANCE_MARGIN {
            run.stopped_early = Some(round);
            break;
        }
        let alpha = 0.5 * ((1.0 - error) / error).ln();
        alphas[best_col] += alpha;
        run.rounds.push(AdaBoostRound {
            voter: best_col,
            alpha,
            weighted_error: error,
        });
        let mut total = 0.0;
        for i in 0..m {
            weights[i] *= (-alpha * f64::from(labels[i]) * votes.get(i, best_col)).exp();
            total += weights[i];
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        let alpha_sum: f64 = alphas.iter().sum();
        run.posteriors
            .push(Posterior::new(alphas.iter().map(|a| a / alpha_sum).collect())?);
    }
    if run.rounds.is_empty() {
        return Err(Error::NoUsefulWeakLearner { round: 1 });
    }
    Ok(run)
}
