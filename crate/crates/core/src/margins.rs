//! Margin statistics of a weighted majority vote.
//!
//! The margin of an example is `y * sum_j q_j F[i][j]`, a value in `[-1, 1]`.
//! Every risk quantity used by the bounds is a function of the first two
//! margin moments alone, which is what makes the moment route worthwhile:
//! `gibbs_risk = (1 - mu1)/2`, `disagreement = (1 - mu2)/2`,
//! `joint_error = (1 - 2 mu1 + mu2)/4`, `joint_success = (1 + 2 mu1 + mu2)/4`,
//! and the C-bound `1 - mu1^2 / mu2` upper-bounds the Bayes risk whenever
//! `mu1 > 0`.

use crate::error::{Error, Result};
use crate::types::{MarginSummary, Posterior, VoteMatrix};

/// Per-example margins `y_i * sum_j q_j F[i][j]`, clamped into `[-1, 1]`
/// (the exact value lies there; rounding can spill over by an ulp).
pub fn margins(votes: &VoteMatrix, posterior: &Posterior) -> Result<Vec<f64>> {
    if posterior.len() != votes.width() {
        return Err(Error::WeightCountMismatch {
            expected: votes.width(),
            got: posterior.len(),
        });
    }
    let q = posterior.weights();
    Ok((0..votes.rows())
        .map(|i| {
            let dot: f64 = votes.row(i).iter().zip(q).map(|(f, w)| f * w).sum();
            (votes.labels()[i] as f64 * dot).clamp(-1.0, 1.0)
        })
        .collect())
}

fn compensated_mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for x in values {
        let t = sum + x;
        compensation += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    (sum + compensation) / count as f64
}

/// Margin moments and derived statistics in one (two-pass, compensated)
/// sweep. Zero margins count as majority-vote errors.
pub fn summarize(margin_values: &[f64]) -> Result<MarginSummary> {
    if margin_values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = margin_values.len();
    let mu1 = compensated_mean(margin_values.iter().copied(), m).clamp(-1.0, 1.0);
    // Second moment via the centered sum so that mu2 >= mu1^2 holds by
    // construction; the raw mean of squares can dip below by rounding.
    let variance_raw = compensated_mean(
        margin_values.iter().map(|&x| (x - mu1) * (x - mu1)),
        m,
    );
    let mu2 = (mu1 * mu1 + variance_raw).clamp(0.0, 1.0);
    let variance = mu2 - mu1 * mu1;
    let bayes_risk = margin_values.iter().filter(|&&x| x <= 0.0).count() as f64 / m as f64;
    let c_bound = if mu1 > 0.0 {
        Some(1.0 - mu1 * mu1 / mu2)
    } else {
        None
    };
    Ok(MarginSummary {
        mu1,
        mu2,
        variance,
        gibbs_risk: (1.0 - mu1) / 2.0,
        disagreement: (1.0 - mu2) / 2.0,
        joint_error: (1.0 - 2.0 * mu1 + mu2) / 4.0,
        joint_success: (1.0 + 2.0 * mu1 + mu2) / 4.0,
        bayes_risk,
        c_bound,
    })
}

/// Margins and summary in one call.
pub fn margin_summary(votes: &VoteMatrix, posterior: &Posterior) -> Result<MarginSummary> {
    summarize(&margins(votes, posterior)?)
}

/// Summaries for many posteriors against one vote matrix. Runs data-parallel
/// when the `parallel` feature is enabled; results are index-stable either
/// way.
pub fn posterior_sweep_summaries(
    votes: &VoteMatrix,
    posteriors: &[Posterior],
) -> Result<Vec<MarginSummary>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        posteriors
            .par_iter()
            .map(|p| margin_summary(votes, p))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        posterior_sweep_summaries_sequential(votes, posteriors)
    }
}

/// Sequential fallback for [`posterior_sweep_summaries`]; always compiled.
pub fn posterior_sweep_summaries_sequential(
    votes: &VoteMatrix,
    posteriors: &[Posterior],
) -> Result<Vec<MarginSummary>> {
    posteriors.iter().map(|p| margin_summary(votes, p)).collect()
}

/// The C-bound `1 - mu1^2 / mu2` from the first two margin moments.
///
/// Undefined (an error) when `mu1 <= 0`, i.e. when the Gibbs risk is at least
/// one half.
pub fn c_bound_from_moments(mu1: f64, mu2: f64) -> Result<f64> {
    if mu1 <= 0.0 {
        return Err(Error::CBoundUndefined { mu1 });
    }
    if !(0.0..=1.0).contains(&mu2) {
        return Err(Error::ParameterOutOfRange {
            name: "mu2",
            value: mu2,
            range: "[0, 1]",
        });
    }
    let mu1_sq = mu1 * mu1;
    if mu2 < mu1_sq - 1e-12 {
        return Err(Error::InconsistentMoments { mu1_sq, mu2 });
    }
    Ok((1.0 - mu1_sq / mu2.max(mu1_sq)).max(0.0))
}

/// The three equivalent conditions under which tightening the majority vote
/// beyond the factor-two Gibbs bound is possible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalityFlags {
    /// `mu2 <= mu1`.
    pub second_moment_le_first: bool,
    /// Gibbs risk at most the expected disagreement.
    pub gibbs_le_disagreement: bool,
    /// C-bound at most twice the Gibbs risk.
    pub c_bound_le_twice_gibbs: bool,
}

/// Evaluates the three equivalent optimality conditions. Requires `mu1 > 0`.
pub fn optimality_flags(mu1: f64, mu2: f64) -> Result<OptimalityFlags> {
    let c = c_bound_from_moments(mu1, mu2)?;
    let gibbs = (1.0 - mu1) / 2.0;
    let disagreement = (1.0 - mu2) / 2.0;
    Ok(OptimalityFlags {
        second_moment_le_first: mu2 <= mu1,
        gibbs_le_disagreement: gibbs <= disagreement,
        c_bound_le_twice_gibbs: c <= 2.0 * gibbs,
    })
}

/// Upper bound on the margin variance from per-voter weights and pairwise
/// output covariances: `sum_j q_j^2 + sum_{j != k} q_j q_k Cov(y f_j, y f_k)`.
///
/// Always at least the empirical margin variance, with equality gap
/// `sum_j q_j^2 (1 - Var(y f_j))`. For a uniform posterior over `n` pairwise
/// uncorrelated voters it collapses to `1/n`. Cost is `O((2n)^2 m)`.
pub fn variance_upper_bound(votes: &VoteMatrix, posterior: &Posterior) -> Result<f64> {
    if posterior.len() != votes.width() {
        return Err(Error::WeightCountMismatch {
            expected: votes.width(),
            got: posterior.len(),
        });
    }
    let m = votes.rows();
    let w = votes.width();
    let q = posterior.weights();
    // Per-voter labelled means E[y f_j].
    let mut label_mean = vec![0.0; w];
    for i in 0..m {
        let y = votes.labels()[i] as f64;
        for (j, mean) in label_mean.iter_mut().enumerate() {
            *mean += y * votes.get(i, j);
        }
    }
    for mean in label_mean.iter_mut() {
        *mean /= m as f64;
    }
    let mut total = 0.0;
    for j in 0..w {
        for k in 0..w {
            if j == k {
                total += q[j] * q[j];
            } else {
                let mut product_mean = 0.0;
                for i in 0..m {
                    product_mean += votes.get(i, j) * votes.get(i, k);
                }
                product_mean /= m as f64;
                let covariance = product_mean - label_mean[j] * label_mean[k];
                total += q[j] * q[k] * covariance;
            }
        }
    }
    Ok(total)
}

/// Which error rate parameterizes [`independent_voters_cb_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VoterRate {
    Disagreement(f64),
    GibbsRisk(f64),
}

/// C-bound value for `n` independent voters under a uniform posterior:
/// `1 / (n (1 - 2d))` in terms of the pairwise disagreement `d`, or
/// `1 / (n (1 - 2r)^2)` in terms of a common Gibbs risk `r`. Both rates must
/// lie in `[0, 1/2)`.
pub fn independent_voters_cb_bound(n: usize, rate: VoterRate) -> Result<f64> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "n",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    match rate {
        VoterRate::Disagreement(d) => {
            if !(0.0..0.5).contains(&d) {
                return Err(Error::RateOutOfRange { value: d });
            }
            Ok(1.0 / (n as f64 * (1.0 - 2.0 * d)))
        }
        VoterRate::GibbsRisk(r) => {
            if !(0.0..0.5).contains(&r) {
                return Err(Error::RateOutOfRange { value: r });
            }
            Ok(1.0 / (n as f64 * (1.0 - 2.0 * r) * (1.0 - 2.0 * r)))
        }
    }
}
