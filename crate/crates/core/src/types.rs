//! Core data types shared by every stage of the pipeline.
//!
//! The central convention is the *self-complemented* voter set: `2n` voters
//! where voter `j + n` always outputs the negation of voter `j`. A
//! [`VoteMatrix`] stores the outputs of all `2n` voters on a sample, and a
//! [`Posterior`] is a normalized weight vector over those `2n` columns. Under
//! a uniform prior on a self-complemented set the prior-dependent terms of the
//! PAC-Bayesian machinery collapse, which is what the bound implementations
//! rely on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labelled example: a dense feature vector and a label in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: i8,
}

impl Example {
    pub fn new(features: Vec<f64>, label: i8) -> Result<Self> {
        if label != -1 && label != 1 {
            return Err(Error::BadLabel {
                value: label as f64,
            });
        }
        Ok(Self { features, label })
    }
}

/// A non-empty labelled sample with a constant feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    examples: Vec<Example>,
}

impl Dataset {
    /// Validates shape: at least one example, equal-length feature vectors,
    /// labels in `{-1, +1}`.
    pub fn new(name: impl Into<String>, examples: Vec<Example>) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dim = examples[0].features.len();
        for (index, ex) in examples.iter().enumerate() {
            if ex.features.len() != dim {
                return Err(Error::RaggedFeatures {
                    index,
                    expected: dim,
                    got: ex.features.len(),
                });
            }
            if ex.label != -1 && ex.label != 1 {
                return Err(Error::BadLabel {
                    value: ex.label as f64,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            examples,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.examples[0].features.len()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn labels(&self) -> impl Iterator<Item = i8> + '_ {
        self.examples.iter().map(|e| e.label)
    }

    /// New dataset keeping the examples at `indices`, in that order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Result<Self> {
        let examples = indices
            .iter()
            .map(|&i| self.examples[i].clone())
            .collect::<Vec<_>>();
        Dataset::new(name, examples)
    }
}

/// Index of the complement of voter `i` (1-based, `1 <= i <= 2n`).
///
/// The pairing is an involution: voter `i` and voter `i + n` negate each
/// other, so applying this twice returns the original index.
pub fn complement_index(i: usize, n: usize) -> Result<usize> {
    if i == 0 || i > 2 * n {
        return Err(Error::VoterIndexOutOfRange {
            index: i,
            size: 2 * n,
        });
    }
    Ok(if i <= n { i + n } else { i - n })
}

/// Outputs of `2n` self-complemented voters on `m` examples, together with
/// the labels of those examples.
///
/// Row-major storage; column `j + n` is the bit-exact negation of column `j`
/// by construction (filled once from the first half, never recomputed).
#[derive(Debug, Clone, PartialEq)]
pub struct VoteMatrix {
    values: Vec<f64>,
    rows: usize,
    half: usize,
    labels: Vec<i8>,
}

impl VoteMatrix {
    /// Builds the full matrix from first-half outputs (`rows * half` values,
    /// row-major). Every output must lie in `[-1, 1]`.
    pub fn from_first_half(first_half: &[f64], rows: usize, half: usize, labels: &[i8]) -> Result<Self> {
        if first_half.len() != rows * half {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "first-half outputs have {} entries, expected {} * {}",
                    first_half.len(),
                    rows,
                    half
                ),
            });
        }
        if labels.len() != rows {
            return Err(Error::DimensionMismatch {
                context: format!("{} labels for {} rows", labels.len(), rows),
            });
        }
        let width = 2 * half;
        let mut values = vec![0.0; rows * width];
        for r in 0..rows {
            for j in 0..half {
                let v = first_half[r * half + j];
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::ParameterOutOfRange {
                        name: "voter output",
                        value: v,
                        range: "[-1, 1]",
                    });
                }
                values[r * width + j] = v;
                values[r * width + half + j] = -v;
            }
        }
        Ok(Self {
            values,
            rows,
            half,
            labels: labels.to_vec(),
        })
    }

    /// Number of examples (rows).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of base voters `n`; the matrix has `2n` columns.
    pub fn half(&self) -> usize {
        self.half
    }

    pub fn width(&self) -> usize {
        2 * self.half
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// Output of voter `j` (0-based, `j < 2n`) on example `i`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * 2 * self.half + j]
    }

    /// All `2n` outputs for example `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let w = 2 * self.half;
        &self.values[i * w..(i + 1) * w]
    }
}

/// Normalized non-negative weights over `2n` self-complemented voters.
///
/// Construction clamps weights below `1e-15` to zero and renormalizes, so
/// stored weights sum to 1 up to machine rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Posterior {
    weights: Vec<f64>,
}

impl Posterior {
    /// Tolerance on the input sum and on the quasi-uniform pairing check.
    pub const NORMALIZATION_TOL: f64 = 1e-12;
    /// Weights below this are treated as exact zeros.
    pub const CLAMP: f64 = 1e-15;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::WeightCountMismatch {
                expected: 1,
                got: 0,
            });
        }
        let mut clamped = weights;
        for (index, w) in clamped.iter_mut().enumerate() {
            if *w < -Self::NORMALIZATION_TOL {
                return Err(Error::NegativeWeight { index, value: *w });
            }
            if *w < Self::CLAMP {
                *w = 0.0;
            }
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > Self::NORMALIZATION_TOL {
            return Err(Error::UnnormalizedPosterior { sum });
        }
        for w in clamped.iter_mut() {
            *w /= sum;
        }
        Ok(Self { weights: clamped })
    }

    /// Uniform posterior over all `size` voters.
    pub fn uniform(size: usize) -> Result<Self> {
        Self::new(vec![1.0 / size as f64; size])
    }

    /// Uniform posterior over the first `n` voters of a `2n` set; the
    /// complements get weight zero. Quasi-uniform by construction.
    pub fn uniform_first_half(n: usize) -> Result<Self> {
        let mut w = vec![0.0; 2 * n];
        for x in w.iter_mut().take(n) {
            *x = 1.0 / n as f64;
        }
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every complement pair carries total weight `1/n` (within
    /// [`Self::NORMALIZATION_TOL`]). Requires an even length `2n`.
    pub fn is_quasi_uniform(&self) -> bool {
        let len = self.weights.len();
        if len % 2 != 0 {
            return false;
        }
        let n = len / 2;
        let target = 1.0 / n as f64;
        (0..n).all(|i| (self.weights[i] + self.weights[i + n] - target).abs() <= Self::NORMALIZATION_TOL)
    }
}

impl TryFrom<Vec<f64>> for Posterior {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Posterior::new(weights)
    }
}

impl From<Posterior> for Vec<f64> {
    fn from(p: Posterior) -> Vec<f64> {
        p.weights
    }
}

/// First two margin moments and every statistic derived from them.
///
/// With margins in `[-1, 1]`: `gibbs_risk = (1 - mu1) / 2`,
/// `disagreement = (1 - mu2) / 2`, `joint_error = (1 - 2 mu1 + mu2) / 4`,
/// `joint_success = (1 + 2 mu1 + mu2) / 4`; the four probabilities satisfy
/// `joint_error + joint_success + disagreement = 1`. `bayes_risk` is the
/// fraction of examples with margin `<= 0` (zero margins count as errors).
/// `c_bound` is `1 - mu1^2 / mu2`, present only when `mu1 > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSummary {
    pub mu1: f64,
    pub mu2: f64,
    pub variance: f64,
    pub gibbs_risk: f64,
    pub disagreement: f64,
    pub joint_error: f64,
    pub joint_success: f64,
    pub bayes_risk: f64,
    pub c_bound: Option<f64>,
}
