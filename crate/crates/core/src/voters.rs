//! Voter families and vote-matrix assembly.
//!
//! All voter sets are *self-complemented*: the first `n` voters are stored
//! explicitly and voter `j + n` is defined as the negation of voter `j`.
//! Supported families: decision stumps over single attributes, kernel score
//! voters anchored at sample points (plus a constant bias voter), and
//! precomputed per-example outputs for externally trained voters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, Example, VoteMatrix};

/// A one-attribute threshold classifier. Output is `polarity` when the
/// attribute exceeds the threshold and `-polarity` otherwise; an exact tie
/// falls on the `-polarity` side, so negating the polarity negates the output
/// for every input including ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub attribute: usize,
    pub threshold: f64,
    pub polarity: i8,
}

impl Stump {
    #[inline]
    pub fn evaluate(&self, features: &[f64]) -> f64 {
        if features[self.attribute] > self.threshold {
            self.polarity as f64
        } else {
            -self.polarity as f64
        }
    }
}

/// Kernel function used by score voters. RBF values lie in `(0, 1]` by
/// construction; linear kernels are validated against the `[-1, 1]` output
/// range wherever they are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Rbf { gamma: f64 },
    Linear,
}

impl KernelSpec {
    pub fn evaluate(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelSpec::Rbf { gamma } => {
                let squared: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * squared).exp()
            }
            KernelSpec::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// Storage for the first half of a self-complemented voter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VoterKind {
    Stumps { stumps: Vec<Stump> },
    /// Voter 0 is the constant bias `+1`; voter `i >= 1` evaluates the kernel
    /// against `anchors[i - 1]`.
    Kernel {
        spec: KernelSpec,
        anchors: Vec<Vec<f64>>,
    },
    /// Precomputed first-half outputs, one row per example of a fixed
    /// dataset. Cannot be evaluated on unseen points.
    Explicit { outputs: Vec<Vec<f64>> },
}

/// A set of `2n` voters closed under negation, with its sample-compression
/// size (how many training examples each voter is built from: 0 for stumps
/// and externally anchored kernels, 1 for kernels anchored on the training
/// sample itself).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfComplementedVoterSet {
    #[serde(flatten)]
    kind: VoterKind,
    compression: u32,
}

impl SelfComplementedVoterSet {
    pub fn new(kind: VoterKind, compression: u32) -> Self {
        Self { kind, compression }
    }

    pub fn kind(&self) -> &VoterKind {
        &self.kind
    }

    pub fn compression(&self) -> u32 {
        self.compression
    }

    /// Number of base voters `n` (the full set has `2n`).
    pub fn half_count(&self) -> usize {
        match &self.kind {
            VoterKind::Stumps { stumps } => stumps.len(),
            VoterKind::Kernel { anchors, .. } => anchors.len() + 1,
            VoterKind::Explicit { outputs } => outputs.first().map_or(0, Vec::len),
        }
    }

    /// Evaluates the first `n` voters on one feature vector. Not available
    /// for the `Explicit` kind, whose outputs exist only for its original
    /// sample.
    pub fn evaluate_first_half(&self, features: &[f64], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        match &self.kind {
            VoterKind::Stumps { stumps } => {
                for stump in stumps {
                    if stump.attribute >= features.len() {
                        return Err(Error::DimensionMismatch {
                            context: format!(
                                "stump attribute {} but example has {} features",
                                stump.attribute,
                                features.len()
                            ),
                        });
                    }
                    out.push(stump.evaluate(features));
                }
            }
            VoterKind::Kernel { spec, anchors } => {
                out.push(1.0);
                for (col, anchor) in anchors.iter().enumerate() {
                    if anchor.len() != features.len() {
                        return Err(Error::DimensionMismatch {
                            context: format!(
                                "anchor {} has {} features, example has {}",
                                col,
                                anchor.len(),
                                features.len()
                            ),
                        });
                    }
                    let v = spec.evaluate(anchor, features);
                    if !(-1.0..=1.0).contains(&v) {
                        return Err(Error::KernelOutOfRange {
                            row: 0,
                            col: col + 1,
                            value: v,
                        });
                    }
                    out.push(v);
                }
            }
            VoterKind::Explicit { .. } => {
                return Err(Error::InvalidInput {
                    context: "explicit voters carry no rule to evaluate on new examples".into(),
                });
            }
        }
        Ok(())
    }
}

/// Result of [`build_stumps`]: the voter set plus any degenerate-attribute
/// warnings.
#[derive(Debug, Clone)]
pub struct StumpBuild {
    pub voters: SelfComplementedVoterSet,
    pub warnings: Vec<String>,
}

/// Builds `per_attribute` positive-polarity stumps per attribute, thresholds
/// at the equally spaced interior points `k / (T + 1)` of the attribute's
/// training range. A constant attribute contributes a single stump at its
/// midpoint, with a warning.
pub fn build_stumps(data: &Dataset, per_attribute: usize) -> Result<StumpBuild> {
    if per_attribute == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "per_attribute",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let dim = data.feature_count();
    if dim == 0 {
        return Err(Error::InvalidInput {
            context: "dataset has no features to build stumps on".into(),
        });
    }
    let mut stumps = Vec::with_capacity(dim * per_attribute);
    let mut warnings = Vec::new();
    for attribute in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for ex in data.examples() {
            lo = lo.min(ex.features[attribute]);
            hi = hi.max(ex.features[attribute]);
        }
        if hi > lo {
            for k in 1..=per_attribute {
                let fraction = k as f64 / (per_attribute + 1) as f64;
                stumps.push(Stump {
                    attribute,
                    threshold: lo + (hi - lo) * fraction,
                    polarity: 1,
                });
            }
        } else {
            warnings.push(format!(
                "attribute {attribute} is constant ({lo}); emitting a single midpoint stump"
            ));
            stumps.push(Stump {
                attribute,
                threshold: lo,
                polarity: 1,
            });
        }
    }
    Ok(StumpBuild {
        voters: SelfComplementedVoterSet::new(VoterKind::Stumps { stumps }, 0),
        warnings,
    })
}

fn kernel_set(anchors_data: &Dataset, spec: KernelSpec, compression: u32) -> Result<SelfComplementedVoterSet> {
    let anchors: Vec<Vec<f64>> = anchors_data
        .examples()
        .iter()
        .map(|e| e.features.clone())
        .collect();
    // Validate the kernel on all anchor pairs up front; evaluation-time
    // checks cover unseen points.
    for (i, a) in anchors.iter().enumerate() {
        for (j, b) in anchors.iter().enumerate().skip(i) {
            let v = spec.evaluate(a, b);
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::KernelOutOfRange {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(SelfComplementedVoterSet::new(
        VoterKind::Kernel { spec, anchors },
        compression,
    ))
}

/// Kernel score voters anchored on the training sample itself: one bias
/// voter plus one voter per training point. Sample-compression size 1.
pub fn build_kernel_voters(train: &Dataset, spec: KernelSpec) -> Result<SelfComplementedVoterSet> {
    kernel_set(train, spec, 1)
}

/// Kernel score voters anchored on a voter-generation sample disjoint from
/// the training data. The voters then depend on no training example, so the
/// compression size is 0 and the non-compressed bounds stay valid.
pub fn build_kernel_voters_disjoint(
    anchors: &Dataset,
    spec: KernelSpec,
) -> Result<SelfComplementedVoterSet> {
    kernel_set(anchors, spec, 0)
}

/// Per-attribute location and scale of a training sample, for
/// [`tanh_normalize`]. Uses the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeStats {
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

impl AttributeStats {
    pub fn from_dataset(data: &Dataset) -> Self {
        let dim = data.feature_count();
        let m = data.len() as f64;
        let mut mean = vec![0.0; dim];
        for ex in data.examples() {
            for (s, &x) in mean.iter_mut().zip(&ex.features) {
                *s += x;
            }
        }
        for s in mean.iter_mut() {
            *s /= m;
        }
        let mut var = vec![0.0; dim];
        for ex in data.examples() {
            for (j, v) in var.iter_mut().enumerate() {
                let d = ex.features[j] - mean[j];
                *v += d * d;
            }
        }
        let std_dev = var.into_iter().map(|v| (v / m).sqrt()).collect();
        Self { mean, std_dev }
    }
}

/// Squashes every attribute into `(-1, 1)` via `tanh((x - mean) / std_dev)`,
/// with the statistics taken from a (training) sample. A zero-variance
/// attribute maps to 0.
pub fn tanh_normalize(data: &Dataset, stats: &AttributeStats) -> Result<Dataset> {
    if stats.mean.len() != data.feature_count() || stats.std_dev.len() != data.feature_count() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "normalization statistics cover {} attributes, dataset has {}",
                stats.mean.len(),
                data.feature_count()
            ),
        });
    }
    let examples = data
        .examples()
        .iter()
        .map(|ex| {
            let features = ex
                .features
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    if stats.std_dev[j] == 0.0 {
                        0.0
                    } else {
                        ((x - stats.mean[j]) / stats.std_dev[j]).tanh()
                    }
                })
                .collect();
            Example {
                features,
                label: ex.label,
            }
        })
        .collect();
    Dataset::new(data.name.clone(), examples)
}

fn fill_row(
    voters: &SelfComplementedVoterSet,
    example: &Example,
    row_index: usize,
    scratch: &mut Vec<f64>,
    row: &mut [f64],
) -> Result<()> {
    match voters.kind() {
        VoterKind::Explicit { outputs } => {
            let stored = &outputs[row_index];
            if stored.len() != row.len() {
                return Err(Error::DimensionMismatch {
                    context: format!(
                        "explicit outputs row {row_index} has {} voters, expected {}",
                        stored.len(),
                        row.len()
                    ),
                });
            }
            row.copy_from_slice(stored);
        }
        _ => {
            voters
                .evaluate_first_half(&example.features, scratch)
                .map_err(|e| match e {
                    // Attach the example index to kernel range violations.
                    Error::KernelOutOfRange { col, value, .. } => Error::KernelOutOfRange {
                        row: row_index,
                        col,
                        value,
                    },
                    other => other,
                })?;
            row.copy_from_slice(scratch);
        }
    }
    Ok(())
}

/// First-half outputs of every voter on every example, as a flat row-major
/// buffer, then completed into a [`VoteMatrix`]. Dispatches to rayon when the
/// `parallel` feature is on.
pub fn vote_matrix(voters: &SelfComplementedVoterSet, data: &Dataset) -> Result<VoteMatrix> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let n = checked_half(voters, data)?;
        let mut first = vec![0.0; data.len() * n];
        first
            .par_chunks_mut(n)
            .zip(data.examples().par_iter())
            .enumerate()
            .try_for_each(|(i, (row, example))| {
                let mut scratch = Vec::with_capacity(n);
                fill_row(voters, example, i, &mut scratch, row)
            })?;
        let labels: Vec<i8> = data.labels().collect();
        VoteMatrix::from_first_half(&first, data.len(), n, &labels)
    }
    #[cfg(not(feature = "parallel"))]
    {
        vote_matrix_sequential(voters, data)
    }
}

/// Sequential vote-matrix construction; always compiled, used as the
/// baseline in benchmarks and as the fallback without the `parallel`
/// feature.
pub fn vote_matrix_sequential(
    voters: &SelfComplementedVoterSet,
    data: &Dataset,
) -> Result<VoteMatrix> {
    let n = checked_half(voters, data)?;
    let mut first = vec![0.0; data.len() * n];
    let mut scratch = Vec::with_capacity(n);
    for (i, example) in data.examples().iter().enumerate() {
        let row = &mut first[i * n..(i + 1) * n];
        fill_row(voters, example, i, &mut scratch, row)?;
    }
    let labels: Vec<i8> = data.labels().collect();
    VoteMatrix::from_first_half(&first, data.len(), n, &labels)
}

fn checked_half(voters: &SelfComplementedVoterSet, data: &Dataset) -> Result<usize> {
    let n = voters.half_count();
    if n == 0 {
        return Err(Error::InvalidInput {
            context: "voter set is empty".into(),
        });
    }
    if let VoterKind::Explicit { outputs } = voters.kind() {
        if outputs.len() != data.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "explicit outputs cover {} examples, dataset has {}",
                    outputs.len(),
                    data.len()
                ),
            });
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toy_data() -> Dataset {
        let examples = vec![
            Example::new(vec![0.0, 5.0], -1).unwrap(),
            Example::new(vec![1.0, 5.0], 1).unwrap(),
        ];
        Dataset::new("toy", examples).unwrap()
    }

    #[test]
    fn stump_threshold_spacing() {
        let build = build_stumps(&toy_data(), 10).unwrap();
        let VoterKind::Stumps { stumps } = build.voters.kind() else {
            panic!("expected stumps");
        };
        // Attribute 0 spans [0, 1]: thresholds k/11.
        for (k, stump) in stumps.iter().take(10).enumerate() {
            assert_eq!(stump.attribute, 0);
            assert_abs_diff_eq!(stump.threshold, (k + 1) as f64 / 11.0, epsilon = 1e-15);
        }
        // Attribute 1 is constant: one midpoint stump plus a warning.
        assert_eq!(stumps.len(), 11);
        assert_eq!(stumps[10].attribute, 1);
        assert_eq!(stumps[10].threshold, 5.0);
        assert_eq!(build.warnings.len(), 1);
        assert!(build.warnings[0].contains("attribute 1"));
        assert_eq!(build.voters.compression(), 0);
    }

    #[test]
    fn stump_tie_falls_on_negative_side() {
        let s = Stump {
            attribute: 0,
            threshold: 0.5,
            polarity: 1,
        };
        assert_eq!(s.evaluate(&[0.5]), -1.0);
        assert_eq!(s.evaluate(&[0.6]), 1.0);
        let neg = Stump {
            attribute: 0,
            threshold: 0.5,
            polarity: -1,
        };
        // The negated stump is the exact complement, ties included.
        for x in [0.2, 0.5, 0.9] {
            assert_eq!(neg.evaluate(&[x]), -s.evaluate(&[x]));
        }
    }

    #[test]
    fn kernel_voters_include_bias_and_validate_range() {
        let data = toy_data();
        let voters = build_kernel_voters(&data, KernelSpec::Rbf { gamma: 1.0 }).unwrap();
        assert_eq!(voters.half_count(), 3);
        assert_eq!(voters.compression(), 1);
        let mut out = Vec::new();
        voters.evaluate_first_half(&[0.0, 5.0], &mut out).unwrap();
        assert_eq!(out[0], 1.0);
        assert_abs_diff_eq!(out[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[2], (-1.0f64).exp(), epsilon = 1e-15);

        // A linear kernel on these features leaves [-1, 1]: rejected with the
        // offending pair.
        let err = build_kernel_voters(&data, KernelSpec::Linear).unwrap_err();
        assert!(matches!(err, Error::KernelOutOfRange { .. }));
    }

    #[test]
    fn disjoint_kernel_voters_are_uncompressed() {
        let data = toy_data();
        let voters = build_kernel_voters_disjoint(&data, KernelSpec::Rbf { gamma: 0.5 }).unwrap();
        assert_eq!(voters.compression(), 0);
    }

    #[test]
    fn tanh_normalization_squashes_and_zeroes_constants() {
        let data = toy_data();
        let stats = AttributeStats::from_dataset(&data);
        assert_abs_diff_eq!(stats.mean[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(stats.std_dev[0], 0.5, epsilon = 1e-15);
        assert_eq!(stats.std_dev[1], 0.0);
        let normalized = tanh_normalize(&data, &stats).unwrap();
        let ex = normalized.examples();
        assert_abs_diff_eq!(ex[0].features[0], (-1.0f64).tanh(), epsilon = 1e-15);
        assert_abs_diff_eq!(ex[1].features[0], (1.0f64).tanh(), epsilon = 1e-15);
        // Constant attribute maps to zero for every example.
        assert_eq!(ex[0].features[1], 0.0);
        assert_eq!(ex[1].features[1], 0.0);
    }

    #[test]
    fn vote_matrix_parallel_and_sequential_agree() {
        let data = toy_data();
        let build = build_stumps(&data, 3).unwrap();
        let a = vote_matrix(&build.voters, &data).unwrap();
        let b = vote_matrix_sequential(&build.voters, &data).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows(), 2);
        assert_eq!(a.half(), 4);
    }

    #[test]
    fn explicit_outputs_round_trip_and_guard_row_count() {
        let outputs = vec![vec![1.0, -0.5], vec![-1.0, 0.25]];
        let voters = SelfComplementedVoterSet::new(VoterKind::Explicit { outputs }, 0);
        let data = toy_data();
        let f = vote_matrix(&voters, &data).unwrap();
        assert_eq!(f.get(0, 0), 1.0);
        assert_eq!(f.get(1, 3), -0.25);
        let mut out = Vec::new();
        assert!(voters.evaluate_first_half(&[0.0, 0.0], &mut out).is_err());

        let short = SelfComplementedVoterSet::new(
            VoterKind::Explicit {
                outputs: vec![vec![1.0, 1.0]],
            },
            0,
        );
        assert!(vote_matrix(&short, &data).is_err());
    }

    #[test]
    fn voter_set_serde_round_trip() {
        let data = toy_data();
        let voters = build_kernel_voters(&data, KernelSpec::Rbf { gamma: 2.0 }).unwrap();
        let json = serde_json::to_string(&voters).unwrap();
        assert!(json.contains("\"type\":\"rbf\""));
        let back: SelfComplementedVoterSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, voters);
    }
}
