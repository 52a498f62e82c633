//! PAC-Bayesian risk bounds for the majority vote.
//!
//! Each bound consumes empirical margin statistics of a posterior `Q` over a
//! self-complemented voter set with a uniform prior, the KL divergence
//! between `Q` and that prior, the sample size and a confidence level, and
//! produces a high-probability upper bound on the true majority-vote risk.
//!
//! The family, in increasing order of information used:
//!
//! - `B0`: twice the Gibbs risk level-set upper bound (the classical
//!   factor-two route);
//! - `B1`: plugs a Gibbs upper bound and a disagreement lower bound into the
//!   moment form of the C-bound;
//! - `B1s`: `B1` with the disagreement estimated on an unlabeled sample of
//!   size `m_u` (disagreement needs no labels);
//! - `B2`: maximizes the two-moment risk surface over a joint
//!   (disagreement, joint error) KL confidence region;
//! - `B2p`: `B2` with an extra level-set cap on the joint error, at the cost
//!   of splitting the confidence budget;
//! - `B3`: for quasi-uniform (aligned) posteriors, direct two-sided slacks on
//!   both margin moments (the KL term vanishes by alignment);
//! - `B3p`: the `B3` variant for sample-compressed voters (compression size
//!   1, e.g. kernel voters anchored on training points).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    kl_invert, maximize_fc_over_region, xi, FcRegion, InversionDirection, KlLevelSetQuery,
};
use crate::types::{MarginSummary, Posterior};

/// Identifier of a bound in the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundId {
    B0,
    B1,
    /// Semi-supervised variant of `B1`.
    B1s,
    B2,
    /// Tightened variant of `B2`.
    B2p,
    B3,
    /// Sample-compressed variant of `B3`.
    B3p,
}

impl BoundId {
    pub const ALL: [BoundId; 7] = [
        BoundId::B0,
        BoundId::B1,
        BoundId::B1s,
        BoundId::B2,
        BoundId::B2p,
        BoundId::B3,
        BoundId::B3p,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::B0 => "B0",
            BoundId::B1 => "B1",
            BoundId::B1s => "B1s",
            BoundId::B2 => "B2",
            BoundId::B2p => "B2p",
            BoundId::B3 => "B3",
            BoundId::B3p => "B3p",
        }
    }
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidInput {
                context: format!("unknown bound id {s:?}; expected one of B0 B1 B1s B2 B2p B3 B3p"),
            })
    }
}

/// Empirical statistics a bound may consume. Redundant fields are accepted
/// and reconciled through the moment identities; each bound demands only
/// what it uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_risk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disagreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu2: Option<f64>,
}

impl EmpiricalStats {
    pub fn from_summary(summary: &MarginSummary) -> Self {
        Self {
            gibbs_risk: Some(summary.gibbs_risk),
            disagreement: Some(summary.disagreement),
            joint_error: Some(summary.joint_error),
            mu1: Some(summary.mu1),
            mu2: Some(summary.mu2),
        }
    }

    fn require(field: Option<f64>, name: &str, lo: f64, hi: f64) -> Result<f64> {
        let v = field.ok_or_else(|| Error::InvalidInput {
            context: format!("this bound requires the empirical {name}"),
        })?;
        if !(lo..=hi).contains(&v) {
            return Err(Error::InvalidInput {
                context: format!("empirical {name} = {v} outside [{lo}, {hi}]"),
            });
        }
        Ok(v)
    }

    fn gibbs(&self) -> Result<f64> {
        Self::require(
            self.gibbs_risk.or(self.mu1.map(|m| (1.0 - m) / 2.0)),
            "Gibbs risk",
            0.0,
            1.0,
        )
    }

    fn disagreement(&self) -> Result<f64> {
        Self::require(
            self.disagreement.or(self.mu2.map(|m| (1.0 - m) / 2.0)),
            "disagreement",
            0.0,
            0.5,
        )
    }

    fn joint_error(&self) -> Result<f64> {
        Self::require(self.joint_error, "joint error", 0.0, 1.0)
    }

    fn first_moment(&self) -> Result<f64> {
        Self::require(
            self.mu1.or(self.gibbs_risk.map(|r| 1.0 - 2.0 * r)),
            "first margin moment",
            -1.0,
            1.0,
        )
    }

    fn second_moment(&self) -> Result<f64> {
        Self::require(
            self.mu2.or(self.disagreement.map(|d| 1.0 - 2.0 * d)),
            "second margin moment",
            0.0,
            1.0,
        )
    }
}

/// Everything a bound computation needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Labeled sample size.
    pub m: u64,
    /// Unlabeled sample size, for `B1s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_u: Option<u64>,
    /// Confidence parameter: the bound holds with probability `1 - delta`.
    pub delta: f64,
    /// `KL(Q || P)` against the uniform prior over the `2n` voters.
    pub kl_qp: f64,
    pub stats: EmpiricalStats,
    /// Sample-compression size of the voters (0 or 1).
    pub compression: u32,
    /// Whether the posterior is certified quasi-uniform by the caller.
    pub aligned: bool,
}

impl BoundInputs {
    /// Plain inputs from a margin summary; `compression`/`aligned` default
    /// to 0/false and can be overridden by the caller.
    pub fn from_summary(m: u64, delta: f64, kl_qp: f64, summary: &MarginSummary) -> Self {
        Self {
            m,
            m_u: None,
            delta,
            kl_qp,
            stats: EmpiricalStats::from_summary(summary),
            compression: 0,
            aligned: false,
        }
    }
}

/// Per-bound computation trace; only populated fields are serialized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundDiagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_gibbs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_disagreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_joint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disagreement_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_error_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_first_moment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_second_moment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_disagreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_joint_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_empty: Option<bool>,
    /// Value recomputed through the risk/disagreement form, as a consistency
    /// check on the moment form (`B3`/`B3p`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_form_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u32>,
}

/// A computed bound with its inputs echoed for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    /// Upper bound on the majority-vote risk, clamped into `[0, 1]`.
    pub value: f64,
    pub inputs: BoundInputs,
    pub diagnostics: BoundDiagnostics,
}

/// `KL(Q || P)` for a posterior against the uniform prior on its support
/// size: `sum_i q_i ln(q_i * len)`. At most `ln 2` for quasi-uniform
/// posteriors over `2n` voters.
pub fn kl_qp_vs_uniform(posterior: &Posterior) -> f64 {
    let len = posterior.len() as f64;
    posterior
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * (w * len).ln())
        .sum()
}

fn validate_inputs(inputs: &BoundInputs) -> Result<()> {
    if inputs.m == 0 {
        return Err(Error::ZeroSampleSize);
    }
    if !(inputs.delta > 0.0 && inputs.delta < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "delta",
            value: inputs.delta,
            range: "(0, 1)",
        });
    }
    if !(inputs.kl_qp >= 0.0 && inputs.kl_qp.is_finite()) {
        return Err(Error::ParameterOutOfRange {
            name: "kl_qp",
            value: inputs.kl_qp,
            range: "[0, inf)",
        });
    }
    if inputs.m_u == Some(0) {
        return Err(Error::ZeroSampleSize);
    }
    Ok(())
}

fn report(
    id: BoundId,
    value: f64,
    inputs: &BoundInputs,
    diagnostics: BoundDiagnostics,
) -> BoundReport {
    BoundReport {
        bound_id: id,
        value: value.clamp(0.0, 1.0),
        inputs: *inputs,
        diagnostics,
    }
}

/// Factor-two Gibbs bound: twice the supremum of the Gibbs-risk level set at
/// radius `(KL + ln(xi(m)/delta)) / m`, the Gibbs risk capped at 1/2.
pub fn bound0(inputs: &BoundInputs) -> Result<BoundReport> {
    validate_inputs(inputs)?;
    let r = inputs.stats.gibbs()?;
    let m = inputs.m as f64;
    let tau = (inputs.kl_qp + (xi(inputs.m)? / inputs.delta).ln()) / m;
    let sup = kl_invert(&KlLevelSetQuery {
        q: r,
        tau,
        direction: InversionDirection::Sup,
        cap: 0.5,
    })?;
    Ok(report(
        BoundId::B0,
        2.0 * sup.value,
        inputs,
        BoundDiagnostics {
            tau_gibbs: Some(tau),
            gibbs_upper: Some(sup.value),
            iterations: Some(sup.iterations),
            ..Default::default()
        },
    ))
}

/// Moment-form C-bound with a pessimistic Gibbs risk and an optimistic
/// disagreement: `1 - (1 - 2 r_up)^2 / (1 - 2 d_low)`. Returns the vacuous 1
/// as soon as the Gibbs upper bound reaches 1/2.
fn curvature_value(r_up: f64, d_low: f64) -> f64 {
    let num = 1.0 - 2.0 * r_up;
    let den = 1.0 - 2.0 * d_low;
    if num <= 1e-15 || den <= 1e-15 {
        return 1.0;
    }
    1.0 - num * num / den
}

fn bound1_impl(inputs: &BoundInputs, id: BoundId) -> Result<BoundReport> {
    validate_inputs(inputs)?;
    let r = inputs.stats.gibbs()?;
    let d = inputs.stats.disagreement()?;
    let m = inputs.m as f64;
    let half_delta = inputs.delta / 2.0;
    let tau_r = (inputs.kl_qp + (xi(inputs.m)? / half_delta).ln()) / m;
    // The disagreement is label-free, so its concentration can run on an
    // unlabeled sample when one is supplied.
    let (d_m, d_mf) = match id {
        BoundId::B1s => {
            let mu = inputs.m_u.ok_or(Error::MissingUnlabeledSize)?;
            (mu, mu as f64)
        }
        _ => (inputs.m, m),
    };
    let tau_d = (2.0 * inputs.kl_qp + (xi(d_m)? / half_delta).ln()) / d_mf;
    let sup = kl_invert(&KlLevelSetQuery {
        q: r,
        tau: tau_r,
        direction: InversionDirection::Sup,
        cap: 0.5,
    })?;
    let inf = kl_invert(&KlLevelSetQuery {
        q: d,
        tau: tau_d,
        direction: InversionDirection::Inf,
        cap: 1.0,
    })?;
    Ok(report(
        id,
        curvature_value(sup.value, inf.value),
        inputs,
        BoundDiagnostics {
            tau_gibbs: Some(tau_r),
            tau_disagreement: Some(tau_d),
            gibbs_upper: Some(sup.value),
            disagreement_lower: Some(inf.value),
            iterations: Some(sup.iterations + inf.iterations),
            ..Default::default()
        },
    ))
}

/// C-bound from separate Gibbs and disagreement level sets, each at
/// confidence `delta/2`.
pub fn bound1(inputs: &BoundInputs) -> Result<BoundReport> {
    bound1_impl(inputs, BoundId::B1)
}

/// Semi-supervised `B1`: the disagreement level set runs on an unlabeled
/// sample of size `m_u` (required), so `inputs.stats.disagreement` should be
/// the unlabeled estimate.
pub fn bound1_semi(inputs: &BoundInputs) -> Result<BoundReport> {
    bound1_impl(inputs, BoundId::B1s)
}

fn bound2_impl(inputs: &BoundInputs, id: BoundId) -> Result<BoundReport> {
    validate_inputs(inputs)?;
    let d = inputs.stats.disagreement()?;
    let e = inputs.stats.joint_error()?;
    let m = inputs.m as f64;
    let xi_m = xi(inputs.m)?;
    let (delta_region, e_cap, tau_joint_cap) = match id {
        BoundId::B2p => {
            let half = inputs.delta / 2.0;
            let tau_e = (2.0 * inputs.kl_qp + (xi_m / half).ln()) / m;
            let cap = kl_invert(&KlLevelSetQuery {
                q: e,
                tau: tau_e,
                direction: InversionDirection::Sup,
                cap: 1.0,
            })?;
            (half, Some(cap.value), Some(tau_e))
        }
        _ => (inputs.delta, None, None),
    };
    let tau = (2.0 * inputs.kl_qp + ((xi_m + m) / delta_region).ln()) / m;
    let out = maximize_fc_over_region(&FcRegion {
        d_s: d,
        e_s: e,
        tau,
        e_cap,
    })?;
    Ok(report(
        id,
        out.value,
        inputs,
        BoundDiagnostics {
            tau_joint: Some(tau),
            tau_disagreement: tau_joint_cap,
            joint_error_cap: e_cap,
            argmax_disagreement: out.argmax.map(|(dd, _)| dd),
            argmax_joint_error: out.argmax.map(|(_, ee)| ee),
            region_empty: Some(out.empty),
            iterations: Some(out.evaluations),
            ..Default::default()
        },
    ))
}

/// Joint-region bound: the supremum of the two-moment risk surface over the
/// trivalent KL confidence region around the empirical
/// (disagreement, joint error) pair.
pub fn bound2(inputs: &BoundInputs) -> Result<BoundReport> {
    bound2_impl(inputs, BoundId::B2)
}

/// `B2` with the joint error additionally capped by its own level set; the
/// confidence budget is split in half between the two events.
pub fn bound2_prime(inputs: &BoundInputs) -> Result<BoundReport> {
    bound2_impl(inputs, BoundId::B2p)
}

fn aligned_moment_value(mu1_low: f64, mu2_high: f64) -> f64 {
    if mu1_low <= 0.0 {
        return 1.0;
    }
    1.0 - mu1_low * mu1_low / mu2_high
}

fn bound3_impl(
    inputs: &BoundInputs,
    id: BoundId,
    eps_first: f64,
    eps_second: f64,
) -> Result<BoundReport> {
    let mu1 = inputs.stats.first_moment()?;
    let mu2 = inputs.stats.second_moment()?;
    let mu1_low = (mu1 - 2.0 * eps_first).max(0.0);
    let mu2_high = (mu2 + 2.0 * eps_second).min(1.0);
    let value = aligned_moment_value(mu1_low, mu2_high);
    // Same bound through the risk/disagreement rates; must agree to rounding.
    let r_up = ((1.0 - mu1) / 2.0 + eps_first).min(0.5);
    let d_low = ((1.0 - mu2) / 2.0 - eps_second).max(0.0);
    let rate_form = curvature_value(r_up, d_low);
    debug_assert!(
        (value - rate_form).abs() <= 1e-12,
        "moment and rate forms disagree: {value} vs {rate_form}"
    );
    Ok(report(
        id,
        value,
        inputs,
        BoundDiagnostics {
            epsilon_first_moment: Some(eps_first),
            epsilon_second_moment: Some(eps_second),
            rate_form_value: Some(rate_form),
            ..Default::default()
        },
    ))
}

/// Bound for aligned (quasi-uniform) posteriors: two-sided additive slacks
/// `2 eps` on both margin moments with `eps = sqrt(ln(xi(m)/(delta/2)) /
/// (2m))`; no KL term (alignment caps it structurally).
pub fn bound3(inputs: &BoundInputs) -> Result<BoundReport> {
    validate_inputs(inputs)?;
    if !inputs.aligned {
        return Err(Error::NotAligned);
    }
    let m = inputs.m as f64;
    let eps = ((xi(inputs.m)? / (inputs.delta / 2.0)).ln() / (2.0 * m)).sqrt();
    bound3_impl(inputs, BoundId::B3, eps, eps)
}

/// `B3` for sample-compressed voters of compression size 1: the effective
/// sample shrinks by the compression set and each moment pays an additive
/// penalty inside its slack.
pub fn bound3_prime(inputs: &BoundInputs) -> Result<BoundReport> {
    validate_inputs(inputs)?;
    if !inputs.aligned {
        return Err(Error::NotAligned);
    }
    if inputs.compression != 1 {
        return Err(Error::CompressionMismatch {
            expected: 1,
            got: inputs.compression,
        });
    }
    if inputs.m < 3 {
        return Err(Error::ParameterOutOfRange {
            name: "m",
            value: inputs.m as f64,
            range: "[3, inf)",
        });
    }
    let half_delta = inputs.delta / 2.0;
    let m1 = (inputs.m - 1) as f64;
    let m2 = (inputs.m - 2) as f64;
    let eps_first = ((4.0 + (xi(inputs.m - 1)? / half_delta).ln()) / (2.0 * m1)).sqrt();
    let eps_second = ((8.0 + (xi(inputs.m - 2)? / half_delta).ln()) / (2.0 * m2)).sqrt();
    bound3_impl(inputs, BoundId::B3p, eps_first, eps_second)
}

/// Dispatches on the bound identifier.
pub fn compute_bound(id: BoundId, inputs: &BoundInputs) -> Result<BoundReport> {
    match id {
        BoundId::B0 => bound0(inputs),
        BoundId::B1 => bound1(inputs),
        BoundId::B1s => bound1_semi(inputs),
        BoundId::B2 => bound2(inputs),
        BoundId::B2p => bound2_prime(inputs),
        BoundId::B3 => bound3(inputs),
        BoundId::B3p => bound3_prime(inputs),
    }
}
