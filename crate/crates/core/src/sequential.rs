//! Single-`K0` goodness-of-fit test, the sequential community-count search,
//! and the largest-relative-drop estimator.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::estimation::estimate_parameters_with;
use crate::model::{CommunityLabels, MultiLayerNetwork};
use crate::rng::derive_seed;
use crate::spectral::SpectralEmbedding;
use crate::statistic::{normalized_aggregation, trace_cubed_statistic};

/// Floor on `|T(K0)|` in the denominator of the drop ratio.
pub const ETA_FLOOR: f64 = 1e-12;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Rational approximation of the lower-tail quantile for `p <= 0.5`
/// (relative error about 1e-9), polished by one Newton step on the CDF.
fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    x - (normal_cdf(x) - p) / normal_pdf(x)
}

/// Inverse standard-normal CDF on `(0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {p} is outside (0, 1)"
        )));
    }
    Ok(if p == 0.5 {
        0.0
    } else if p > 0.5 {
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    })
}

/// Two-sided critical value `z_{1 - alpha/2}`.
pub fn critical_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance level {alpha} is outside (0, 1)"
        )));
    }
    normal_quantile(1.0 - alpha / 2.0)
}

pub fn default_k_max(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).max(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestOutcome {
    pub k0: usize,
    pub t: f64,
    pub z_crit: f64,
    pub reject: bool,
    pub labels: CommunityLabels,
}

/// Fit `k0` communities from a precomputed embedding and return the labels
/// and the statistic. The detection seed is derived from `(seed, k0)`.
fn statistic_at(
    net: &MultiLayerNetwork,
    embedding: &SpectralEmbedding,
    k0: usize,
    seed: u64,
) -> Result<(CommunityLabels, f64)> {
    let (labels, probs) =
        estimate_parameters_with(net, embedding, k0, derive_seed(seed, k0 as u64))?;
    let agg = normalized_aggregation(net, &probs)?;
    Ok((labels, trace_cubed_statistic(&agg).value()))
}

fn outcome(labels: CommunityLabels, k0: usize, t: f64, z_crit: f64) -> TestOutcome {
    TestOutcome {
        k0,
        t,
        z_crit,
        reject: t.abs() >= z_crit,
        labels,
    }
}

fn check_k0(net: &MultiLayerNetwork, k0: usize) -> Result<()> {
    if k0 == 0 || k0 > net.n() {
        return Err(Error::InvalidArgument(format!(
            "K0 = {k0} must lie in 1..={}",
            net.n()
        )));
    }
    Ok(())
}

/// Test `H0: K = k0` against `H1: K > k0` at level `alpha`.
pub fn test_at_k0(
    net: &MultiLayerNetwork,
    k0: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestOutcome> {
    check_k0(net, k0)?;
    let z_crit = critical_value(alpha)?;
    let embedding = SpectralEmbedding::compute(net, k0)?;
    let (labels, t) = statistic_at(net, &embedding, k0, seed)?;
    Ok(outcome(labels, k0, t, z_crit))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Accepted,
    KMaxExhausted,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Accepted => "accepted",
            Termination::KMaxExhausted => "k_max_exhausted",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NastResult {
    /// `None` when no candidate up to `k_max` was accepted.
    pub k_hat: Option<usize>,
    pub trace: Vec<TestOutcome>,
    pub terminated_by: Termination,
}

/// Test `K0 = 1, 2, ...` and stop at the first accepted candidate.
pub fn nast(net: &MultiLayerNetwork, alpha: f64, k_max: usize, seed: u64) -> Result<NastResult> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let z_crit = critical_value(alpha)?;
    let k_max = k_max.min(net.n());
    let embedding = SpectralEmbedding::compute(net, k_max)?;
    let mut trace = Vec::new();
    for k0 in 1..=k_max {
        let (labels, t) = statistic_at(net, &embedding, k0, seed)?;
        let out = outcome(labels, k0, t, z_crit);
        let accepted = !out.reject;
        trace.push(out);
        if accepted {
            return Ok(NastResult {
                k_hat: Some(k0),
                trace,
                terminated_by: Termination::Accepted,
            });
        }
    }
    Ok(NastResult {
        k_hat: None,
        trace,
        terminated_by: Termination::KMaxExhausted,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaResult {
    pub k_hat: usize,
    /// `etas[i]` is the ratio for `K0 = i + 2`.
    pub etas: Vec<f64>,
    /// `|T(K0)|` for `K0 = 1..=k_max`.
    pub abs_t: Vec<f64>,
}

impl EtaResult {
    pub fn eta(&self, k0: usize) -> Option<f64> {
        k0.checked_sub(2).and_then(|i| self.etas.get(i)).copied()
    }
}

/// Largest relative drop over a precomputed statistic sequence
/// `T(1), T(2), ...`. Needs at least two values.
pub fn eta_from_statistics(t_values: &[f64]) -> Result<EtaResult> {
    if t_values.len() < 2 {
        return Err(Error::InvalidArgument(
            "the drop ratio needs statistics for at least K0 = 1, 2".into(),
        ));
    }
    let abs_t: Vec<f64> = t_values.iter().map(|t| t.abs()).collect();
    let etas: Vec<f64> = abs_t
        .windows(2)
        .map(|w| w[0] / w[1].max(ETA_FLOOR))
        .collect();
    let mut best = 0;
    for (i, &e) in etas.iter().enumerate() {
        if e > etas[best] {
            best = i;
        }
    }
    Ok(EtaResult {
        k_hat: best + 2,
        etas,
        abs_t,
    })
}

/// Compute `T(K0)` for `K0 = 1..=k_max` and pick the largest relative drop.
pub fn eta_estimate(net: &MultiLayerNetwork, k_max: usize, seed: u64) -> Result<EtaResult> {
    let t = statistic_profile(net, k_max, seed)?;
    eta_from_statistics(&t)
}

/// `T(K0)` for `K0 = 1..=k_max`, sharing one embedding.
pub fn statistic_profile(net: &MultiLayerNetwork, k_max: usize, seed: u64) -> Result<Vec<f64>> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("k_max must be at least 2".into()));
    }
    if k_max > net.n() {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} exceeds n = {}",
            net.n()
        )));
    }
    let embedding = SpectralEmbedding::compute(net, k_max)?;
    (1..=k_max)
        .map(|k0| statistic_at(net, &embedding, k0, seed).map(|(_, t)| t))
        .collect()
}
