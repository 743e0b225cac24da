//! kNN estimators of entropy, cross-entropy and the Rényi ratio `J_α`.
//!
//! Conventions fixed here and relied on by [`crate::metrics`]:
//!
//! - natural logarithms throughout;
//! - a zero kth-NN distance is clamped to [`DISTANCE_FLOOR`] and reported as
//!   one aggregated [`Warning::ZeroDistanceClamped`];
//! - entropy excludes the query row from its own set, cross-entropy does
//!   not (the two sets are formally distinct even when coordinates repeat);
//! - ball counts use the closed ball and never include the centre, the `+1`
//!   in the ratio denominator re-adds it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::knn::{mixed_ball_stats, NeighborIndex, Side};
use crate::special::{digamma, ln_unit_ball_volume};

/// Replacement for a zero kth-NN distance.
pub const DISTANCE_FLOOR: f64 = 1e-12;

/// Default sigmoid steepness.
pub const DEFAULT_THETA: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// `count` kth-NN distances were zero and were clamped.
    ZeroDistanceClamped { count: usize },
    /// `count` ratio denominators were zero; those terms are infinite.
    ZeroDenominator { count: usize },
    /// `Ĵ = 0`, so the divergence is reported as +∞.
    DivergenceUndefined,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ZeroDistanceClamped { count } => {
                write!(f, "{count} zero kth-NN distance(s) clamped to {DISTANCE_FLOOR:e}")
            }
            Warning::ZeroDenominator { count } => {
                write!(f, "{count} ball(s) with zero denominator")
            }
            Warning::DivergenceUndefined => write!(f, "J estimate is 0, divergence is +inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateValue {
    /// Estimate in nats (or the unitless ratio for `J`).
    pub value: f64,
    /// Number of terms averaged.
    pub n_used: usize,
    pub warnings: Vec<Warning>,
}

/// Per-sample log terms of an entropy-type estimator.
#[derive(Debug, Clone)]
pub struct SampleTerms {
    pub terms: Vec<f64>,
    pub clamped: usize,
}

impl SampleTerms {
    pub fn mean(&self) -> f64 {
        mean(&self.terms)
    }

    pub fn warnings(&self) -> Vec<Warning> {
        clamp_warning(self.clamped)
    }

    fn into_estimate(self) -> EstimateValue {
        EstimateValue {
            value: self.mean(),
            n_used: self.terms.len(),
            warnings: self.warnings(),
        }
    }
}

pub(crate) fn clamp_warning(clamped: usize) -> Vec<Warning> {
    if clamped > 0 {
        vec![Warning::ZeroDistanceClamped { count: clamped }]
    } else {
        Vec::new()
    }
}

/// Sequential sum in index order, so parallel producers stay deterministic.
pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `log(count · e^{−Ψ(k)} · c̄ · D^d)` from squared kth distances.
fn log_terms(dist2: &[f64], count: usize, k: usize, d: usize) -> Result<SampleTerms> {
    let offset = (count as f64).ln() - digamma(k as f64)? + ln_unit_ball_volume(d);
    let floor2 = DISTANCE_FLOOR * DISTANCE_FLOOR;
    let half_d = 0.5 * d as f64;
    let mut clamped = 0;
    let terms = dist2
        .iter()
        .map(|&r2| {
            let r2 = if r2 == 0.0 {
                clamped += 1;
                floor2
            } else {
                r2
            };
            offset + half_d * r2.ln()
        })
        .collect();
    Ok(SampleTerms { terms, clamped })
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(())
}

/// Per-row terms of `Ȟ_k(X)`.
pub fn entropy_terms(x: &NeighborIndex<'_>, k: usize) -> Result<SampleTerms> {
    check_k(k)?;
    let n = x.len();
    if n < k + 1 {
        return Err(Error::TooFewSamples {
            set: "entropy input",
            need: k + 1,
            have: n,
        });
    }
    log_terms(&x.kth_dist2_all_rows(k)?, n - 1, k, x.d())
}

/// `Ȟ_k(X) = (1/N_X) Σ log((N_X − 1) e^{−Ψ(k)} c̄ D_{k,X}(X_i)^d)`.
pub fn entropy_knn(x: &NeighborIndex<'_>, k: usize) -> Result<EstimateValue> {
    Ok(entropy_terms(x, k)?.into_estimate())
}

/// Per-row terms of `ČE_k(X, Y)`, one per row of `x`.
pub fn cross_entropy_terms(x: &EmbeddingSet, y: &NeighborIndex<'_>, k: usize) -> Result<SampleTerms> {
    check_k(k)?;
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch {
            left: x.d(),
            right: y.d(),
        });
    }
    if y.len() < k {
        return Err(Error::TooFewSamples {
            set: "cross-entropy reference",
            need: k,
            have: y.len(),
        });
    }
    log_terms(&y.kth_dist2_for(x, k)?, y.len(), k, x.d())
}

/// `ČE_k(X, Y) = (1/N_X) Σ log(N_Y e^{−Ψ(k)} c̄ D_{k,Y}(X_i)^d)`.
pub fn cross_entropy_knn(x: &EmbeddingSet, y: &NeighborIndex<'_>, k: usize) -> Result<EstimateValue> {
    Ok(cross_entropy_terms(x, y, k)?.into_estimate())
}

/// Which set defines the ball radius around each `Y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallSet {
    /// kth neighbour in `Z = X ∪ Y`.
    Union,
    /// kth neighbour in `Y` alone.
    SelfSet,
}

/// Function applied to each scaled ratio `x_i = η^α · ratio_i^α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outer {
    /// `x_i` itself.
    Power,
    /// `σ(x_i; θ) = 1 / (1 + e^{−θ(x_i − η/C)})`, a smooth stand-in for
    /// the indicator `1[x_i ≥ η/C]`.
    Sigmoid,
}

/// Construction of a `J_α` estimator: ball set, whether the denominator
/// gets `+1`, and the outer function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JVariant {
    pub ball: BallSet,
    pub plus_one: bool,
    pub outer: Outer,
}

impl JVariant {
    /// `Ĵ_α`: union ball, `+1`, power.
    pub const UNION_BALL: JVariant = JVariant {
        ball: BallSet::Union,
        plus_one: true,
        outer: Outer::Power,
    };
    /// `Ĵ*_α`: ball over `Y`, no `+1`.
    pub const SELF_BALL: JVariant = JVariant {
        ball: BallSet::SelfSet,
        plus_one: false,
        outer: Outer::Power,
    };
    /// `Ĵ**_α`: ball over `Y`, `+1`.
    pub const PLUS_ONE: JVariant = JVariant {
        ball: BallSet::SelfSet,
        plus_one: true,
        outer: Outer::Power,
    };
    /// `Ĵ***_α`: ball over `Y`, `+1`, sigmoid.
    pub const SIGMOID: JVariant = JVariant {
        ball: BallSet::SelfSet,
        plus_one: true,
        outer: Outer::Sigmoid,
    };
}

impl FromStr for JVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union-ball" => Ok(Self::UNION_BALL),
            "self-ball" => Ok(Self::SELF_BALL),
            "plus-one" => Ok(Self::PLUS_ONE),
            "sigmoid" => Ok(Self::SIGMOID),
            other => Err(Error::InvalidParameter(format!(
                "unknown estimator variant {other:?} (expected union-ball, self-ball, plus-one or sigmoid)"
            ))),
        }
    }
}

/// Every knob of the `J_α` family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub k: usize,
    pub alpha: f64,
    /// Sigmoid steepness.
    pub theta: f64,
    /// Coverage multiplicity `C`; the sigmoid threshold is `η/C`.
    pub c: usize,
    pub variant: JVariant,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            k: 5,
            alpha: 1.0,
            theta: DEFAULT_THETA,
            c: 1,
            variant: JVariant::UNION_BALL,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        if self.c == 0 {
            return Err(Error::InvalidParameter("C must be at least 1".into()));
        }
        Ok(())
    }
}

/// Numerically stable logistic function.
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Ball counts `(#X, #Y)` around every row of `Y`, centre excluded.
fn ball_counts(x: &NeighborIndex<'_>, y: &NeighborIndex<'_>, k: usize, ball: BallSet) -> Result<Vec<(usize, usize)>> {
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch {
            left: x.d(),
            right: y.d(),
        });
    }
    match ball {
        BallSet::Union => {
            let available = x.len() + y.len() - 1;
            if k > available {
                return Err(Error::KOutOfRange { k, available });
            }
            (0..y.len())
                .into_par_iter()
                .map(|i| mixed_ball_stats(x, y, Side::B, i, k).map(|b| (b.count_a, b.count_b)))
                .collect()
        }
        BallSet::SelfSet => {
            let radii = y.kth_dist2_all_rows(k)?;
            radii
                .par_iter()
                .enumerate()
                .map(|(i, &r2)| {
                    let c = y.set().row(i);
                    Ok((
                        x.count_within_squared(c, r2, None)?,
                        y.count_within_squared(c, r2, Some(i))?,
                    ))
                })
                .collect()
        }
    }
}

/// Per-ball terms of the selected `J_α` estimator, one per row of `Y`,
/// scaled so that the estimate is their mean. Returns the number of zero
/// denominators alongside.
pub fn j_terms(x: &NeighborIndex<'_>, y: &NeighborIndex<'_>, params: &EstimatorParams) -> Result<(Vec<f64>, usize)> {
    params.validate()?;
    let EstimatorParams {
        k,
        alpha,
        theta,
        c,
        variant,
    } = *params;
    let eta = y.len() as f64 / x.len() as f64;
    let scale = eta.powf(alpha);
    let threshold = eta / c as f64;
    let counts = ball_counts(x, y, k, variant.ball)?;
    let mut zero_denominators = 0;
    let terms = counts
        .into_iter()
        .map(|(nx, ny)| {
            let denom = (ny + usize::from(variant.plus_one)) as f64;
            if denom == 0.0 {
                zero_denominators += 1;
            }
            let ratio = nx as f64 / denom;
            let scaled = if nx == 0 { 0.0 } else { scale * ratio.powf(alpha) };
            match variant.outer {
                Outer::Power => scaled,
                Outer::Sigmoid => logistic(theta * (scaled - threshold)),
            }
        })
        .collect();
    Ok((terms, zero_denominators))
}

/// The `J_α` family in one entry point; see [`JVariant`].
pub fn j_variant(x: &NeighborIndex<'_>, y: &NeighborIndex<'_>, params: &EstimatorParams) -> Result<EstimateValue> {
    let (terms, zero) = j_terms(x, y, params)?;
    let warnings = if zero > 0 {
        vec![Warning::ZeroDenominator { count: zero }]
    } else {
        Vec::new()
    };
    Ok(EstimateValue {
        value: mean(&terms),
        n_used: terms.len(),
        warnings,
    })
}

/// `Ĵ_α(X, Y) = (η^α / N_Y) Σ_i (#(X, B) / (#(Y, B) + 1))^α` with
/// `B = B_{k,X∪Y}(Y_i)` and `η = N_Y / N_X`.
pub fn renyi_j_hat(x: &NeighborIndex<'_>, y: &NeighborIndex<'_>, alpha: f64, k: usize) -> Result<EstimateValue> {
    j_variant(
        x,
        y,
        &EstimatorParams {
            k,
            alpha,
            variant: JVariant::UNION_BALL,
            ..EstimatorParams::default()
        },
    )
}

/// `D̃_α(X, Y) = log Ĵ_α(X, Y) / (α − 1)`; +∞ with a warning when `Ĵ = 0`.
pub fn renyi_divergence_hat(x: &NeighborIndex<'_>, y: &NeighborIndex<'_>, alpha: f64, k: usize) -> Result<EstimateValue> {
    if alpha == 1.0 {
        return Err(Error::InvalidParameter("Rényi divergence needs alpha != 1".into()));
    }
    let j = renyi_j_hat(x, y, alpha, k)?;
    let mut warnings = j.warnings;
    let value = if j.value == 0.0 {
        warnings.push(Warning::DivergenceUndefined);
        f64::INFINITY
    } else {
        j.value.ln() / (alpha - 1.0)
    };
    Ok(EstimateValue {
        value,
        n_used: j.n_used,
        warnings,
    })
}
