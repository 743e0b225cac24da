//! Population-facing scores over a real set `R` and a generated set `G`.
//!
//! | id | value | per-sample rows |
//! |----|-------|-----------------|
//! | `pce` | `ČE_k(G,R) − Ȟ_k(R)` | generated |
//! | `rce` | `ČE_k(R,G) − Ȟ_k(R)` | real |
//! | `re` | `Ȟ_k(G) − Ȟ_k(R)` | generated |
//! | `density` | `(1/(k N_G)) Σ_{R_i} #(G, B_{k,R}(R_i))` | real |
//! | `coverage` | `(1/N_R) Σ 1[#(G, B_{k,R}(R_i)) ≥ 1]` | real |
//! | `pc` | `(1/N_G) Σ 1[#(R, B_{k,G}(G_i)) ≥ k′]` | generated |
//! | `rc` | `(1/N_R) Σ 1[#(G, B_{k,R}(R_i)) ≥ k′]` | real |
//! | `fd` | Fréchet distance of moment-matched Gaussians | — |
//! | `renyi` | `D̃_α(G, R)`, union-ball ratio estimator | — |
//! | `pc-sigmoid` | sigmoid-smoothed PC (`Ĵ***₁(R, G)`, `C = k/k′`) | generated |
//!
//! Every per-sample vector averages to the reported value.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingSet, PairedInput};
use crate::error::{Error, Result};
use crate::estimators::{
    self, clamp_warning, cross_entropy_terms, entropy_terms, EstimatorParams, JVariant, SampleTerms, Warning,
};
use crate::frechet;
use crate::knn::NeighborIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricId {
    Pce,
    Rce,
    Re,
    Density,
    Coverage,
    Pc,
    Rc,
    Fd,
    Renyi,
    PcSigmoid,
}

impl MetricId {
    /// The default evaluation suite.
    pub const DEFAULT_SUITE: [MetricId; 8] = [
        MetricId::Pce,
        MetricId::Rce,
        MetricId::Re,
        MetricId::Density,
        MetricId::Coverage,
        MetricId::Pc,
        MetricId::Rc,
        MetricId::Fd,
    ];

    pub const ALL: [MetricId; 10] = [
        MetricId::Pce,
        MetricId::Rce,
        MetricId::Re,
        MetricId::Density,
        MetricId::Coverage,
        MetricId::Pc,
        MetricId::Rc,
        MetricId::Fd,
        MetricId::Renyi,
        MetricId::PcSigmoid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::Pce => "pce",
            MetricId::Rce => "rce",
            MetricId::Re => "re",
            MetricId::Density => "density",
            MetricId::Coverage => "coverage",
            MetricId::Pc => "pc",
            MetricId::Rc => "rc",
            MetricId::Fd => "fd",
            MetricId::Renyi => "renyi",
            MetricId::PcSigmoid => "pc-sigmoid",
        }
    }

    /// Parse a comma-separated list such as `pce,re`.
    pub fn parse_list(list: &str) -> Result<Vec<MetricId>> {
        let mut out = Vec::new();
        for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let id: MetricId = part.parse()?;
            if !out.contains(&id) {
                out.push(id);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("empty metric list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric {s:?}")))
    }
}

/// Which set a per-sample vector is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSide {
    Real,
    Generated,
}

/// Parameters for a full evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Neighbour order for PCE/RCE/RE/Density/Coverage/Rényi.
    pub k: usize,
    /// Ball order for PC/RC.
    pub prc_k: usize,
    /// Minimum opposite-set count for PC/RC.
    pub k_prime: usize,
    /// Rényi order.
    pub alpha: f64,
    /// Sigmoid steepness for `pc-sigmoid`.
    pub theta: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            k: 5,
            prc_k: 15,
            k_prime: 5,
            alpha: 2.0,
            theta: estimators::DEFAULT_THETA,
        }
    }
}

impl MetricParams {
    pub fn validate_for(&self, metrics: &[MetricId]) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if metrics.iter().any(|m| matches!(m, MetricId::Pc | MetricId::Rc | MetricId::PcSigmoid)) {
            check_multiple(self.prc_k, self.k_prime)?;
        }
        if metrics.contains(&MetricId::Renyi) && (self.alpha == 1.0 || !(self.alpha > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "Rényi divergence needs alpha > 0 and alpha != 1, got {}",
                self.alpha
            )));
        }
        if metrics.contains(&MetricId::PcSigmoid) && !(self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        Ok(())
    }
}

fn check_multiple(k: usize, k_prime: usize) -> Result<()> {
    if k_prime == 0 || k == 0 || k % k_prime != 0 {
        return Err(Error::NotMultiple { k, k_prime });
    }
    Ok(())
}

/// Parameters recorded alongside a score.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamsUsed {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
}

impl ParamsUsed {
    fn k(k: usize) -> Self {
        Self {
            k: Some(k),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metric_id: MetricId,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_sample: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attributed_set: Option<SampleSide>,
    pub params_used: ParamsUsed,
    pub warnings: Vec<Warning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MetricReport {
    fn scalar(metric_id: MetricId, value: f64, params_used: ParamsUsed) -> Self {
        Self {
            metric_id,
            value,
            per_sample: None,
            attributed_set: None,
            params_used,
            warnings: Vec::new(),
            note: None,
        }
    }

    fn with_samples(metric_id: MetricId, per_sample: Vec<f64>, side: SampleSide, params_used: ParamsUsed) -> Self {
        Self {
            metric_id,
            value: estimators::mean(&per_sample),
            per_sample: Some(per_sample),
            attributed_set: Some(side),
            params_used,
            warnings: Vec::new(),
            note: None,
        }
    }
}

/// Evaluates metrics over one `(R, G)` pair, sharing one neighbour index per
/// set and caching `Ȟ_k(R)` across PCE/RCE/RE.
pub struct Evaluator<'a> {
    real: &'a EmbeddingSet,
    generated: &'a EmbeddingSet,
    real_index: NeighborIndex<'a>,
    gen_index: NeighborIndex<'a>,
    real_entropy: Mutex<HashMap<usize, Arc<SampleTerms>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(input: &'a PairedInput) -> Self {
        Self::from_sets(&input.real, &input.generated).expect("PairedInput dimensions already checked")
    }

    pub fn from_sets(real: &'a EmbeddingSet, generated: &'a EmbeddingSet) -> Result<Self> {
        if real.d() != generated.d() {
            return Err(Error::DimensionMismatch {
                left: real.d(),
                right: generated.d(),
            });
        }
        let (real_index, gen_index) = rayon::join(|| NeighborIndex::build(real), || NeighborIndex::build(generated));
        Ok(Self {
            real,
            generated,
            real_index,
            gen_index,
            real_entropy: Mutex::new(HashMap::new()),
        })
    }

    pub fn real_index(&self) -> &NeighborIndex<'a> {
        &self.real_index
    }

    pub fn gen_index(&self) -> &NeighborIndex<'a> {
        &self.gen_index
    }

    /// `Ȟ_k(R)` terms, computed once per `k`.
    pub fn real_entropy(&self, k: usize) -> Result<Arc<SampleTerms>> {
        if let Some(terms) = self.real_entropy.lock().unwrap().get(&k) {
            return Ok(Arc::clone(terms));
        }
        let terms = Arc::new(entropy_terms(&self.real_index, k)?);
        self.real_entropy.lock().unwrap().insert(k, Arc::clone(&terms));
        Ok(terms)
    }

    fn relative_to_real(&self, id: MetricId, k: usize, terms: SampleTerms, side: SampleSide) -> Result<MetricReport> {
        let h_real = self.real_entropy(k)?;
        let baseline = h_real.mean();
        let per_sample = terms.terms.iter().map(|t| t - baseline).collect();
        let mut report = MetricReport::with_samples(id, per_sample, side, ParamsUsed::k(k));
        report.warnings = clamp_warning(terms.clamped + h_real.clamped);
        Ok(report)
    }

    /// Precision cross-entropy.
    pub fn pce(&self, k: usize) -> Result<MetricReport> {
        let ce = cross_entropy_terms(self.generated, &self.real_index, k)?;
        self.relative_to_real(MetricId::Pce, k, ce, SampleSide::Generated)
    }

    /// Recall cross-entropy.
    pub fn rce(&self, k: usize) -> Result<MetricReport> {
        let ce = cross_entropy_terms(self.real, &self.gen_index, k)?;
        self.relative_to_real(MetricId::Rce, k, ce, SampleSide::Real)
    }

    /// Recall entropy.
    pub fn re(&self, k: usize) -> Result<MetricReport> {
        let h_gen = entropy_terms(&self.gen_index, k)?;
        self.relative_to_real(MetricId::Re, k, h_gen, SampleSide::Generated)
    }

    /// Closed-ball counts of `others` inside each self-excluded kNN ball of
    /// `centers`.
    fn ball_counts(centers: &NeighborIndex<'_>, others: &NeighborIndex<'_>, k: usize) -> Result<Vec<usize>> {
        if centers.len() < k + 1 {
            return Err(Error::TooFewSamples {
                set: "ball centres",
                need: k + 1,
                have: centers.len(),
            });
        }
        let radii = centers.kth_dist2_all_rows(k)?;
        radii
            .par_iter()
            .enumerate()
            .map(|(i, &r2)| others.count_within_squared(centers.set().row(i), r2, None))
            .collect()
    }

    pub fn density(&self, k: usize) -> Result<MetricReport> {
        let counts = Self::ball_counts(&self.real_index, &self.gen_index, k)?;
        let scale = self.real.n() as f64 / (k as f64 * self.generated.n() as f64);
        let per_sample = counts.iter().map(|&c| c as f64 * scale).collect();
        let mut report = MetricReport::with_samples(MetricId::Density, per_sample, SampleSide::Real, ParamsUsed::k(k));
        report.note = Some("per-sample entries are #(G, B_k(R_i)) · N_R / (k · N_G), so their mean is Density".into());
        Ok(report)
    }

    fn threshold_report(
        id: MetricId,
        centers: &NeighborIndex<'_>,
        others: &NeighborIndex<'_>,
        k: usize,
        k_prime: usize,
        side: SampleSide,
    ) -> Result<MetricReport> {
        let counts = Self::ball_counts(centers, others, k)?;
        let per_sample = counts.iter().map(|&c| if c >= k_prime { 1.0 } else { 0.0 }).collect();
        let params = ParamsUsed {
            k: Some(k),
            k_prime: Some(k_prime),
            ..ParamsUsed::default()
        };
        Ok(MetricReport::with_samples(id, per_sample, side, params))
    }

    pub fn coverage(&self, k: usize) -> Result<MetricReport> {
        let mut report = Self::threshold_report(MetricId::Coverage, &self.real_index, &self.gen_index, k, 1, SampleSide::Real)?;
        report.params_used.k_prime = None;
        Ok(report)
    }

    /// (k, k′)-Precision Coverage.
    pub fn pc(&self, k: usize, k_prime: usize) -> Result<MetricReport> {
        check_multiple(k, k_prime)?;
        Self::threshold_report(MetricId::Pc, &self.gen_index, &self.real_index, k, k_prime, SampleSide::Generated)
    }

    /// (k, k′)-Recall Coverage.
    pub fn rc(&self, k: usize, k_prime: usize) -> Result<MetricReport> {
        check_multiple(k, k_prime)?;
        Self::threshold_report(MetricId::Rc, &self.real_index, &self.gen_index, k, k_prime, SampleSide::Real)
    }

    pub fn frechet(&self) -> Result<MetricReport> {
        let fd = frechet::frechet_distance(self.real, self.generated)?;
        Ok(MetricReport::scalar(MetricId::Fd, fd, ParamsUsed::default()))
    }

    /// `D̃_α(G, R)` with balls centred on real rows.
    pub fn renyi(&self, alpha: f64, k: usize) -> Result<MetricReport> {
        let est = estimators::renyi_divergence_hat(&self.gen_index, &self.real_index, alpha, k)?;
        let mut report = MetricReport::scalar(
            MetricId::Renyi,
            est.value,
            ParamsUsed {
                k: Some(k),
                alpha: Some(alpha),
                ..ParamsUsed::default()
            },
        );
        report.warnings = est.warnings;
        Ok(report)
    }

    /// Sigmoid-smoothed Precision Coverage: `Ĵ***₁(R, G)` with `C = k/k′`.
    pub fn pc_sigmoid(&self, k: usize, k_prime: usize, theta: f64) -> Result<MetricReport> {
        check_multiple(k, k_prime)?;
        let params = EstimatorParams {
            k,
            alpha: 1.0,
            theta,
            c: k / k_prime,
            variant: JVariant::SIGMOID,
        };
        let (terms, _) = estimators::j_terms(&self.real_index, &self.gen_index, &params)?;
        let used = ParamsUsed {
            k: Some(k),
            k_prime: Some(k_prime),
            alpha: Some(1.0),
            theta: Some(theta),
            c: Some(params.c),
        };
        Ok(MetricReport::with_samples(MetricId::PcSigmoid, terms, SampleSide::Generated, used))
    }

    pub fn evaluate(&self, metric: MetricId, params: &MetricParams) -> Result<MetricReport> {
        match metric {
            MetricId::Pce => self.pce(params.k),
            MetricId::Rce => self.rce(params.k),
            MetricId::Re => self.re(params.k),
            MetricId::Density => self.density(params.k),
            MetricId::Coverage => self.coverage(params.k),
            MetricId::Pc => self.pc(params.prc_k, params.k_prime),
            MetricId::Rc => self.rc(params.prc_k, params.k_prime),
            MetricId::Fd => self.frechet(),
            MetricId::Renyi => self.renyi(params.alpha, params.k),
            MetricId::PcSigmoid => self.pc_sigmoid(params.prc_k, params.k_prime, params.theta),
        }
    }

    pub fn evaluate_all(&self, metrics: &[MetricId], params: &MetricParams) -> Result<Vec<MetricReport>> {
        params.validate_for(metrics)?;
        metrics.iter().map(|&m| self.evaluate(m, params)).collect()
    }
}

pub fn pce(input: &PairedInput, k: usize) -> Result<MetricReport> {
    Evaluator::new(input).pce(k)
}

pub fn rce(input: &PairedInput, k: usize) -> Result<MetricReport> {
    Evaluator::new(input).rce(k)
}

pub fn re(input: &PairedInput, k: usize) -> Result<MetricReport> {
    Evaluator::new(input).re(k)
}

pub fn density(input: &PairedInput, k: usize) -> Result<MetricReport> {
    Evaluator::new(input).density(k)
}

pub fn coverage(input: &PairedInput, k: usize) -> Result<MetricReport> {
    Evaluator::new(input).coverage(k)
}

pub fn pc(input: &PairedInput, k: usize, k_prime: usize) -> Result<MetricReport> {
    Evaluator::new(input).pc(k, k_prime)
}

pub fn rc(input: &PairedInput, k: usize, k_prime: usize) -> Result<MetricReport> {
    Evaluator::new(input).rc(k, k_prime)
}

pub fn frechet_distance(input: &PairedInput) -> Result<MetricReport> {
    Evaluator::new(input).frechet()
}

pub fn evaluate(input: &PairedInput, metrics: &[MetricId], params: &MetricParams) -> Result<Vec<MetricReport>> {
    Evaluator::new(input).evaluate_all(metrics, params)
}
