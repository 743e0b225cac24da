//! Sample- and mode-level dissection of per-sample contributions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{Labels, PairedInput};
use crate::error::{Error, Result};
use crate::metrics::{Evaluator, MetricId, MetricReport, SampleSide};

/// Severity attached to a generated sample by its per-sample PCE term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlagTier {
    None,
    Warning,
    Memorization,
}

impl FlagTier {
    pub fn as_str(self) -> &'static str {
        match self {
            FlagTier::None => "none",
            FlagTier::Warning => "warning",
            FlagTier::Memorization => "memorization",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    pub k: usize,
    /// Terms below this are tagged [`FlagTier::Warning`].
    pub warning_threshold: f64,
    /// Terms below this are tagged [`FlagTier::Memorization`] and flagged.
    pub memorization_threshold: f64,
}

impl Default for AuditParams {
    fn default() -> Self {
        Self {
            k: 1,
            warning_threshold: 0.0,
            memorization_threshold: -5.0,
        }
    }
}

impl AuditParams {
    pub fn tier(&self, contribution: f64) -> FlagTier {
        if contribution < self.memorization_threshold {
            FlagTier::Memorization
        } else if contribution < self.warning_threshold {
            FlagTier::Warning
        } else {
            FlagTier::None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub rank: usize,
    pub index: usize,
    pub contribution: f64,
    pub nearest_real: usize,
    pub nearest_distance: f64,
    pub tier: FlagTier,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditResult {
    /// Generated indices, most negative contribution first.
    pub ranked: Vec<usize>,
    /// One entry per generated sample, in rank order.
    pub entries: Vec<AuditEntry>,
    /// Generated indices in the memorization tier, in rank order.
    pub flags: Vec<usize>,
    pub warning_count: usize,
    pub params: AuditParams,
    pub pce: MetricReport,
}

/// Sort `values` ascending, ties by index.
pub fn rank_ascending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

pub fn audit_with(eval: &Evaluator<'_>, params: &AuditParams) -> Result<AuditResult> {
    if !(params.memorization_threshold <= params.warning_threshold) {
        return Err(Error::InvalidParameter(format!(
            "memorization threshold {} must not exceed warning threshold {}",
            params.memorization_threshold, params.warning_threshold
        )));
    }
    let pce = eval.pce(params.k)?;
    let terms = pce.per_sample.as_deref().expect("pce reports per-sample terms");
    let ranked = rank_ascending(terms);
    let generated = eval.gen_index().set();
    let real_index = eval.real_index();
    let entries = ranked
        .par_iter()
        .enumerate()
        .map(|(rank, &index)| {
            let nn = real_index.nearest(generated.row(index))?;
            Ok(AuditEntry {
                rank,
                index,
                contribution: terms[index],
                nearest_real: nn.index,
                nearest_distance: nn.distance(),
                tier: params.tier(terms[index]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let flags = entries
        .iter()
        .filter(|e| e.tier == FlagTier::Memorization)
        .map(|e| e.index)
        .collect();
    let warning_count = entries.iter().filter(|e| e.tier == FlagTier::Warning).count();
    Ok(AuditResult {
        ranked,
        entries,
        flags,
        warning_count,
        params: *params,
        pce,
    })
}

pub fn audit(input: &PairedInput, k: usize, memorization_threshold: f64) -> Result<AuditResult> {
    let params = AuditParams {
        k,
        memorization_threshold,
        warning_threshold: memorization_threshold.max(0.0),
    };
    audit_with(&Evaluator::new(input), &params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: String,
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    pub metric_id: MetricId,
    pub attributed_set: SampleSide,
    pub global: f64,
    /// In label-vocabulary order.
    pub per_class: Vec<ClassSummary>,
}

impl ModeReport {
    pub fn class(&self, name: &str) -> Option<&ClassSummary> {
        self.per_class.iter().find(|c| c.class == name)
    }

    /// `Σ count·mean / Σ count`; equals `global` up to rounding.
    pub fn weighted_mean(&self) -> f64 {
        let total: usize = self.per_class.iter().map(|c| c.count).sum();
        self.per_class.iter().map(|c| c.count as f64 * c.mean).sum::<f64>() / total as f64
    }
}

/// Group a report's per-sample vector by `labels`.
pub fn group_by_labels(report: &MetricReport, labels: &Labels) -> Result<ModeReport> {
    let (terms, side) = match (&report.per_sample, report.attributed_set) {
        (Some(terms), Some(side)) => (terms, side),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "metric {} has no per-sample contributions",
                report.metric_id
            )))
        }
    };
    if labels.len() != terms.len() {
        return Err(Error::LabelLength {
            labels: labels.len(),
            rows: terms.len(),
        });
    }
    let mut sums = vec![0.0; labels.num_classes()];
    let mut counts = vec![0usize; labels.num_classes()];
    for (&id, &t) in labels.ids().iter().zip(terms) {
        sums[id as usize] += t;
        counts[id as usize] += 1;
    }
    let per_class = labels
        .classes()
        .iter()
        .zip(sums.iter().zip(&counts))
        .map(|(class, (&sum, &count))| ClassSummary {
            class: class.clone(),
            count,
            mean: sum / count as f64,
        })
        .collect();
    Ok(ModeReport {
        metric_id: report.metric_id,
        attributed_set: side,
        global: report.value,
        per_class,
    })
}

/// Per-class breakdown of PCE or RE (grouped by generated labels) or RCE
/// (grouped by real labels).
pub fn mode_report(
    input: &PairedInput,
    real_labels: Option<&Labels>,
    gen_labels: Option<&Labels>,
    metric: MetricId,
    k: usize,
) -> Result<ModeReport> {
    let eval = Evaluator::new(input);
    let (report, labels) = match metric {
        MetricId::Pce => (eval.pce(k)?, gen_labels.ok_or(Error::MissingLabels("generated"))?),
        MetricId::Re => (eval.re(k)?, gen_labels.ok_or(Error::MissingLabels("generated"))?),
        MetricId::Rce => (eval.rce(k)?, real_labels.ok_or(Error::MissingLabels("real"))?),
        other => {
            return Err(Error::InvalidParameter(format!(
                "mode report supports pce, rce and re, not {other}"
            )))
        }
    };
    group_by_labels(&report, labels)
}
