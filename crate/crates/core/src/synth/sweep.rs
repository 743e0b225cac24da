//! Seeded metric sweeps over a failure-mode axis.
//!
//! Each `(level, seed)` cell draws `R` and `G` from ChaCha8 streams keyed by
//! the seed alone, so every level of one seed shares the same base draws and
//! only the swept transform differs.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mixture::MixtureSpec;
use super::transforms::{apply_mode_invent, apply_mode_shrink, Centers};
use crate::embedding::{LabeledSet, PairedInput};
use crate::error::{Error, Result};
use crate::metrics::{Evaluator, MetricId, MetricParams};

const REAL_STREAM: u64 = 0;
const GEN_STREAM: u64 = 1;
const DROP_STREAM: u64 = 2;
const INVENT_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Level = number of generated classes dropped.
    Drop,
    /// Level = shrink factor `s`.
    Shrink,
    /// Level = fraction of generated rows replaced by an invented blob.
    Invent,
    /// Level = `N_R = N_G`.
    SampleSize,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Drop => "drop",
            SweepKind::Shrink => "shrink",
            SweepKind::Invent => "invent",
            SweepKind::SampleSize => "sample-size",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepKind::Drop, SweepKind::Shrink, SweepKind::Invent, SweepKind::SampleSize]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sweep kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub levels: Vec<f64>,
    pub metrics: Vec<MetricId>,
    pub seeds: Vec<u64>,
    pub real: MixtureSpec,
    /// Defaults to `real`.
    pub generated: Option<MixtureSpec>,
    /// Ignored by `sample-size`, whose level sets both sizes.
    pub n_real: usize,
    pub n_gen: usize,
    pub params: MetricParams,
    /// Blob offset for `invent`.
    pub invent_offset: f64,
}

impl SweepConfig {
    pub fn new(kind: SweepKind, levels: Vec<f64>, metrics: Vec<MetricId>, seeds: Vec<u64>, real: MixtureSpec) -> Self {
        Self {
            kind,
            levels,
            metrics,
            seeds,
            real,
            generated: None,
            n_real: 5000,
            n_gen: 5000,
            params: MetricParams::default(),
            invent_offset: 10.0,
        }
    }

    fn generated_spec(&self) -> &MixtureSpec {
        self.generated.as_ref().unwrap_or(&self.real)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one level".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one seed".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one metric".into()));
        }
        if self.generated_spec().d() != self.real.d() {
            return Err(Error::DimensionMismatch {
                left: self.real.d(),
                right: self.generated_spec().d(),
            });
        }
        self.params.validate_for(&self.metrics)?;
        let classes = self.generated_spec().components().len();
        for &level in &self.levels {
            let ok = match self.kind {
                SweepKind::Drop => level >= 0.0 && level.fract() == 0.0 && (level as usize) < classes,
                SweepKind::Shrink => level > 0.0 && level <= 1.0,
                SweepKind::Invent => (0.0..1.0).contains(&level),
                SweepKind::SampleSize => level >= 2.0 && level.fract() == 0.0,
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("level {level} is invalid for a {} sweep", self.kind)));
            }
        }
        Ok(())
    }
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The `(R, G)` pair for one cell.
pub fn cell_input(config: &SweepConfig, level: f64, seed: u64) -> Result<(LabeledSet, LabeledSet)> {
    let gen_spec = config.generated_spec();
    let (n_real, n_gen) = match config.kind {
        SweepKind::SampleSize => (level as usize, level as usize),
        _ => (config.n_real, config.n_gen),
    };
    let real = config.real.sample_with(n_real, &mut stream(seed, REAL_STREAM))?;
    let gen = match config.kind {
        SweepKind::Drop => {
            let mut order: Vec<&str> = gen_spec.labels().collect();
            order.shuffle(&mut stream(seed, DROP_STREAM));
            gen_spec
                .without(&order[..level as usize])?
                .sample_with(n_gen, &mut stream(seed, GEN_STREAM))?
        }
        SweepKind::Shrink => {
            let base = gen_spec.sample_with(n_gen, &mut stream(seed, GEN_STREAM))?;
            apply_mode_shrink(&base, level, Centers::Spec(gen_spec))?
        }
        SweepKind::Invent => {
            let base = gen_spec.sample_with(n_gen, &mut stream(seed, GEN_STREAM))?;
            let invent_seed = rand::Rng::random(&mut stream(seed, INVENT_STREAM));
            apply_mode_invent(&base, level, config.invent_offset, invent_seed)?
        }
        SweepKind::SampleSize => gen_spec.sample_with(n_gen, &mut stream(seed, GEN_STREAM))?,
    };
    Ok((real, gen))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub level: f64,
    pub seed: u64,
    pub metric: MetricId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub metric: MetricId,
    pub mean: Vec<f64>,
    /// Sample standard deviation across seeds (n − 1); 0 for a single seed.
    pub sd: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub axis: Vec<f64>,
    pub seeds: Vec<u64>,
    pub series: Vec<Series>,
    /// Long format: level-major, then seed, then metric.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn series(&self, metric: MetricId) -> Option<&Series> {
        self.series.iter().find(|s| s.metric == metric)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid: Vec<(f64, u64)> = config
        .levels
        .iter()
        .flat_map(|&l| config.seeds.iter().map(move |&s| (l, s)))
        .collect();
    let per_cell: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&(level, seed)| {
            let (real, gen) = cell_input(config, level, seed)?;
            let input = PairedInput::new(real.embeddings, gen.embeddings)?;
            let eval = Evaluator::new(&input);
            config
                .metrics
                .iter()
                .map(|&m| eval.evaluate(m, &config.params).map(|r| r.value))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(grid.len() * config.metrics.len());
    for (&(level, seed), values) in grid.iter().zip(&per_cell) {
        for (&metric, &value) in config.metrics.iter().zip(values) {
            cells.push(SweepCell { level, seed, metric, value });
        }
    }
    let n_seeds = config.seeds.len();
    let series = config
        .metrics
        .iter()
        .enumerate()
        .map(|(j, &metric)| {
            let (mean, sd) = (0..config.levels.len())
                .map(|li| {
                    let vals: Vec<f64> = per_cell[li * n_seeds..(li + 1) * n_seeds].iter().map(|v| v[j]).collect();
                    mean_sd(&vals)
                })
                .unzip();
            Series { metric, mean, sd }
        })
        .collect();
    Ok(SweepResult {
        kind: config.kind,
        axis: config.levels.clone(),
        seeds: config.seeds.clone(),
        series,
        cells,
    })
}
