use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "entmetrics", version, about = "Evaluate generated embeddings against real ones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the metric suite for a real/generated pair.
    Eval(EvalArgs),
    /// Rank generated samples by their PCE contribution and flag memorization.
    Audit(AuditArgs),
    /// Sample a mixture spec to an embedding file and label sidecar.
    Synth(SynthArgs),
    /// Run a seeded failure-mode sweep and write long and aggregated CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Ten unit-variance modes in ℝ¹⁰ at 20·e_i.
    TenModes,
    /// 𝒩((0,0), Σ) real vs 𝒩((2,2), Σ) generated, Σ = [[1, 0.1], [0.1, 1]].
    DensityPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKindArg {
    Drop,
    Shrink,
    Invent,
    SampleSize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Real embeddings (EMB1 binary, or CSV when the extension is .csv).
    #[arg(long)]
    pub real: PathBuf,
    /// Generated embeddings.
    #[arg(long)]
    pub gen: PathBuf,
    #[arg(long)]
    pub real_labels: Option<PathBuf>,
    #[arg(long)]
    pub gen_labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricArgs {
    /// Neighbour order for PCE, RCE, RE, Density, Coverage and Rényi.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Ball order for PC and RC; must be a multiple of --k-prime.
    #[arg(long, default_value_t = 15)]
    pub prc_k: usize,
    /// Minimum opposite-set count inside a PC/RC ball.
    #[arg(long, default_value_t = 5)]
    pub k_prime: usize,
    /// Rényi order for the `renyi` metric.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Sigmoid steepness for `pc-sigmoid`.
    #[arg(long, default_value_t = 50.0)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: MetricArgs,
    /// Comma-separated metric ids; default pce,rce,re,density,coverage,pc,rc,fd.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Also write every per-sample contribution as CSV (metric,set,index,value).
    #[arg(long)]
    pub per_sample: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub gen: PathBuf,
    /// Neighbour order of the per-sample PCE terms.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Memorization tier: contributions below this are flagged.
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Warning tier: contributions below this are marked `warning`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub warning_threshold: f64,
    /// Emit only the first N ranked rows.
    #[arg(long)]
    pub top: Option<usize>,
    /// Ranked CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary path; a one-line summary goes to stderr when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// JSON mixture spec.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in distribution; `density-pair` samples its real half.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Embedding output; CSV when the extension is .csv, EMB1 otherwise.
    #[arg(long)]
    pub out: PathBuf,
    /// Label sidecar; defaults to `<out>.labels`.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKindArg,
    /// Comma-separated levels: classes dropped, shrink factors, invented
    /// fractions or sample sizes.
    #[arg(long)]
    pub levels: String,
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    /// Generated-side spec; defaults to --spec.
    #[arg(long, requires = "spec")]
    pub gen_spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 5000)]
    pub n_real: usize,
    #[arg(long, default_value_t = 5000)]
    pub n_gen: usize,
    #[command(flatten)]
    pub params: MetricArgs,
    #[arg(long)]
    pub metrics: Option<String>,
    /// First seed; seeds are seed, seed+1, …, seed+runs−1.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub runs: u64,
    /// Explicit comma-separated seeds, overriding --seed/--runs.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Distance of the invented blob from the global mean.
    #[arg(long, default_value_t = 10.0)]
    pub invent_offset: f64,
    /// Long-format CSV (level,seed,metric,value).
    #[arg(long)]
    pub out: PathBuf,
    /// Aggregated CSV (level,metric,mean,sd); defaults to `<out stem>.summary.csv`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}
