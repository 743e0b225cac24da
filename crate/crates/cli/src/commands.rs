use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use entmetrics::audit::{self, AuditParams, ModeReport};
use entmetrics::codec;
use entmetrics::metrics::{Evaluator, MetricId, MetricParams, MetricReport, SampleSide};
use entmetrics::synth::{self, presets, MixtureSpec, SweepConfig, SweepKind};
use entmetrics::{EmbeddingSet, Labels, PairedInput};
use serde::Serialize;
use serde_json::json;

use crate::args::{AuditArgs, EvalArgs, MetricArgs, OutputFormat, Preset, SweepArgs, SweepKindArg, SynthArgs};
use crate::error::{CliError, Context};

const EVAL_SCHEMA: &str = "entmetrics.eval/1";
const AUDIT_SCHEMA: &str = "entmetrics.audit/1";
const VERSION: &str = env!("CARGO_PKG_VERSION");
const PRC_NOTE: &str = "PC/RC ball order defaults to (k, k') = (15, 5); the alternative reading k = 5, k' = 15 violates k = C·k' and is rejected";

fn require_exists(flag: &str, path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{flag} {}: no such file", path.display())))
    }
}

fn load_embeddings(flag: &str, path: &Path) -> Result<EmbeddingSet, CliError> {
    codec::read_embeddings(path).context(|| format!("{flag} {}", path.display()))
}

fn load_labels(flag: &str, path: Option<&PathBuf>, rows: usize) -> Result<Option<Labels>, CliError> {
    let Some(path) = path else { return Ok(None) };
    let labels = codec::read_labels(path).context(|| format!("{flag} {}", path.display()))?;
    if labels.len() != rows {
        return Err(CliError::data(format!(
            "{flag} {}: {} labels for {rows} rows",
            path.display(),
            labels.len()
        )));
    }
    Ok(Some(labels))
}

fn pair(real: EmbeddingSet, gen: EmbeddingSet) -> Result<PairedInput, CliError> {
    if real.d() != gen.d() {
        return Err(CliError::data(format!(
            "dimension mismatch: real embeddings have d={} but generated embeddings have d={}",
            real.d(),
            gen.d()
        )));
    }
    Ok(PairedInput::new(real, gen)?)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let result = match path {
        Some(p) => fs::write(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush())
        }
    };
    result.map_err(|e| {
        let target = path.map_or("stdout".to_string(), |p| p.display().to_string());
        CliError::data(format!("writing {target}: {e}"))
    })
}

fn csv_bytes<F>(fill: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w).map_err(|e| CliError::data(format!("encoding CSV: {e}")))?;
    w.into_inner().map_err(|e| CliError::data(format!("encoding CSV: {e}")))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::data(format!("encoding JSON: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn metric_params(a: &MetricArgs) -> MetricParams {
    MetricParams {
        k: a.k,
        prc_k: a.prc_k,
        k_prime: a.k_prime,
        alpha: a.alpha,
        theta: a.theta,
    }
}

fn metric_list(list: Option<&str>) -> Result<Vec<MetricId>, CliError> {
    Ok(match list {
        Some(l) => MetricId::parse_list(l)?,
        None => MetricId::DEFAULT_SUITE.to_vec(),
    })
}

fn prc_notes(metrics: &[MetricId], params: &MetricArgs) -> Vec<&'static str> {
    let uses_prc = metrics.iter().any(|m| matches!(m, MetricId::Pc | MetricId::Rc | MetricId::PcSigmoid));
    if uses_prc && params.prc_k == 15 && params.k_prime == 5 {
        eprintln!("note: {PRC_NOTE}");
        vec![PRC_NOTE]
    } else {
        Vec::new()
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn check_finite(report: &MetricReport) -> Result<(), CliError> {
    if report.value.is_nan() || report.per_sample.as_ref().is_some_and(|p| p.iter().any(|v| v.is_nan())) {
        return Err(CliError::numeric(format!("{} evaluated to NaN", report.metric_id)));
    }
    Ok(())
}

fn side_name(side: SampleSide) -> &'static str {
    match side {
        SampleSide::Real => "real",
        SampleSide::Generated => "generated",
    }
}

pub fn eval(a: &EvalArgs, argv: Vec<String>) -> Result<(), CliError> {
    let metrics = metric_list(a.metrics.as_deref())?;
    let params = metric_params(&a.params);
    params.validate_for(&metrics)?;
    require_exists("--real", &a.input.real)?;
    require_exists("--gen", &a.input.gen)?;
    for (flag, path) in [("--real-labels", &a.input.real_labels), ("--gen-labels", &a.input.gen_labels)] {
        if let Some(p) = path {
            require_exists(flag, p)?;
        }
    }
    let notes = prc_notes(&metrics, &a.params);

    let t_load = Instant::now();
    let real = load_embeddings("--real", &a.input.real)?;
    let gen = load_embeddings("--gen", &a.input.gen)?;
    let real_labels = load_labels("--real-labels", a.input.real_labels.as_ref(), real.n())?;
    let gen_labels = load_labels("--gen-labels", a.input.gen_labels.as_ref(), gen.n())?;
    let input = pair(real, gen)?;
    let load_ms = ms(t_load);

    let t_index = Instant::now();
    let evaluator = Evaluator::new(&input);
    let index_ms = ms(t_index);

    let mut reports = Vec::with_capacity(metrics.len());
    let mut metric_ms = BTreeMap::new();
    for &m in &metrics {
        let t = Instant::now();
        let report = evaluator.evaluate(m, &params).context(|| format!("computing {m}"))?;
        check_finite(&report)?;
        metric_ms.insert(m.as_str(), ms(t));
        reports.push(report);
    }

    let mut modes: Vec<ModeReport> = Vec::new();
    for report in &reports {
        let labels = match report.attributed_set {
            Some(SampleSide::Real) => real_labels.as_ref(),
            Some(SampleSide::Generated) => gen_labels.as_ref(),
            None => None,
        };
        if let (Some(labels), MetricId::Pce | MetricId::Rce | MetricId::Re) = (labels, report.metric_id) {
            modes.push(audit::group_by_labels(report, labels)?);
        }
    }

    if let Some(path) = &a.per_sample {
        let bytes = csv_bytes(|w| {
            w.write_record(["metric", "set", "index", "value"])?;
            for r in &reports {
                if let (Some(values), Some(side)) = (&r.per_sample, r.attributed_set) {
                    for (i, v) in values.iter().enumerate() {
                        w.write_record([r.metric_id.as_str(), side_name(side), &i.to_string(), &v.to_string()])?;
                    }
                }
            }
            Ok(())
        })?;
        write_output(Some(path), &bytes)?;
    }

    let warnings: Vec<String> = reports
        .iter()
        .flat_map(|r| r.warnings.iter().map(move |w| format!("{}: {w}", r.metric_id)))
        .collect();
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let bytes = match a.format {
        OutputFormat::Json => {
            let summaries: Vec<MetricReport> = reports
                .iter()
                .map(|r| MetricReport {
                    per_sample: None,
                    ..r.clone()
                })
                .collect();
            json_bytes(&json!({
                "schema": EVAL_SCHEMA,
                "tool_version": VERSION,
                "config": {
                    "command": "eval",
                    "argv": argv,
                    "args": a,
                    "metrics": metrics,
                    "params": params,
                    "n_real": input.real.n(),
                    "n_generated": input.generated.n(),
                    "d": input.d(),
                    "notes": notes,
                },
                "metrics": summaries,
                "modes": modes,
                "warnings": warnings,
                "timings_ms": { "load": load_ms, "index": index_ms, "metrics": metric_ms },
            }))?
        }
        OutputFormat::Csv => csv_bytes(|w| {
            w.write_record(["metric", "value", "attributed_set", "k", "k_prime", "alpha", "theta", "warnings"])?;
            for r in &reports {
                let opt = |v: Option<String>| v.unwrap_or_default();
                let p = &r.params_used;
                w.write_record([
                    r.metric_id.as_str().to_string(),
                    r.value.to_string(),
                    r.attributed_set.map(side_name).unwrap_or("").to_string(),
                    opt(p.k.map(|v| v.to_string())),
                    opt(p.k_prime.map(|v| v.to_string())),
                    opt(p.alpha.map(|v| v.to_string())),
                    opt(p.theta.map(|v| v.to_string())),
                    r.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("; "),
                ])?;
            }
            Ok(())
        })?,
    };
    write_output(a.out.as_deref(), &bytes)
}

pub fn audit(a: &AuditArgs, argv: Vec<String>) -> Result<(), CliError> {
    let params = AuditParams {
        k: a.k,
        warning_threshold: a.warning_threshold,
        memorization_threshold: a.threshold,
    };
    if params.k == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }
    if !(params.memorization_threshold <= params.warning_threshold) {
        return Err(CliError::usage(format!(
            "--threshold {} must not exceed --warning-threshold {}",
            params.memorization_threshold, params.warning_threshold
        )));
    }
    require_exists("--real", &a.real)?;
    require_exists("--gen", &a.gen)?;

    let t = Instant::now();
    let input = pair(load_embeddings("--real", &a.real)?, load_embeddings("--gen", &a.gen)?)?;
    let result = audit::audit_with(&Evaluator::new(&input), &params).context(|| "auditing".to_string())?;
    check_finite(&result.pce)?;
    let elapsed = ms(t);

    let shown = a.top.map_or(result.entries.len(), |n| n.min(result.entries.len()));
    let bytes = csv_bytes(|w| {
        w.write_record(["rank", "index", "contribution", "nearest_real", "nearest_distance", "tier"])?;
        for e in &result.entries[..shown] {
            w.write_record([
                e.rank.to_string(),
                e.index.to_string(),
                e.contribution.to_string(),
                e.nearest_real.to_string(),
                e.nearest_distance.to_string(),
                e.tier.as_str().to_string(),
            ])?;
        }
        Ok(())
    })?;
    write_output(a.out.as_deref(), &bytes)?;

    let summary = json!({
        "schema": AUDIT_SCHEMA,
        "tool_version": VERSION,
        "config": { "command": "audit", "argv": argv, "args": a },
        "n_generated": input.generated.n(),
        "pce": result.pce.value,
        "memorization_flags": result.flags.len(),
        "warning_tier": result.warning_count,
        "flagged": result.flags,
        "rows_emitted": shown,
        "warnings": result.pce.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "timings_ms": { "total": elapsed },
    });
    match &a.report {
        Some(path) => write_output(Some(path), &json_bytes(&summary)?)?,
        None => eprintln!(
            "audit: {} of {} generated samples flagged below {}, {} in the warning tier",
            result.flags.len(),
            input.generated.n(),
            a.threshold,
            result.warning_count
        ),
    }
    Ok(())
}

fn read_spec(flag: &str, path: &Path) -> Result<MixtureSpec, CliError> {
    require_exists(flag, path)?;
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{flag} {}: {e}", path.display())))?;
    synth::parse_mixture_spec(&text).context(|| format!("{flag} {}", path.display()))
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let spec = match (&a.spec, a.preset) {
        (Some(path), _) => read_spec("--spec", path)?,
        (None, Some(Preset::TenModes)) => presets::ten_modes(),
        (None, Some(Preset::DensityPair)) => presets::density_pair().0,
        (None, None) => return Err(CliError::usage("one of --spec or --preset is required")),
    };
    let set = spec.sample(a.n, a.seed)?;
    let labels_out = a.labels_out.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".labels");
        PathBuf::from(p)
    });
    let format = codec::Format::from_path(&a.out);
    write_output(Some(&a.out), &codec::encode_embeddings(&set.embeddings, format))?;
    write_output(Some(&labels_out), &codec::encode_labels(&set.labels))?;
    eprintln!(
        "synth: wrote {} rows (d={}, {} classes) to {} and labels to {}",
        set.n(),
        set.embeddings.d(),
        set.labels.num_classes(),
        a.out.display(),
        labels_out.display()
    );
    Ok(())
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::usage(format!("{flag}: cannot parse {s:?}"))))
        .collect()
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn sweep(a: &SweepArgs, argv: Vec<String>) -> Result<(), CliError> {
    let kind = match a.kind {
        SweepKindArg::Drop => SweepKind::Drop,
        SweepKindArg::Shrink => SweepKind::Shrink,
        SweepKindArg::Invent => SweepKind::Invent,
        SweepKindArg::SampleSize => SweepKind::SampleSize,
    };
    let levels: Vec<f64> = parse_list("--levels", &a.levels)?;
    let seeds: Vec<u64> = match &a.seeds {
        Some(list) => parse_list("--seeds", list)?,
        None => (0..a.runs).map(|i| a.seed.wrapping_add(i)).collect(),
    };
    let metrics = metric_list(a.metrics.as_deref())?;
    let (real, generated) = match (&a.spec, a.preset) {
        (Some(path), _) => {
            let real = read_spec("--spec", path)?;
            let gen = a.gen_spec.as_ref().map(|p| read_spec("--gen-spec", p)).transpose()?;
            (real, gen)
        }
        (None, Some(Preset::TenModes)) => (presets::ten_modes(), None),
        (None, Some(Preset::DensityPair)) => {
            let (r, g) = presets::density_pair();
            (r, Some(g))
        }
        (None, None) => return Err(CliError::usage("one of --spec or --preset is required")),
    };
    let mut config = SweepConfig::new(kind, levels, metrics, seeds, real);
    config.generated = generated;
    config.n_real = a.n_real;
    config.n_gen = a.n_gen;
    config.params = metric_params(&a.params);
    config.invent_offset = a.invent_offset;
    config.validate()?;
    prc_notes(&config.metrics, &a.params);

    let t = Instant::now();
    let result = synth::run_sweep(&config).context(|| format!("{kind} sweep"))?;
    if let Some(c) = result.cells.iter().find(|c| c.value.is_nan()) {
        return Err(CliError::numeric(format!("{} is NaN at level {} seed {}", c.metric, c.level, c.seed)));
    }

    let long = csv_bytes(|w| {
        w.write_record(["level", "seed", "metric", "value"])?;
        for c in &result.cells {
            w.write_record([c.level.to_string(), c.seed.to_string(), c.metric.to_string(), c.value.to_string()])?;
        }
        Ok(())
    })?;
    let aggregated = csv_bytes(|w| {
        w.write_record(["level", "metric", "mean", "sd"])?;
        for (i, level) in result.axis.iter().enumerate() {
            for s in &result.series {
                w.write_record([level.to_string(), s.metric.to_string(), s.mean[i].to_string(), s.sd[i].to_string()])?;
            }
        }
        Ok(())
    })?;
    let summary = a.summary.clone().unwrap_or_else(|| summary_path(&a.out));
    write_output(Some(&a.out), &long)?;
    write_output(Some(&summary), &aggregated)?;
    eprintln!(
        "sweep: {} cells ({} levels × {} seeds) in {:.1} s; argv: {}",
        result.axis.len() * result.seeds.len(),
        result.axis.len(),
        result.seeds.len(),
        ms(t) / 1e3,
        argv.join(" ")
    );
    Ok(())
}
