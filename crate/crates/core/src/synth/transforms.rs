//! Failure-mode transforms on labelled sets: mode dropping, mode shrinkage
//! and mode invention.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gaussian::GaussianSpec;
use super::mixture::MixtureSpec;
use crate::embedding::{EmbeddingSet, LabeledSet, Labels};
use crate::error::{Error, Result};

/// Class assigned to rows produced by [`apply_mode_invent`].
pub const INVENTED_LABEL: &str = "invented";

/// Remove every row whose class is in `drop`. Survivors keep their order.
pub fn apply_mode_drop(set: &LabeledSet, drop: &[&str]) -> Result<LabeledSet> {
    let mut dropped = vec![false; set.labels.num_classes()];
    for name in drop {
        let id = set
            .labels
            .class_id(name)
            .ok_or_else(|| Error::UnknownClass((*name).to_string()))?;
        dropped[id as usize] = true;
    }
    let keep: Vec<usize> = (0..set.n()).filter(|&i| !dropped[set.labels.ids()[i] as usize]).collect();
    if keep.is_empty() {
        return Err(Error::EmptySet);
    }
    if keep.len() == set.n() {
        return Ok(set.clone());
    }
    set.select(&keep)
}

/// Where each class contracts to under [`apply_mode_shrink`].
#[derive(Debug, Clone, Copy)]
pub enum Centers<'a> {
    /// Per-class sample mean of the input.
    Empirical,
    /// Component means of a mixture, matched by label.
    Spec(&'a MixtureSpec),
}

fn class_centers(set: &LabeledSet, centers: Centers<'_>) -> Result<Vec<Vec<f64>>> {
    let d = set.embeddings.d();
    match centers {
        Centers::Empirical => {
            let mut sums = vec![vec![0.0; d]; set.labels.num_classes()];
            let counts = set.labels.counts();
            for (row, &id) in set.embeddings.rows().zip(set.labels.ids()) {
                for (s, v) in sums[id as usize].iter_mut().zip(row) {
                    *s += v;
                }
            }
            for (s, &c) in sums.iter_mut().zip(&counts) {
                s.iter_mut().for_each(|v| *v /= c as f64);
            }
            Ok(sums)
        }
        Centers::Spec(spec) => {
            if spec.d() != d {
                return Err(Error::DimensionMismatch { left: d, right: spec.d() });
            }
            set.labels
                .classes()
                .iter()
                .map(|name| {
                    spec.component(name)
                        .map(|c| c.gaussian.mean().to_vec())
                        .ok_or_else(|| Error::UnknownClass(name.clone()))
                })
                .collect()
        }
    }
}

/// `x ↦ μ_c + s (x − μ_c)` for every row of class `c`.
pub fn apply_mode_shrink(set: &LabeledSet, s: f64, centers: Centers<'_>) -> Result<LabeledSet> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("shrink factor must be in (0, 1], got {s}")));
    }
    if s == 1.0 {
        return Ok(set.clone());
    }
    let mu = class_centers(set, centers)?;
    let ids = set.labels.ids();
    let embeddings = set.embeddings.map_rows(set.embeddings.d(), |i, row, out| {
        let c = &mu[ids[i] as usize];
        for ((o, x), m) in out.iter_mut().zip(row).zip(c) {
            *o = m + s * (x - m);
        }
    })?;
    LabeledSet::new(embeddings, set.labels.clone())
}

/// Replace `⌊fraction · n⌋` seeded rows with draws from an isotropic blob
/// centred at `global mean + offset_scale · u`, `u` a seeded unit vector.
/// The blob variance is the set's mean per-coordinate variance.
pub fn apply_mode_invent(set: &LabeledSet, fraction: f64, offset_scale: f64, seed: u64) -> Result<LabeledSet> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("invention fraction must be in [0, 1), got {fraction}")));
    }
    if !offset_scale.is_finite() {
        return Err(Error::InvalidParameter("offset scale must be finite".into()));
    }
    if set.labels.class_id(INVENTED_LABEL).is_some() {
        return Err(Error::InvalidParameter(format!("label {INVENTED_LABEL:?} is reserved")));
    }
    let n = set.n();
    let m = (fraction * n as f64).floor() as usize;
    if m == 0 {
        return Ok(set.clone());
    }
    let d = set.embeddings.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mean = set.embeddings.mean();
    let variance = set
        .embeddings
        .rows()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
        .sum::<f64>()
        / (d * n.saturating_sub(1).max(1)) as f64;

    let mut direction = vec![0.0; d];
    let unit = GaussianSpec::centered(d, 1.0)?;
    let mut z = vec![0.0; d];
    loop {
        unit.draw(&mut rng, &mut z, &mut direction);
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            direction.iter_mut().for_each(|v| *v /= norm);
            break;
        }
    }
    let center: Vec<f64> = mean.iter().zip(&direction).map(|(m, u)| m + offset_scale * u).collect();
    let blob = GaussianSpec::isotropic(center, variance.max(f64::MIN_POSITIVE))?;

    let mut replaced = rand::seq::index::sample(&mut rng, n, m).into_vec();
    replaced.sort_unstable();
    let mut data = set.embeddings.as_slice().to_vec();
    let mut names: Vec<&str> = set.labels.names().collect();
    for &i in &replaced {
        blob.draw(&mut rng, &mut z, &mut data[i * d..(i + 1) * d]);
        names[i] = INVENTED_LABEL;
    }
    LabeledSet::new(EmbeddingSet::new(data, d)?, Labels::from_names(names))
}
