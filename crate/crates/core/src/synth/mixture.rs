//! Gaussian mixtures and seeded sampling.
//!
//! Spec files are JSON:
//!
//! ```json
//! {
//!   "components": [
//!     { "label": "a", "weight": 0.5, "mean": [0, 0], "cov": 1.0 },
//!     { "label": "b", "weight": 0.5, "mean": [4, 0], "cov": [1.0, 0.25] }
//!   ]
//! }
//! ```
//!
//! `cov` is a number (`σ²·I`), a diagonal, or a full matrix given as rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gaussian::{Covariance, GaussianSpec};
use crate::embedding::{EmbeddingSet, LabeledSet, Labels};
use crate::error::{Error, Result};

/// Tolerance on `|Σ weights − 1|`.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub weight: f64,
    #[serde(flatten)]
    pub gaussian: GaussianSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct MixtureSpec {
    components: Vec<Component>,
}

#[derive(Deserialize)]
struct RawMixture {
    components: Vec<Component>,
}

impl TryFrom<RawMixture> for MixtureSpec {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        MixtureSpec::new(raw.components)
    }
}

impl MixtureSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidSpec("mixture has no components".into()))?;
        let d = first.gaussian.d();
        for (i, c) in components.iter().enumerate() {
            if c.gaussian.d() != d {
                return Err(Error::InvalidSpec(format!(
                    "component {i} ({}) has dimension {}, expected {d}",
                    c.label,
                    c.gaussian.d()
                )));
            }
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "component {i} ({}) has weight {}, weights must be positive",
                    c.label, c.weight
                )));
            }
            if c.label.is_empty() || c.label.contains('\n') || c.label.contains('\r') {
                return Err(Error::InvalidSpec(format!("component {i} has an empty or multi-line label")));
            }
            if components[..i].iter().any(|o| o.label == c.label) {
                return Err(Error::InvalidSpec(format!("duplicate component label {:?}", c.label)));
            }
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidSpec(format!("component weights sum to {sum}, expected 1")));
        }
        Ok(Self { components })
    }

    /// Equal-weight isotropic components labelled `"0"`, `"1"`, ….
    pub fn isotropic_modes(means: &[Vec<f64>], variance: f64) -> Result<Self> {
        let w = 1.0 / means.len().max(1) as f64;
        let components = means
            .iter()
            .enumerate()
            .map(|(i, m)| {
                Ok(Component {
                    label: i.to_string(),
                    weight: w,
                    gaussian: GaussianSpec::new(m.clone(), Covariance::Isotropic(variance))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn single(label: &str, gaussian: GaussianSpec) -> Self {
        Self {
            components: vec![Component {
                label: label.to_string(),
                weight: 1.0,
                gaussian,
            }],
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn d(&self) -> usize {
        self.components[0].gaussian.d()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> + '_ {
        self.components.iter().map(|c| c.label.as_str())
    }

    pub fn component(&self, label: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.label == label)
    }

    /// The mixture restricted to components not in `drop`, weights renormalised.
    pub fn without(&self, drop: &[&str]) -> Result<Self> {
        if let Some(unknown) = drop.iter().find(|l| self.component(l).is_none()) {
            return Err(Error::UnknownClass((*unknown).to_string()));
        }
        let kept: Vec<Component> = self
            .components
            .iter()
            .filter(|c| !drop.contains(&c.label.as_str()))
            .cloned()
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptySet);
        }
        let total: f64 = kept.iter().map(|c| c.weight).sum();
        let components = kept
            .into_iter()
            .map(|mut c| {
                c.weight /= total;
                c
            })
            .collect();
        Self::new(components)
    }

    /// `n` seeded draws. The component is chosen by inverting the weight CDF
    /// with one uniform, then the point is drawn from that Gaussian.
    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledSet> {
        self.sample_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledSet> {
        if n == 0 {
            return Err(Error::EmptySet);
        }
        let d = self.d();
        let mut cdf = Vec::with_capacity(self.components.len());
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight;
            cdf.push(acc);
        }
        let mut data = vec![0.0; n * d];
        let mut z = vec![0.0; d];
        let mut names = Vec::with_capacity(n);
        for out in data.chunks_exact_mut(d) {
            let u: f64 = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(self.components.len() - 1);
            let comp = &self.components[idx];
            comp.gaussian.draw(rng, &mut z, out);
            names.push(comp.label.as_str());
        }
        LabeledSet::new(EmbeddingSet::new(data, d)?, Labels::from_names(names))
    }
}

/// Parse and validate a JSON mixture spec.
pub fn parse_mixture_spec(text: &str) -> Result<MixtureSpec> {
    serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
}

/// Sample a single Gaussian; every row is labelled `"0"`.
pub fn sample_gaussian(spec: &GaussianSpec, n: usize, seed: u64) -> Result<LabeledSet> {
    MixtureSpec::single("0", spec.clone()).sample(n, seed)
}
