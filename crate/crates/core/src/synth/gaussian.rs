//! Gaussian specs, closed-form information quantities and sampling.

use std::f64::consts::{E, PI};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Covariance in one of three shorthands. In JSON: a number is `σ²·I`, a
/// flat array is a diagonal, an array of rows is a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Covariance {
    Isotropic(f64),
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawGaussian", into = "RawGaussian")]
pub struct GaussianSpec {
    mean: Vec<f64>,
    covariance: Covariance,
    matrix: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
}

#[derive(Serialize, Deserialize)]
struct RawGaussian {
    mean: Vec<f64>,
    cov: Covariance,
}

impl TryFrom<RawGaussian> for GaussianSpec {
    type Error = Error;

    fn try_from(raw: RawGaussian) -> Result<Self> {
        GaussianSpec::new(raw.mean, raw.cov)
    }
}

impl From<GaussianSpec> for RawGaussian {
    fn from(spec: GaussianSpec) -> Self {
        RawGaussian {
            mean: spec.mean,
            cov: spec.covariance,
        }
    }
}

impl PartialEq for GaussianSpec {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.matrix == other.matrix
    }
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, covariance: Covariance) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidSpec("mean must have at least one coordinate".into()));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("mean has a non-finite entry".into()));
        }
        let matrix = match &covariance {
            Covariance::Isotropic(v) => DMatrix::identity(d, d) * *v,
            Covariance::Diagonal(diag) => {
                if diag.len() != d {
                    return Err(Error::InvalidSpec(format!(
                        "diagonal covariance has {} entries for a {d}-dimensional mean",
                        diag.len()
                    )));
                }
                DMatrix::from_diagonal(&DVector::from_column_slice(diag))
            }
            Covariance::Full(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidSpec(format!("covariance must be {d}×{d}")));
                }
                let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
                let asym = (0..d)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
                    .fold(0.0, f64::max);
                if asym > 1e-12 * m.amax().max(1.0) {
                    return Err(Error::InvalidSpec("covariance is not symmetric".into()));
                }
                m
            }
        };
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("covariance has a non-finite entry".into()));
        }
        let cholesky = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::InvalidSpec("covariance is not positive definite".into()))?;
        Ok(Self {
            mean,
            covariance,
            matrix,
            cholesky,
        })
    }

    /// `𝒩(mean, σ² I)`.
    pub fn isotropic(mean: Vec<f64>, variance: f64) -> Result<Self> {
        Self::new(mean, Covariance::Isotropic(variance))
    }

    /// `𝒩(0, σ² I_d)`.
    pub fn centered(d: usize, variance: f64) -> Result<Self> {
        Self::isotropic(vec![0.0; d], variance)
    }

    pub fn d(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Covariance {
        &self.covariance
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ln_det(&self) -> f64 {
        2.0 * self.cholesky.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Draw one point into `out`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let l = self.cholesky.l_dirty();
        for i in 0..self.d() {
            let mut acc = self.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                acc += l[(i, j)] * zj;
            }
            out[i] = acc;
        }
    }
}

fn check_dims(p: &GaussianSpec, q: &GaussianSpec) -> Result<()> {
    if p.d() != q.d() {
        return Err(Error::DimensionMismatch {
            left: p.d(),
            right: q.d(),
        });
    }
    Ok(())
}

/// `H(p) = ½ ln((2πe)^d det Σ)` in nats.
pub fn gaussian_entropy(spec: &GaussianSpec) -> f64 {
    0.5 * (spec.d() as f64 * (2.0 * PI * E).ln() + spec.ln_det())
}

/// `CE(p, q) = ½ [d ln 2π + ln det Σ_q + tr(Σ_q⁻¹ Σ_p) + Δᵀ Σ_q⁻¹ Δ]`.
pub fn gaussian_cross_entropy(p: &GaussianSpec, q: &GaussianSpec) -> Result<f64> {
    check_dims(p, q)?;
    let d = p.d();
    let trace = q.cholesky.solve(&p.matrix).trace();
    let delta = DVector::from_iterator(d, p.mean.iter().zip(&q.mean).map(|(a, b)| a - b));
    let mahalanobis = delta.dot(&q.cholesky.solve(&delta));
    Ok(0.5 * (d as f64 * (2.0 * PI).ln() + q.ln_det() + trace + mahalanobis))
}

/// `D_KL(p ‖ q) = CE(p, q) − H(p)`.
pub fn gaussian_kl(p: &GaussianSpec, q: &GaussianSpec) -> Result<f64> {
    Ok(gaussian_cross_entropy(p, q)? - gaussian_entropy(p))
}
