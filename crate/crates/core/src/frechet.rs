//! Fréchet distance between moment-matched Gaussians.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

/// Eigenvalues below `-NEGATIVE_TOLERANCE · max(1, ‖λ‖∞)` mean the product
/// is not PSD; anything between that and zero is rounding and clamped.
pub const NEGATIVE_TOLERANCE: f64 = 1e-8;

/// Sample mean and unbiased (n − 1) covariance.
pub fn moments(set: &EmbeddingSet) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (n, d) = (set.n(), set.d());
    if n < 2 {
        return Err(Error::TooFewSamples {
            set: "covariance",
            need: 2,
            have: n,
        });
    }
    let mean = DVector::from_vec(set.mean());
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centered = DVector::<f64>::zeros(d);
    for row in set.rows() {
        for j in 0..d {
            centered[j] = row[j] - mean[j];
        }
        cov.ger(1.0, &centered, &centered, 1.0);
    }
    cov /= (n - 1) as f64;
    Ok((mean, cov))
}

fn clamped_eigenvalues(m: DMatrix<f64>, what: &str) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let sym = (&m + m.transpose()) * 0.5;
    let mut eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for v in eig.eigenvalues.iter_mut() {
        if *v < -NEGATIVE_TOLERANCE * scale {
            return Err(Error::Numeric(format!("{what} has eigenvalue {v}, not positive semi-definite")));
        }
        *v = v.max(0.0);
    }
    Ok(eig)
}

fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = clamped_eigenvalues(m.clone(), "covariance")?;
    let roots = eig.eigenvalues.map(f64::sqrt);
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// `‖μ₁ − μ₂‖² + tr(Σ₁ + Σ₂ − 2(Σ₁Σ₂)^{1/2})`.
///
/// `tr (Σ₁Σ₂)^{1/2}` is taken from the spectrum of the symmetric matrix
/// `Σ₁^{1/2} Σ₂ Σ₁^{1/2}`, which shares its eigenvalues with `Σ₁Σ₂`.
pub fn gaussian_frechet(mu1: &DVector<f64>, cov1: &DMatrix<f64>, mu2: &DVector<f64>, cov2: &DMatrix<f64>) -> Result<f64> {
    let d = mu1.len();
    if mu2.len() != d || cov1.shape() != (d, d) || cov2.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            left: d,
            right: mu2.len(),
        });
    }
    let s1 = psd_sqrt(cov1)?;
    let product = &s1 * cov2 * &s1;
    let eig = clamped_eigenvalues(product, "covariance product")?;
    let tr_sqrt: f64 = eig.eigenvalues.iter().map(|v| v.sqrt()).sum();
    let diff = mu1 - mu2;
    let fd = diff.norm_squared() + cov1.trace() + cov2.trace() - 2.0 * tr_sqrt;
    // cancellation can leave a tiny negative for identical moments
    Ok(fd.max(0.0))
}

pub fn frechet_distance(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<f64> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            left: a.d(),
            right: b.d(),
        });
    }
    let (mu_a, cov_a) = moments(a)?;
    let (mu_b, cov_b) = moments(b)?;
    gaussian_frechet(&mu_a, &cov_a, &mu_b, &cov_b)
}
