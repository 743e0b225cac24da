//! Built-in distributions used by the sweeps and the acceptance suite.

use super::gaussian::{Covariance, GaussianSpec};
use super::mixture::MixtureSpec;

/// Ten unit-variance modes in ℝ¹⁰ at `20·e_i`.
pub fn ten_modes() -> MixtureSpec {
    let means: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let mut m = vec![0.0; 10];
            m[i] = 20.0;
            m
        })
        .collect();
    MixtureSpec::isotropic_modes(&means, 1.0).expect("valid preset")
}

/// The Gaussian pair `(𝒩((0,0), Σ), 𝒩((2,2), Σ))`, `Σ = [[1, 0.1], [0.1, 1]]`.
pub fn density_pair() -> (MixtureSpec, MixtureSpec) {
    let cov = || Covariance::Full(vec![vec![1.0, 0.1], vec![0.1, 1.0]]);
    let real = GaussianSpec::new(vec![0.0, 0.0], cov()).expect("valid preset");
    let gen = GaussianSpec::new(vec![2.0, 2.0], cov()).expect("valid preset");
    (MixtureSpec::single("0", real), MixtureSpec::single("0", gen))
}
