//! Synthetic ground truth: Gaussian closed forms, seeded mixture sampling,
//! failure-mode transforms and sweeps.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`, so a
//! `(spec, n, seed)` triple produces the same bits on every platform.

pub mod gaussian;
pub mod mixture;
pub mod presets;
pub mod sweep;
pub mod transforms;

pub use gaussian::{gaussian_cross_entropy, gaussian_entropy, gaussian_kl, Covariance, GaussianSpec};
pub use mixture::{parse_mixture_spec, sample_gaussian, Component, MixtureSpec};
pub use sweep::{run_sweep, Series, SweepCell, SweepConfig, SweepKind, SweepResult};
pub use transforms::{apply_mode_drop, apply_mode_invent, apply_mode_shrink, Centers, INVENTED_LABEL};
