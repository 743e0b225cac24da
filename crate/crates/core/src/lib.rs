//! Evaluate generative-model output by comparing a real and a generated
//! embedding set.
//!
//! The crate is organised bottom-up:
//!
//! - [`embedding`] and [`codec`]: the sample-set data model and its on-disk formats.
//! - [`knn`]: exact kth-nearest-neighbour distances and closed-ball counts.
//! - [`special`] and [`estimators`]: digamma, unit-ball volume and the kNN
//!   entropy, cross-entropy and Rényi-ratio estimators.
//! - [`metrics`], [`frechet`] and [`audit`]: population scores (PCE, RCE, RE,
//!   Density, Coverage, PC, RC, FD) with per-sample and per-mode dissection.
//! - [`synth`]: Gaussian closed forms, seeded mixture samplers, failure-mode
//!   transforms and sweeps.
//!
//! All quantities are in nats.
//!
//! ```
//! use entmetrics::{EmbeddingSet, PairedInput, metrics};
//!
//! let real = EmbeddingSet::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
//! let gen = EmbeddingSet::from_rows(&[vec![0.5]]).unwrap();
//! let input = PairedInput::new(real, gen).unwrap();
//! let report = metrics::pce(&input, 1).unwrap();
//! assert!((report.value - (-0.5187)).abs() < 1e-3);
//! ```

pub mod audit;
pub mod codec;
pub mod embedding;
pub mod error;
pub mod estimators;
pub mod frechet;
pub mod knn;
pub mod metrics;
pub mod special;
pub mod synth;

pub use embedding::{attach_labels, EmbeddingSet, LabeledSet, Labels, PairedInput};
pub use error::{Error, Result};
pub use estimators::{EstimateValue, EstimatorParams, JVariant, Warning};
pub use knn::NeighborIndex;
pub use metrics::{MetricId, MetricParams, MetricReport, SampleSide};
