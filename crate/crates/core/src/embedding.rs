//! Sample sets: the `n × d` embedding matrix, its label sidecar and the
//! real/generated pair every metric consumes.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// An `n × d` matrix of finite reals stored row-major. One row per sample.
///
/// Values are kept as `f64` whatever the storage precision on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl EmbeddingSet {
    /// Wrap a row-major buffer of `data.len() / d` rows.
    pub fn new(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.is_empty() {
            return Err(Error::EmptySet);
        }
        if data.len() % d != 0 {
            return Err(Error::RaggedRow {
                row: data.len() / d,
                found: data.len() % d,
                expected: d,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        let n = data.len() / d;
        Ok(Self { data, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptySet)?;
        let d = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: d,
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, d)
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of each sample.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::new(data, self.d)
    }

    /// Apply `f` to every row, producing rows of width `d_out`.
    pub fn map_rows<F>(&self, d_out: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[f64], &mut [f64]),
    {
        if d_out == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut data = vec![0.0; self.n * d_out];
        for (i, (src, dst)) in self
            .data
            .chunks_exact(self.d)
            .zip(data.chunks_exact_mut(d_out))
            .enumerate()
        {
            f(i, src, dst);
        }
        Self::new(data, d_out)
    }

    /// Row-wise concatenation of `self` followed by `other`.
    pub fn concat(&self, other: &EmbeddingSet) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self::new(data, self.d)
    }

    /// Per-coordinate mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.d];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.n as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// Class identifiers for the rows of an [`EmbeddingSet`].
///
/// Each row carries an index into `classes`; the vocabulary is kept in
/// first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    ids: Vec<u32>,
    classes: Vec<String>,
}

impl Labels {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let mut lookup: HashMap<String, u32> = HashMap::new();
        let mut classes = Vec::new();
        let ids = names
            .into_iter()
            .map(|name| {
                let name = name.to_string();
                *lookup.entry(name.clone()).or_insert_with(|| {
                    classes.push(name);
                    (classes.len() - 1) as u32
                })
            })
            .collect();
        Self { ids, classes }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    /// The class vocabulary, indexed by id.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn name(&self, row: usize) -> &str {
        &self.classes[self.ids[row] as usize]
    }

    pub fn class_id(&self, name: &str) -> Option<u32> {
        self.classes.iter().position(|c| c == name).map(|p| p as u32)
    }

    /// Row count per class id.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &id in &self.ids {
            counts[id as usize] += 1;
        }
        counts
    }

    /// Label names for `rows`, in that order, with the vocabulary rebuilt.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self::from_names(rows.iter().map(|&r| self.name(r)))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.ids.iter().map(|&id| self.classes[id as usize].as_str())
    }
}

/// An embedding set with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub embeddings: EmbeddingSet,
    pub labels: Labels,
}

impl LabeledSet {
    pub fn new(embeddings: EmbeddingSet, labels: Labels) -> Result<Self> {
        if labels.len() != embeddings.n() {
            return Err(Error::LabelLength {
                labels: labels.len(),
                rows: embeddings.n(),
            });
        }
        Ok(Self { embeddings, labels })
    }

    pub fn n(&self) -> usize {
        self.embeddings.n()
    }

    /// Rows at `indices` with their labels; order is preserved.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            embeddings: self.embeddings.select(indices)?,
            labels: self.labels.select(indices),
        })
    }
}

/// Bind `labels[i]` to row `i` of `set`.
pub fn attach_labels<I, S>(set: EmbeddingSet, labels: I) -> Result<LabeledSet>
where
    I: IntoIterator<Item = S>,
    S: ToString,
{
    LabeledSet::new(set, Labels::from_names(labels))
}

/// The real set `R` and generated set `G` under comparison.
#[derive(Debug, Clone)]
pub struct PairedInput {
    pub real: EmbeddingSet,
    pub generated: EmbeddingSet,
}

impl PairedInput {
    pub fn new(real: EmbeddingSet, generated: EmbeddingSet) -> Result<Self> {
        if real.d() != generated.d() {
            return Err(Error::DimensionMismatch {
                left: real.d(),
                right: generated.d(),
            });
        }
        Ok(Self { real, generated })
    }

    /// `N_G / N_R`.
    pub fn eta(&self) -> f64 {
        self.generated.n() as f64 / self.real.n() as f64
    }

    pub fn d(&self) -> usize {
        self.real.d()
    }
}
