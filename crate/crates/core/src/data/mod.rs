//! Dataset ingestion, splitting and preprocessing.
//!
//! CSV is the only on-disk format: UTF-8, comma separated, a header row, one
//! label column and numeric features everywhere else. Labels may be any
//! string; they are mapped to class ids in order of first appearance.

mod csv_io;
mod split;
mod standardize;
pub mod synthetic;

pub use csv_io::{load_csv, write_csv, LabelColumn};
pub use split::{split, train_count, Split};
pub use standardize::Standardizer;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Array2<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// `features` is `(n_samples, n_features)`; labels index into
    /// `class_names`.
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if features.nrows() == 0 {
            return Err(Error::Data(format!("dataset `{name}` has no samples")));
        }
        if features.nrows() != labels.len() {
            return Err(Error::Data(format!(
                "dataset `{name}` has {} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if class_names.is_empty() {
            return Err(Error::Data(format!("dataset `{name}` has no classes")));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "dataset `{name}` contains non-finite feature values"
            )));
        }
        Ok(Self {
            name,
            features: features.as_standard_layout().into_owned(),
            labels,
            class_names,
        })
    }

    /// Convenience constructor naming classes `0..n_classes`.
    pub fn with_classes(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        Self::new(name, features, labels, names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows selected by `indices`, keeping the class table.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.features.select(Axis(0), indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.class_names.clone(),
        )
    }

    /// Feature-major batch matrix `(n_features, indices.len())`, the layout
    /// the network kernels consume.
    pub fn batch_matrix(&self, indices: &[usize]) -> Array2<f64> {
        let nf = self.n_features();
        let b = indices.len();
        let mut out = Array2::<f64>::zeros((nf, b));
        let os = out.as_slice_mut().expect("fresh array");
        let fs = self.features.as_slice().expect("standard layout");
        for (t, &i) in indices.iter().enumerate() {
            for (f, v) in fs[i * nf..(i + 1) * nf].iter().enumerate() {
                os[f * b + t] = *v;
            }
        }
        out
    }

    pub(crate) fn replace_features(&self, features: Array2<f64>) -> Result<Self> {
        Self::new(
            self.name.clone(),
            features,
            self.labels.clone(),
            self.class_names.clone(),
        )
    }
}
