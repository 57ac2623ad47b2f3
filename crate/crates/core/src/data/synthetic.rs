//! Seeded synthetic classification problems.
//!
//! Points are Gaussian clusters centred on distinct vertices of a hypercube in
//! a small informative subspace, padded with redundant linear mixtures of the
//! informative coordinates and pure-noise probe features. This is the same
//! construction that produced the Madelon benchmark, so `madelon_like` gives a
//! faithful stand-in when the original file is unavailable. Other shapes are
//! useful for exercising the pipeline at a dataset's scale.

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeSpec {
    pub name: String,
    pub n_samples: usize,
    pub n_classes: usize,
    pub n_informative: usize,
    pub n_redundant: usize,
    pub n_noise: usize,
    pub clusters_per_class: usize,
    /// Half side length of the hypercube.
    pub class_sep: f64,
    /// Fraction of labels replaced by a uniformly random class.
    pub flip_fraction: f64,
    pub seed: u64,
}

impl HypercubeSpec {
    pub fn n_features(&self) -> usize {
        self.n_informative + self.n_redundant + self.n_noise
    }

    pub fn generate(&self) -> Result<Dataset> {
        let clusters = self.n_classes * self.clusters_per_class;
        if self.n_classes == 0 || self.clusters_per_class == 0 || self.n_informative == 0 {
            return Err(Error::Config("synthetic spec needs classes, clusters and informative features".into()));
        }
        if self.n_informative >= 63 || (1u64 << self.n_informative) < clusters as u64 {
            return Err(Error::Config(format!(
                "{} informative dims cannot host {clusters} distinct vertices",
                self.n_informative
            )));
        }
        if self.n_samples < self.n_classes {
            return Err(Error::Config("fewer samples than classes".into()));
        }
        let mut rng = stream(self.seed, Purpose::Synthetic, 0);
        let d = self.n_informative;
        let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");

        let vertices = index::sample(&mut rng, 1usize << d, clusters).into_vec();
        let centroids: Vec<Vec<f64>> = vertices
            .iter()
            .map(|&v| {
                (0..d)
                    .map(|b| if v >> b & 1 == 1 { self.class_sep } else { -self.class_sep })
                    .collect()
            })
            .collect();
        let covariances: Vec<Array2<f64>> = (0..clusters)
            .map(|_| Array2::from_shape_simple_fn((d, d), || unit.sample(&mut rng)))
            .collect();
        let mixing = Array2::from_shape_simple_fn((d, self.n_redundant), || unit.sample(&mut rng));

        let nf = self.n_features();
        let mut features = Array2::<f64>::zeros((self.n_samples, nf));
        let mut labels = Vec::with_capacity(self.n_samples);
        for i in 0..self.n_samples {
            let cluster = i % clusters;
            let class = cluster / self.clusters_per_class;
            let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let mut row = features.row_mut(i);
            for a in 0..d {
                let mixed: f64 = (0..d).map(|b| z[b] * covariances[cluster][[b, a]]).sum();
                row[a] = centroids[cluster][a] + mixed;
            }
            for r in 0..self.n_redundant {
                row[d + r] = (0..d).map(|a| row[a] * mixing[[a, r]]).sum();
            }
            for k in 0..self.n_noise {
                row[d + self.n_redundant + k] = rng.sample(StandardNormal);
            }
            let label = if rng.random::<f64>() < self.flip_fraction {
                rng.random_range(0..self.n_classes)
            } else {
                class
            };
            labels.push(label);
        }
        // Interleave samples so class order is not tied to row position.
        let order = index::sample(&mut rng, self.n_samples, self.n_samples).into_vec();
        let shuffled = features.select(ndarray::Axis(0), &order);
        let labels = order.iter().map(|&i| labels[i]).collect();
        Dataset::with_classes(self.name.clone(), shuffled, labels, self.n_classes)
    }
}

/// Madelon construction: 2600 samples, 5 informative features, 15 redundant
/// mixtures, 480 probes, 16 clusters per class, 1% label noise.
pub fn madelon_like(seed: u64) -> HypercubeSpec {
    HypercubeSpec {
        name: "madelon-synthetic".into(),
        n_samples: 2600,
        n_classes: 2,
        n_informative: 5,
        n_redundant: 15,
        n_noise: 480,
        clusters_per_class: 16,
        class_sep: 1.0,
        flip_fraction: 0.01,
        seed,
    }
}

/// A surrogate with a given sample count, width and class count. About a
/// tenth of the width is informative (at least enough dims to give every
/// class its own vertex, at most 62), as many columns again are redundant
/// mixtures, and noise probes fill the rest.
pub fn shaped_like(
    name: &str,
    n_samples: usize,
    n_features: usize,
    n_classes: usize,
    seed: u64,
) -> HypercubeSpec {
    let needed = (usize::BITS - (n_classes.max(2) - 1).leading_zeros()) as usize;
    let n_informative = needed.max(4).max(n_features / 10).min(62).min(n_features);
    let n_redundant = n_informative.min(n_features - n_informative);
    HypercubeSpec {
        name: name.to_string(),
        n_samples,
        n_classes,
        n_informative,
        n_redundant,
        n_noise: n_features - n_informative - n_redundant,
        clusters_per_class: 1,
        class_sep: 1.5,
        flip_fraction: 0.0,
        seed,
    }
}
