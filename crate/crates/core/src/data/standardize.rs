use ndarray::{Array1, Axis};

use super::Dataset;
use crate::error::{Error, Result};

/// Below this population standard deviation a feature is treated as constant
/// and divided by one instead.
const DEGENERATE_STD: f64 = 1e-12;

/// Per-feature z-score transform fitted on a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Array1<f64>,
    std: Array1<f64>,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Self {
        let x = train.features();
        let mean = x.mean_axis(Axis(0)).expect("datasets are non-empty");
        let std = x
            .std_axis(Axis(0), 0.0)
            .mapv(|s| if s > DEGENERATE_STD { s } else { 1.0 });
        Self { mean, std }
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn std(&self) -> &Array1<f64> {
        &self.std
    }

    pub fn transform(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.n_features() != self.mean.len() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} features, dataset has {}",
                self.mean.len(),
                dataset.n_features()
            )));
        }
        let mut x = dataset.features().clone();
        for mut row in x.rows_mut() {
            row -= &self.mean;
            row /= &self.std;
        }
        dataset.replace_features(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn population_convention() {
        let ds = Dataset::with_classes("t", array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], vec![0; 3], 1)
            .unwrap();
        let s = Standardizer::fit(&ds);
        assert_eq!(s.mean(), &array![2.0, 5.0]);
        assert!((s.std()[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.std()[1], 1.0);
        let t = s.transform(&ds).unwrap();
        assert!(t.features().column(0).sum().abs() < 1e-12);
        assert!(t.features().column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn test_point_at_train_mean_maps_to_zero() {
        let train = Dataset::with_classes("t", array![[0.0, 10.0], [4.0, 20.0]], vec![0, 0], 1).unwrap();
        let test = Dataset::with_classes("t", array![[2.0, 15.0]], vec![0], 1).unwrap();
        let s = Standardizer::fit(&train);
        assert_eq!(s.transform(&test).unwrap().features(), &array![[0.0, 0.0]]);
    }

    #[test]
    fn width_mismatch() {
        let a = Dataset::with_classes("t", array![[0.0, 1.0]], vec![0], 1).unwrap();
        let b = Dataset::with_classes("t", array![[0.0]], vec![0], 1).unwrap();
        assert!(Standardizer::fit(&a).transform(&b).is_err());
    }
}
