use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{evaluate, SparseMlp};
use crate::pruning::{least_connected, neuron_degree, remove_neurons, DegreeMode, HiddenLayer};

/// Test accuracy after removing a fraction of one hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AblationPoint {
    pub fraction: f64,
    pub removed: usize,
    pub accuracy: f64,
}

/// Removes the `floor(f * n)` least connected neurons of `layer` for each
/// fraction `f`, ranking by the degrees of the untouched model, and reports
/// test accuracy. The model itself is left unchanged and no retraining occurs.
pub fn ablate_least_connected(
    model: &SparseMlp,
    layer: HiddenLayer,
    fractions: &[f64],
    test: &Dataset,
    mode: DegreeMode,
) -> Result<Vec<AblationPoint>> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || fractions.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("ablation fractions must be ascending values in [0, 1]".into()));
    }
    let n = layer.size(&model.dims());
    let degrees = neuron_degree(model, layer, mode);
    let mut out = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let k = (fraction * n as f64 + 1e-12).floor() as usize;
        if k >= n {
            return Err(Error::Schedule(format!(
                "ablating {k} of {n} neurons in {} leaves the layer empty",
                layer.name()
            )));
        }
        let mut copy = model.clone();
        let removed = least_connected(&degrees, k);
        remove_neurons(&mut copy, layer, &removed)?;
        let (_, accuracy) = evaluate(&copy, test)?;
        out.push(AblationPoint {
            fraction,
            removed: k,
            accuracy,
        });
    }
    Ok(out)
}

pub fn ablation_csv(points: &[AblationPoint]) -> String {
    let mut out = String::from("fraction,removed,accuracy\n");
    for p in points {
        out.push_str(&format!("{:.4},{},{:.6}\n", p.fraction, p.removed, p.accuracy));
    }
    out
}
