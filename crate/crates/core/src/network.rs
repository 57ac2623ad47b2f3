//! The two-hidden-layer MLP: assembly, forward/backward, the SGD epoch and
//! evaluation, plus parameter and neuron accounting.
//!
//! Activations flow through the network feature-major, as `(neurons, batch)`
//! matrices. Hidden layers use ReLU; the output head is softmax with mean
//! cross-entropy.

use ndarray::{Array2, ArrayView2, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::sparse::{dense_init, er_init, InitConfig, Layer, LayerGrad, SgdParams};

/// Widths of the four neuron layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n_features: usize,
    pub h1: usize,
    pub h2: usize,
    pub n_classes: usize,
}

impl Dims {
    pub fn new(n_features: usize, h1: usize, h2: usize, n_classes: usize) -> Self {
        Self {
            n_features,
            h1,
            h2,
            n_classes,
        }
    }

    /// `(n_in, n_out)` of the three weight layers.
    pub fn layer_shapes(&self) -> [(usize, usize); 3] {
        [
            (self.n_features, self.h1),
            (self.h1, self.h2),
            (self.h2, self.n_classes),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 || self.h1 == 0 || self.h2 == 0 || self.n_classes == 0 {
            return Err(Error::Config(format!("all dims must be >= 1, got {self}")));
        }
        Ok(())
    }

    /// Weights of the fully connected network with these dims.
    pub fn dense_weight_count(&self) -> usize {
        self.layer_shapes().iter().map(|(a, b)| a * b).sum()
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.n_features, self.h1, self.h2, self.n_classes
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Sparse,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            momentum: 0.9,
            weight_decay: 0.0002,
            batch_size: 32,
            epochs: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("lr must be non-negative, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch_size and epochs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn sgd(&self) -> SgdParams {
        SgdParams::new(self.lr, self.momentum, self.weight_decay)
    }
}

/// Metrics recorded after one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub weight_param_count: usize,
    pub bias_param_count: usize,
    pub neuron_count_per_layer: [usize; 4],
    /// Connections removed / regrown by rewiring after this epoch.
    pub removed_connections: usize,
    pub regrown_connections: usize,
    /// Hidden neurons removed at the start of this epoch.
    pub pruned_neurons: usize,
}

impl EpochMetrics {
    /// Train minus test accuracy.
    pub fn generalization_gap(&self) -> f64 {
        self.train_accuracy - self.test_accuracy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    pub weights_only: usize,
    pub weights_plus_biases: usize,
}

/// Intermediate values of a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Post-activation of the two hidden layers.
    pub hidden: [Array2<f64>; 2],
    /// Pre-activation of the two hidden layers.
    pub pre_activation: [Array2<f64>; 2],
    pub logits: Array2<f64>,
}

/// A two-hidden-layer MLP whose layers may each be sparse or dense.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMlp {
    layers: [Layer; 3],
}

impl SparseMlp {
    /// Initializes all three layers, each from its own seeded stream.
    pub fn build(dims: Dims, cfg: &InitConfig, mode: Mode) -> Result<Self> {
        dims.validate()?;
        cfg.validate()?;
        let make = |k: usize| -> Result<Layer> {
            let (n_in, n_out) = dims.layer_shapes()[k];
            let mut rng = stream(cfg.seed, Purpose::Init, k as u64);
            Ok(match mode {
                Mode::Sparse => Layer::Sparse(er_init(n_in, n_out, cfg, &mut rng)?),
                Mode::Dense => Layer::Dense(dense_init(n_in, n_out, cfg, &mut rng)?),
            })
        };
        Self::from_layers([make(0)?, make(1)?, make(2)?])
    }

    pub fn from_layers(layers: [Layer; 3]) -> Result<Self> {
        for k in 0..2 {
            if layers[k].n_out() != layers[k + 1].n_in() {
                return Err(Error::Shape(format!(
                    "layer {k} has {} outputs but layer {} has {} inputs",
                    layers[k].n_out(),
                    k + 1,
                    layers[k + 1].n_in()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn dims(&self) -> Dims {
        Dims::new(
            self.layers[0].n_in(),
            self.layers[1].n_in(),
            self.layers[2].n_in(),
            self.layers[2].n_out(),
        )
    }

    pub fn layers(&self) -> &[Layer; 3] {
        &self.layers
    }

    /// Mutable access for structural edits. Callers must keep adjacent
    /// widths chained; [`SparseMlp::check`] verifies it.
    pub fn layers_mut(&mut self) -> &mut [Layer; 3] {
        &mut self.layers
    }

    pub fn check(&self) -> Result<()> {
        Self::from_layers(self.layers.clone()).map(|_| ())
    }

    pub fn is_sparse(&self) -> bool {
        self.layers.iter().any(Layer::is_sparse)
    }

    /// The same network with every layer densified.
    pub fn to_dense(&self) -> SparseMlp {
        let layers = self.layers.clone().map(|l| match l {
            Layer::Sparse(s) => Layer::Dense(s.to_dense()),
            d => d,
        });
        SparseMlp { layers }
    }

    /// Forward pass on a feature-major batch `(n_features, batch)`.
    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<ForwardTrace> {
        let z1 = self.layers[0].forward(x)?;
        let a1 = z1.mapv(relu);
        let z2 = self.layers[1].forward(a1.view())?;
        let a2 = z2.mapv(relu);
        let logits = self.layers[2].forward(a2.view())?;
        Ok(ForwardTrace {
            hidden: [a1, a2],
            pre_activation: [z1, z2],
            logits,
        })
    }

    /// Class probabilities `(n_classes, batch)`.
    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(softmax_columns(&self.forward(x)?.logits))
    }

    /// Mean cross-entropy of a batch and the gradients of every layer.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<'_, f64>,
        labels: &[usize],
    ) -> Result<(f64, [LayerGrad; 3])> {
        if x.ncols() != labels.len() {
            return Err(Error::Shape(format!(
                "batch has {} columns but {} labels",
                x.ncols(),
                labels.len()
            )));
        }
        let trace = self.forward(x)?;
        let (loss, mut delta) = cross_entropy(&trace.logits, labels)?;
        let batch = labels.len() as f64;
        delta.mapv_inplace(|d| d / batch);

        let mut g2 = self.layers[2].backward(trace.hidden[1].view(), delta.view(), true)?;
        let mut d2 = g2.take_input().expect("requested");
        relu_backward(&mut d2, &trace.pre_activation[1]);
        let mut g1 = self.layers[1].backward(trace.hidden[0].view(), d2.view(), true)?;
        let mut d1 = g1.take_input().expect("requested");
        relu_backward(&mut d1, &trace.pre_activation[0]);
        let g0 = self.layers[0].backward(x, d1.view(), false)?;
        Ok((loss, [g0, g1, g2]))
    }

    pub fn apply_gradients(&mut self, grads: &[LayerGrad; 3], params: &SgdParams) -> Result<()> {
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            layer.apply_update(g, params)?;
        }
        Ok(())
    }
}

#[inline]
fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

fn relu_backward(grad: &mut Array2<f64>, pre: &Array2<f64>) {
    Zip::from(grad).and(pre).for_each(|g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
}

/// Column-wise softmax of `(classes, batch)` logits.
pub fn softmax_columns(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut col in out.columns_mut() {
        let max = col.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        col.mapv_inplace(|v| (v - max).exp());
        let sum = col.sum();
        col.mapv_inplace(|v| v / sum);
    }
    out
}

/// Sum of per-sample cross-entropies and `softmax - onehot`.
fn cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> Result<(f64, Array2<f64>)> {
    let n_classes = logits.nrows();
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::Shape(format!(
            "label {bad} out of range for {n_classes} outputs"
        )));
    }
    let mut delta = softmax_columns(logits);
    let mut total = 0.0;
    for (t, &y) in labels.iter().enumerate() {
        let col = logits.column(t);
        let max = col.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + col.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - col[y];
        delta[[y, t]] -= 1.0;
    }
    Ok((total / labels.len() as f64, delta))
}

/// Index of the largest entry, lowest index on ties.
fn argmax(col: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in col.iter().enumerate() {
        if v > col[best] {
            best = i;
        }
    }
    best
}

const EVAL_CHUNK: usize = 512;

/// Mean cross-entropy and argmax accuracy over a dataset.
pub fn evaluate(model: &SparseMlp, dataset: &Dataset) -> Result<(f64, f64)> {
    check_width(model, dataset)?;
    let n = dataset.n_samples();
    let indices: Vec<usize> = (0..n).collect();
    let mut loss = 0.0;
    let mut correct = 0usize;
    for chunk in indices.chunks(EVAL_CHUNK) {
        let x = dataset.batch_matrix(chunk);
        let labels: Vec<usize> = chunk.iter().map(|&i| dataset.labels()[i]).collect();
        let logits = model.forward(x.view())?.logits;
        let (l, _) = cross_entropy(&logits, &labels)?;
        loss += l * chunk.len() as f64;
        correct += labels
            .iter()
            .enumerate()
            .filter(|&(t, &y)| argmax(logits.column(t)) == y)
            .count();
    }
    Ok((loss / n as f64, correct as f64 / n as f64))
}

fn check_width(model: &SparseMlp, dataset: &Dataset) -> Result<()> {
    let dims = model.dims();
    if dataset.n_features() != dims.n_features {
        return Err(Error::Shape(format!(
            "dataset has {} features, model expects {}",
            dataset.n_features(),
            dims.n_features
        )));
    }
    if dataset.n_classes() > dims.n_classes {
        return Err(Error::Shape(format!(
            "dataset has {} classes, model has {} outputs",
            dataset.n_classes(),
            dims.n_classes
        )));
    }
    Ok(())
}

/// One pass of shuffled mini-batch SGD over `train`, then evaluation of the
/// model on `train` and `test`.
pub fn train_epoch<R: Rng + ?Sized>(
    model: &mut SparseMlp,
    train: &Dataset,
    test: &Dataset,
    cfg: &TrainConfig,
    epoch: usize,
    rng: &mut R,
) -> Result<EpochMetrics> {
    cfg.validate()?;
    check_width(model, train)?;
    let mut order: Vec<usize> = (0..train.n_samples()).collect();
    order.shuffle(rng);
    let params = cfg.sgd();
    for batch in order.chunks(cfg.batch_size) {
        let x = train.batch_matrix(batch);
        let labels: Vec<usize> = batch.iter().map(|&i| train.labels()[i]).collect();
        let (_, grads) = model.loss_and_gradients(x.view(), &labels)?;
        model.apply_gradients(&grads, &params)?;
    }
    metrics_for(model, train, test, epoch)
}

/// Metrics of the current model without training.
pub fn metrics_for(
    model: &SparseMlp,
    train: &Dataset,
    test: &Dataset,
    epoch: usize,
) -> Result<EpochMetrics> {
    let (train_loss, train_accuracy) = evaluate(model, train)?;
    let (test_loss, test_accuracy) = evaluate(model, test)?;
    let counts = count_parameters(model);
    let d = model.dims();
    Ok(EpochMetrics {
        epoch,
        train_loss,
        train_accuracy,
        test_loss,
        test_accuracy,
        weight_param_count: counts.weights_only,
        bias_param_count: counts.weights_plus_biases - counts.weights_only,
        neuron_count_per_layer: [d.n_features, d.h1, d.h2, d.n_classes],
        removed_connections: 0,
        regrown_connections: 0,
        pruned_neurons: 0,
    })
}

/// Trains for `cfg.epochs` epochs without any rewiring, with the shuffle
/// stream derived from `cfg.seed`.
pub fn fit(
    model: &mut SparseMlp,
    train: &Dataset,
    test: &Dataset,
    cfg: &TrainConfig,
) -> Result<Vec<EpochMetrics>> {
    let mut rng = stream(cfg.seed, Purpose::Shuffle, 0);
    (0..cfg.epochs)
        .map(|e| train_epoch(model, train, test, cfg, e, &mut rng))
        .collect()
}

pub fn count_parameters(model: &SparseMlp) -> ParamCount {
    let weights: usize = model.layers().iter().map(Layer::weight_count).sum();
    let biases: usize = model.layers().iter().map(Layer::n_out).sum();
    ParamCount {
        weights_only: weights,
        weights_plus_biases: weights + biases,
    }
}

/// Input plus hidden neurons; output neurons are not counted.
pub fn count_neurons(model: &SparseMlp) -> usize {
    let d = model.dims();
    d.n_features + d.h1 + d.h2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{Connection, DenseLayer, SparseLayer};
    use ndarray::array;

    fn tiny_dataset() -> Dataset {
        Dataset::with_classes(
            "t",
            array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]],
            vec![0, 1, 0, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn dense_counts_match_fc_reference() {
        let cfg = InitConfig::default();
        let m = SparseMlp::build(Dims::new(500, 1000, 1000, 2), &cfg, Mode::Dense).unwrap();
        assert_eq!(count_parameters(&m).weights_only, 1_502_000);
        assert_eq!(count_neurons(&m), 2_500);
        // Counting does not need the large nets materialized.
        assert_eq!(Dims::new(7070, 7000, 7000, 2).dense_weight_count(), 98_504_000);
        assert_eq!(Dims::new(5000, 5000, 5000, 2).dense_weight_count(), 50_010_000);
        assert_eq!(Dims::new(1024, 1000, 1000, 15).dense_weight_count(), 2_039_000);
    }

    #[test]
    fn tiny_sparse_is_fully_connected() {
        let cfg = InitConfig {
            epsilon: 100.0,
            ..InitConfig::default()
        };
        let m = SparseMlp::build(Dims::new(2, 1, 1, 2), &cfg, Mode::Sparse).unwrap();
        assert_eq!(count_parameters(&m).weights_only, 2 + 1 + 2);
        assert_eq!(count_neurons(&m), 4);
    }

    #[test]
    fn zero_dims_rejected() {
        let r = SparseMlp::build(Dims::new(2, 0, 1, 2), &InitConfig::default(), Mode::Sparse);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn empty_sparse_counts() {
        let layers = [
            Layer::Sparse(SparseLayer::empty(3, 2).unwrap()),
            Layer::Sparse(SparseLayer::empty(2, 2).unwrap()),
            Layer::Sparse(SparseLayer::empty(2, 4).unwrap()),
        ];
        let m = SparseMlp::from_layers(layers).unwrap();
        assert_eq!(
            count_parameters(&m),
            ParamCount {
                weights_only: 0,
                weights_plus_biases: 8
            }
        );
    }

    #[test]
    fn constant_model_on_balanced_set() {
        let layers = [
            Layer::Sparse(SparseLayer::empty(2, 2).unwrap()),
            Layer::Sparse(SparseLayer::empty(2, 2).unwrap()),
            Layer::Sparse(SparseLayer::empty(2, 2).unwrap()),
        ];
        let m = SparseMlp::from_layers(layers).unwrap();
        let (loss, acc) = evaluate(&m, &tiny_dataset()).unwrap();
        assert_eq!(acc, 0.5);
        assert!((loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hand_built_separator() {
        // h1 copies both inputs, h2 passes them on, output reads them directly.
        let ident = |n| {
            SparseLayer::from_connections(
                n,
                n,
                (0..n as u32).map(|i| Connection::new(i, i, 1.0)).collect(),
                vec![0.0; n],
            )
            .unwrap()
        };
        let m = SparseMlp::from_layers([
            Layer::Sparse(ident(2)),
            Layer::Sparse(ident(2)),
            Layer::Dense(DenseLayer::new(array![[5.0, -5.0], [-5.0, 5.0]], array![0.0, 0.0]).unwrap()),
        ])
        .unwrap();
        let ds = Dataset::with_classes("t", array![[1.0, 0.0], [0.0, 1.0]], vec![0, 1], 2).unwrap();
        assert_eq!(evaluate(&m, &ds).unwrap().1, 1.0);
    }

    #[test]
    fn softmax_rows_normalized() {
        let cfg = InitConfig {
            seed: 4,
            ..InitConfig::default()
        };
        let m = SparseMlp::build(Dims::new(6, 5, 4, 3), &cfg, Mode::Sparse).unwrap();
        let x = Array2::from_shape_fn((6, 9), |(i, j)| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let p = m.predict_proba(x.view()).unwrap();
        for col in p.columns() {
            assert!((col.sum() - 1.0).abs() < 1e-12);
            assert!(col.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn cross_entropy_properties() {
        let logits = array![[50.0, 0.0], [-50.0, 0.0]];
        let (loss, _) = cross_entropy(&logits.column(0).to_owned().insert_axis(ndarray::Axis(1)), &[0]).unwrap();
        assert!((0.0..1e-40).contains(&loss));
        let (loss, _) = cross_entropy(&logits, &[0, 1]).unwrap();
        assert!(loss > 0.0);
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(array![1.0, 3.0, 3.0].view()), 1);
        assert_eq!(argmax(array![2.0, 2.0].view()), 0);
    }

    #[test]
    fn zero_lr_leaves_weights() {
        let cfg = InitConfig {
            seed: 1,
            ..InitConfig::default()
        };
        let mut m = SparseMlp::build(Dims::new(2, 4, 4, 2), &cfg, Mode::Sparse).unwrap();
        let before = m.clone();
        let tc = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        let ds = tiny_dataset();
        let mut rng = stream(0, Purpose::Shuffle, 0);
        let metrics = train_epoch(&mut m, &ds, &ds, &tc, 0, &mut rng).unwrap();
        assert_eq!(m.layers()[0].dense_weights(), before.layers()[0].dense_weights());
        assert_eq!(m.layers()[2].bias(), before.layers()[2].bias());
        assert!((0.0..=1.0).contains(&metrics.train_accuracy));
    }

    #[test]
    fn single_sample_loss_decreases() {
        let cfg = InitConfig {
            seed: 2,
            epsilon: 50.0,
            ..InitConfig::default()
        };
        let mut m = SparseMlp::build(Dims::new(3, 6, 6, 2), &cfg, Mode::Sparse).unwrap();
        let ds = Dataset::with_classes("one", array![[0.5, -1.0, 2.0]], vec![1], 2).unwrap();
        let (before, _) = evaluate(&m, &ds).unwrap();
        let tc = TrainConfig {
            lr: 0.5,
            momentum: 0.0,
            batch_size: 1,
            epochs: 1,
            ..TrainConfig::default()
        };
        let mut rng = stream(0, Purpose::Shuffle, 0);
        let after = train_epoch(&mut m, &ds, &ds, &tc, 0, &mut rng).unwrap();
        assert!(after.train_loss < before, "{} !< {before}", after.train_loss);
    }

    #[test]
    fn deterministic_epochs() {
        let ds = tiny_dataset();
        let run = || {
            let cfg = InitConfig {
                seed: 8,
                ..InitConfig::default()
            };
            let mut m = SparseMlp::build(Dims::new(2, 8, 8, 2), &cfg, Mode::Sparse).unwrap();
            let tc = TrainConfig {
                epochs: 5,
                batch_size: 2,
                seed: 3,
                ..TrainConfig::default()
            };
            fit(&mut m, &ds, &ds, &tc).unwrap()
        };
        let (a, b) = (run(), run());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.train_loss.to_bits(), y.train_loss.to_bits());
            assert_eq!(x.test_accuracy.to_bits(), y.test_accuracy.to_bits());
        }
    }

    #[test]
    fn dims_chain_enforced() {
        let r = SparseMlp::from_layers([
            Layer::Sparse(SparseLayer::empty(2, 3).unwrap()),
            Layer::Sparse(SparseLayer::empty(2, 2).unwrap()),
            Layer::Sparse(SparseLayer::empty(2, 2).unwrap()),
        ]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }
}
