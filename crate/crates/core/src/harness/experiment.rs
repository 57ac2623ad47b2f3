use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::data::{load_csv, split, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::evolution::evolve;
use crate::network::{
    count_neurons, count_parameters, train_epoch, Dims, EpochMetrics, ParamCount, SparseMlp,
};
use crate::pruning::{prune_neurons, should_prune, HiddenLayer, PruneReport, PruneSchedule};
use crate::rng::{stream, Purpose};

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub name: String,
    pub method: Method,
    pub dataset: String,
    /// Dims the experiment was configured with (the FC reference network).
    pub reference_dims: Dims,
    /// Dims the model was initialized with; differs from the reference only
    /// for the DIRECT methods.
    pub initial_dims: Dims,
    pub final_dims: Dims,
    pub epochs: Vec<EpochMetrics>,
    pub prune_reports: Vec<PruneReport>,
    pub max_test_accuracy: f64,
    pub best_epoch: usize,
    pub initial_params: ParamCount,
    pub final_params: ParamCount,
    pub final_neurons: usize,
    pub dense_reference_weights: usize,
    pub compression_rate: u64,
    pub split_warning: Option<String>,
    pub model: SparseMlp,
}

impl ExperimentResult {
    pub fn final_metrics(&self) -> &EpochMetrics {
        self.epochs.last().expect("at least one epoch")
    }

    pub fn summary(&self) -> Summary {
        let last = self.final_metrics();
        Summary {
            name: self.name.clone(),
            method: self.method,
            dataset: self.dataset.clone(),
            epochs: self.epochs.len(),
            reference_dims: self.reference_dims,
            initial_dims: self.initial_dims,
            final_dims: self.final_dims,
            max_test_accuracy: self.max_test_accuracy,
            best_epoch: self.best_epoch,
            final_train_accuracy: last.train_accuracy,
            final_test_accuracy: last.test_accuracy,
            final_gap: last.generalization_gap(),
            initial_params: self.initial_params,
            final_params: self.final_params,
            final_neurons: self.final_neurons,
            dense_reference_weights: self.dense_reference_weights,
            compression_rate: self.compression_rate,
            split_warning: self.split_warning.clone(),
        }
    }
}

/// Serializable digest of a run, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub method: Method,
    pub dataset: String,
    pub epochs: usize,
    pub reference_dims: Dims,
    pub initial_dims: Dims,
    pub final_dims: Dims,
    pub max_test_accuracy: f64,
    pub best_epoch: usize,
    pub final_train_accuracy: f64,
    pub final_test_accuracy: f64,
    pub final_gap: f64,
    pub initial_params: ParamCount,
    pub final_params: ParamCount,
    pub final_neurons: usize,
    pub dense_reference_weights: usize,
    pub compression_rate: u64,
    pub split_warning: Option<String>,
}

/// `dense / sparse`, rounded to the nearest integer.
pub fn compression_rate(dense_weight_count: usize, sparse_weight_count: usize) -> Result<u64> {
    if sparse_weight_count == 0 {
        return Err(Error::Config("compression rate of a model with no weights".into()));
    }
    Ok((dense_weight_count as f64 / sparse_weight_count as f64).round() as u64)
}

/// Hidden dims NPSET (both layers) ends with after `epochs` epochs.
pub fn direct_dims(reference: Dims, sched: &PruneSchedule, epochs: usize) -> Dims {
    let both = PruneSchedule {
        target_layers: HiddenLayer::BOTH.to_vec(),
        ..sched.clone()
    };
    both.simulate(reference, epochs)
}

/// Train and test splits after standardization.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub warning: Option<String>,
}

pub fn prepare_data(cfg: &ExperimentConfig, dataset: &Dataset) -> Result<PreparedData> {
    let s = split(dataset, cfg.train_fraction, cfg.seed)?;
    let (train, test) = if cfg.standardize {
        let std = Standardizer::fit(&s.train);
        (std.transform(&s.train)?, std.transform(&s.test)?)
    } else {
        (s.train, s.test)
    };
    Ok(PreparedData {
        train,
        test,
        warning: s.warning,
    })
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let path = cfg
        .data_path
        .as_ref()
        .ok_or_else(|| Error::Config("no data path configured".into()))?;
    load_csv(path, &cfg.label_column)
}

/// Load, split, standardize, build and train as configured.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let dataset = load_dataset(cfg)?;
    run_on_dataset(cfg, &dataset)
}

pub fn run_on_dataset(cfg: &ExperimentConfig, dataset: &Dataset) -> Result<ExperimentResult> {
    cfg.validate()?;
    let data = prepare_data(cfg, dataset)?;
    let (h1, h2) = cfg.resolve_hidden(dataset.name())?;
    let reference = Dims::new(dataset.n_features(), h1, h2, dataset.n_classes());
    let mut result = run_on_split(cfg, reference, &data.train, &data.test)?;
    result.dataset = dataset.name().to_string();
    result.split_warning = data.warning;
    Ok(result)
}

/// The per-epoch loop: prune (NPSET variants, inside the window), train one
/// epoch, then rewire (sparse methods, except after the last epoch).
pub fn run_on_split(
    cfg: &ExperimentConfig,
    reference: Dims,
    train: &Dataset,
    test: &Dataset,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let epochs = cfg.train.epochs;
    let initial_dims = if cfg.method.is_direct() {
        direct_dims(reference, &cfg.prune, epochs)
    } else {
        reference
    };
    let mut model = SparseMlp::build(initial_dims, &cfg.init, cfg.mode())?;
    let initial_params = count_parameters(&model);

    let pruning = cfg.method.pruned_layers().map(|_| &cfg.prune);
    let sparse = model.is_sparse();
    let mut shuffle_rng = stream(cfg.seed, Purpose::Shuffle, 0);
    let mut evolve_rng = stream(cfg.seed, Purpose::Evolution, 0);

    let mut history = Vec::with_capacity(epochs);
    let mut reports = Vec::new();
    for epoch in 0..epochs {
        let mut pruned = 0;
        if let Some(sched) = pruning {
            if should_prune(epoch, sched) {
                let report = prune_neurons(&mut model, sched, epoch)?;
                pruned = report.removed_neurons();
                log::debug!("epoch {epoch}: pruned {pruned} neurons, dims now {}", report.dims);
                reports.push(report);
            }
        }
        let mut metrics = train_epoch(&mut model, train, test, &cfg.train, epoch, &mut shuffle_rng)?;
        metrics.pruned_neurons = pruned;
        if sparse && epoch + 1 < epochs {
            let stats = evolve(&mut model, &cfg.evolution, &cfg.init, &mut evolve_rng)?;
            metrics.removed_connections = stats.removed();
            metrics.regrown_connections = stats.regrown();
        }
        log::info!(
            "{} epoch {epoch}: train_acc {:.4} test_acc {:.4} weights {}",
            cfg.name,
            metrics.train_accuracy,
            metrics.test_accuracy,
            metrics.weight_param_count
        );
        history.push(metrics);
    }

    let (best_epoch, max_test_accuracy) = history
        .iter()
        .map(|m| (m.epoch, m.test_accuracy))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let final_params = count_parameters(&model);
    let dense_reference_weights = reference.dense_weight_count();
    Ok(ExperimentResult {
        name: cfg.name.clone(),
        method: cfg.method,
        dataset: train.name().to_string(),
        reference_dims: reference,
        initial_dims,
        final_dims: model.dims(),
        epochs: history,
        prune_reports: reports,
        max_test_accuracy,
        best_epoch,
        initial_params,
        final_params,
        final_neurons: count_neurons(&model),
        dense_reference_weights,
        compression_rate: compression_rate(dense_reference_weights, final_params.weights_only)?,
        split_warning: None,
        model,
    })
}
