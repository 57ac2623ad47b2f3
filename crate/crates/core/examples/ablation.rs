//! Train, then delete growing fractions of the least connected first-layer
//! neurons and watch test accuracy.
//!
//! cargo run --release --example ablation

use npset::data::{load_csv, LabelColumn};
use npset::harness::{ablate_least_connected, prepare_data, run_on_dataset, ExperimentConfig, Method};
use npset::pruning::{DegreeMode, HiddenLayer};

fn main() -> npset::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/blobs.csv");
    let ds = load_csv(path, &LabelColumn::default())?;
    let mut cfg = ExperimentConfig {
        method: Method::Set,
        hidden: Some((80, 80)),
        seed: 3,
        ..ExperimentConfig::default()
    };
    cfg.init.epsilon = 4.0;
    cfg.train.epochs = 30;
    cfg.apply_method_layers();

    let r = run_on_dataset(&cfg, &ds)?;
    let test = prepare_data(&cfg, &ds)?.test;
    let fractions: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    for mode in [DegreeMode::Out, DegreeMode::InOut] {
        println!("degree = {mode}");
        for p in ablate_least_connected(&r.model, HiddenLayer::First, &fractions, &test, mode)? {
            println!("  {:>4.0}% ({:>2} neurons)  acc {:.3}", 100.0 * p.fraction, p.removed, p.accuracy);
        }
    }
    Ok(())
}
