//! Train a sparse MLP with per-epoch rewiring on the bundled CSV.
//!
//! cargo run --release --example train_set

use npset::harness::{run_on_dataset, ExperimentConfig, Method};
use npset::data::{load_csv, LabelColumn};

fn main() -> npset::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/blobs.csv");
    let ds = load_csv(path, &LabelColumn::default())?;
    println!("{}: {} samples, {} features, classes {:?}", ds.name(), ds.n_samples(), ds.n_features(), ds.class_names());

    let mut cfg = ExperimentConfig {
        method: Method::Set,
        hidden: Some((64, 64)),
        seed: 1,
        ..ExperimentConfig::default()
    };
    cfg.init.epsilon = 4.0;
    cfg.train.epochs = 30;
    cfg.apply_method_layers();

    let r = run_on_dataset(&cfg, &ds)?;
    for m in r.epochs.iter().step_by(5) {
        println!(
            "epoch {:>3}  loss {:.4}  train {:.3}  test {:.3}  rewired {}",
            m.epoch, m.train_loss, m.train_accuracy, m.test_accuracy, m.removed_connections
        );
    }
    println!(
        "best test accuracy {:.3} at epoch {}, {} weights ({}x fewer than dense)",
        r.max_test_accuracy, r.best_epoch, r.final_params.weights_only, r.compression_rate
    );
    Ok(())
}
