//! Rewiring plus scheduled removal of the least connected hidden neurons.
//!
//! cargo run --release --example neuron_pruning

use npset::data::{load_csv, LabelColumn};
use npset::harness::{run_on_dataset, ExperimentConfig, Method};

fn main() -> npset::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/blobs.csv");
    let ds = load_csv(path, &LabelColumn::default())?;

    let mut cfg = ExperimentConfig {
        method: Method::Npset,
        hidden: Some((100, 100)),
        seed: 2,
        ..ExperimentConfig::default()
    };
    cfg.init.epsilon = 4.0;
    cfg.train.epochs = 40;
    cfg.prune.alpha = 0.05;
    cfg.prune.beta = 5;
    cfg.prune.gamma = 20;
    cfg.apply_method_layers();

    let r = run_on_dataset(&cfg, &ds)?;
    for rep in r.prune_reports.iter().step_by(4) {
        println!(
            "epoch {:>2}: removed {:>2} neurons, {:>3} connections -> {}",
            rep.epoch,
            rep.removed_neurons(),
            rep.removed_connections,
            rep.dims
        );
    }
    let first = &r.epochs[0];
    let last = r.final_metrics();
    println!("weights {} -> {}", first.weight_param_count, last.weight_param_count);
    println!("max test accuracy {:.3}, final dims {}", r.max_test_accuracy, r.final_dims);
    Ok(())
}
