//! Dense and sparse learning curves side by side, with the train/test gap.
//!
//! cargo run --release --example learning_curves [out_dir]

use npset::data::{load_csv, LabelColumn};
use npset::harness::{export_metrics, read_curves, run_on_dataset, ExperimentConfig, Method};

fn main() -> npset::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/blobs.csv");
    let ds = load_csv(path, &LabelColumn::default())?;
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("npset-curves"));

    let mut curves = Vec::new();
    for method in [Method::Dense, Method::Set] {
        let mut cfg = ExperimentConfig { method, hidden: Some((128, 128)), seed: 6, ..ExperimentConfig::default() };
        cfg.init.epsilon = 4.0;
        cfg.train.epochs = 40;
        cfg.train.weight_decay = 0.0;
        cfg.apply_method_layers();
        let r = run_on_dataset(&cfg, &ds)?;
        let dir = out.join(method.as_str());
        export_metrics(&r, &dir)?;
        curves.push((method, read_curves(dir.join("metrics.csv"))?));
    }
    println!("{:>5} {:>22} {:>22}", "epoch", "DENSE train/test/gap", "SET train/test/gap");
    for e in (0..40).step_by(5).chain([39]) {
        let cell = |i: usize| {
            let p = &curves[i].1[e];
            format!("{:.3}/{:.3}/{:+.3}", p.train_acc, p.test_acc, p.gap())
        };
        println!("{e:>5} {:>22} {:>22}", cell(0), cell(1));
    }
    println!("curves written under {}", out.display());
    Ok(())
}
