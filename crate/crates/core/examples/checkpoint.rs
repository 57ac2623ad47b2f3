//! Save a trained model in both formats and reload it.
//!
//! cargo run --example checkpoint

use npset::data::synthetic::shaped_like;
use npset::harness::{load_checkpoint, run_on_dataset, save_checkpoint, CheckpointFormat, CheckpointMeta, ExperimentConfig, Method};

fn main() -> npset::Result<()> {
    let ds = shaped_like("toy", 200, 20, 4, 9).generate()?;
    let mut cfg = ExperimentConfig {
        method: Method::NpsetL1,
        hidden: Some((30, 30)),
        seed: 4,
        ..ExperimentConfig::default()
    };
    cfg.train.epochs = 12;
    cfg.prune.beta = 2;
    cfg.prune.gamma = 4;
    cfg.apply_method_layers();
    let r = run_on_dataset(&cfg, &ds)?;

    let dir = std::env::temp_dir().join("npset-checkpoint-example");
    std::fs::create_dir_all(&dir).map_err(|e| npset::Error::Checkpoint(e.to_string()))?;
    let meta = CheckpointMeta { method: cfg.method.to_string(), epoch: cfg.train.epochs as u64 };
    let x = ds.batch_matrix(&(0..10).collect::<Vec<_>>());
    let reference = r.model.predict_proba(x.view())?;
    for (fmt, name) in [(CheckpointFormat::Binary, "model.bin"), (CheckpointFormat::Text, "model.txt")] {
        let path = dir.join(name);
        save_checkpoint(&r.model, &meta, &path, fmt)?;
        let (back, m) = load_checkpoint(&path)?;
        let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
        println!(
            "{name}: {size} bytes, {} at epoch {}, dims {}, identical outputs: {}",
            m.method,
            m.epoch,
            back.dims(),
            back.predict_proba(x.view())? == reference
        );
    }
    Ok(())
}
