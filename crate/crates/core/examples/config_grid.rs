//! Parse an INI config, override a key and expand its grid section.
//!
//! cargo run --release --example config_grid

use npset::harness::{expand_grid, run_grid, ConfigMap};

fn main() -> npset::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/blobs.ini");
    let mut map = ConfigMap::load(path)?;
    map.set("epochs", "10")?;
    let cfg = map.experiment()?;
    println!("{} / {} / hidden {:?} / {} epochs", cfg.name, cfg.method, cfg.hidden, cfg.train.epochs);

    for (i, point) in expand_grid(&map)?.iter().enumerate() {
        println!("point {i}: {point:?}");
    }
    let out = std::env::temp_dir().join("npset-grid-example");
    for run in run_grid(&map, &out)? {
        println!(
            "run_{:03}: {:?} max acc {:.3} compression {}x",
            run.index, run.overrides, run.summary.max_test_accuracy, run.summary.compression_rate
        );
    }
    println!("index at {}", out.join("grid_index.csv").display());
    Ok(())
}
