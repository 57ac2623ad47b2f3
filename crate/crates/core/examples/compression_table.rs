//! Parameter accounting at the benchmark widths, without training.
//!
//! The pruned widths come from running the default schedule (alpha 0.04,
//! beta 10, gamma 40) over 100 epochs.
//!
//! cargo run --example compression_table

use npset::harness::{compression_rate, direct_dims, PRESETS};
use npset::network::Dims;
use npset::pruning::PruneSchedule;

fn main() -> npset::Result<()> {
    let sched = PruneSchedule::default();
    println!(
        "{:<14} {:>12} {:>7} {:>9} {:>9} {:>8} {:>8}",
        "dataset", "dense", "hidden", "pruned", "neurons", "SET x", "NPSET x"
    );
    for p in PRESETS {
        let dims = Dims::new(p.features, p.hidden, p.hidden, p.classes);
        let pruned = direct_dims(dims, &sched, 100);
        println!(
            "{:<14} {:>12} {:>7} {:>9} {:>9} {:>8} {:>8}",
            p.name,
            dims.dense_weight_count(),
            p.hidden,
            pruned.h1,
            pruned.n_features + pruned.h1 + pruned.h2,
            compression_rate(p.fc_weights, p.set_weights)?,
            compression_rate(p.fc_weights, p.npset_weights)?
        );
    }
    Ok(())
}
