//! One rewiring step: drop the weakest connections, regrow as many at random.
//!
//! cargo run --example rewiring

use npset::evolution::{prune_weights, regrow_weights, evolve, EvolutionConfig};
use npset::network::{Dims, Mode, SparseMlp};
use npset::rng::{stream, Purpose};
use npset::sparse::InitConfig;

fn main() -> npset::Result<()> {
    let init = InitConfig { epsilon: 2.0, seed: 5, ..InitConfig::default() };
    let model = SparseMlp::build(Dims::new(12, 10, 8, 3), &init, Mode::Sparse)?;

    let mut layer = model.layers()[0].as_sparse().expect("sparse").clone();
    let before = layer.nnz();
    let removed = prune_weights(&mut layer, 0.3);
    println!("layer 0: {before} connections, removed {} smallest:", removed.len());
    for c in removed.iter().take(5) {
        println!("  ({:>2}, {:>2}) w = {:+.4}", c.row, c.col, c.weight);
    }
    let mut rng = stream(5, Purpose::Evolution, 0);
    let grown = regrow_weights(&mut layer, removed.len(), &init, &mut rng)?;
    println!("regrew {} at random empty cells, nnz back to {}", grown.len(), layer.nnz());

    let mut model = model;
    let stats = evolve(&mut model, &EvolutionConfig::default(), &init, &mut rng)?;
    for (k, l) in stats.layers.iter().enumerate() {
        println!("evolve layer {k}: removed {:>3} regrown {:>3}", l.removed, l.regrown);
    }
    Ok(())
}
