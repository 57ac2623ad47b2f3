//! Erdős–Rényi initialization: how epsilon controls layer density.
//!
//! cargo run --example init_density

use npset::harness::PRESETS;
use npset::network::{count_parameters, Dims, Mode, SparseMlp};
use npset::rng::{stream, Purpose};
use npset::sparse::{connection_probability, er_init, expected_nnz, InitConfig};

fn main() -> npset::Result<()> {
    println!("single 1000x1000 layer");
    println!("{:>8} {:>10} {:>10} {:>10}", "epsilon", "p", "expected", "drawn");
    for epsilon in [1.0, 4.0, 8.0, 10.0, 20.0] {
        let cfg = InitConfig { epsilon, seed: 0, ..InitConfig::default() };
        let mut rng = stream(0, Purpose::Init, 0);
        let layer = er_init(1000, 1000, &cfg, &mut rng)?;
        println!(
            "{epsilon:>8.1} {:>10.5} {:>10.0} {:>10}",
            connection_probability(1000, 1000, epsilon),
            expected_nnz(1000, 1000, epsilon),
            layer.nnz()
        );
    }

    println!("\nwhole networks at the benchmark widths (epsilon = 10)");
    println!("{:<14} {:>12} {:>12} {:>12}", "dataset", "dense", "sparse", "reported");
    for p in PRESETS.iter().take(6) {
        let dims = Dims::new(p.features, p.hidden, p.hidden, p.classes);
        let model = SparseMlp::build(dims, &InitConfig::default(), Mode::Sparse)?;
        println!(
            "{:<14} {:>12} {:>12} {:>12}",
            p.name,
            dims.dense_weight_count(),
            count_parameters(&model).weights_only,
            p.set_weights
        );
    }
    Ok(())
}
