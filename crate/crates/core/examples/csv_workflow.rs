//! Load a CSV, split it by class and standardize with training statistics.
//!
//! cargo run --example csv_workflow [file.csv] [label_column]

use npset::data::{load_csv, split, LabelColumn, Standardizer};

fn main() -> npset::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/blobs.csv").into());
    let label: LabelColumn = args.next().as_deref().unwrap_or("label").parse().expect("infallible");

    let ds = load_csv(&path, &label)?;
    println!("{}: {} x {}, class counts {:?}", ds.name(), ds.n_samples(), ds.n_features(), ds.class_counts());
    let s = split(&ds, 2.0 / 3.0, 0)?;
    if let Some(w) = &s.warning {
        println!("warning: {w}");
    }
    println!("train {:?} / test {:?}", s.train.class_counts(), s.test.class_counts());
    let std = Standardizer::fit(&s.train);
    let train = std.transform(&s.train)?;
    let col = train.features().column(0);
    println!(
        "feature 0: raw mean {:.3} sd {:.3}; standardized mean {:.1e}",
        std.mean()[0],
        std.std()[0],
        col.mean().unwrap_or(0.0)
    );
    Ok(())
}
