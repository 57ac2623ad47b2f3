use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentResult, Summary};
use crate::error::{Error, Result};
use crate::network::EpochMetrics;
use crate::pruning::PruneReport;

pub const METRICS_FILE: &str = "metrics.csv";
pub const PRUNE_FILE: &str = "prune_reports.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const METRICS_HEADER: &str = "epoch,train_loss,train_acc,test_loss,test_acc,weights,biases,neurons_h1,neurons_h2,removed_conns,regrown_conns,pruned_neurons";

/// Learning curves, one row per epoch. Losses and accuracies are printed at
/// 1e-6 granularity.
pub fn metrics_csv(epochs: &[EpochMetrics]) -> String {
    let mut out = String::with_capacity(64 * (epochs.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for m in epochs {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{},{}",
            m.epoch,
            m.train_loss,
            m.train_accuracy,
            m.test_loss,
            m.test_accuracy,
            m.weight_param_count,
            m.bias_param_count,
            m.neuron_count_per_layer[1],
            m.neuron_count_per_layer[2],
            m.removed_connections,
            m.regrown_connections,
            m.pruned_neurons
        );
    }
    out
}

pub fn prune_csv(reports: &[PruneReport]) -> String {
    let mut out = String::from("epoch,layer,removed_neurons,new_size,removed_conns\n");
    for r in reports {
        for (i, (layer, removed)) in r.removed.iter().enumerate() {
            // Connection totals are per report; attribute them to its first row.
            let conns = if i == 0 { r.removed_connections } else { 0 };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.epoch,
                layer.name(),
                removed.len(),
                layer.size(&r.dims),
                conns
            );
        }
    }
    out
}

/// Writes `metrics.csv`, `prune_reports.csv` and `summary.json` into `dir`.
pub fn export_metrics(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        (METRICS_FILE, metrics_csv(&result.epochs)),
        (PRUNE_FILE, prune_csv(&result.prune_reports)),
        (
            SUMMARY_FILE,
            serde_json::to_string_pretty(&result.summary()).expect("summary serializes") + "\n",
        ),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Summary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("{}: invalid summary: {e}", path.display())))
}

/// Parsed row of a metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub epoch: usize,
    pub train_acc: f64,
    pub test_acc: f64,
}

impl CurvePoint {
    pub fn gap(&self) -> f64 {
        self.train_acc - self.test_acc
    }
}

pub fn read_curves(path: impl AsRef<Path>) -> Result<Vec<CurvePoint>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let bad = |e: String| Error::Data(format!("{}: {e}", path.display()));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad(format!("short row {rec:?}")));
        out.push(CurvePoint {
            epoch: field(0)?.parse().map_err(|_| bad("bad epoch".into()))?,
            train_acc: field(2)?.parse().map_err(|_| bad("bad train_acc".into()))?,
            test_acc: field(4)?.parse().map_err(|_| bad("bad test_acc".into()))?,
        });
    }
    Ok(out)
}
