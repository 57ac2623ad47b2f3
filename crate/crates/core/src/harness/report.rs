use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::Summary;
use super::export::{read_summary, SUMMARY_FILE};
use crate::error::{Error, Result};

/// All `summary.json` files below `root`, in path order.
pub fn find_summaries(root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::Data(format!("{} is not a directory", root.display())));
    }
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = entry.map_err(|e| Error::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == SUMMARY_FILE) {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

pub fn collect(root: impl AsRef<Path>) -> Result<Vec<(PathBuf, Summary)>> {
    find_summaries(root)?
        .into_iter()
        .map(|p| read_summary(&p).map(|s| (p, s)))
        .collect()
}

pub const REPORT_HEADER: &str = "run,dataset,method,epochs,final_dims,max_test_acc,best_epoch,final_gap,weights,weights_plus_biases,neurons,dense_weights,compression";

/// One CSV row per run; `run` is the summary's directory relative to `root`.
pub fn render_report(root: &Path, runs: &[(PathBuf, Summary)]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for (path, s) in runs {
        let dir = path.parent().unwrap_or(root);
        let rel = dir.strip_prefix(root).unwrap_or(dir);
        let rel = if rel.as_os_str().is_empty() {
            ".".to_string()
        } else {
            rel.display().to_string()
        };
        let d = s.final_dims;
        out.push_str(&format!(
            "{rel},{},{},{},{}-{}-{}-{},{:.4},{},{:.4},{},{},{},{},{}\n",
            s.dataset,
            s.method,
            s.epochs,
            d.n_features,
            d.h1,
            d.h2,
            d.n_classes,
            s.max_test_accuracy,
            s.best_epoch,
            s.final_gap,
            s.final_params.weights_only,
            s.final_params.weights_plus_biases,
            s.final_neurons,
            s.dense_reference_weights,
            s.compression_rate
        ));
    }
    out
}

pub fn report(root: impl AsRef<Path>) -> Result<String> {
    let root = root.as_ref();
    let runs = collect(root)?;
    if runs.is_empty() {
        return Err(Error::Data(format!("no {SUMMARY_FILE} found under {}", root.display())));
    }
    Ok(render_report(root, &runs))
}
