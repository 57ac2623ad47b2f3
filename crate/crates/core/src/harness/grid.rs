use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::checkpoint::{save_checkpoint, CheckpointMeta};
use super::config::ConfigMap;
use super::experiment::{run_experiment, ExperimentResult, Summary};
use super::export::export_metrics;
use crate::error::{Error, Result};

/// One point of a grid: the overridden keys and their values.
pub type GridPoint = Vec<(String, String)>;

/// Cartesian product of the `[grid]` section. Keys are taken in sorted order
/// and the last key varies fastest.
pub fn expand_grid(map: &ConfigMap) -> Result<Vec<GridPoint>> {
    let mut points: Vec<GridPoint> = vec![Vec::new()];
    for (key, list) in map.grid() {
        let values: Vec<&str> = list.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(Error::Config(format!("grid key `{key}` has no values")));
        }
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.to_string()));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct GridRun {
    pub index: usize,
    pub overrides: GridPoint,
    pub dir: PathBuf,
    pub summary: Summary,
}

fn label(point: &GridPoint) -> String {
    point
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Runs every grid point in parallel, each into `out/run_NNN`, and writes
/// `out/grid_index.csv`. Results come back in grid order.
pub fn run_grid(map: &ConfigMap, out: impl AsRef<Path>) -> Result<Vec<GridRun>> {
    let out = out.as_ref();
    let points = expand_grid(map)?;
    // Validate every point before spending time on training.
    let configs = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut m = map.clone();
            for (k, v) in p {
                m.set(k, v.clone())?;
            }
            let mut cfg = m.experiment()?;
            cfg.name = format!("{}_{i:03}", cfg.name);
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let runs = configs
        .par_iter()
        .zip(points.par_iter())
        .enumerate()
        .map(|(i, (cfg, point))| {
            let dir = out.join(format!("run_{i:03}"));
            log::info!("grid run {i}: {}", label(point));
            let result = run_experiment(cfg)?;
            write_run(&result, &dir, cfg.checkpoint.then_some(cfg.checkpoint_format))?;
            Ok(GridRun {
                index: i,
                overrides: point.clone(),
                dir,
                summary: result.summary(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let index = out.join("grid_index.csv");
    let mut body = String::from("index,overrides,dir,max_test_accuracy,final_weights,compression_rate\n");
    for r in &runs {
        body.push_str(&format!(
            "{},\"{}\",{},{:.6},{},{}\n",
            r.index,
            label(&r.overrides),
            r.dir.file_name().unwrap_or_default().to_string_lossy(),
            r.summary.max_test_accuracy,
            r.summary.final_params.weights_only,
            r.summary.compression_rate
        ));
    }
    fs::write(&index, body).map_err(|e| Error::io(&index, e))?;
    Ok(runs)
}

/// Exports metrics and, if a format is given, a final checkpoint.
pub fn write_run(
    result: &ExperimentResult,
    dir: &Path,
    checkpoint: Option<super::config::CheckpointFormat>,
) -> Result<Vec<PathBuf>> {
    let mut files = export_metrics(result, dir)?;
    if let Some(format) = checkpoint {
        let path = dir.join("model.ckpt");
        let meta = CheckpointMeta {
            method: result.method.as_str().to_string(),
            epoch: result.epochs.len() as u64,
        };
        save_checkpoint(&result.model, &meta, &path, format)?;
        files.push(path);
    }
    Ok(files)
}
