//! Helpers shared by the integration tests.
//!
//! `Oracle` is a naive masked-dense re-implementation of the network using
//! nested `Vec`s and per-sample loops. It shares no kernels with the crate.

#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use npset::data::{load_csv, Dataset, LabelColumn};
use npset::network::SparseMlp;
use npset::sparse::Layer;

pub struct OracleLayer {
    /// `w[i][j]`: input `i` to output `j`.
    pub w: Vec<Vec<f64>>,
    pub mask: Vec<Vec<bool>>,
    pub b: Vec<f64>,
}

pub struct Oracle {
    pub layers: Vec<OracleLayer>,
}

pub struct OracleGrads {
    pub w: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<f64>>,
}

impl Oracle {
    pub fn from_model(model: &SparseMlp) -> Self {
        let layers = model
            .layers()
            .iter()
            .map(|layer| {
                let (n_in, n_out) = (layer.n_in(), layer.n_out());
                let mut w = vec![vec![0.0; n_out]; n_in];
                let mut mask = vec![vec![false; n_out]; n_in];
                match layer {
                    Layer::Sparse(l) => {
                        for c in l.connections() {
                            w[c.row as usize][c.col as usize] = c.weight;
                            mask[c.row as usize][c.col as usize] = true;
                        }
                    }
                    Layer::Dense(l) => {
                        for i in 0..n_in {
                            for j in 0..n_out {
                                w[i][j] = l.weights()[[i, j]];
                                mask[i][j] = true;
                            }
                        }
                    }
                }
                OracleLayer {
                    w,
                    mask,
                    b: layer.bias().to_vec(),
                }
            })
            .collect();
        Oracle { layers }
    }

    /// Activations of every layer for one sample; the last entry is logits.
    fn activations(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut acts = vec![x.to_vec()];
        let mut pre = Vec::new();
        for (k, l) in self.layers.iter().enumerate() {
            let a = acts.last().unwrap();
            let mut z = l.b.clone();
            for (i, ai) in a.iter().enumerate() {
                for j in 0..z.len() {
                    if l.mask[i][j] {
                        z[j] += l.w[i][j] * ai;
                    }
                }
            }
            let out = if k + 1 < self.layers.len() {
                z.iter().map(|v| v.max(0.0)).collect()
            } else {
                z.clone()
            };
            pre.push(z);
            acts.push(out);
        }
        (acts, pre)
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).0.pop().unwrap()
    }

    fn softmax(z: &[f64]) -> Vec<f64> {
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|v| v / s).collect()
    }

    /// Mean cross-entropy over `samples` and its gradients.
    pub fn loss_and_grads(&self, samples: &[Vec<f64>], labels: &[usize]) -> (f64, OracleGrads) {
        let n = samples.len() as f64;
        let mut gw: Vec<Vec<Vec<f64>>> = self
            .layers
            .iter()
            .map(|l| vec![vec![0.0; l.b.len()]; l.w.len()])
            .collect();
        let mut gb: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect();
        let mut loss = 0.0;
        for (x, &y) in samples.iter().zip(labels) {
            let (acts, pre) = self.activations(x);
            let p = Self::softmax(acts.last().unwrap());
            loss -= p[y].ln();
            let mut delta: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(j, pj)| (pj - if j == y { 1.0 } else { 0.0 }) / n)
                .collect();
            for k in (0..self.layers.len()).rev() {
                let l = &self.layers[k];
                let a = &acts[k];
                for i in 0..a.len() {
                    for j in 0..delta.len() {
                        if l.mask[i][j] {
                            gw[k][i][j] += a[i] * delta[j];
                        }
                    }
                }
                for j in 0..delta.len() {
                    gb[k][j] += delta[j];
                }
                if k > 0 {
                    let mut next = vec![0.0; a.len()];
                    for (i, v) in next.iter_mut().enumerate() {
                        if pre[k - 1][i] > 0.0 {
                            for j in 0..delta.len() {
                                if l.mask[i][j] {
                                    *v += l.w[i][j] * delta[j];
                                }
                            }
                        }
                    }
                    delta = next;
                }
            }
        }
        (loss / n, OracleGrads { w: gw, b: gb })
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Directory holding real benchmark CSVs: `$NPSET_DATA_DIR`, else `data/`
/// at the workspace root.
pub fn data_dir() -> PathBuf {
    std::env::var_os("NPSET_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")))
}

/// Loads `<data_dir>/<name>.csv` (or its lowercase spelling) if present.
pub fn real_dataset(name: &str) -> Option<Result<Dataset, npset::Error>> {
    let dir = data_dir();
    [name.to_string(), name.to_lowercase()]
        .iter()
        .map(|n| dir.join(format!("{n}.csv")))
        .find(|p| p.is_file())
        .map(|p| load_csv(p, &LabelColumn::default()))
}
