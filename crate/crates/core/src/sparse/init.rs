use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Geometric, Uniform};

use super::coo::{Connection, SparseLayer};
use super::dense::DenseLayer;
use crate::error::{Error, Result};

/// Default density control. See `InitConfig::epsilon`.
pub const DEFAULT_EPSILON: f64 = 10.0;

/// Erdős–Rényi initialization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    /// Density control: each cell of an `n_in x n_out` layer is present with
    /// probability `min(1, epsilon * (n_in + n_out) / (n_in * n_out))`.
    pub epsilon: f64,
    /// Half-width of the uniform weight distribution. `None` selects the
    /// per-layer fan rule `sqrt(6 / (n_in + n_out))`.
    pub weight_scale: Option<f64>,
    pub seed: u64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            weight_scale: None,
            seed: 0,
        }
    }
}

impl InitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let Some(s) = self.weight_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!(
                    "weight_scale must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn scale_for(&self, n_in: usize, n_out: usize) -> f64 {
        self.weight_scale
            .unwrap_or_else(|| (6.0 / (n_in + n_out) as f64).sqrt())
    }

    pub fn weight_distribution(&self, n_in: usize, n_out: usize) -> Uniform<f64> {
        let s = self.scale_for(n_in, n_out);
        Uniform::new_inclusive(-s, s).expect("scale is positive and finite")
    }
}

/// Connection probability of an Erdős–Rényi bipartite layer.
pub fn connection_probability(n_in: usize, n_out: usize, epsilon: f64) -> f64 {
    let cells = n_in as f64 * n_out as f64;
    (epsilon * (n_in + n_out) as f64 / cells).min(1.0)
}

/// Expected connection count, `min(n_in * n_out, epsilon * (n_in + n_out))`.
pub fn expected_nnz(n_in: usize, n_out: usize, epsilon: f64) -> f64 {
    connection_probability(n_in, n_out, epsilon) * n_in as f64 * n_out as f64
}

/// Samples a sparse layer whose cells are independent Bernoulli trials.
///
/// Cells are visited in row-major order; the gap to the next present cell is
/// drawn from a geometric distribution, which yields exactly the positional
/// Bernoulli mask in `O(nnz)` draws. When the probability clamps to one every
/// cell is present and only weights are drawn, in the same order as
/// [`dense_init`].
pub fn er_init<R: Rng + ?Sized>(
    n_in: usize,
    n_out: usize,
    cfg: &InitConfig,
    rng: &mut R,
) -> Result<SparseLayer> {
    cfg.validate()?;
    if n_in == 0 || n_out == 0 {
        return Err(Error::Config(format!(
            "layer dimensions must be positive, got {n_in}x{n_out}"
        )));
    }
    let p = connection_probability(n_in, n_out, cfg.epsilon);
    let dist = cfg.weight_distribution(n_in, n_out);
    let cells = n_in as u64 * n_out as u64;
    let mut connections = Vec::with_capacity((p * cells as f64 * 1.05) as usize + 16);
    let push = |t: u64, w: f64, out: &mut Vec<Connection>| {
        out.push(Connection::new(
            (t / n_out as u64) as u32,
            (t % n_out as u64) as u32,
            w,
        ))
    };
    if p >= 1.0 {
        for t in 0..cells {
            let w = dist.sample(rng);
            push(t, w, &mut connections);
        }
    } else {
        let gaps = Geometric::new(p).expect("0 < p < 1");
        let mut t: u64 = 0;
        loop {
            let skip = gaps.sample(rng);
            t = match t.checked_add(skip) {
                Some(t) if t < cells => t,
                _ => break,
            };
            let w = dist.sample(rng);
            push(t, w, &mut connections);
            t += 1;
        }
    }
    SparseLayer::from_connections(n_in, n_out, connections, vec![0.0; n_out])
}

/// Fully connected layer with uniform weights under the same scale rule.
pub fn dense_init<R: Rng + ?Sized>(
    n_in: usize,
    n_out: usize,
    cfg: &InitConfig,
    rng: &mut R,
) -> Result<DenseLayer> {
    cfg.validate()?;
    if n_in == 0 || n_out == 0 {
        return Err(Error::Config(format!(
            "layer dimensions must be positive, got {n_in}x{n_out}"
        )));
    }
    let dist = cfg.weight_distribution(n_in, n_out);
    let weights = Array2::from_shape_simple_fn((n_in, n_out), || dist.sample(rng));
    DenseLayer::new(weights, Array1::zeros(n_out))
}
