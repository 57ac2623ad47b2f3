//! Sparse evolutionary rewiring.
//!
//! After each training epoch every sparse layer drops the fraction `zeta` of
//! its connections with the smallest magnitude and regrows the same number at
//! uniformly random empty cells, so the connection budget stays constant while
//! the topology adapts.

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::SparseMlp;
use crate::rng::StreamRng;
use crate::sparse::{Connection, InitConfig, SparseLayer};

pub const DEFAULT_ZETA: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    /// Fraction of each sparse layer's connections replaced per step.
    pub zeta: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { zeta: DEFAULT_ZETA }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.zeta) {
            return Err(Error::Config(format!(
                "zeta must lie in [0, 1), got {}",
                self.zeta
            )));
        }
        Ok(())
    }
}

/// Per-layer outcome of one rewiring step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRewiring {
    pub removed: usize,
    pub regrown: usize,
}

impl LayerRewiring {
    /// Connections that could not be regrown for lack of empty cells.
    pub fn shortfall(&self) -> usize {
        self.removed - self.regrown
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolveStats {
    /// One entry per network layer; dense layers report zeros.
    pub layers: [LayerRewiring; 3],
}

impl EvolveStats {
    pub fn removed(&self) -> usize {
        self.layers.iter().map(|l| l.removed).sum()
    }

    pub fn regrown(&self) -> usize {
        self.layers.iter().map(|l| l.regrown).sum()
    }
}

/// Removes the `floor(zeta * nnz)` connections of smallest `|w|`, ties broken
/// by `(row, col)`. Returns the removed connections in that order.
pub fn prune_weights(layer: &mut SparseLayer, zeta: f64) -> Vec<Connection> {
    let k = ((zeta * layer.nnz() as f64).floor() as usize).min(layer.nnz());
    if k == 0 {
        return Vec::new();
    }
    let w = layer.weights();
    let (rows, cols) = (layer.rows(), layer.cols());
    let key = |i: usize| (w[i].abs(), rows[i], cols[i]);
    let mut ids: Vec<usize> = (0..layer.nnz()).collect();
    let cmp = |a: &usize, b: &usize| {
        let (ka, kb) = (key(*a), key(*b));
        ka.0.total_cmp(&kb.0).then((ka.1, ka.2).cmp(&(kb.1, kb.2)))
    };
    ids.select_nth_unstable_by(k - 1, cmp);
    let mut victims = ids[..k].to_vec();
    victims.sort_unstable_by(cmp);

    let mut keep = vec![true; layer.nnz()];
    for &v in &victims {
        keep[v] = false;
    }
    let removed = victims.iter().map(|&v| layer.connection(v)).collect();
    layer
        .retain_connections(&keep)
        .expect("mask length equals nnz");
    removed
}

/// Adds exactly `count` connections at empty cells sampled uniformly without
/// replacement, with weights drawn as in initialization and zero velocity.
pub fn regrow_weights<R: Rng + ?Sized>(
    layer: &mut SparseLayer,
    count: usize,
    cfg: &InitConfig,
    rng: &mut R,
) -> Result<Vec<Connection>> {
    let empty = layer.capacity() - layer.nnz();
    if count > empty {
        return Err(Error::Rewiring(format!(
            "cannot regrow {count} connections: only {empty} empty cells in a {}x{} layer",
            layer.n_in(),
            layer.n_out()
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let n_out = layer.n_out() as u64;
    let occupied: HashSet<u64> = layer
        .rows()
        .iter()
        .zip(layer.cols())
        .map(|(&r, &c)| r as u64 * n_out + c as u64)
        .collect();
    let cells = layer.capacity() as u64;

    // Sparse layers: rejection sampling touches O(count) cells. Near-full
    // layers: enumerate the empty cells and sample among them.
    let picks: Vec<u64> = if occupied.len() as u64 * 2 <= cells {
        let mut chosen = HashSet::with_capacity(count);
        let mut picks = Vec::with_capacity(count);
        while picks.len() < count {
            let t = rng.random_range(0..cells);
            if !occupied.contains(&t) && chosen.insert(t) {
                picks.push(t);
            }
        }
        picks
    } else {
        let free: Vec<u64> = (0..cells).filter(|t| !occupied.contains(t)).collect();
        index::sample(rng, free.len(), count)
            .into_iter()
            .map(|i| free[i])
            .collect()
    };

    let dist = cfg.weight_distribution(layer.n_in(), layer.n_out());
    let new: Vec<Connection> = picks
        .into_iter()
        .map(|t| Connection::new((t / n_out) as u32, (t % n_out) as u32, dist.sample(rng)))
        .collect();
    layer.insert_connections(&new)?;
    Ok(new)
}

/// One rewiring step over every sparse layer of `model`.
///
/// Each layer draws from its own generator seeded off `rng`, so per-layer
/// outcomes do not depend on how many draws other layers consumed. When a
/// layer has fewer empty cells than removed connections (possible only for
/// layers that are almost fully connected), it regrows as many as fit and the
/// shortfall shows up in the returned stats.
pub fn evolve<R: Rng + ?Sized>(
    model: &mut SparseMlp,
    cfg: &EvolutionConfig,
    init: &InitConfig,
    rng: &mut R,
) -> Result<EvolveStats> {
    cfg.validate()?;
    if !model.is_sparse() {
        return Err(Error::Rewiring("model has no sparse layers".into()));
    }
    let mut stats = EvolveStats::default();
    for (k, layer) in model.layers_mut().iter_mut().enumerate() {
        let mut layer_rng = StreamRng::seed_from_u64(rng.next_u64());
        let Some(sparse) = layer.as_sparse_mut() else {
            continue;
        };
        let removed = prune_weights(sparse, cfg.zeta).len();
        // The cells just freed are empty again, so at least `removed` cells
        // are available.
        let room = sparse.capacity() - sparse.nnz();
        let regrown = regrow_weights(sparse, removed.min(room), init, &mut layer_rng)?.len();
        stats.layers[k] = LayerRewiring { removed, regrown };
    }
    Ok(stats)
}
