//! Scheduled removal of the least-connected hidden neurons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Dims, SparseMlp};

pub const DEFAULT_ALPHA: f64 = 0.04;
pub const DEFAULT_BETA: usize = 10;
pub const DEFAULT_GAMMA: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HiddenLayer {
    First,
    Second,
}

impl HiddenLayer {
    pub const BOTH: [HiddenLayer; 2] = [HiddenLayer::First, HiddenLayer::Second];

    /// Network layer whose outputs are this hidden layer's neurons.
    fn incoming(self) -> usize {
        match self {
            HiddenLayer::First => 0,
            HiddenLayer::Second => 1,
        }
    }

    pub fn size(self, dims: &Dims) -> usize {
        match self {
            HiddenLayer::First => dims.h1,
            HiddenLayer::Second => dims.h2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HiddenLayer::First => "h1",
            HiddenLayer::Second => "h2",
        }
    }
}

impl std::str::FromStr for HiddenLayer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h1" | "hidden1" | "1" | "first" => Ok(HiddenLayer::First),
            "h2" | "hidden2" | "2" | "second" => Ok(HiddenLayer::Second),
            other => Err(Error::Config(format!("unknown hidden layer `{other}`"))),
        }
    }
}

/// Which incident connections count towards a neuron's degree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegreeMode {
    #[default]
    InOut,
    Out,
}

impl std::str::FromStr for DegreeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in+out" | "inout" | "in_out" | "both" => Ok(DegreeMode::InOut),
            "out" => Ok(DegreeMode::Out),
            other => Err(Error::Config(format!("unknown degree mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for DegreeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DegreeMode::InOut => "in+out",
            DegreeMode::Out => "out",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneSchedule {
    /// Fraction of each target layer's current neurons removed per pruning
    /// epoch.
    pub alpha: f64,
    /// First (0-based) pruning epoch.
    pub beta: usize,
    /// Length of the pruning window; see [`should_prune`].
    pub gamma: usize,
    pub target_layers: Vec<HiddenLayer>,
    pub degree_mode: DegreeMode,
}

impl Default for PruneSchedule {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            gamma: DEFAULT_GAMMA,
            target_layers: HiddenLayer::BOTH.to_vec(),
            degree_mode: DegreeMode::InOut,
        }
    }
}

impl PruneSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Hidden sizes after running the schedule for `epochs` epochs from
    /// `dims`, without touching any model.
    pub fn simulate(&self, dims: Dims, epochs: usize) -> Dims {
        let mut out = dims;
        for epoch in 0..epochs {
            if !should_prune(epoch, self) {
                continue;
            }
            for layer in &self.target_layers {
                let n = match layer {
                    HiddenLayer::First => &mut out.h1,
                    HiddenLayer::Second => &mut out.h2,
                };
                *n -= neurons_to_remove(*n, self.alpha);
            }
        }
        out
    }
}

/// True for epochs `beta ..= beta + gamma`.
///
/// The window is inclusive at both ends: `gamma` counts the epochs after the
/// first pruning step, so pruning happens `gamma + 1` times. With
/// `alpha = 0.04` this is the rule under which a 1000-neuron layer shrinks to
/// 198, and a 7000-neuron layer to 1320.
pub fn should_prune(epoch: usize, sched: &PruneSchedule) -> bool {
    epoch >= sched.beta && epoch - sched.beta <= sched.gamma
}

/// `floor(alpha * n)`.
pub fn neurons_to_remove(n: usize, alpha: f64) -> usize {
    (alpha * n as f64 + 1e-12).floor() as usize
}

/// Connection count of every neuron in a hidden layer.
pub fn neuron_degree(model: &SparseMlp, layer: HiddenLayer, mode: DegreeMode) -> Vec<usize> {
    let k = layer.incoming();
    let out = model.layers()[k + 1].out_degree();
    match mode {
        DegreeMode::Out => out,
        DegreeMode::InOut => model.layers()[k]
            .in_degree()
            .into_iter()
            .zip(out)
            .map(|(a, b)| a + b)
            .collect(),
    }
}

/// Indices of the `k` lowest-degree entries, ties to the lowest index,
/// returned ascending by index.
pub fn least_connected(degrees: &[usize], k: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..degrees.len()).collect();
    ids.sort_by_key(|&i| (degrees[i], i));
    let mut chosen = ids[..k.min(ids.len())].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Removes hidden neurons by index, deleting their incident connections in
/// both adjacent layers. Returns the number of connections deleted.
pub fn remove_neurons(model: &mut SparseMlp, layer: HiddenLayer, removed: &[usize]) -> Result<usize> {
    if removed.is_empty() {
        return Ok(0);
    }
    let size = layer.size(&model.dims());
    if removed.len() >= size {
        return Err(Error::Schedule(format!(
            "removing {} of {size} neurons would leave hidden layer {} empty",
            removed.len(),
            layer.name()
        )));
    }
    let k = layer.incoming();
    let before: usize = model.layers()[k].weight_count() + model.layers()[k + 1].weight_count();
    model.layers_mut()[k].remove_outputs(removed)?;
    model.layers_mut()[k + 1].remove_inputs(removed)?;
    model.check()?;
    let after: usize = model.layers()[k].weight_count() + model.layers()[k + 1].weight_count();
    Ok(before - after)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub epoch: usize,
    /// Removed neuron indices (pre-prune numbering) per target layer.
    pub removed: Vec<(HiddenLayer, Vec<usize>)>,
    pub removed_connections: usize,
    pub dims: Dims,
}

impl PruneReport {
    pub fn removed_neurons(&self) -> usize {
        self.removed.iter().map(|(_, v)| v.len()).sum()
    }
}

/// Removes `floor(alpha * size)` least-connected neurons from each target
/// layer. Layers are handled in order, each against its current degrees.
pub fn prune_neurons(model: &mut SparseMlp, sched: &PruneSchedule, epoch: usize) -> Result<PruneReport> {
    sched.validate()?;
    if !should_prune(epoch, sched) {
        return Err(Error::Schedule(format!(
            "epoch {epoch} is outside the pruning window [{}, {}]",
            sched.beta,
            sched.beta + sched.gamma
        )));
    }
    let mut report = PruneReport {
        epoch,
        removed: Vec::new(),
        removed_connections: 0,
        dims: model.dims(),
    };
    for &layer in &sched.target_layers {
        let size = layer.size(&model.dims());
        let k = neurons_to_remove(size, sched.alpha);
        let victims = least_connected(&neuron_degree(model, layer, sched.degree_mode), k);
        report.removed_connections += remove_neurons(model, layer, &victims)?;
        report.removed.push((layer, victims));
    }
    report.dims = model.dims();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Mode;
    use crate::sparse::InitConfig;

    fn default_schedule() -> PruneSchedule {
        PruneSchedule::default()
    }

    #[test]
    fn window_boundaries() {
        let s = default_schedule();
        assert!(!should_prune(9, &s));
        assert!(should_prune(10, &s));
        assert!(should_prune(49, &s));
        assert!(should_prune(50, &s));
        assert!(!should_prune(51, &s));
        let none = PruneSchedule { gamma: 0, ..s };
        assert_eq!((0..100).filter(|&e| should_prune(e, &none)).count(), 1);
    }

    #[test]
    fn least_connected_ties_and_order() {
        assert_eq!(least_connected(&[3, 1, 2, 5], 1), vec![1]);
        assert_eq!(least_connected(&[2, 1, 1, 1], 2), vec![1, 2]);
        assert_eq!(neurons_to_remove(1000, 0.04), 40);
        assert_eq!(neurons_to_remove(25, 0.04), 1);
        assert_eq!(neurons_to_remove(24, 0.04), 0);
    }

    #[test]
    fn full_tiny_net_degrees() {
        let cfg = InitConfig {
            epsilon: 100.0,
            ..InitConfig::default()
        };
        let m = SparseMlp::build(Dims::new(4, 2, 2, 2), &cfg, Mode::Sparse).unwrap();
        assert_eq!(neuron_degree(&m, HiddenLayer::First, DegreeMode::InOut), vec![6, 6]);
        assert_eq!(neuron_degree(&m, HiddenLayer::First, DegreeMode::Out), vec![2, 2]);
        assert_eq!(neuron_degree(&m, HiddenLayer::Second, DegreeMode::InOut), vec![4, 4]);
    }

    #[test]
    fn prune_outside_window_is_error() {
        let cfg = InitConfig::default();
        let mut m = SparseMlp::build(Dims::new(4, 30, 30, 2), &cfg, Mode::Sparse).unwrap();
        assert!(matches!(
            prune_neurons(&mut m, &default_schedule(), 3),
            Err(Error::Schedule(_))
        ));
    }

    #[test]
    fn prune_shrinks_target_layers_only() {
        let cfg = InitConfig {
            seed: 5,
            epsilon: 4.0,
            ..InitConfig::default()
        };
        let mut m = SparseMlp::build(Dims::new(10, 50, 40, 3), &cfg, Mode::Sparse).unwrap();
        let sched = PruneSchedule {
            alpha: 0.1,
            target_layers: vec![HiddenLayer::Second],
            ..default_schedule()
        };
        let rep = prune_neurons(&mut m, &sched, 10).unwrap();
        assert_eq!(m.dims(), Dims::new(10, 50, 36, 3));
        assert_eq!(rep.removed_neurons(), 4);
        assert_eq!(rep.dims, m.dims());
    }

    #[test]
    fn empty_layer_is_schedule_error() {
        let cfg = InitConfig::default();
        let mut m = SparseMlp::build(Dims::new(3, 2, 2, 2), &cfg, Mode::Sparse).unwrap();
        let r = remove_neurons(&mut m, HiddenLayer::First, &[0, 1]);
        assert!(matches!(r, Err(Error::Schedule(_))));
    }

    #[test]
    fn simulate_recurrence() {
        let s = default_schedule();
        let d = s.simulate(Dims::new(500, 1000, 1000, 2), 100);
        assert_eq!((d.h1, d.h2), (198, 198));
        let only_first = PruneSchedule {
            target_layers: vec![HiddenLayer::First],
            ..s
        };
        assert_eq!(only_first.simulate(Dims::new(500, 1000, 1000, 2), 100).h2, 1000);
    }
}
