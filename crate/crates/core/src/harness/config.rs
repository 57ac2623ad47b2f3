//! Experiment configuration.
//!
//! Configs are INI files with one section per sub-config. Key names are
//! unique across sections so that each can also be overridden by a
//! command-line flag of the same name:
//!
//! ```ini
//! [experiment]
//! name = madelon-npset
//! method = NPSET
//! seed = 1
//! output_dir = runs/madelon-npset
//!
//! [data]
//! path = data/madelon.csv
//! label_column = label
//!
//! [model]
//! h1 = 1000
//! h2 = 1000
//! epsilon = 10
//!
//! [train]
//! epochs = 100
//!
//! [prune]
//! alpha = 0.04
//! beta = 10
//! gamma = 40
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use super::presets;
use crate::data::LabelColumn;
use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::network::{Mode, TrainConfig};
use crate::pruning::{DegreeMode, HiddenLayer, PruneSchedule};
use crate::sparse::InitConfig;

/// Training method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Method {
    /// Sparse evolutionary training.
    #[serde(rename = "SET")]
    Set,
    /// SET with neuron pruning on both hidden layers.
    #[serde(rename = "NPSET")]
    Npset,
    /// Neuron pruning on the first hidden layer only.
    #[serde(rename = "NPSET_L1")]
    NpsetL1,
    /// Neuron pruning on the second hidden layer only.
    #[serde(rename = "NPSET_L2")]
    NpsetL2,
    /// SET trained from scratch at NPSET's final hidden sizes.
    #[serde(rename = "DIRECT_SET")]
    DirectSet,
    /// Fully connected network at NPSET's final hidden sizes.
    #[serde(rename = "DIRECT_FC")]
    DirectFc,
    /// Fully connected network at the original hidden sizes.
    #[serde(rename = "DENSE")]
    Dense,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Set,
        Method::Npset,
        Method::NpsetL1,
        Method::NpsetL2,
        Method::DirectSet,
        Method::DirectFc,
        Method::Dense,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Set => "SET",
            Method::Npset => "NPSET",
            Method::NpsetL1 => "NPSET_L1",
            Method::NpsetL2 => "NPSET_L2",
            Method::DirectSet => "DIRECT_SET",
            Method::DirectFc => "DIRECT_FC",
            Method::Dense => "DENSE",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Method::DirectFc | Method::Dense => Mode::Dense,
            _ => Mode::Sparse,
        }
    }

    /// Hidden layers pruned during training, if any.
    pub fn pruned_layers(self) -> Option<Vec<HiddenLayer>> {
        match self {
            Method::Npset => Some(HiddenLayer::BOTH.to_vec()),
            Method::NpsetL1 => Some(vec![HiddenLayer::First]),
            Method::NpsetL2 => Some(vec![HiddenLayer::Second]),
            _ => None,
        }
    }

    /// Whether the trained dims come from simulating NPSET's pruning.
    pub fn is_direct(self) -> bool {
        matches!(self, Method::DirectSet | Method::DirectFc)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every accepted key, by section.
pub const KEYS: &[(&str, &[&str])] = &[
    (
        "experiment",
        &["name", "method", "seed", "output_dir", "checkpoint", "checkpoint_format"],
    ),
    (
        "data",
        &["path", "label_column", "dataset", "train_fraction", "standardize"],
    ),
    ("model", &["h1", "h2", "epsilon", "weight_scale"]),
    (
        "train",
        &["lr", "momentum", "weight_decay", "batch_size", "epochs"],
    ),
    ("evolution", &["zeta"]),
    (
        "prune",
        &["alpha", "beta", "gamma", "target_layers", "degree_mode"],
    ),
    (
        "ablate",
        &["ablate_layer", "ablate_fractions", "ablate_degree_mode"],
    ),
];

pub fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|(_, keys)| keys.contains(&key))
        .map(|(s, _)| *s)
}

/// Flat `key -> value` view of a config, after section validation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
    /// Extra `[grid]` section, kept verbatim for the grid runner.
    grid: BTreeMap<String, String>,
    /// Directory of the config file; relative paths resolve against it.
    base_dir: Option<PathBuf>,
}

impl ConfigMap {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut map = Self::parse(&text)?;
        map.base_dir = path.parent().map(Path::to_path_buf);
        Ok(map)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(format!("INI syntax: {e}")))?;
        let mut map = ConfigMap::default();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                match section {
                    Some("grid") => {
                        if section_of(key).is_none() {
                            return Err(Error::Config(format!("unknown grid key `{key}`")));
                        }
                        map.grid.insert(key.to_string(), value.to_string());
                    }
                    Some(s) => {
                        if section_of(key) != Some(s) {
                            return Err(Error::Config(format!(
                                "unknown key `{key}` in section [{s}]"
                            )));
                        }
                        map.values.insert(key.to_string(), value.to_string());
                    }
                    None => {
                        return Err(Error::Config(format!(
                            "key `{key}` must appear inside a section"
                        )))
                    }
                }
            }
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if section_of(key).is_none() {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn grid(&self) -> &BTreeMap<String, String> {
        &self.grid
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn base_dir(&self) -> Option<&Path> {
        self.base_dir.as_deref()
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = PathBuf::from(p);
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_map(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckpointFormat {
    #[default]
    Binary,
    Text,
}

impl FromStr for CheckpointFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binary" | "bin" => Ok(CheckpointFormat::Binary),
            "text" | "txt" => Ok(CheckpointFormat::Text),
            other => Err(Error::Config(format!("unknown checkpoint format `{other}`"))),
        }
    }
}

/// Settings of the least-connected ablation.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationConfig {
    pub layer: HiddenLayer,
    pub fractions: Vec<f64>,
    pub degree_mode: DegreeMode,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            layer: HiddenLayer::First,
            fractions: (0..=10).map(|i| i as f64 * 0.01).collect(),
            degree_mode: DegreeMode::Out,
        }
    }
}

/// Fully resolved configuration of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub method: Method,
    pub seed: u64,
    pub data_path: Option<PathBuf>,
    pub label_column: LabelColumn,
    /// Preset name used for default hidden sizes.
    pub dataset: Option<String>,
    pub train_fraction: f64,
    pub standardize: bool,
    /// Hidden widths; `None` means the dataset preset's width.
    pub hidden: Option<(usize, usize)>,
    pub init: InitConfig,
    pub train: TrainConfig,
    pub evolution: EvolutionConfig,
    pub prune: PruneSchedule,
    pub ablation: AblationConfig,
    pub output_dir: Option<PathBuf>,
    pub checkpoint: bool,
    pub checkpoint_format: CheckpointFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            method: Method::Set,
            seed: 0,
            data_path: None,
            label_column: LabelColumn::default(),
            dataset: None,
            train_fraction: 2.0 / 3.0,
            standardize: true,
            hidden: None,
            init: InitConfig::default(),
            train: TrainConfig::default(),
            evolution: EvolutionConfig::default(),
            prune: PruneSchedule::default(),
            ablation: AblationConfig::default(),
            output_dir: None,
            checkpoint: false,
            checkpoint_format: CheckpointFormat::Binary,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{v}` for `{key}`"))),
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("invalid list entry `{s}` for `{key}`")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        if let Some(v) = map.get("name") {
            cfg.name = v.trim().to_string();
        }
        if let Some(v) = map.get("method") {
            cfg.method = v.parse()?;
        }
        if let Some(v) = map.parsed("seed")? {
            cfg.seed = v;
        }
        if let Some(v) = map.get("output_dir") {
            cfg.output_dir = Some(map.resolve(v.trim()));
        }
        if let Some(v) = map.get("checkpoint") {
            cfg.checkpoint = parse_bool("checkpoint", v)?;
        }
        if let Some(v) = map.get("checkpoint_format") {
            cfg.checkpoint_format = v.parse()?;
        }

        if let Some(v) = map.get("path") {
            cfg.data_path = Some(map.resolve(v.trim()));
        }
        if let Some(v) = map.get("label_column") {
            cfg.label_column = v.parse().expect("infallible");
        }
        if let Some(v) = map.get("dataset") {
            cfg.dataset = Some(v.trim().to_string());
        }
        if let Some(v) = map.parsed("train_fraction")? {
            cfg.train_fraction = v;
        }
        if let Some(v) = map.get("standardize") {
            cfg.standardize = parse_bool("standardize", v)?;
        }

        match (map.parsed::<usize>("h1")?, map.parsed::<usize>("h2")?) {
            (Some(a), Some(b)) => cfg.hidden = Some((a, b)),
            (Some(a), None) | (None, Some(a)) => cfg.hidden = Some((a, a)),
            (None, None) => {}
        }
        if let Some(v) = map.parsed("epsilon")? {
            cfg.init.epsilon = v;
        }
        if let Some(v) = map.get("weight_scale") {
            cfg.init.weight_scale = match v.trim() {
                "fan" | "auto" => None,
                s => Some(s.parse().map_err(|_| {
                    Error::Config(format!("invalid value `{s}` for `weight_scale`"))
                })?),
            };
        }

        if let Some(v) = map.parsed("lr")? {
            cfg.train.lr = v;
        }
        if let Some(v) = map.parsed("momentum")? {
            cfg.train.momentum = v;
        }
        if let Some(v) = map.parsed("weight_decay")? {
            cfg.train.weight_decay = v;
        }
        if let Some(v) = map.parsed("batch_size")? {
            cfg.train.batch_size = v;
        }
        if let Some(v) = map.parsed("epochs")? {
            cfg.train.epochs = v;
        }
        if let Some(v) = map.parsed("zeta")? {
            cfg.evolution.zeta = v;
        }

        if let Some(v) = map.parsed("alpha")? {
            cfg.prune.alpha = v;
        }
        if let Some(v) = map.parsed("beta")? {
            cfg.prune.beta = v;
        }
        if let Some(v) = map.parsed("gamma")? {
            cfg.prune.gamma = v;
        }
        if let Some(v) = map.get("target_layers") {
            cfg.prune.target_layers = parse_list("target_layers", v)?;
        }
        if let Some(v) = map.get("degree_mode") {
            cfg.prune.degree_mode = v.parse()?;
        }

        if let Some(v) = map.get("ablate_layer") {
            cfg.ablation.layer = v.parse()?;
        }
        if let Some(v) = map.get("ablate_fractions") {
            cfg.ablation.fractions = parse_list("ablate_fractions", v)?;
        }
        if let Some(v) = map.get("ablate_degree_mode") {
            cfg.ablation.degree_mode = v.parse()?;
        }

        cfg.apply_method_layers();
        cfg.validate()?;
        Ok(cfg)
    }

    /// NPSET variants fix which layers are pruned.
    pub fn apply_method_layers(&mut self) {
        if let Some(layers) = self.method.pruned_layers() {
            if self.method != Method::Npset || self.prune.target_layers.is_empty() {
                self.prune.target_layers = layers;
            }
        }
        self.init.seed = self.seed;
        self.train.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.init.validate()?;
        self.train.validate()?;
        self.evolution.validate()?;
        self.prune.validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if let Some((a, b)) = self.hidden {
            if a == 0 || b == 0 {
                return Err(Error::Config("hidden sizes must be >= 1".into()));
            }
        }
        if self.method.pruned_layers().is_some() && self.prune.target_layers.is_empty() {
            return Err(Error::Config(format!(
                "method {} needs at least one pruning target layer",
                self.method
            )));
        }
        let f = &self.ablation.fractions;
        if f.iter().any(|x| !(0.0..=1.0).contains(x)) || f.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config(
                "ablate_fractions must be ascending values in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Hidden widths: explicit `h1`/`h2`, else the preset named by `dataset`
    /// or by the data file's stem.
    pub fn resolve_hidden(&self, dataset_name: &str) -> Result<(usize, usize)> {
        if let Some(h) = self.hidden {
            return Ok(h);
        }
        let name = self.dataset.as_deref().unwrap_or(dataset_name);
        presets::find(name)
            .map(|p| (p.hidden, p.hidden))
            .ok_or_else(|| {
                Error::Config(format!(
                    "no h1/h2 given and `{name}` is not a known dataset preset"
                ))
            })
    }

    pub fn mode(&self) -> Mode {
        self.method.mode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
[experiment]
name = demo
method = npset_l1
seed = 7

[data]
path = d.csv
label_column = 0

[model]
h1 = 30
h2 = 20
epsilon = 4
weight_scale = 0.1

[train]
lr = 0.05
epochs = 12

[prune]
alpha = 0.1
beta = 2
gamma = 3

[ablate]
ablate_fractions = 0, 0.05, 0.1
";

    #[test]
    fn parses_all_sections() {
        let cfg = ConfigMap::parse(SAMPLE).unwrap().experiment().unwrap();
        assert_eq!(cfg.method, Method::NpsetL1);
        assert_eq!(cfg.prune.target_layers, vec![HiddenLayer::First]);
        assert_eq!(cfg.hidden, Some((30, 20)));
        assert_eq!(cfg.init.weight_scale, Some(0.1));
        assert_eq!(cfg.init.seed, 7);
        assert_eq!(cfg.train.seed, 7);
        assert_eq!(cfg.train.epochs, 12);
        assert_eq!(cfg.label_column, LabelColumn::Index(0));
        assert_eq!(cfg.ablation.fractions, vec![0.0, 0.05, 0.1]);
        assert_eq!(cfg.train.momentum, 0.9);
    }

    #[test]
    fn overrides_and_unknown_keys() {
        let mut map = ConfigMap::parse(SAMPLE).unwrap();
        map.set("lr", "0.5").unwrap();
        assert_eq!(map.experiment().unwrap().train.lr, 0.5);
        assert!(matches!(map.set("learning_rate", "1"), Err(Error::Config(_))));
        assert!(ConfigMap::parse("[train]\nalpha = 1\n").is_err());
        assert!(ConfigMap::parse("lr = 1\n").is_err());
    }

    #[test]
    fn invalid_values() {
        let bad = |text: &str| ConfigMap::parse(text).unwrap().experiment();
        assert!(matches!(bad("[train]\nmomentum = 1.0\n"), Err(Error::Config(_))));
        assert!(matches!(bad("[experiment]\nmethod = LOTTERY\n"), Err(Error::Config(_))));
        assert!(matches!(bad("[prune]\nalpha = 1.5\n"), Err(Error::Config(_))));
        assert!(matches!(bad("[train]\nepochs = ten\n"), Err(Error::Config(_))));
        assert!(matches!(bad("[ablate]\nablate_fractions = 0.2, 0.1\n"), Err(Error::Config(_))));
    }

    #[test]
    fn hidden_from_preset() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.resolve_hidden("madelon").unwrap(), (1000, 1000));
        assert!(cfg.resolve_hidden("unknown").is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
    }
}
