//! Reference figures for the fifteen benchmark datasets.
//!
//! `hidden` is the per-layer width of the fully connected reference network,
//! recovered from its weight count `n_features*h + h*h + h*n_classes`.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetPreset {
    pub name: &'static str,
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub hidden: usize,
    /// Reported weight counts of the FC, SET and NPSET networks.
    pub fc_weights: usize,
    pub set_weights: usize,
    pub npset_weights: usize,
    /// Reported input + hidden neuron counts of the FC and NPSET networks.
    pub fc_neurons: usize,
    pub npset_neurons: usize,
}

macro_rules! preset {
    ($name:literal, $s:literal, $f:literal, $c:literal, $tr:literal, $te:literal, $h:literal,
     $fcw:literal, $setw:literal, $npw:literal, $fcn:literal, $npn:literal) => {
        DatasetPreset {
            name: $name,
            samples: $s,
            features: $f,
            classes: $c,
            train_samples: $tr,
            test_samples: $te,
            hidden: $h,
            fc_weights: $fcw,
            set_weights: $setw,
            npset_weights: $npw,
            fc_neurons: $fcn,
            npset_neurons: $npn,
        }
    };
}

pub const PRESETS: &[DatasetPreset] = &[
    preset!("Leukemia", 72, 7070, 2, 48, 24, 7000, 98_504_000, 294_235, 40_039, 21_070, 9_710),
    preset!("PCMAC", 1943, 3289, 2, 1295, 648, 3000, 18_873_000, 128_432, 18_622, 9_289, 4_435),
    preset!("Lung-discrete", 73, 325, 7, 48, 25, 300, 189_600, 13_446, 2_447, 925, 457),
    preset!("gisette", 7000, 5000, 2, 4666, 2334, 5000, 50_010_000, 209_556, 29_884, 15_000, 6_892),
    preset!("lung", 203, 3312, 5, 135, 68, 3000, 18_951_000, 135_689, 19_776, 9_312, 4_458),
    preset!("CLL-SUB-111", 111, 11340, 3, 74, 37, 11000, 245_773_000, 474_738, 65_421, 33_340, 15_488),
    preset!("Carcinom", 174, 9183, 11, 116, 58, 9000, 163_746_000, 420_592, 67_726, 27_182, 12_580),
    preset!("orlraws10P", 100, 10304, 10, 66, 34, 10000, 203_140_000, 465_977, 72_871, 30_304, 14_072),
    preset!("TOX-171", 171, 5748, 4, 114, 57, 5000, 53_760_000, 225_416, 31_815, 15_748, 7_640),
    preset!("Prostate-GE", 102, 5966, 2, 68, 34, 5000, 54_840_000, 219_191, 30_690, 15_966, 7_858),
    preset!("arcene", 200, 10000, 2, 133, 67, 10000, 200_020_000, 419_469, 57_136, 30_000, 13_768),
    preset!("madelon", 2600, 500, 2, 1733, 867, 1000, 1_502_000, 36_563, 5_096, 2_500, 896),
    preset!("Yale", 165, 1024, 15, 110, 55, 1000, 2_039_000, 47_222, 8_576, 3_024, 1_420),
    preset!("GLIOMA", 50, 4434, 4, 33, 17, 4000, 33_752_000, 178_678, 25_228, 12_434, 5_956),
    preset!("RELATHE", 1427, 4322, 2, 951, 476, 4000, 33_296_000, 170_804, 24_280, 12_322, 5_844),
];

/// Case-insensitive lookup that also ignores `-` and `_`.
pub fn find(name: &str) -> Option<&'static DatasetPreset> {
    let norm = |s: &str| {
        s.chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase()
    };
    let key = norm(name);
    PRESETS.iter().find(|p| norm(p.name) == key)
}
