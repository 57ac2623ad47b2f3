use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    /// Row indices into the source dataset, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    /// Set when stratification was impossible and a plain random split was
    /// used instead.
    pub warning: Option<String>,
}

/// Training-set size for `n` samples: `floor(n * fraction)`, kept inside
/// `[1, n - 1]`. A tiny slack absorbs representation error so that, e.g.,
/// `72 * 2/3` counts as 48.
pub fn train_count(n: usize, fraction: f64) -> usize {
    let t = (n as f64 * fraction + 1e-9).floor() as usize;
    t.clamp(1, n.saturating_sub(1).max(1))
}

/// Stratified random split.
///
/// The global train size is [`train_count`]. It is shared among classes by
/// largest remainder on `n_c * T / n` (ties to the lower class id), so each
/// class lands within one sample of its proportional share. Within a class,
/// members are shuffled with a stream derived from `seed`.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = dataset.n_samples();
    if n < 2 {
        return Err(Error::Data(format!(
            "cannot split {n} sample(s) into non-empty train and test sets"
        )));
    }
    let total = train_count(n, train_fraction);
    let mut rng = stream(seed, Purpose::Split, 0);

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.n_classes()];
    for (i, &l) in dataset.labels().iter().enumerate() {
        by_class[l].push(i);
    }

    let mut warning = None;
    let mut train = Vec::with_capacity(total);
    let mut test = Vec::with_capacity(n - total);
    if let Some(c) = by_class.iter().position(|m| m.len() == 1) {
        warning = Some(format!(
            "class `{}` has fewer than 2 samples; falling back to an unstratified split",
            dataset.class_names()[c]
        ));
        log::warn!("{}", warning.as_ref().unwrap());
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        train.extend_from_slice(&all[..total]);
        test.extend_from_slice(&all[total..]);
    } else {
        let quotas = allocate(&by_class.iter().map(Vec::len).collect::<Vec<_>>(), n, total);
        for (members, quota) in by_class.iter_mut().zip(quotas) {
            members.shuffle(&mut rng);
            train.extend_from_slice(&members[..quota]);
            test.extend_from_slice(&members[quota..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train: dataset.subset(&train)?,
        test: dataset.subset(&test)?,
        train_indices: train,
        test_indices: test,
        warning,
    })
}

/// Largest-remainder apportionment of `total` among classes of the given
/// sizes.
fn allocate(sizes: &[usize], n: usize, total: usize) -> Vec<usize> {
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * total / n).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(sizes[c] * total % n), c));
    for &c in order.iter().take(total - assigned) {
        quotas[c] += 1;
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn labelled(counts: &[usize]) -> Dataset {
        let labels: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &k)| std::iter::repeat_n(c, k))
            .collect();
        let n = labels.len();
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        Dataset::with_classes("t", features, labels, counts.len()).unwrap()
    }

    #[test]
    fn leukemia_and_madelon_sizes() {
        // ALL/AML class balance of the Leukemia set.
        let s = split(&labelled(&[47, 25]), 2.0 / 3.0, 1).unwrap();
        assert_eq!((s.train.n_samples(), s.test.n_samples()), (48, 24));
        let s = split(&labelled(&[1300, 1300]), 2.0 / 3.0, 1).unwrap();
        assert_eq!((s.train.n_samples(), s.test.n_samples()), (1733, 867));
    }

    #[test]
    fn three_samples() {
        let s = split(&labelled(&[2, 1]), 2.0 / 3.0, 0).unwrap();
        assert_eq!((s.train.n_samples(), s.test.n_samples()), (2, 1));
        assert!(s.warning.is_some());
    }

    #[test]
    fn deterministic_and_partitioning() {
        let ds = labelled(&[30, 20, 11]);
        let a = split(&ds, 0.6, 42).unwrap();
        let b = split(&ds, 0.6, 42).unwrap();
        assert_eq!(a.train_indices, b.train_indices);
        let mut all = a.train_indices.clone();
        all.extend(&a.test_indices);
        all.sort_unstable();
        assert_eq!(all, (0..61).collect::<Vec<_>>());
        assert!(a.warning.is_none());
        let c = split(&ds, 0.6, 43).unwrap();
        assert_ne!(a.train_indices, c.train_indices);
    }

    #[test]
    fn bad_fraction() {
        let ds = labelled(&[3, 3]);
        assert!(matches!(split(&ds, 1.0, 0), Err(Error::Config(_))));
        assert!(matches!(split(&ds, 0.0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn apportionment() {
        assert_eq!(allocate(&[47, 25], 72, 48), vec![31, 17]);
        assert_eq!(allocate(&[1300, 1300], 2600, 1733), vec![867, 866]);
    }
}
