//! Labeled function records and the two split protocols.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    /// Position in the input file, 0-based.
    pub id: usize,
    pub project: String,
    pub commit: String,
    /// 1 = vulnerable.
    pub label: u8,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    RandomStratified,
    CrossProject,
}

/// Disjoint train/validation/test id lists, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub train_ids: Vec<usize>,
    pub val_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub seed: u64,
    pub kind: SplitKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("split fractions {0:?} must be non-negative and sum to 1")]
    InvalidFractions([f64; 3]),
    #[error("class {label} has {count} records but {needed} partitions need it")]
    ClassTooSmall { label: u8, count: usize, needed: usize },
    #[error("train and test project are both `{0}`")]
    SameProject(String),
    #[error("unknown project `{name}`; available: {}", available.join(", "))]
    UnknownProject { name: String, available: Vec<String> },
}

/// Apportions `total` items over `shares` (summing to `total` as reals) by
/// largest remainder. Equal remainders favour the earlier slot.
fn largest_remainder(total: usize, shares: [f64; 3]) -> [usize; 3] {
    let mut counts = [0usize; 3];
    let mut rema = [0.0f64; 3];
    for k in 0..3 {
        let floor = libm::floor(shares[k]);
        counts[k] = floor as usize;
        rema[k] = shares[k] - floor;
    }
    let mut left = total.saturating_sub(counts.iter().sum());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| rema[b].total_cmp(&rema[a]).then(a.cmp(&b)));
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[k] += 1;
        left -= 1;
    }
    counts
}

/// Stratified three-way split (train, validation, test).
///
/// Partition sizes are apportioned over the whole corpus by largest
/// remainder. The positive class is then apportioned in proportion to those
/// sizes, again by largest remainder, and negatives fill the rest, so every
/// partition is within one record of exact proportionality per class. Within
/// each class, membership follows a ChaCha8 shuffle seeded with `seed`.
pub fn stratified_split(
    records: &[FunctionRecord],
    fractions: [f64; 3],
    seed: u64,
) -> Result<SplitResult, SplitError> {
    let valid = fractions.iter().all(|f| f.is_finite() && *f >= 0.0)
        && libm::fabs(fractions.iter().sum::<f64>() - 1.0) <= 1e-9;
    if !valid {
        return Err(SplitError::InvalidFractions(fractions));
    }
    let needed = fractions.iter().filter(|&&f| f > 0.0).count();
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for r in records {
        by_class[usize::from(r.label.min(1))].push(r.id);
    }
    for (label, ids) in by_class.iter().enumerate() {
        if ids.len() < needed {
            return Err(SplitError::ClassTooSmall { label: label as u8, count: ids.len(), needed });
        }
    }

    let n = records.len();
    let sizes = largest_remainder(n, fractions.map(|f| f * n as f64));
    let n_pos = by_class[1].len();
    let pos_alloc = largest_remainder(n_pos, sizes.map(|s| n_pos as f64 * s as f64 / n as f64));
    let neg_alloc = [0, 1, 2].map(|k| sizes[k] - pos_alloc[k]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let [negatives, positives] = by_class;
    for (mut ids, alloc) in [(negatives, neg_alloc), (positives, pos_alloc)] {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        let mut rest = &ids[..];
        for (part, take) in parts.iter_mut().zip(alloc) {
            let (head, tail) = rest.split_at(take);
            part.extend_from_slice(head);
            rest = tail;
        }
    }
    let [mut train_ids, mut val_ids, mut test_ids] = parts;
    train_ids.sort_unstable();
    val_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok(SplitResult { train_ids, val_ids, test_ids, seed, kind: SplitKind::RandomStratified })
}

/// Trains on one project and tests on another; other projects are dropped.
pub fn cross_project_split(
    records: &[FunctionRecord],
    train_project: &str,
    test_project: &str,
) -> Result<SplitResult, SplitError> {
    if train_project == test_project {
        return Err(SplitError::SameProject(String::from(train_project)));
    }
    let available: BTreeSet<&str> = records.iter().map(|r| r.project.as_str()).collect();
    for name in [train_project, test_project] {
        if !available.contains(name) {
            return Err(SplitError::UnknownProject {
                name: String::from(name),
                available: available.iter().map(|s| String::from(*s)).collect(),
            });
        }
    }
    let ids_of = |project: &str| -> Vec<usize> {
        records.iter().filter(|r| r.project == project).map(|r| r.id).collect()
    };
    Ok(SplitResult {
        train_ids: ids_of(train_project),
        val_ids: Vec::new(),
        test_ids: ids_of(test_project),
        seed: 0,
        kind: SplitKind::CrossProject,
    })
}
