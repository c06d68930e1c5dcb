use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("number of subsets must be at least 1")]
    NoSubsets,
    #[error("cannot split {ids} participants into {subsets} subsets")]
    TooManySubsets { subsets: usize, ids: usize },
    #[error("duplicate participant id {0:?}")]
    DuplicateId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionSpec {
    pub n_subsets: usize,
    /// Put the whole remainder into the first subset instead of spreading it
    /// one id at a time over the leading subsets.
    pub first_subset_extra: bool,
    pub seed: u64,
    /// `false` keeps input order (no shuffle) before slicing.
    pub shuffle: bool,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        PartitionSpec { n_subsets: 10, first_subset_extra: true, seed: 42, shuffle: true }
    }
}

/// Disjoint, covering subsets of participant ids. Serialized as the
/// partition file: `{"seed": .., "shuffled": .., "subsets": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortPartition {
    pub seed: u64,
    #[serde(default = "default_shuffled")]
    pub shuffled: bool,
    pub subsets: Vec<Vec<String>>,
}

fn default_shuffled() -> bool {
    true
}

impl CohortPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.subsets.iter().map(Vec::len).collect()
    }

    /// Subset by 1-based index, as subsets are numbered in reports.
    pub fn subset(&self, index: usize) -> Option<&[String]> {
        index.checked_sub(1).and_then(|i| self.subsets.get(i)).map(Vec::as_slice)
    }
}

pub fn subset_sizes(total: usize, n_subsets: usize, first_subset_extra: bool) -> Vec<usize> {
    let base = total / n_subsets;
    let remainder = total % n_subsets;
    (0..n_subsets)
        .map(|i| match (first_subset_extra, i) {
            (true, 0) => base + remainder,
            (true, _) => base,
            (false, i) => base + usize::from(i < remainder),
        })
        .collect()
}

/// Seeded shuffle (ChaCha8) followed by contiguous slicing.
pub fn partition_cohort(ids: &[String], spec: &PartitionSpec) -> Result<CohortPartition, PartitionError> {
    if spec.n_subsets == 0 {
        return Err(PartitionError::NoSubsets);
    }
    if spec.n_subsets > ids.len() {
        return Err(PartitionError::TooManySubsets { subsets: spec.n_subsets, ids: ids.len() });
    }
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(PartitionError::DuplicateId(id.clone()));
        }
    }

    let mut order = ids.to_vec();
    if spec.shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        order.shuffle(&mut rng);
    }
    let mut rest = order.as_slice();
    let subsets = subset_sizes(ids.len(), spec.n_subsets, spec.first_subset_extra)
        .into_iter()
        .map(|size| {
            let (head, tail) = rest.split_at(size);
            rest = tail;
            head.to_vec()
        })
        .collect();
    Ok(CohortPartition { seed: spec.seed, shuffled: spec.shuffle, subsets })
}
