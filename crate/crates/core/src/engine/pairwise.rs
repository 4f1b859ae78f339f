use alloc::vec::Vec;

use super::JobError;

/// One reducer's share of an all-pairs comparison: the records of partition
/// `left` against those of partition `right` (`left <= right`, 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairTask {
    pub left: usize,
    pub right: usize,
}

/// All `m(m+1)/2` partition pairs `(i, j)` with `i <= j`, in lexicographic
/// order.
pub fn pairwise_tasks(partitions: usize) -> Result<Vec<PairTask>, JobError> {
    if partitions == 0 {
        return Err(JobError::NoPartitions);
    }
    let mut tasks = Vec::with_capacity(partitions * (partitions + 1) / 2);
    for left in 0..partitions {
        for right in left..partitions {
            tasks.push(PairTask { left, right });
        }
    }
    Ok(tasks)
}

/// Composite keys that mapper `mapper` (0-based) emits for each of its
/// records when there are `partitions` mappers in total: one task per other
/// mapper, with the smaller id first.
pub fn mapper_keys(mapper: usize, partitions: usize) -> Vec<PairTask> {
    (0..partitions)
        .map(|other| PairTask {
            left: mapper.min(other),
            right: mapper.max(other),
        })
        .collect()
}
