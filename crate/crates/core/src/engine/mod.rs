//! Map/shuffle/reduce execution contract.
//!
//! Jobs are expressed against the [`Executor`] trait. Shuffle keys are byte
//! strings routed to a fixed number of reducers by 64-bit FNV-1a, each
//! reducer bucket is stably sorted by key, and outputs are concatenated in
//! reducer order. Any executor that follows these rules produces the same
//! output sequence no matter how many threads it uses; [`SequentialExecutor`]
//! is the single-threaded reference.

mod pairwise;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::convert::Infallible;
use core::fmt::Display;

use thiserror::Error;

pub use pairwise::{mapper_keys, pairwise_tasks, PairTask};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JobError {
    #[error("a dataset needs at least one partition")]
    NoPartitions,
    #[error("map failed on record {record} of partition {partition}: {message}")]
    Map {
        partition: usize,
        record: usize,
        message: String,
    },
    #[error("reduce failed for key `{key}`: {message}")]
    Reduce { key: String, message: String },
    #[error("job needs about {needed} bytes of shuffle memory, ceiling is {ceiling}")]
    MemoryCeiling { needed: usize, ceiling: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Logical input partitions used by pipelines that split a record list.
    pub partitions: usize,
    /// Reducer buckets for the shuffle.
    pub reducers: usize,
    /// Upper bound on the estimated bytes held by one shuffle.
    pub memory_ceiling: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            partitions: 8,
            reducers: 16,
            memory_ceiling: None,
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Reducer bucket for a shuffle key.
pub fn reducer_for(key: &[u8], reducers: usize) -> usize {
    (fnv1a64(key) % reducers as u64) as usize
}

/// Records split into an ordered list of partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedDataset<R> {
    partitions: Vec<Vec<R>>,
}

impl<R> PartitionedDataset<R> {
    /// Splits `records` into `count` contiguous partitions whose sizes differ
    /// by at most one.
    pub fn split(records: Vec<R>, count: usize) -> Result<Self, JobError> {
        if count == 0 {
            return Err(JobError::NoPartitions);
        }
        let n = records.len();
        let (base, extra) = (n / count, n % count);
        let mut partitions = Vec::with_capacity(count);
        let mut it = records.into_iter();
        for p in 0..count {
            let take = base + usize::from(p < extra);
            partitions.push(it.by_ref().take(take).collect());
        }
        Ok(Self { partitions })
    }

    pub fn from_partitions(partitions: Vec<Vec<R>>) -> Result<Self, JobError> {
        if partitions.is_empty() {
            return Err(JobError::NoPartitions);
        }
        Ok(Self { partitions })
    }

    pub fn partition_count(&self) -> usize {
        self.partitions.len()
    }

    pub fn partitions(&self) -> &[Vec<R>] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Key-value pairs emitted by one map call.
pub type Emitted<V> = Vec<(Vec<u8>, V)>;

/// Runs map/group/reduce jobs and partition-pair comparison jobs.
///
/// Map and reduce closures must be pure; they may be called from several
/// threads at once.
pub trait Executor {
    fn config(&self) -> &EngineConfig;

    fn try_map_group_reduce<R, V, O, E, M, F>(
        &self,
        input: &PartitionedDataset<R>,
        map: M,
        reduce: F,
    ) -> Result<Vec<O>, JobError>
    where
        R: Sync,
        V: Send,
        O: Send,
        E: Display,
        M: Fn(&R) -> Result<Emitted<V>, E> + Sync,
        F: Fn(&[u8], Vec<V>) -> Result<Vec<O>, E> + Sync;

    /// Compares every unordered record pair exactly once, following the
    /// partition-pair task layout of [`pairwise_tasks`]. Outputs appear in
    /// task order, then in nested-loop order within a task.
    fn pairwise<R, O, F>(
        &self,
        input: &PartitionedDataset<R>,
        compare: F,
    ) -> Result<Vec<O>, JobError>
    where
        R: Sync,
        O: Send,
        F: Fn(&R, &R) -> Option<O> + Sync;

    fn map_group_reduce<R, V, O, M, F>(
        &self,
        input: &PartitionedDataset<R>,
        map: M,
        reduce: F,
    ) -> Result<Vec<O>, JobError>
    where
        R: Sync,
        V: Send,
        O: Send,
        M: Fn(&R) -> Emitted<V> + Sync,
        F: Fn(&[u8], Vec<V>) -> Vec<O> + Sync,
    {
        self.try_map_group_reduce(
            input,
            |r| Ok::<_, Infallible>(map(r)),
            |k, vs| Ok::<_, Infallible>(reduce(k, vs)),
        )
    }
}

/// Estimated bytes held by a partition's emitted pairs.
pub fn shuffle_bytes<V>(pairs: &[(Vec<u8>, V)]) -> usize {
    pairs
        .iter()
        .map(|(k, _)| k.len() + core::mem::size_of::<(Vec<u8>, V)>())
        .sum()
}

/// Fails when the summed estimate exceeds the configured ceiling.
pub fn check_ceiling(config: &EngineConfig, needed: usize) -> Result<(), JobError> {
    match config.memory_ceiling {
        Some(ceiling) if needed > ceiling => Err(JobError::MemoryCeiling { needed, ceiling }),
        _ => Ok(()),
    }
}

/// Routes map outputs (in partition order) into reducer buckets.
pub fn route<V>(mapped: Vec<Emitted<V>>, reducers: usize) -> Vec<Emitted<V>> {
    let mut buckets: Vec<Emitted<V>> = (0..reducers).map(|_| Vec::new()).collect();
    for part in mapped {
        for (k, v) in part {
            let r = reducer_for(&k, reducers);
            buckets[r].push((k, v));
        }
    }
    buckets
}

/// Stable sort by key, then collapse runs into `(key, values)` groups.
pub fn group_bucket<V>(mut bucket: Emitted<V>) -> Vec<(Vec<u8>, Vec<V>)> {
    bucket.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Vec<u8>, Vec<V>)> = Vec::new();
    for (k, v) in bucket {
        match out.last_mut() {
            Some((lk, vs)) if *lk == k => vs.push(v),
            _ => out.push((k, alloc::vec![v])),
        }
    }
    out
}

pub(crate) fn map_error<E: Display>(partition: usize, record: usize, e: E) -> JobError {
    JobError::Map {
        partition,
        record,
        message: e.to_string(),
    }
}

pub fn reduce_error<E: Display>(key: &[u8], e: E) -> JobError {
    JobError::Reduce {
        key: String::from_utf8_lossy(key).into_owned(),
        message: e.to_string(),
    }
}

/// Map phase for one partition; shared by every executor.
pub fn map_partition<R, V, E, M>(
    partition: usize,
    records: &[R],
    map: &M,
) -> Result<Emitted<V>, JobError>
where
    E: Display,
    M: Fn(&R) -> Result<Emitted<V>, E>,
{
    let mut out = Vec::new();
    for (i, r) in records.iter().enumerate() {
        out.extend(map(r).map_err(|e| map_error(partition, i, e))?);
    }
    Ok(out)
}

/// Reduce phase for one bucket; shared by every executor.
pub fn reduce_bucket<V, O, E, F>(bucket: Emitted<V>, reduce: &F) -> Result<Vec<O>, JobError>
where
    E: Display,
    F: Fn(&[u8], Vec<V>) -> Result<Vec<O>, E>,
{
    let mut out = Vec::new();
    for (k, vs) in group_bucket(bucket) {
        out.extend(reduce(&k, vs).map_err(|e| reduce_error(&k, e))?);
    }
    Ok(out)
}

/// Comparisons for one partition-pair task; shared by every executor.
pub fn run_task<R, O, F>(input: &PartitionedDataset<R>, task: PairTask, compare: &F) -> Vec<O>
where
    F: Fn(&R, &R) -> Option<O>,
{
    let left = &input.partitions[task.left];
    let mut out = Vec::new();
    if task.left == task.right {
        for (i, a) in left.iter().enumerate() {
            for b in &left[i + 1..] {
                out.extend(compare(a, b));
            }
        }
    } else {
        let right = &input.partitions[task.right];
        for a in left {
            for b in right {
                out.extend(compare(a, b));
            }
        }
    }
    out
}

/// Single-threaded reference executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialExecutor {
    config: EngineConfig,
}

impl SequentialExecutor {
    pub fn new(config: EngineConfig) -> Self {
        Self { config }
    }
}

impl Executor for SequentialExecutor {
    fn config(&self) -> &EngineConfig {
        &self.config
    }

    fn try_map_group_reduce<R, V, O, E, M, F>(
        &self,
        input: &PartitionedDataset<R>,
        map: M,
        reduce: F,
    ) -> Result<Vec<O>, JobError>
    where
        R: Sync,
        V: Send,
        O: Send,
        E: Display,
        M: Fn(&R) -> Result<Emitted<V>, E> + Sync,
        F: Fn(&[u8], Vec<V>) -> Result<Vec<O>, E> + Sync,
    {
        if self.config.reducers == 0 {
            return Err(JobError::NoPartitions);
        }
        let mut mapped = Vec::with_capacity(input.partition_count());
        let mut needed = 0;
        for (p, records) in input.partitions().iter().enumerate() {
            let part = map_partition(p, records, &map)?;
            needed += shuffle_bytes(&part);
            check_ceiling(&self.config, needed)?;
            mapped.push(part);
        }
        let mut out = Vec::new();
        for bucket in route(mapped, self.config.reducers) {
            out.extend(reduce_bucket(bucket, &reduce)?);
        }
        Ok(out)
    }

    fn pairwise<R, O, F>(
        &self,
        input: &PartitionedDataset<R>,
        compare: F,
    ) -> Result<Vec<O>, JobError>
    where
        R: Sync,
        O: Send,
        F: Fn(&R, &R) -> Option<O> + Sync,
    {
        let mut out = Vec::new();
        for task in pairwise_tasks(input.partition_count())? {
            out.extend(run_task(input, task, &compare));
        }
        Ok(out)
    }
}
