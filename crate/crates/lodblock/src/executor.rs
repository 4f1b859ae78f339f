//! Multi-threaded executor on a dedicated rayon pool.
//!
//! Partitions are mapped in parallel, routed in partition order and reduced
//! bucket by bucket in parallel; results are reassembled in reducer order,
//! so the output equals [`SequentialExecutor`]'s for any worker count.
//!
//! [`SequentialExecutor`]: lodblock_core::SequentialExecutor

use std::fmt::Display;

use lodblock_core::engine::{
    check_ceiling, map_partition, pairwise_tasks, reduce_bucket, route, run_task, shuffle_bytes,
    Emitted, EngineConfig, Executor, JobError, PartitionedDataset,
};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

pub struct RayonExecutor {
    config: EngineConfig,
    pool: ThreadPool,
}

impl RayonExecutor {
    pub fn new(config: EngineConfig, workers: usize) -> Result<Self, ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .thread_name(|i| format!("lodblock-worker-{i}"))
            .build()?;
        Ok(Self { config, pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl std::fmt::Debug for RayonExecutor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RayonExecutor")
            .field("config", &self.config)
            .field("workers", &self.workers())
            .finish()
    }
}

impl Executor for RayonExecutor {
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
        let results: Vec<Result<Emitted<V>, JobError>> = self.pool.install(|| {
            input
                .partitions()
                .par_iter()
                .enumerate()
                .map(|(p, records)| map_partition(p, records, &map))
                .collect()
        });
        // Same failure order as the sequential executor.
        let mut mapped = Vec::with_capacity(results.len());
        let mut needed = 0;
        for part in results {
            let part = part?;
            needed += shuffle_bytes(&part);
            check_ceiling(&self.config, needed)?;
            mapped.push(part);
        }
        let buckets = route(mapped, self.config.reducers);
        let reduced: Vec<Result<Vec<O>, JobError>> = self.pool.install(|| {
            buckets
                .into_par_iter()
                .map(|bucket| reduce_bucket(bucket, &reduce))
                .collect()
        });
        let mut out = Vec::new();
        for r in reduced {
            out.extend(r?);
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
        let tasks = pairwise_tasks(input.partition_count())?;
        let per_task: Vec<Vec<O>> = self.pool.install(|| {
            tasks
                .par_iter()
                .map(|&task| run_task(input, task, &compare))
                .collect()
        });
        Ok(per_task.into_iter().flatten().collect())
    }
}
