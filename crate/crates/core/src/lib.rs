//! Blocking for entity resolution over RDF-style entity descriptions.
//!
//! This crate holds the allocation-only core: the entity/blocking data model,
//! a map/shuffle/reduce execution contract with a sequential reference
//! executor, the four blocking methods (token blocking, attribute clustering
//! blocking, prefix-infix(-suffix) blocking and iterative blocking) and the
//! blocking-quality measures and diagnostics used to compare them.
//!
//! Parsing, file formats, the multi-threaded executor and the command line
//! live in the `lodblock` crate.

#![no_std]

extern crate alloc;

pub mod blocking;
mod dsu;
pub mod engine;
pub mod eval;
pub mod model;

pub use blocking::{
    attribute_clustering, attribute_clustering_blocking, attribute_profile,
    clustered_token_blocking, decompose_uri, iterative_blocking, jaccard, pis_blocking,
    token_blocking, tokenize, trigrams, AttributeClustering, AttributeRef, BlockOrder,
    BlockingError, ClusterId, IterativeOutcome, MatchOracle, MergedEntity, PrefixTable,
    TokenizerConfig, TrigramSet, UriDecomposition,
};
pub use engine::{
    pairwise_tasks, EngineConfig, Executor, JobError, PairTask, PartitionedDataset,
    SequentialExecutor,
};
pub use eval::{
    candidate_pairs, common_token_distribution, comparison_counts, comparisons_without_blocking,
    fn_analysis, h3r, sample_structural_analysis, score, score_partition, ConfusionCounts,
    MetricsReport, RrBasis,
};
pub use model::{
    transitive_closure, AttributeValue, Block, BlockKey, BlockingCollection, EntityCollection,
    EntityDescription, EntityIdx, GroundTruth, IdPair, Mode, ModelError, Namespace, Value,
    ValueKind,
};
