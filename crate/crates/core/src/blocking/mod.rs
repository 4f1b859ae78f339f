//! Blocking methods and the text and URI utilities they share.

mod attribute;
mod iterative;
mod pis;
mod token;
mod tokenize;
mod uri;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::engine::{Executor, JobError, PartitionedDataset};
use crate::model::{
    BlockKey, BlockingCollection, EntityCollection, EntityDescription, EntityIdx, ModelError,
    Namespace,
};

pub use attribute::{
    attribute_clustering, attribute_clustering_blocking, attribute_profile,
    clustered_token_blocking, jaccard, trigrams, AttributeClustering, AttributeLink, AttributeRef,
    ClusterId, TrigramSet,
};
pub use iterative::{iterative_blocking, BlockOrder, IterativeOutcome, MatchOracle, MergedEntity};
pub use pis::pis_blocking;
pub use token::token_blocking;
pub use tokenize::{tokenize, Delimiters, TokenizerConfig};
pub use uri::{decompose_uri, domain_key, PrefixTable, UriDecomposition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockingError {
    #[error("invalid tokenizer configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("this method needs a clean-clean collection")]
    NotCleanClean,
    #[error("source `{0}` has no attributes, attribute clustering is undefined")]
    EmptySource(String),
    #[error("match threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Job(#[from] JobError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Shuffle encoding of a block key: namespace tag, big-endian cluster id for
/// clustered keys, then the term bytes.
pub(crate) fn encode_key(key: &BlockKey) -> Vec<u8> {
    let mut out = Vec::with_capacity(key.term().len() + 5);
    out.push(match key.namespace() {
        Namespace::Token => 0,
        Namespace::ClusteredToken => 1,
        Namespace::Infix => 2,
    });
    if let Some(c) = key.cluster() {
        out.extend_from_slice(&c.to_be_bytes());
    }
    out.extend_from_slice(key.term().as_bytes());
    out
}

pub(crate) fn decode_key(bytes: &[u8]) -> Result<BlockKey, ModelError> {
    let bad = || ModelError::MalformedKey(String::from_utf8_lossy(bytes).into_owned());
    let (&tag, rest) = bytes.split_first().ok_or_else(bad)?;
    let text = |b: &[u8]| String::from_utf8(b.to_vec()).map_err(|_| bad());
    match tag {
        0 => BlockKey::new(Namespace::Token, None, text(rest)?),
        1 if rest.len() >= 4 => {
            let c = u32::from_be_bytes([rest[0], rest[1], rest[2], rest[3]]);
            BlockKey::new(Namespace::ClusteredToken, Some(c), text(&rest[4..])?)
        }
        2 => BlockKey::new(Namespace::Infix, None, text(rest)?),
        _ => Err(bad()),
    }
}

/// Inverted-index job shared by every key-based method: each description
/// emits `(key, idx)` for its distinct keys and each reduce group becomes a
/// block.
pub(crate) fn index_by_keys<'a, E, K>(
    collection: &'a EntityCollection,
    exec: &E,
    keys_of: K,
) -> Result<BlockingCollection<'a>, BlockingError>
where
    E: Executor,
    K: Fn(&EntityDescription) -> BTreeSet<BlockKey> + Sync,
{
    let records: Vec<EntityIdx> = collection.indices().collect();
    let input = PartitionedDataset::split(records, exec.config().partitions)?;
    let blocks = exec.try_map_group_reduce(
        &input,
        |&idx| {
            Ok::<_, ModelError>(
                keys_of(collection.get(idx))
                    .iter()
                    .map(|k| (encode_key(k), idx))
                    .collect(),
            )
        },
        |key, members| Ok(alloc::vec![(decode_key(key)?, members)]),
    )?;
    Ok(BlockingCollection::new(collection, blocks)?)
}
