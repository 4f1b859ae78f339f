use alloc::collections::BTreeSet;

use super::{index_by_keys, tokenize, BlockingError, TokenizerConfig};
use crate::engine::Executor;
use crate::model::{BlockKey, BlockingCollection, EntityCollection, EntityDescription};

pub(crate) fn token_keys(d: &EntityDescription, config: &TokenizerConfig) -> BTreeSet<BlockKey> {
    d.pairs()
        .iter()
        .flat_map(|p| tokenize(&p.value, config))
        .map(BlockKey::token)
        .collect()
}

/// One block per distinct token, holding every description whose values
/// contain it.
///
/// In clean-clean mode blocks drawn from a single source stay in the
/// collection but carry no comparisons. Descriptions without tokens end up
/// in [`BlockingCollection::unblocked`].
pub fn token_blocking<'a, E: Executor>(
    collection: &'a EntityCollection,
    config: &TokenizerConfig,
    exec: &E,
) -> Result<BlockingCollection<'a>, BlockingError> {
    config.validate()?;
    index_by_keys(collection, exec, |d| token_keys(d, config))
}
