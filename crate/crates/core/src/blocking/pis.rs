use alloc::vec::Vec;

use super::token::token_keys;
use super::{index_by_keys, BlockingError, PrefixTable, TokenizerConfig};
use crate::engine::Executor;
use crate::model::{BlockKey, BlockingCollection, EntityCollection};

/// Token blocks over literal values plus one block per subject-URI infix.
///
/// The prefix table is learned from the subject URIs of the collection.
/// Ids that do not decompose (no scheme or no path) and infixes without any
/// alphanumeric character get no infix block, so a collection of opaque ids
/// degrades to literal token blocking.
pub fn pis_blocking<'a, E: Executor>(
    collection: &'a EntityCollection,
    config: &TokenizerConfig,
    exec: &E,
) -> Result<BlockingCollection<'a>, BlockingError> {
    config.validate()?;
    let literal = config.literals_only();
    let ids: Vec<&str> = collection.descriptions().iter().map(|d| d.id()).collect();
    let table = PrefixTable::learn(&ids, exec)?;
    index_by_keys(collection, exec, |d| {
        let mut keys = token_keys(d, &literal);
        let parts = table.decompose(d.id());
        if !parts.fallback && parts.infix.chars().any(char::is_alphanumeric) {
            keys.insert(BlockKey::infix(parts.infix));
        }
        keys
    })
}
