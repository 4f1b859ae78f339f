use alloc::vec::Vec;

use crate::model::{BlockingCollection, EntityCollection, EntityIdx, IdPair, Mode};

/// Packed, sorted, duplicate-free candidate pairs.
pub(crate) fn candidate_codes(blocks: &BlockingCollection) -> Vec<u64> {
    let universe = blocks.universe();
    let mut codes: Vec<u64> = blocks
        .blocks()
        .iter()
        .filter(|b| b.is_comparable())
        .flat_map(|b| b.pairs(universe).map(|p| p.pack()))
        .collect();
    codes.sort_unstable();
    codes.dedup();
    codes
}

/// Distinct within-block pairs, sorted; cross-source only in clean-clean
/// mode.
pub fn candidate_pairs(blocks: &BlockingCollection) -> Vec<IdPair<EntityIdx>> {
    candidate_codes(blocks)
        .into_iter()
        .map(IdPair::unpack)
        .collect()
}

/// `(aggregate, distinct)`: comparisons summed over blocks, counting a pair
/// once per block it shares, and the number of distinct candidate pairs.
pub fn comparison_counts(blocks: &BlockingCollection) -> (u64, u64) {
    let aggregate = blocks.blocks().iter().map(|b| b.comparisons()).sum();
    (aggregate, candidate_codes(blocks).len() as u64)
}

/// Comparisons an exhaustive resolution would need.
pub fn comparisons_without_blocking(collection: &EntityCollection) -> u64 {
    match collection.mode() {
        Mode::Dirty => {
            let n = collection.len() as u64;
            n * n.saturating_sub(1) / 2
        }
        Mode::CleanClean => collection
            .source_sizes()
            .iter()
            .map(|&s| s as u64)
            .product(),
    }
}
