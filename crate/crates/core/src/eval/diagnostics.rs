//! Why blocking misses matches: shared vocabulary between sources, the
//! neighborhoods of false negatives, and sampled match/non-match structure.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::median;
use super::pairs::candidate_codes;
use crate::blocking::{
    tokenize, AttributeClustering, AttributeRef, BlockingError, TokenizerConfig,
};
use crate::model::{BlockingCollection, EntityCollection, EntityIdx, GroundTruth, IdPair, Mode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenDistribution {
    /// Per description, in collection order.
    pub counts: Vec<u64>,
    /// Count value to number of descriptions.
    pub histogram: BTreeMap<u64, u64>,
    pub median: Option<f64>,
}

/// Number of distinct tokens each description shares with the other
/// source. With a clustering, a token only counts as shared within the same
/// attribute cluster.
pub fn common_token_distribution(
    collection: &EntityCollection,
    config: &TokenizerConfig,
    clustering: Option<&AttributeClustering>,
) -> Result<TokenDistribution, BlockingError> {
    if collection.mode() != Mode::CleanClean {
        return Err(BlockingError::NotCleanClean);
    }
    config.validate()?;
    let keys_of = |idx: EntityIdx| -> BTreeSet<(u32, String)> {
        let source = collection.source_of(idx);
        let mut keys = BTreeSet::new();
        for p in collection.get(idx).pairs() {
            let cluster = clustering
                .map(|c| c.cluster_of(&AttributeRef::new(source, p.attribute.as_str())))
                .unwrap_or(0);
            for t in tokenize(&p.value, config) {
                keys.insert((cluster, t));
            }
        }
        keys
    };
    let per_entity: Vec<BTreeSet<(u32, String)>> = collection.indices().map(keys_of).collect();
    let mut vocab = [BTreeSet::new(), BTreeSet::new()];
    for (idx, keys) in collection.indices().zip(&per_entity) {
        vocab[collection.source_of(idx)].extend(keys.iter().cloned());
    }
    let counts: Vec<u64> = collection
        .indices()
        .zip(&per_entity)
        .map(|(idx, keys)| {
            let other = &vocab[1 - collection.source_of(idx)];
            keys.iter().filter(|k| other.contains(*k)).count() as u64
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let median = median(&counts);
    Ok(TokenDistribution {
        counts,
        histogram,
        median,
    })
}

/// `count` out of `total`, with the fraction undefined for an empty total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub count: u64,
    pub total: u64,
    pub fraction: Option<f64>,
}

impl Ratio {
    pub fn new(count: u64, total: u64) -> Self {
        Self {
            count,
            total,
            fraction: (total > 0).then(|| count as f64 / total as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FnReport {
    pub false_negatives: u64,
    pub descriptions_in_fns: u64,
    pub with_neighbors: Ratio,
    pub with_neighbor_in_ground_truth: Ratio,
    pub with_neighbor_identified: Ratio,
    pub fns_with_matching_neighbors: Ratio,
    pub fns_with_common_identified_match: Ratio,
}

/// Neighborhood analysis of the ground-truth pairs the blocking missed.
///
/// Neighbors of a description are the URIs among its resource values.
/// `identified` are the matches taken as already found; by default the true
/// positives of `blocks`.
pub fn fn_analysis(
    blocks: &BlockingCollection,
    gt: &GroundTruth,
    identified: Option<&[IdPair<EntityIdx>]>,
) -> FnReport {
    let universe = blocks.universe();
    let candidates = candidate_codes(blocks);
    let truth = gt.indexed(universe);
    let (tps, fns): (Vec<IdPair<EntityIdx>>, Vec<IdPair<EntityIdx>>) = truth
        .iter()
        .partition(|p| candidates.binary_search(&p.pack()).is_ok());
    let identified: &[IdPair<EntityIdx>] = identified.unwrap_or(&tps);

    let id = |i: &EntityIdx| universe.get(*i).id();
    let gt_ids = gt.ids();
    let identified_ids: BTreeSet<&str> = identified
        .iter()
        .flat_map(|p| [id(p.first()), id(p.second())])
        .collect();
    let mut partners: BTreeMap<EntityIdx, BTreeSet<EntityIdx>> = BTreeMap::new();
    for p in identified {
        partners.entry(*p.first()).or_default().insert(*p.second());
        partners.entry(*p.second()).or_default().insert(*p.first());
    }

    let fn_descs: BTreeSet<EntityIdx> =
        fns.iter().flat_map(|p| [*p.first(), *p.second()]).collect();
    let (mut with_n, mut in_gt, mut in_ident) = (0, 0, 0);
    for &d in &fn_descs {
        let n = universe.get(d).neighbors();
        with_n += u64::from(!n.is_empty());
        in_gt += u64::from(n.iter().any(|x| gt_ids.contains(x)));
        in_ident += u64::from(n.iter().any(|x| identified_ids.contains(x)));
    }

    let (mut matching, mut common) = (0, 0);
    for p in &fns {
        let na = universe.get(*p.first()).neighbors();
        let nb = universe.get(*p.second()).neighbors();
        if na
            .iter()
            .any(|x| nb.iter().any(|y| x != y && gt.contains(x, y)))
        {
            matching += 1;
        }
        let empty = BTreeSet::new();
        let pa = partners.get(p.first()).unwrap_or(&empty);
        let pb = partners.get(p.second()).unwrap_or(&empty);
        if pa.intersection(pb).next().is_some() {
            common += 1;
        }
    }

    let descs = fn_descs.len() as u64;
    let pairs = fns.len() as u64;
    FnReport {
        false_negatives: pairs,
        descriptions_in_fns: descs,
        with_neighbors: Ratio::new(with_n, descs),
        with_neighbor_in_ground_truth: Ratio::new(in_gt, descs),
        with_neighbor_identified: Ratio::new(in_ident, descs),
        fns_with_matching_neighbors: Ratio::new(matching, pairs),
        fns_with_common_identified_match: Ratio::new(common, pairs),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleStats {
    pub pairs: u64,
    pub both_with_neighbors: u64,
    /// Median over sampled pairs of |N(a)|·|N(b)|.
    pub median_neighbor_pairs: Option<f64>,
    /// Pairs with at least one neighbor pair in the ground truth.
    pub with_matching_neighbor_pair: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StructuralReport {
    pub seed: u64,
    pub requested: u64,
    pub matches: SampleStats,
    pub non_matches: SampleStats,
    pub warnings: Vec<String>,
}

fn stats(
    universe: &EntityCollection,
    gt: &GroundTruth,
    pairs: &[IdPair<EntityIdx>],
) -> SampleStats {
    let mut both = 0;
    let mut products = Vec::with_capacity(pairs.len());
    let mut matching = 0;
    for p in pairs {
        let na = universe.get(*p.first()).neighbors();
        let nb = universe.get(*p.second()).neighbors();
        both += u64::from(!na.is_empty() && !nb.is_empty());
        products.push((na.len() * nb.len()) as u64);
        if na.iter().any(|x| nb.iter().any(|y| gt.contains(x, y))) {
            matching += 1;
        }
    }
    SampleStats {
        pairs: pairs.len() as u64,
        both_with_neighbors: both,
        median_neighbor_pairs: median(&products),
        with_matching_neighbor_pair: matching,
    }
}

fn random_pair(
    universe: &EntityCollection,
    groups: &[Vec<EntityIdx>],
    rng: &mut ChaCha8Rng,
) -> Option<IdPair<EntityIdx>> {
    match universe.mode() {
        Mode::Dirty => {
            let n = universe.len() as u32;
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            IdPair::new(EntityIdx(a), EntityIdx(b))
        }
        Mode::CleanClean => {
            let a = groups[0][rng.random_range(0..groups[0].len())];
            let b = groups[1][rng.random_range(0..groups[1].len())];
            IdPair::new(a, b)
        }
    }
}

/// Compares the neighborhoods of `sample_size` random matches with those of
/// `sample_size` random comparable non-matches. Samples larger than the
/// available population are clipped and a warning is recorded.
pub fn sample_structural_analysis(
    gt: &GroundTruth,
    universe: &EntityCollection,
    sample_size: usize,
    seed: u64,
) -> StructuralReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let truth = gt.indexed(universe);

    let take = sample_size.min(truth.len());
    if take < sample_size {
        warnings.push(format!(
            "requested {sample_size} matches, only {} available",
            truth.len()
        ));
    }
    let mut matches: Vec<IdPair<EntityIdx>> = index::sample(&mut rng, truth.len(), take)
        .into_iter()
        .map(|i| truth[i])
        .collect();
    matches.sort_unstable();

    let total = super::comparisons_without_blocking(universe);
    let population = total - truth.len() as u64;
    let take = (sample_size as u64).min(population) as usize;
    if take < sample_size {
        warnings.push(format!(
            "requested {sample_size} non-matches, only {population} available"
        ));
    }
    let is_match = |p: &IdPair<EntityIdx>| truth.binary_search(p).is_ok();
    let mut non_matches: Vec<IdPair<EntityIdx>> = if take as u64 * 2 >= population {
        let all: Vec<IdPair<EntityIdx>> = universe
            .indices()
            .flat_map(|a| {
                universe
                    .indices()
                    .skip(a.get() + 1)
                    .filter(move |&b| universe.is_comparable(a, b))
                    .filter_map(move |b| IdPair::new(a, b))
            })
            .filter(|p| !is_match(p))
            .collect();
        index::sample(&mut rng, all.len(), take)
            .into_iter()
            .map(|i| all[i])
            .collect()
    } else {
        let mut groups = [Vec::new(), Vec::new()];
        if universe.mode() == Mode::CleanClean {
            for i in universe.indices() {
                groups[universe.source_of(i)].push(i);
            }
        }
        let mut chosen = BTreeSet::new();
        while chosen.len() < take {
            if let Some(p) = random_pair(universe, &groups, &mut rng) {
                if !is_match(&p) {
                    chosen.insert(p);
                }
            }
        }
        chosen.into_iter().collect()
    };
    non_matches.sort_unstable();

    StructuralReport {
        seed,
        requested: sample_size as u64,
        matches: stats(universe, gt, &matches),
        non_matches: stats(universe, gt, &non_matches),
        warnings,
    }
}
