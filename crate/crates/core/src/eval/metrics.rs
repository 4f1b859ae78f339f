use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::pairs::{candidate_codes, comparisons_without_blocking};
use crate::blocking::MergedEntity;
use crate::model::{BlockingCollection, EntityCollection, GroundTruth, IdPair};

/// Which comparison count stands in the reduction-ratio numerator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RrBasis {
    /// Summed over blocks, redundant co-occurrences included.
    #[default]
    Aggregate,
    Distinct,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonCounts {
    pub aggregate: u64,
    pub distinct: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub counts: ConfusionCounts,
    pub recall: f64,
    pub precision: f64,
    pub fmeasure: f64,
    /// `None` when exhaustive resolution needs no comparisons.
    pub rr: Option<f64>,
    /// `None` unless `rr > 0`.
    pub h3r: Option<f64>,
    pub rr_basis: RrBasis,
    pub comparisons_with_blocking: ComparisonCounts,
    pub comparisons_without_blocking: u64,
    pub block_count: u64,
    pub per_entity_common_token_median: Option<f64>,
    pub cluster_count: Option<u64>,
    pub median_cluster_size: Option<f64>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Harmonic mean of reduction ratio and recall; undefined unless the
/// reduction ratio is positive.
pub fn h3r(rr: f64, recall: f64) -> Option<f64> {
    (rr > 0.0).then(|| harmonic(rr, recall))
}

/// Counts and measures from sorted packed candidates.
fn measure(
    universe: &EntityCollection,
    candidates: &[u64],
    gt: &GroundTruth,
    with_blocking: ComparisonCounts,
    basis: RrBasis,
    block_count: u64,
) -> MetricsReport {
    let truth: Vec<u64> = gt.indexed(universe).iter().map(|p| p.pack()).collect();
    let tp = truth
        .iter()
        .filter(|t| candidates.binary_search(t).is_ok())
        .count() as u64;
    let distinct = candidates.len() as u64;
    let total = comparisons_without_blocking(universe);
    let fp = distinct - tp;
    let fn_ = truth.len() as u64 - tp;
    let counts = ConfusionCounts {
        tp,
        fp,
        fn_,
        tn: total.saturating_sub(tp + fp + fn_),
    };
    let recall = ratio(tp, tp + fn_);
    let precision = ratio(tp, distinct);
    let numerator = match basis {
        RrBasis::Aggregate => with_blocking.aggregate,
        RrBasis::Distinct => with_blocking.distinct,
    };
    let rr = (total > 0).then(|| 1.0 - numerator as f64 / total as f64);
    let h3r = rr.and_then(|r| h3r(r, recall));
    MetricsReport {
        counts,
        recall,
        precision,
        fmeasure: harmonic(precision, recall),
        rr,
        h3r,
        rr_basis: basis,
        comparisons_with_blocking: with_blocking,
        comparisons_without_blocking: total,
        block_count,
        per_entity_common_token_median: None,
        cluster_count: None,
        median_cluster_size: None,
    }
}

/// Measures a blocking collection against a ground truth.
///
/// Ground-truth pairs outside the collection, and same-source pairs in
/// clean-clean mode, are ignored. Recall and precision use distinct
/// candidate pairs; `basis` picks the reduction-ratio numerator.
pub fn score(blocks: &BlockingCollection, gt: &GroundTruth, basis: RrBasis) -> MetricsReport {
    let candidates = candidate_codes(blocks);
    let with_blocking = ComparisonCounts {
        aggregate: blocks.blocks().iter().map(|b| b.comparisons()).sum(),
        distinct: candidates.len() as u64,
    };
    measure(
        blocks.universe(),
        &candidates,
        gt,
        with_blocking,
        basis,
        blocks.comparable_block_count() as u64,
    )
}

/// Pairs resolved into the same entity, sorted; cross-source only in
/// clean-clean mode.
pub fn resolved_pairs(
    universe: &EntityCollection,
    entities: &[MergedEntity],
) -> Vec<IdPair<crate::model::EntityIdx>> {
    let mut out = Vec::new();
    for e in entities {
        for (i, &a) in e.members.iter().enumerate() {
            for &b in &e.members[i + 1..] {
                if universe.is_comparable(a, b) {
                    out.extend(IdPair::new(a, b));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Measures an entity partition: candidates are the resolved pairs and the
/// comparison count is the number of match decisions taken.
pub fn score_partition(
    universe: &EntityCollection,
    entities: &[MergedEntity],
    comparisons: u64,
    gt: &GroundTruth,
) -> MetricsReport {
    let candidates: Vec<u64> = resolved_pairs(universe, entities)
        .iter()
        .map(|p| p.pack())
        .collect();
    let with_blocking = ComparisonCounts {
        aggregate: comparisons,
        distinct: comparisons,
    };
    measure(
        universe,
        &candidates,
        gt,
        with_blocking,
        RrBasis::Aggregate,
        0,
    )
}
