//! Blocking-quality measures and the diagnostics behind them.

mod diagnostics;
mod metrics;
mod pairs;

use alloc::vec::Vec;

pub use diagnostics::{
    common_token_distribution, fn_analysis, sample_structural_analysis, FnReport, Ratio,
    SampleStats, StructuralReport, TokenDistribution,
};
pub use metrics::{
    h3r, resolved_pairs, score, score_partition, ComparisonCounts, ConfusionCounts, MetricsReport,
    RrBasis,
};
pub use pairs::{candidate_pairs, comparison_counts, comparisons_without_blocking};

/// Median of unsigned counts; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[u64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<u64> = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] as f64 + v[mid] as f64) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::median;

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3]), Some(3.0));
        assert_eq!(median(&[4, 1, 3]), Some(3.0));
        assert_eq!(median(&[4, 1, 3, 2]), Some(2.5));
    }
}
