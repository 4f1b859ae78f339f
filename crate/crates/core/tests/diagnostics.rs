mod common;

use common::*;
use lodblock_core::eval::Ratio;
use lodblock_core::{
    common_token_distribution, fn_analysis, sample_structural_analysis, AttributeValue, BlockKey,
    BlockingCollection, EntityCollection, EntityDescription, GroundTruth, Mode, TokenizerConfig,
    Value,
};

fn uri(name: &str) -> String {
    format!("http://ex.org/{name}")
}

fn node(name: &str, links: &[&str]) -> EntityDescription {
    let mut pairs = vec![AttributeValue::new("label", Value::literal(name))];
    for l in links {
        pairs.push(AttributeValue::new("rel", Value::resource(uri(l))));
    }
    EntityDescription::new(uri(name), "D", pairs).unwrap()
}

/// Twelve descriptions. Matches: (p,q), (r,s), the triple t/u/v, (w,x) and
/// (m1,m2). Blocking finds (t,v), (u,v), (w,x), (m1,m2) and the non-match
/// (p,o).
fn fixture() -> (EntityCollection, GroundTruth) {
    let c = EntityCollection::new(
        [
            node("p", &["m1"]),
            node("q", &["m2"]),
            node("r", &["o", "p"]),
            node("s", &[]),
            node("t", &["w"]),
            node("u", &[]),
            node("v", &[]),
            node("w", &[]),
            node("x", &[]),
            node("m1", &[]),
            node("m2", &[]),
            node("o", &[]),
        ],
        Mode::Dirty,
        vec![],
    )
    .unwrap();
    let gt = GroundTruth::from_links(
        "sameAs",
        [
            ("p", "q"),
            ("r", "s"),
            ("t", "u"),
            ("u", "v"),
            ("w", "x"),
            ("m1", "m2"),
        ]
        .map(|(a, b)| (uri(a), uri(b))),
    );
    (c, gt)
}

fn blocks(c: &EntityCollection) -> BlockingCollection<'_> {
    let groups = [["t", "v"], ["u", "v"], ["w", "x"], ["m1", "m2"], ["p", "o"]];
    BlockingCollection::from_ids(
        c,
        groups
            .iter()
            .enumerate()
            .map(|(i, g)| (BlockKey::token(format!("b{i}")), g.map(uri))),
    )
    .unwrap()
}

#[test]
fn false_negative_rows_match_hand_counts() {
    let (c, gt) = fixture();
    let b = blocks(&c);
    let r = fn_analysis(&b, &gt, None);
    assert_eq!(r.false_negatives, 3);
    assert_eq!(r.descriptions_in_fns, 6);
    assert_eq!(r.with_neighbors, Ratio::new(4, 6));
    assert_eq!(r.with_neighbor_in_ground_truth, Ratio::new(4, 6));
    assert_eq!(r.with_neighbor_identified, Ratio::new(3, 6));
    assert_eq!(r.fns_with_matching_neighbors, Ratio::new(1, 3));
    assert_eq!(r.fns_with_common_identified_match, Ratio::new(1, 3));
}

#[test]
fn no_false_negatives_means_undefined_fractions() {
    let (c, _) = fixture();
    let gt = GroundTruth::from_links("sameAs", [(uri("w"), uri("x"))]);
    let r = fn_analysis(&blocks(&c), &gt, None);
    assert_eq!(r.false_negatives, 0);
    assert_eq!(r.with_neighbors.fraction, None);
    assert_eq!(r.fns_with_common_identified_match.fraction, None);
}

#[test]
fn explicit_identified_set_replaces_true_positives() {
    let (c, gt) = fixture();
    let r = fn_analysis(&blocks(&c), &gt, Some(&[]));
    assert_eq!(r.with_neighbor_identified, Ratio::new(0, 6));
    assert_eq!(r.fns_with_common_identified_match, Ratio::new(0, 3));
}

#[test]
fn exhaustive_sample_matches_hand_counts() {
    let (c, gt) = fixture();
    let r = sample_structural_analysis(&gt, &c, 59, 7);
    assert_eq!(r.matches.pairs, 7);
    assert_eq!(r.matches.both_with_neighbors, 1);
    assert_eq!(r.matches.median_neighbor_pairs, Some(0.0));
    assert_eq!(r.matches.with_matching_neighbor_pair, 1);
    assert_eq!(r.non_matches.pairs, 59);
    assert_eq!(r.non_matches.both_with_neighbors, 5);
    assert_eq!(r.non_matches.median_neighbor_pairs, Some(0.0));
    assert_eq!(r.non_matches.with_matching_neighbor_pair, 0);
    assert_eq!(r.warnings.len(), 1, "{:?}", r.warnings);
}

#[test]
fn oversized_samples_are_clipped_with_warnings() {
    let (c, gt) = fixture();
    let r = sample_structural_analysis(&gt, &c, 100, 1);
    assert_eq!((r.matches.pairs, r.non_matches.pairs), (7, 59));
    assert_eq!(r.warnings.len(), 2);
}

#[test]
fn exhaustive_samples_do_not_depend_on_the_seed() {
    let (c, gt) = fixture();
    let a = sample_structural_analysis(&gt, &c, 100, 1);
    let b = sample_structural_analysis(&gt, &c, 100, 99);
    assert_eq!((a.matches, a.non_matches), (b.matches, b.non_matches));
}

#[test]
fn partial_samples_are_reproducible() {
    let (c, gt) = fixture();
    let a = sample_structural_analysis(&gt, &c, 3, 42);
    let b = sample_structural_analysis(&gt, &c, 3, 42);
    assert_eq!(a, b);
    assert_eq!((a.matches.pairs, a.non_matches.pairs), (3, 3));
    assert!(a.warnings.is_empty());
}

#[test]
fn neighbor_free_collection_gives_zero_rows() {
    let c = example_dirty();
    let gt = GroundTruth::from_links("sameAs", [("e1", "e6"), ("e2", "e5")]);
    let r = sample_structural_analysis(&gt, &c, 2, 3);
    for s in [&r.matches, &r.non_matches] {
        assert_eq!(s.pairs, 2);
        assert_eq!(s.both_with_neighbors, 0);
        assert_eq!(s.median_neighbor_pairs, Some(0.0));
        assert_eq!(s.with_matching_neighbor_pair, 0);
    }
}

#[test]
fn every_match_with_a_matching_neighbor_pair_is_counted() {
    let n = 6;
    let mut descs = Vec::new();
    let mut links = Vec::new();
    for i in 0..n {
        let (a, b) = (format!("a{i}"), format!("b{i}"));
        descs.push(node(&a, &[&format!("ext/c{i}")]));
        descs.push(node(&b, &[&format!("ext/d{i}")]));
        links.push((uri(&a), uri(&b)));
        links.push((uri(&format!("ext/c{i}")), uri(&format!("ext/d{i}"))));
    }
    let c = EntityCollection::new(descs, Mode::Dirty, vec![]).unwrap();
    let gt = GroundTruth::from_links("sameAs", links);
    let r = sample_structural_analysis(&gt, &c, 4, 11);
    assert_eq!(r.matches.pairs, 4);
    assert_eq!(r.matches.with_matching_neighbor_pair, 4);
    assert_eq!(r.matches.median_neighbor_pairs, Some(1.0));
}

#[test]
fn common_tokens_follow_brute_force_intersection() {
    let c = example_split();
    let dist = common_token_distribution(&c, &TokenizerConfig::default(), None).unwrap();
    let d2_tokens: std::collections::BTreeSet<String> = c
        .descriptions()
        .iter()
        .filter(|d| d.source() == "D2")
        .flat_map(|d| naive_tokens(d, true))
        .collect();
    let d1_tokens: std::collections::BTreeSet<String> = c
        .descriptions()
        .iter()
        .filter(|d| d.source() == "D1")
        .flat_map(|d| naive_tokens(d, true))
        .collect();
    for (i, d) in c.descriptions().iter().enumerate() {
        let other = if d.source() == "D1" {
            &d2_tokens
        } else {
            &d1_tokens
        };
        let expected = naive_tokens(d, true).intersection(other).count() as u64;
        assert_eq!(dist.counts[i], expected, "{}", d.id());
    }
    let e4 = c.index_of("e4").unwrap().get();
    assert_eq!(dist.counts[e4], 1);
    assert_eq!(dist.histogram.values().sum::<u64>(), 7);
}

#[test]
fn disjoint_and_twin_sources() {
    let twin = |tag: &str, prefix: &str| {
        vec![
            desc(&format!("{prefix}1"), tag, &[("n", "alpha beta")]),
            desc(&format!("{prefix}2"), tag, &[("n", "gamma")]),
        ]
    };
    let mut ds = twin("A", "a");
    ds.extend(twin("B", "b"));
    let c = EntityCollection::new(ds, Mode::CleanClean, vec!["A".into(), "B".into()]).unwrap();
    let dist = common_token_distribution(&c, &TokenizerConfig::default(), None).unwrap();
    assert_eq!(dist.counts, [2, 1, 2, 1]);
    assert_eq!(dist.median, Some(1.5));

    let c = EntityCollection::new(
        [desc("a", "A", &[("n", "x")]), desc("b", "B", &[("n", "y")])],
        Mode::CleanClean,
        vec!["A".into(), "B".into()],
    )
    .unwrap();
    let dist = common_token_distribution(&c, &TokenizerConfig::default(), None).unwrap();
    assert_eq!(dist.counts, [0, 0]);
}
