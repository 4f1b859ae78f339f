//! Attribute profiles, trigram similarity and attribute clustering blocking.
//!
//! Attributes of the two sources are profiled by the concatenation of their
//! values, compared by Jaccard similarity of character trigram sets, and each
//! attribute is linked to its most similar attribute of the other source.
//! Connected components of those links are the clusters; attributes with no
//! similar partner at all share one glue cluster. Blocking then keys every
//! token by the cluster of the attribute it came from.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{index_by_keys, tokenize, BlockingError, TokenizerConfig};
use crate::dsu::DisjointSets;
use crate::engine::{Executor, PartitionedDataset};
use crate::model::{BlockKey, BlockingCollection, EntityCollection, EntityIdx, Mode};

pub type ClusterId = u32;

/// An attribute name qualified by the index of the source it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeRef {
    pub source: usize,
    pub name: String,
}

impl AttributeRef {
    pub fn new(source: usize, name: impl Into<String>) -> Self {
        Self {
            source,
            name: name.into(),
        }
    }
}

impl fmt::Display for AttributeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.source)
    }
}

const SHORT: u64 = 1 << 63;

fn pack3(a: char, b: char, c: char) -> u64 {
    ((a as u64) << 42) | ((b as u64) << 21) | c as u64
}

fn pack_short(chars: &[char]) -> u64 {
    let mut v = SHORT | ((chars.len() as u64) << 60);
    for (i, &c) in chars.iter().enumerate() {
        v |= (c as u64) << (21 * (1 - i));
    }
    v
}

fn unpack(code: u64) -> String {
    let ch =
        |shift: u32| char::from_u32(((code >> shift) & 0x1F_FFFF) as u32).unwrap_or('\u{FFFD}');
    if code & SHORT == 0 {
        [ch(42), ch(21), ch(0)].iter().collect()
    } else {
        let len = ((code >> 60) & 0b11) as usize;
        [ch(21), ch(0)][..len].iter().collect()
    }
}

/// A set of character trigrams, stored as sorted packed code points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrigramSet {
    codes: Vec<u64>,
}

impl TrigramSet {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// The trigrams as strings, in code-point order.
    pub fn to_strings(&self) -> Vec<String> {
        self.codes.iter().map(|&c| unpack(c)).collect()
    }

    /// |A ∩ B| / |A ∪ B|, or 0 when both sets are empty.
    pub fn jaccard(&self, other: &Self) -> f64 {
        let (a, b) = (&self.codes, &other.codes);
        let (mut i, mut j, mut common) = (0, 0, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = a.len() + b.len() - common;
        if union == 0 {
            0.0
        } else {
            common as f64 / union as f64
        }
    }
}

/// Character trigrams of `text` after lower-casing and collapsing whitespace
/// runs to single spaces. Non-empty texts shorter than three characters
/// yield themselves as the only element.
pub fn trigrams(text: &str) -> TrigramSet {
    let mut chars: Vec<char> = Vec::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !chars.is_empty() {
            chars.push(' ');
        }
        for c in word.chars() {
            chars.extend(c.to_lowercase());
        }
    }
    let mut codes: Vec<u64> = if chars.len() < 3 {
        if chars.is_empty() {
            Vec::new()
        } else {
            alloc::vec![pack_short(&chars)]
        }
    } else {
        chars.windows(3).map(|w| pack3(w[0], w[1], w[2])).collect()
    };
    codes.sort_unstable();
    codes.dedup();
    TrigramSet { codes }
}

/// Jaccard similarity of two sets; 0 when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let common = a.intersection(b).count();
    let union = a.len() + b.len() - common;
    if union == 0 {
        0.0
    } else {
        common as f64 / union as f64
    }
}

/// For every attribute of every source, its values sorted and joined by
/// single spaces.
pub fn attribute_profile<E: Executor>(
    collection: &EntityCollection,
    exec: &E,
) -> Result<BTreeMap<AttributeRef, String>, BlockingError> {
    let records: Vec<EntityIdx> = collection.indices().collect();
    let input = PartitionedDataset::split(records, exec.config().partitions)?;
    let profiles = exec.map_group_reduce(
        &input,
        |&idx| {
            let source = collection.source_of(idx) as u8;
            collection
                .get(idx)
                .pairs()
                .iter()
                .map(|p| {
                    let mut key = alloc::vec![source];
                    key.extend_from_slice(p.attribute.as_bytes());
                    (key, p.value.text.as_str())
                })
                .collect()
        },
        |key, mut values| {
            values.sort_unstable();
            let name = String::from_utf8_lossy(&key[1..]).into_owned();
            alloc::vec![(AttributeRef::new(key[0] as usize, name), values.join(" "))]
        },
    )?;
    Ok(profiles.into_iter().collect())
}

/// One best-match link: `from` is most similar to `to` among the attributes
/// of the other source.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeLink {
    pub from: AttributeRef,
    pub to: AttributeRef,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeClustering {
    assignment: BTreeMap<AttributeRef, ClusterId>,
    glue: ClusterId,
    links: Vec<AttributeLink>,
}

impl AttributeClustering {
    /// Builds a clustering from an explicit assignment, e.g. one read back
    /// from a file.
    pub fn from_assignment(assignment: BTreeMap<AttributeRef, ClusterId>, glue: ClusterId) -> Self {
        Self {
            assignment,
            glue,
            links: Vec::new(),
        }
    }

    pub fn assignment(&self) -> &BTreeMap<AttributeRef, ClusterId> {
        &self.assignment
    }

    pub fn cluster_of(&self, attribute: &AttributeRef) -> ClusterId {
        self.assignment.get(attribute).copied().unwrap_or(self.glue)
    }

    pub fn glue_cluster(&self) -> ClusterId {
        self.glue
    }

    /// Best-match links, ordered by `from`.
    pub fn links(&self) -> &[AttributeLink] {
        &self.links
    }

    /// Members of every non-empty cluster, glue included, by cluster id.
    pub fn clusters(&self) -> BTreeMap<ClusterId, Vec<&AttributeRef>> {
        let mut out: BTreeMap<ClusterId, Vec<&AttributeRef>> = BTreeMap::new();
        for (a, &c) in &self.assignment {
            out.entry(c).or_default().push(a);
        }
        out
    }

    /// Number of non-empty clusters, glue included.
    pub fn cluster_count(&self) -> usize {
        self.clusters().len()
    }

    pub fn median_cluster_size(&self) -> Option<f64> {
        let sizes: Vec<u64> = self.clusters().values().map(|m| m.len() as u64).collect();
        crate::eval::median(&sizes)
    }
}

/// Clusters the attributes of a clean-clean collection.
///
/// Only cross-source attribute pairs are scored. Ties between equally
/// similar best matches go to the lexicographically smallest name.
pub fn attribute_clustering<E: Executor>(
    collection: &EntityCollection,
    exec: &E,
) -> Result<AttributeClustering, BlockingError> {
    if collection.mode() != Mode::CleanClean {
        return Err(BlockingError::NotCleanClean);
    }
    let profiles = attribute_profile(collection, exec)?;
    for (s, tag) in collection.sources().iter().enumerate() {
        if !profiles.keys().any(|a| a.source == s) {
            return Err(BlockingError::EmptySource(tag.clone()));
        }
    }
    let attrs: Vec<AttributeRef> = profiles.keys().cloned().collect();
    let sets: Vec<TrigramSet> = profiles.values().map(|p| trigrams(p)).collect();

    let input = PartitionedDataset::split((0..attrs.len()).collect(), exec.config().partitions)?;
    let scored = exec.pairwise(&input, |&i, &j| {
        if attrs[i].source == attrs[j].source {
            return None;
        }
        let sim = sets[i].jaccard(&sets[j]);
        (sim > 0.0).then_some((i.min(j), i.max(j), sim))
    })?;

    // Attributes are sorted by (source, name), so a smaller index on the
    // other side is a smaller name.
    let mut best: Vec<Option<(usize, f64)>> = alloc::vec![None; attrs.len()];
    let mut offer = |from: usize, to: usize, sim: f64| {
        let better = match best[from] {
            None => true,
            Some((cur, s)) => sim > s || (sim == s && to < cur),
        };
        if better {
            best[from] = Some((to, sim));
        }
    };
    for &(i, j, sim) in &scored {
        offer(i, j, sim);
        offer(j, i, sim);
    }

    let mut dsu = DisjointSets::new(attrs.len());
    let mut links = Vec::new();
    for (i, b) in best.iter().enumerate() {
        if let Some((j, sim)) = *b {
            dsu.union(i, j);
            links.push(AttributeLink {
                from: attrs[i].clone(),
                to: attrs[j].clone(),
                similarity: sim,
            });
        }
    }

    let components = dsu.components();
    let linked: Vec<&Vec<usize>> = components.iter().filter(|c| c.len() > 1).collect();
    let glue = linked.len() as ClusterId;
    let mut assignment = BTreeMap::new();
    for (cid, comp) in linked.iter().enumerate() {
        for &i in comp.iter() {
            assignment.insert(attrs[i].clone(), cid as ClusterId);
        }
    }
    for comp in components.iter().filter(|c| c.len() == 1) {
        assignment.insert(attrs[comp[0]].clone(), glue);
    }
    Ok(AttributeClustering {
        assignment,
        glue,
        links,
    })
}

/// Token blocking with each token keyed by the cluster of its attribute.
pub fn clustered_token_blocking<'a, E: Executor>(
    collection: &'a EntityCollection,
    clustering: &AttributeClustering,
    config: &TokenizerConfig,
    exec: &E,
) -> Result<BlockingCollection<'a>, BlockingError> {
    config.validate()?;
    index_by_keys(collection, exec, |d| {
        let source = collection
            .index_of(d.id())
            .map(|i| collection.source_of(i))
            .unwrap_or(0);
        let mut keys = BTreeSet::new();
        for p in d.pairs() {
            let cluster = clustering.cluster_of(&AttributeRef::new(source, p.attribute.as_str()));
            for t in tokenize(&p.value, config) {
                keys.insert(BlockKey::clustered(cluster, t));
            }
        }
        keys
    })
}

/// Attribute clustering followed by clustered token blocking.
pub fn attribute_clustering_blocking<'a, E: Executor>(
    collection: &'a EntityCollection,
    config: &TokenizerConfig,
    exec: &E,
) -> Result<(BlockingCollection<'a>, AttributeClustering), BlockingError> {
    config.validate()?;
    let clustering = attribute_clustering(collection, exec)?;
    let blocks = clustered_token_blocking(collection, &clustering, config, exec)?;
    Ok((blocks, clustering))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| String::from(*s)).collect()
    }

    #[test]
    fn trigrams_slide_over_normalized_text() {
        assert_eq!(trigrams("tower").to_strings(), vec!["owe", "tow", "wer"]);
        assert_eq!(trigrams("To  W").to_strings(), vec!["o w", "to "]);
        assert!(trigrams("").is_empty());
        assert!(trigrams("   ").is_empty());
        assert_eq!(trigrams("ab").to_strings(), vec!["ab"]);
        assert_eq!(trigrams("X").to_strings(), vec!["x"]);
    }

    #[test]
    fn trigrams_handle_non_ascii() {
        let s = trigrams("Ünï");
        assert_eq!(s.to_strings(), vec!["ünï"]);
    }

    #[test]
    fn short_and_full_codes_never_collide() {
        let short = trigrams("ab");
        let full = trigrams("\u{0}ab");
        assert_eq!(short.jaccard(&full), 0.0);
    }

    #[test]
    fn jaccard_values() {
        let a = set(&["tow", "owe", "wer"]);
        let b = set(&["owe", "wer", "erx"]);
        assert_eq!(jaccard(&a, &b), 0.5);
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(jaccard(&a, &set(&["zzz"])), 0.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 0.0);
    }

    #[test]
    fn trigram_jaccard_agrees_with_set_jaccard() {
        for (x, y) in [
            ("tower", "towers"),
            ("Eiffel Tower", "Tower of Eiffel"),
            ("", "a"),
        ] {
            let as_set = |t: &str| {
                trigrams(t)
                    .to_strings()
                    .into_iter()
                    .collect::<BTreeSet<_>>()
            };
            assert_eq!(
                trigrams(x).jaccard(&trigrams(y)),
                jaccard(&as_set(x), &as_set(y))
            );
        }
    }
}
