//! Entity descriptions, collections, blocks and ground truths.
//!
//! Everything here is immutable once constructed. Constructors validate the
//! invariants the rest of the crate relies on, so downstream code indexes
//! without re-checking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsu::DisjointSets;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("entity identifier is empty")]
    EmptyId,
    #[error("description `{id}` has an empty attribute name")]
    EmptyAttribute { id: String },
    #[error("description `{id}` has a resource value that is not a URI reference: `{value}`")]
    InvalidResource { id: String, value: String },
    #[error("identifier `{0}` appears more than once in the collection")]
    DuplicateId(String),
    #[error("clean-clean collections need exactly two sources, got {0}")]
    SourceCount(usize),
    #[error("description `{id}` has source `{source_tag}` which is not declared")]
    UnknownSource { id: String, source_tag: String },
    #[error("block `{0}` has no members")]
    EmptyBlock(String),
    #[error("block key `{0}` appears more than once")]
    DuplicateBlockKey(String),
    #[error("block key `{0}` is malformed")]
    MalformedKey(String),
    #[error("block member `{0}` is not in the entity collection")]
    UnknownMember(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Literal,
    Resource,
}

/// An object value: a literal's lexical form or a resource URI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value {
    pub kind: ValueKind,
    pub text: String,
}

impl Value {
    pub fn literal(text: impl Into<String>) -> Self {
        Self {
            kind: ValueKind::Literal,
            text: text.into(),
        }
    }

    pub fn resource(text: impl Into<String>) -> Self {
        Self {
            kind: ValueKind::Resource,
            text: text.into(),
        }
    }

    pub fn is_resource(&self) -> bool {
        self.kind == ValueKind::Resource
    }
}

fn is_uri_reference(text: &str) -> bool {
    !text.is_empty()
        && !text
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"'))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeValue {
    pub attribute: String,
    pub value: Value,
}

impl AttributeValue {
    pub fn new(attribute: impl Into<String>, value: Value) -> Self {
        Self {
            attribute: attribute.into(),
            value,
        }
    }
}

/// One entity: an identifier plus its set of attribute-value pairs.
///
/// Pairs are kept sorted and deduplicated; repeated triples collapse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityDescription {
    id: String,
    source: String,
    pairs: Vec<AttributeValue>,
}

impl EntityDescription {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        pairs: impl IntoIterator<Item = AttributeValue>,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        if id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        let mut pairs: Vec<AttributeValue> = pairs.into_iter().collect();
        for p in &pairs {
            if p.attribute.is_empty() {
                return Err(ModelError::EmptyAttribute { id });
            }
            if p.value.is_resource() && !is_uri_reference(&p.value.text) {
                return Err(ModelError::InvalidResource {
                    id,
                    value: p.value.text.clone(),
                });
            }
        }
        pairs.sort();
        pairs.dedup();
        Ok(Self {
            id,
            source: source.into(),
            pairs,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn pairs(&self) -> &[AttributeValue] {
        &self.pairs
    }

    /// URIs named by resource-valued pairs, excluding the description itself.
    pub fn neighbors(&self) -> BTreeSet<&str> {
        self.pairs
            .iter()
            .filter(|p| p.value.is_resource() && p.value.text != self.id)
            .map(|p| p.value.text.as_str())
            .collect()
    }

    /// Same description with the pairs rejected by `keep` removed.
    pub fn retain_pairs(&self, mut keep: impl FnMut(&AttributeValue) -> bool) -> Self {
        Self {
            id: self.id.clone(),
            source: self.source.clone(),
            pairs: self.pairs.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Two duplicate-free sources; only cross-source pairs are comparisons.
    CleanClean,
    /// One collection that may contain duplicates; every pair is a comparison.
    Dirty,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::CleanClean => "clean-clean",
            Mode::Dirty => "dirty",
        })
    }
}

/// Dense index of a description inside its [`EntityCollection`].
///
/// Descriptions are stored sorted by id, so index order equals id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityIdx(pub u32);

impl EntityIdx {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityCollection {
    descriptions: Vec<EntityDescription>,
    source_of: Vec<u8>,
    mode: Mode,
    sources: Vec<String>,
}

impl EntityCollection {
    /// Builds a collection. `sources` lists the source tags in order; when it
    /// is empty in dirty mode the tags are taken from the descriptions.
    pub fn new(
        descriptions: impl IntoIterator<Item = EntityDescription>,
        mode: Mode,
        sources: Vec<String>,
    ) -> Result<Self, ModelError> {
        let mut descriptions: Vec<EntityDescription> = descriptions.into_iter().collect();
        descriptions.sort_by(|a, b| a.id.cmp(&b.id));
        for w in descriptions.windows(2) {
            if w[0].id == w[1].id {
                return Err(ModelError::DuplicateId(w[0].id.clone()));
            }
        }
        let mut sources = sources;
        if mode == Mode::CleanClean && sources.len() != 2 {
            return Err(ModelError::SourceCount(sources.len()));
        }
        if mode == Mode::Dirty && sources.is_empty() {
            let tags: BTreeSet<&str> = descriptions.iter().map(|d| d.source.as_str()).collect();
            sources = tags.into_iter().map(String::from).collect();
        }
        let mut source_of = Vec::with_capacity(descriptions.len());
        for d in &descriptions {
            match sources.iter().position(|s| *s == d.source) {
                Some(p) => source_of.push(p as u8),
                None => {
                    return Err(ModelError::UnknownSource {
                        id: d.id.clone(),
                        source_tag: d.source.clone(),
                    })
                }
            }
        }
        Ok(Self {
            descriptions,
            source_of,
            mode,
            sources,
        })
    }

    pub fn len(&self) -> usize {
        self.descriptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptions.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn descriptions(&self) -> &[EntityDescription] {
        &self.descriptions
    }

    pub fn get(&self, idx: EntityIdx) -> &EntityDescription {
        &self.descriptions[idx.get()]
    }

    pub fn index_of(&self, id: &str) -> Option<EntityIdx> {
        self.descriptions
            .binary_search_by(|d| d.id.as_str().cmp(id))
            .ok()
            .map(|i| EntityIdx(i as u32))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of(id).is_some()
    }

    /// Position of the description's source tag in [`Self::sources`].
    pub fn source_of(&self, idx: EntityIdx) -> usize {
        self.source_of[idx.get()] as usize
    }

    pub fn indices(&self) -> impl Iterator<Item = EntityIdx> + '_ {
        (0..self.descriptions.len() as u32).map(EntityIdx)
    }

    /// Number of descriptions per source tag.
    pub fn source_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.sources.len()];
        for &s in &self.source_of {
            sizes[s as usize] += 1;
        }
        sizes
    }

    /// Whether the pair counts as a comparison under the collection's mode.
    pub fn is_comparable(&self, a: EntityIdx, b: EntityIdx) -> bool {
        a != b && (self.mode == Mode::Dirty || self.source_of(a) != self.source_of(b))
    }

    /// Same collection with descriptions rebuilt or dropped by `f`.
    pub fn filter_map(
        &self,
        mut f: impl FnMut(&EntityDescription) -> Option<EntityDescription>,
    ) -> Self {
        let mut descriptions = Vec::new();
        let mut source_of = Vec::new();
        for (d, &s) in self.descriptions.iter().zip(&self.source_of) {
            if let Some(nd) = f(d) {
                debug_assert_eq!(nd.id, d.id);
                descriptions.push(nd);
                source_of.push(s);
            }
        }
        Self {
            descriptions,
            source_of,
            mode: self.mode,
            sources: self.sources.clone(),
        }
    }
}

/// An unordered pair stored with the smaller element first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IdPair<T> {
    first: T,
    second: T,
}

impl<T: Ord> IdPair<T> {
    /// `None` for a reflexive pair.
    pub fn new(a: T, b: T) -> Option<Self> {
        match a.cmp(&b) {
            core::cmp::Ordering::Less => Some(Self {
                first: a,
                second: b,
            }),
            core::cmp::Ordering::Greater => Some(Self {
                first: b,
                second: a,
            }),
            core::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> &T {
        &self.first
    }

    pub fn second(&self) -> &T {
        &self.second
    }

    pub fn into_inner(self) -> (T, T) {
        (self.first, self.second)
    }
}

impl IdPair<EntityIdx> {
    pub(crate) fn pack(&self) -> u64 {
        ((self.first.0 as u64) << 32) | self.second.0 as u64
    }

    pub(crate) fn unpack(packed: u64) -> Self {
        Self {
            first: EntityIdx((packed >> 32) as u32),
            second: EntityIdx(packed as u32),
        }
    }
}

/// Transitive closure of an undirected pair relation: every connected
/// component of `k` nodes yields all `k(k-1)/2` pairs. Reflexive input
/// pairs are ignored.
pub fn transitive_closure<T, I>(pairs: I) -> BTreeSet<IdPair<T>>
where
    T: Ord + Clone,
    I: IntoIterator<Item = (T, T)>,
{
    let mut ids: BTreeMap<T, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    for (a, b) in pairs {
        if a == b {
            continue;
        }
        let next = ids.len();
        let ia = *ids.entry(a).or_insert(next);
        let next = ids.len();
        let ib = *ids.entry(b).or_insert(next);
        edges.push((ia, ib));
    }
    let mut by_slot: Vec<Option<T>> = alloc::vec![None; ids.len()];
    for (t, i) in ids {
        by_slot[i] = Some(t);
    }
    let nodes: Vec<T> = by_slot.into_iter().map(|t| t.expect("dense ids")).collect();
    let mut dsu = DisjointSets::new(nodes.len());
    for (a, b) in edges {
        dsu.union(a, b);
    }
    let mut out = BTreeSet::new();
    for comp in dsu.components() {
        for (i, &a) in comp.iter().enumerate() {
            for &b in &comp[i + 1..] {
                out.extend(IdPair::new(nodes[a].clone(), nodes[b].clone()));
            }
        }
    }
    out
}

/// Known matching pairs for one link predicate, transitively closed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    predicate: String,
    pairs: BTreeSet<IdPair<String>>,
}

impl GroundTruth {
    /// Closes `links` transitively.
    pub fn from_links<I, S>(predicate: impl Into<String>, links: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        Self {
            predicate: predicate.into(),
            pairs: transitive_closure(links.into_iter().map(|(a, b)| (a.into(), b.into()))),
        }
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn pairs(&self) -> &BTreeSet<IdPair<String>> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        IdPair::new(a, b).is_some_and(|p| {
            self.pairs.contains(&IdPair {
                first: String::from(p.first),
                second: String::from(p.second),
            })
        })
    }

    /// Every identifier taking part in some pair.
    pub fn ids(&self) -> BTreeSet<&str> {
        self.pairs
            .iter()
            .flat_map(|p| [p.first.as_str(), p.second.as_str()])
            .collect()
    }

    /// Keeps only pairs with both ends in `keep`.
    pub fn restricted(&self, keep: impl Fn(&str) -> bool) -> Self {
        Self {
            predicate: self.predicate.clone(),
            pairs: self
                .pairs
                .iter()
                .filter(|p| keep(&p.first) && keep(&p.second))
                .cloned()
                .collect(),
        }
    }

    /// Pairs relevant to `collection`: both ends present and, in clean-clean
    /// mode, from different sources. Sorted, as collection indices.
    pub fn indexed(&self, collection: &EntityCollection) -> Vec<IdPair<EntityIdx>> {
        let mut out: Vec<IdPair<EntityIdx>> = self
            .pairs
            .iter()
            .filter_map(|p| {
                let a = collection.index_of(&p.first)?;
                let b = collection.index_of(&p.second)?;
                if collection.is_comparable(a, b) {
                    IdPair::new(a, b)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Namespace {
    Token,
    ClusteredToken,
    Infix,
}

impl Namespace {
    pub fn as_str(self) -> &'static str {
        match self {
            Namespace::Token => "token",
            Namespace::ClusteredToken => "clustered-token",
            Namespace::Infix => "infix",
        }
    }
}

/// Block key; ordering is `(namespace, cluster, term)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockKey {
    namespace: Namespace,
    cluster: Option<u32>,
    term: String,
}

impl BlockKey {
    pub fn new(
        namespace: Namespace,
        cluster: Option<u32>,
        term: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let term = term.into();
        let key = Self {
            namespace,
            cluster,
            term,
        };
        let cluster_ok = (namespace == Namespace::ClusteredToken) == key.cluster.is_some();
        if key.term.is_empty() || !cluster_ok {
            return Err(ModelError::MalformedKey(alloc::format!("{key}")));
        }
        Ok(key)
    }

    pub fn token(term: impl Into<String>) -> Self {
        Self::new(Namespace::Token, None, term).expect("token key")
    }

    pub fn clustered(cluster: u32, term: impl Into<String>) -> Self {
        Self::new(Namespace::ClusteredToken, Some(cluster), term).expect("clustered key")
    }

    pub fn infix(term: impl Into<String>) -> Self {
        Self::new(Namespace::Infix, None, term).expect("infix key")
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn cluster(&self) -> Option<u32> {
        self.cluster
    }

    pub fn term(&self) -> &str {
        &self.term
    }
}

impl fmt::Display for BlockKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cluster {
            Some(c) => write!(f, "{}:C{}.{}", self.namespace.as_str(), c, self.term),
            None => write!(f, "{}:{}", self.namespace.as_str(), self.term),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    key: BlockKey,
    members: Vec<EntityIdx>,
    comparisons: u64,
}

impl Block {
    pub fn key(&self) -> &BlockKey {
        &self.key
    }

    /// Sorted, duplicate-free.
    pub fn members(&self) -> &[EntityIdx] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Within-block comparisons under the collection's mode.
    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    /// False for singleton blocks and, in clean-clean mode, for blocks whose
    /// members all come from one source.
    pub fn is_comparable(&self) -> bool {
        self.comparisons > 0
    }

    /// Mode-filtered within-block pairs, in member order.
    pub fn pairs<'c>(
        &'c self,
        universe: &'c EntityCollection,
    ) -> impl Iterator<Item = IdPair<EntityIdx>> + 'c {
        self.members.iter().enumerate().flat_map(move |(i, &a)| {
            self.members[i + 1..]
                .iter()
                .filter(move |&&b| universe.is_comparable(a, b))
                .map(move |&b| IdPair {
                    first: a,
                    second: b,
                })
        })
    }
}

/// Blocks over an entity collection plus the descriptions placed in none.
///
/// Block members together with `unblocked` always cover the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingCollection<'a> {
    universe: &'a EntityCollection,
    blocks: Vec<Block>,
    unblocked: Vec<EntityIdx>,
}

impl<'a> BlockingCollection<'a> {
    pub fn new<I, M>(universe: &'a EntityCollection, blocks: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (BlockKey, M)>,
        M: IntoIterator<Item = EntityIdx>,
    {
        let mut built: Vec<Block> = Vec::new();
        for (key, members) in blocks {
            let mut members: Vec<EntityIdx> = members.into_iter().collect();
            members.sort_unstable();
            members.dedup();
            if members.is_empty() {
                return Err(ModelError::EmptyBlock(alloc::format!("{key}")));
            }
            if let Some(m) = members.iter().find(|m| m.get() >= universe.len()) {
                return Err(ModelError::UnknownMember(alloc::format!("#{}", m.0)));
            }
            let comparisons = block_comparisons(universe, &members);
            built.push(Block {
                key,
                members,
                comparisons,
            });
        }
        built.sort_by(|a, b| a.key.cmp(&b.key));
        for w in built.windows(2) {
            if w[0].key == w[1].key {
                return Err(ModelError::DuplicateBlockKey(alloc::format!(
                    "{}", w[0].key
                )));
            }
        }
        let mut seen = alloc::vec![false; universe.len()];
        for b in &built {
            for m in &b.members {
                seen[m.get()] = true;
            }
        }
        let unblocked = seen
            .iter()
            .enumerate()
            .filter(|(_, &s)| !s)
            .map(|(i, _)| EntityIdx(i as u32))
            .collect();
        Ok(Self {
            universe,
            blocks: built,
            unblocked,
        })
    }

    /// Like [`Self::new`] with members given by identifier.
    pub fn from_ids<I, M, S>(universe: &'a EntityCollection, blocks: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (BlockKey, M)>,
        M: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut resolved = Vec::new();
        for (key, members) in blocks {
            let mut idx = Vec::new();
            for id in members {
                let id = id.as_ref();
                idx.push(
                    universe
                        .index_of(id)
                        .ok_or_else(|| ModelError::UnknownMember(String::from(id)))?,
                );
            }
            resolved.push((key, idx));
        }
        Self::new(universe, resolved)
    }

    pub fn universe(&self) -> &'a EntityCollection {
        self.universe
    }

    /// Sorted by key.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn unblocked(&self) -> &[EntityIdx] {
        &self.unblocked
    }

    pub fn get(&self, key: &BlockKey) -> Option<&Block> {
        self.blocks
            .binary_search_by(|b| b.key.cmp(key))
            .ok()
            .map(|i| &self.blocks[i])
    }

    /// Number of blocks that carry at least one comparison.
    pub fn comparable_block_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.is_comparable()).count()
    }

    /// Checks that blocks plus `unblocked` cover the universe exactly once
    /// per description in `unblocked` and that no block is empty.
    pub fn covers_universe(&self) -> bool {
        let mut seen = alloc::vec![false; self.universe.len()];
        for b in &self.blocks {
            if b.members.is_empty() {
                return false;
            }
            for m in &b.members {
                seen[m.get()] = true;
            }
        }
        for m in &self.unblocked {
            if seen[m.get()] {
                return false;
            }
            seen[m.get()] = true;
        }
        seen.iter().all(|&s| s)
    }
}

fn block_comparisons(universe: &EntityCollection, members: &[EntityIdx]) -> u64 {
    match universe.mode() {
        Mode::Dirty => {
            let k = members.len() as u64;
            k * k.saturating_sub(1) / 2
        }
        Mode::CleanClean => {
            let a = members
                .iter()
                .filter(|&&m| universe.source_of(m) == 0)
                .count() as u64;
            a * (members.len() as u64 - a)
        }
    }
}
