//! Iterative blocking: blocks are processed one at a time and every merge is
//! propagated to all other blocks, until a full pass merges nothing.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{encode_key, trigrams, BlockingError};
use crate::model::{
    AttributeValue, BlockingCollection, EntityCollection, EntityIdx, GroundTruth, Mode,
};

/// Decides whether two (possibly merged) entities match.
#[derive(Debug, Clone, Copy)]
pub enum MatchOracle<'g> {
    /// Match when any pair of member ids is a ground-truth pair.
    GroundTruth(&'g GroundTruth),
    /// Match when the trigram Jaccard similarity of all values, sorted and
    /// joined, reaches the threshold.
    ValueSimilarity { threshold: f64 },
}

impl MatchOracle<'_> {
    pub fn validate(&self) -> Result<(), BlockingError> {
        match *self {
            MatchOracle::ValueSimilarity { threshold } if !(0.0..=1.0).contains(&threshold) => {
                Err(BlockingError::InvalidThreshold(threshold))
            }
            _ => Ok(()),
        }
    }

    pub fn matches(&self, a: &MergedEntity, b: &MergedEntity) -> bool {
        match *self {
            MatchOracle::GroundTruth(gt) => a
                .member_ids
                .iter()
                .any(|x| b.member_ids.iter().any(|y| gt.contains(x, y))),
            MatchOracle::ValueSimilarity { threshold } => {
                trigrams(&a.profile()).jaccard(&trigrams(&b.profile())) >= threshold
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BlockOrder {
    /// Larger blocks first, ties by key bytes.
    #[default]
    SizeDescending,
    /// Key bytes only.
    Key,
}

/// An entity of the resolved partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedEntity {
    /// `m:` followed by the sorted member ids joined by `+`, or the original
    /// id for an unmerged description.
    pub id: String,
    /// Sorted.
    pub member_ids: Vec<String>,
    pub members: Vec<EntityIdx>,
    /// Union of the members' pairs, repeats kept.
    pub pairs: Vec<AttributeValue>,
}

impl MergedEntity {
    fn single(universe: &EntityCollection, idx: EntityIdx) -> Self {
        let d = universe.get(idx);
        Self {
            id: String::from(d.id()),
            member_ids: alloc::vec![String::from(d.id())],
            members: alloc::vec![idx],
            pairs: d.pairs().to_vec(),
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        let mut member_ids = a.member_ids;
        member_ids.extend(b.member_ids);
        member_ids.sort();
        let mut members = a.members;
        members.extend(b.members);
        members.sort_unstable();
        let mut pairs = a.pairs;
        pairs.extend(b.pairs);
        let mut id = String::from("m:");
        id.push_str(&member_ids.join("+"));
        Self {
            id,
            member_ids,
            members,
            pairs,
        }
    }

    fn profile(&self) -> String {
        let mut values: Vec<&str> = self.pairs.iter().map(|p| p.value.text.as_str()).collect();
        values.sort_unstable();
        values.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterativeOutcome {
    /// Ordered by smallest member.
    pub entities: Vec<MergedEntity>,
    /// Oracle calls made.
    pub comparisons: u64,
    pub passes: usize,
    pub merges: usize,
}

struct State<'u> {
    universe: &'u EntityCollection,
    /// Live entity slot of every description.
    slot_of: Vec<usize>,
    /// Slots are never reused, so a slot names one merged entity for good.
    slots: Vec<Option<MergedEntity>>,
    sources: Vec<BTreeSet<usize>>,
    compared: BTreeSet<(usize, usize)>,
    comparisons: u64,
    merges: usize,
}

impl State<'_> {
    fn live(&self, members: &[EntityIdx]) -> Vec<usize> {
        let mut slots: Vec<usize> = members.iter().map(|m| self.slot_of[m.get()]).collect();
        slots.sort_unstable();
        slots.dedup();
        slots
    }

    fn comparable(&self, a: usize, b: usize) -> bool {
        if self.universe.mode() == Mode::Dirty {
            return true;
        }
        let (sa, sb) = (&self.sources[a], &self.sources[b]);
        !(sa.len() == 1 && sa == sb)
    }

    fn merge(&mut self, a: usize, b: usize) {
        let ea = self.slots[a].take().expect("live slot");
        let eb = self.slots[b].take().expect("live slot");
        let merged = MergedEntity::merge(ea, eb);
        let slot = self.slots.len();
        for m in &merged.members {
            self.slot_of[m.get()] = slot;
        }
        let sources = &self.sources[a] | &self.sources[b];
        self.sources.push(sources);
        self.slots.push(Some(merged));
        self.merges += 1;
    }

    /// Scans one block, restarting after every merge. Returns whether any
    /// merge happened.
    fn process(&mut self, members: &[EntityIdx], oracle: &MatchOracle) -> bool {
        let mut merged_any = false;
        'scan: loop {
            let live = self.live(members);
            for (i, &a) in live.iter().enumerate() {
                for &b in &live[i + 1..] {
                    if !self.comparable(a, b) || !self.compared.insert((a, b)) {
                        continue;
                    }
                    self.comparisons += 1;
                    let hit = {
                        let ea = self.slots[a].as_ref().expect("live slot");
                        let eb = self.slots[b].as_ref().expect("live slot");
                        oracle.matches(ea, eb)
                    };
                    if hit {
                        self.merge(a, b);
                        merged_any = true;
                        continue 'scan;
                    }
                }
            }
            return merged_any;
        }
    }
}

/// Resolves the collection's descriptions by iterative blocking.
///
/// Singleton blocks are skipped. Within a block the current entities are
/// compared pairwise, never repeating a comparison between the same two
/// entities. Passes over all blocks repeat until one merges nothing.
pub fn iterative_blocking(
    blocks: &BlockingCollection,
    oracle: &MatchOracle,
    order: BlockOrder,
) -> Result<IterativeOutcome, BlockingError> {
    oracle.validate()?;
    let universe = blocks.universe();
    let mut schedule: Vec<(&[EntityIdx], Vec<u8>)> = blocks
        .blocks()
        .iter()
        .filter(|b| b.len() > 1)
        .map(|b| (b.members(), encode_key(b.key())))
        .collect();
    match order {
        BlockOrder::SizeDescending => {
            schedule.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.1.cmp(&b.1)))
        }
        BlockOrder::Key => schedule.sort_by(|a, b| a.1.cmp(&b.1)),
    }

    let mut state = State {
        universe,
        slot_of: (0..universe.len()).collect(),
        slots: universe
            .indices()
            .map(|i| Some(MergedEntity::single(universe, i)))
            .collect(),
        sources: universe
            .indices()
            .map(|i| BTreeSet::from([universe.source_of(i)]))
            .collect(),
        compared: BTreeSet::new(),
        comparisons: 0,
        merges: 0,
    };

    let mut passes = 0;
    loop {
        passes += 1;
        let mut merged = false;
        for (members, _) in &schedule {
            merged |= state.process(members, oracle);
        }
        if !merged {
            break;
        }
    }

    let mut entities: Vec<MergedEntity> = state.slots.into_iter().flatten().collect();
    entities.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
    Ok(IterativeOutcome {
        entities,
        comparisons: state.comparisons,
        passes,
        merges: state.merges,
    })
}
