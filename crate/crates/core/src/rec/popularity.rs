//! Frequency- and time-based baselines.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{lookup, rank, RecList, RecRequest, Scored, TagRecommender};
use crate::model::{Folksonomy, TagId};

pub const MOST_POPULAR: &str = "mp";
pub const MOST_RECENT: &str = "mr";

/// Globally most frequent tags, scored by frequency over the maximum.
pub fn rec_most_popular(f: &Folksonomy, req: &RecRequest) -> RecList<TagId> {
    RecList { items: most_popular_items(f, req.k), algorithm: MOST_POPULAR, request: req.clone() }
}

pub(crate) fn most_popular_items(f: &Folksonomy, k: usize) -> Vec<Scored<TagId>> {
    let max = f.max_tag_frequency() as f64;
    if max == 0.0 {
        return Vec::new();
    }
    rank(f, f.tag_ids().map(|t| (t, f.tag_frequency(t) as f64 / max)), k)
}

/// The user's own tags, most recently used first; ties go to the tag the user
/// used more often, then to the lexicographically smaller one. Scores are
/// `1 / rank`.
pub fn rec_most_recent(f: &Folksonomy, req: &RecRequest) -> RecList<TagId> {
    let Some(user) = lookup(f, req).0 else {
        return RecList::empty(MOST_RECENT, req);
    };
    let mut usage: BTreeMap<TagId, (i64, u32)> = BTreeMap::new();
    for &(tag, ts) in f.user_timeline(user) {
        let entry = usage.entry(tag).or_insert((ts, 0));
        entry.0 = entry.0.max(ts);
        entry.1 += 1;
    }
    let mut tags: Vec<(TagId, i64, u32)> = usage.into_iter().map(|(t, (ts, n))| (t, ts, n)).collect();
    tags.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));
    let items = tags
        .into_iter()
        .take(req.k)
        .enumerate()
        .map(|(i, (item, _, _))| Scored { item, score: 1.0 / (i + 1) as f64 })
        .collect();
    RecList { items, algorithm: MOST_RECENT, request: req.clone() }
}

pub struct MostPopular<'f>(pub &'f Folksonomy);

impl TagRecommender for MostPopular<'_> {
    fn name(&self) -> &'static str {
        MOST_POPULAR
    }
    fn recommend(&self, req: &RecRequest) -> RecList<TagId> {
        rec_most_popular(self.0, req)
    }
}

pub struct MostRecent<'f>(pub &'f Folksonomy);

impl TagRecommender for MostRecent<'_> {
    fn name(&self) -> &'static str {
        MOST_RECENT
    }
    fn recommend(&self, req: &RecRequest) -> RecList<TagId> {
        rec_most_recent(self.0, req)
    }
}
