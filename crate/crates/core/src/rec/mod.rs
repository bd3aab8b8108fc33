//! Tag recommenders.
//!
//! Every recommender is a pure function of an immutable [`Folksonomy`] and a
//! [`RecRequest`]. The `Prepared*` structs exist so the evaluation loop can
//! reuse per-model precomputation across requests.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::model::{Folksonomy, ResourceId, TagId, UserId};

pub mod bll;
pub mod cf;
pub mod folkrank;
pub mod popularity;

pub use bll::{rec_bll, rec_bll_ac, BllConfig};
pub use cf::{rec_cf_tags, CfConfig};
pub use folkrank::{rec_folkrank, FolkRankConfig};
pub use popularity::{rec_most_popular, rec_most_recent};

/// A tag query: which tags would `user` assign to `resource` at
/// `reference_time`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecRequest {
    pub user: String,
    /// Empty for resource recommendation requests.
    pub resource: String,
    pub reference_time: i64,
    pub k: usize,
}

impl RecRequest {
    pub fn new(user: impl Into<String>, resource: impl Into<String>, reference_time: i64, k: usize) -> Self {
        Self { user: user.into(), resource: resource.into(), reference_time, k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored<I> {
    pub item: I,
    pub score: f64,
}

/// Ranked answer to a request.
#[derive(Debug, Clone, PartialEq)]
pub struct RecList<I> {
    pub items: Vec<Scored<I>>,
    pub algorithm: &'static str,
    pub request: RecRequest,
}

impl<I: Item> RecList<I> {
    pub fn empty(algorithm: &'static str, request: &RecRequest) -> Self {
        Self { items: Vec::new(), algorithm, request: request.clone() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<I> {
        self.items.iter().map(|s| s.item).collect()
    }

    pub fn names<'f>(&self, f: &'f Folksonomy) -> Vec<&'f str> {
        self.items.iter().map(|s| s.item.name(f)).collect()
    }

    pub fn named<'f>(&self, f: &'f Folksonomy) -> Vec<(&'f str, f64)> {
        self.items.iter().map(|s| (s.item.name(f), s.score)).collect()
    }
}

/// Something a recommender can rank: a tag or a resource.
pub trait Item: Copy + Ord {
    fn name(self, f: &Folksonomy) -> &str;
    /// Training frequency, the first tie-breaker after score.
    fn frequency(self, f: &Folksonomy) -> u32;
}

impl Item for TagId {
    fn name(self, f: &Folksonomy) -> &str {
        f.tag_name(self)
    }
    fn frequency(self, f: &Folksonomy) -> u32 {
        f.tag_frequency(self)
    }
}

impl Item for ResourceId {
    fn name(self, f: &Folksonomy) -> &str {
        f.resource_name(self)
    }
    fn frequency(self, f: &Folksonomy) -> u32 {
        f.resource_frequency(self)
    }
}

/// Canonical ordering: score descending, then training frequency descending,
/// then id (which is lexicographic name order).
pub(crate) fn compare_ranked<I: Item>(f: &Folksonomy, a: &Scored<I>, b: &Scored<I>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.item.frequency(f).cmp(&a.item.frequency(f)))
        .then_with(|| a.item.cmp(&b.item))
}

/// Keeps positive scores, sorts canonically and truncates to `k`. Input items
/// must be distinct.
pub(crate) fn rank<I: Item>(f: &Folksonomy, scores: impl IntoIterator<Item = (I, f64)>, k: usize) -> Vec<Scored<I>> {
    let mut items: Vec<Scored<I>> = scores
        .into_iter()
        .filter(|(_, s)| *s > 0.0 && s.is_finite())
        .map(|(item, score)| Scored { item, score })
        .collect();
    items.sort_by(|a, b| compare_ranked(f, a, b));
    items.truncate(k);
    items
}

/// Like [`rank`] but keeps every finite score, including zero and negative
/// ones.
pub(crate) fn rank_signed<I: Item>(
    f: &Folksonomy,
    scores: impl IntoIterator<Item = (I, f64)>,
    k: usize,
) -> Vec<Scored<I>> {
    let mut items: Vec<Scored<I>> =
        scores.into_iter().filter(|(_, s)| s.is_finite()).map(|(item, score)| Scored { item, score }).collect();
    items.sort_by(|a, b| compare_ranked(f, a, b));
    items.truncate(k);
    items
}

/// Cosine similarity of two sparse vectors sorted by key.
pub(crate) fn sparse_cosine<K: Ord>(a: &[(K, f64)], b: &[(K, f64)]) -> f64 {
    let norm = |v: &[(K, f64)]| libm::sqrt(v.iter().map(|(_, x)| x * x).sum::<f64>());
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    sparse_dot(a, b) / (na * nb)
}

pub(crate) fn sparse_dot<K: Ord>(a: &[(K, f64)], b: &[(K, f64)]) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    dot
}

pub(crate) fn as_f64<K: Copy>(row: &[(K, u32)]) -> Vec<(K, f64)> {
    row.iter().map(|&(k, n)| (k, n as f64)).collect()
}

/// A tag recommender prepared over one model snapshot.
pub trait TagRecommender {
    fn name(&self) -> &'static str;
    fn recommend(&self, req: &RecRequest) -> RecList<TagId>;
}

pub(crate) fn lookup(f: &Folksonomy, req: &RecRequest) -> (Option<UserId>, Option<ResourceId>) {
    (f.user_id(&req.user), f.resource_id(&req.resource))
}
