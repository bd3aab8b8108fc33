//! Per-list ranking metrics with binary relevance.
//!
//! All functions take the ranked list and the relevant set for one request;
//! averaging over requests happens in [`crate::eval`].

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::model::{Folksonomy, ResourceId, TagId};
use crate::rec::{as_f64, sparse_cosine};

/// Accuracy and ranking metrics of one list at one cutoff.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accuracy {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub mrr: f64,
    pub map: f64,
    pub ndcg: f64,
}

pub fn hits_at<I: Ord>(list: &[I], truth: &BTreeSet<I>, k: usize) -> usize {
    list.iter().take(k).filter(|i| truth.contains(i)).count()
}

pub fn recall_at<I: Ord>(list: &[I], truth: &BTreeSet<I>, k: usize) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    hits_at(list, truth, k) as f64 / truth.len() as f64
}

/// Hits over the cutoff `k`, also when the list is shorter than `k`.
pub fn precision_at<I: Ord>(list: &[I], truth: &BTreeSet<I>, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    hits_at(list, truth, k) as f64 / k as f64
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn mrr_at<I: Ord>(list: &[I], truth: &BTreeSet<I>, k: usize) -> f64 {
    list.iter().take(k).position(|i| truth.contains(i)).map_or(0.0, |p| 1.0 / (p + 1) as f64)
}

/// Average precision normalized by `min(|truth|, k)`.
pub fn map_at<I: Ord>(list: &[I], truth: &BTreeSet<I>, k: usize) -> f64 {
    let denom = truth.len().min(k);
    if denom == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, item) in list.iter().take(k).enumerate() {
        if truth.contains(item) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / denom as f64
}

fn discount(position: usize) -> f64 {
    // position is 1-based
    1.0 / libm::log2((position + 1) as f64)
}

pub fn ndcg_at<I: Ord>(list: &[I], truth: &BTreeSet<I>, k: usize) -> f64 {
    let ideal_hits = truth.len().min(k);
    if ideal_hits == 0 {
        return 0.0;
    }
    let dcg: f64 =
        list.iter().take(k).enumerate().filter(|(_, i)| truth.contains(i)).map(|(p, _)| discount(p + 1)).sum();
    let idcg: f64 = (1..=ideal_hits).map(discount).sum();
    dcg / idcg
}

pub fn accuracy_at<I: Ord>(list: &[I], truth: &BTreeSet<I>, k: usize) -> Accuracy {
    let recall = recall_at(list, truth, k);
    let precision = precision_at(list, truth, k);
    Accuracy {
        recall,
        precision,
        f1: f1(precision, recall),
        mrr: mrr_at(list, truth, k),
        map: map_at(list, truth, k),
        ndcg: ndcg_at(list, truth, k),
    }
}

/// Items with a similarity profile and a training frequency, as needed by the
/// diversity and novelty metrics.
pub trait Profiled: Copy {
    /// Tags: co-occurrence row. Resources: tag-frequency row.
    fn profile(self, f: &Folksonomy) -> Vec<(TagId, f64)>;
    fn popularity(self, f: &Folksonomy) -> u32;
    fn max_popularity(f: &Folksonomy) -> u32;
}

impl Profiled for TagId {
    fn profile(self, f: &Folksonomy) -> Vec<(TagId, f64)> {
        as_f64(f.cooccurrence_row(self))
    }
    fn popularity(self, f: &Folksonomy) -> u32 {
        f.tag_frequency(self)
    }
    fn max_popularity(f: &Folksonomy) -> u32 {
        f.max_tag_frequency()
    }
}

impl Profiled for ResourceId {
    fn profile(self, f: &Folksonomy) -> Vec<(TagId, f64)> {
        as_f64(f.resource_tags(self))
    }
    fn popularity(self, f: &Folksonomy) -> u32 {
        f.resource_frequency(self)
    }
    fn max_popularity(f: &Folksonomy) -> u32 {
        f.max_resource_frequency()
    }
}

/// Mean pairwise `1 - cosine` over the first `k` items; 0 for fewer than two.
pub fn aild_at<I: Profiled>(f: &Folksonomy, list: &[I], k: usize) -> f64 {
    let profiles: Vec<Vec<(TagId, f64)>> = list.iter().take(k).map(|i| i.profile(f)).collect();
    let n = profiles.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += 1.0 - sparse_cosine(&profiles[i], &profiles[j]);
        }
    }
    total / (n * (n - 1) / 2) as f64
}

/// Mean of `1 - freq / max_freq` over the first `k` items; 0 for an empty list.
pub fn aip_at<I: Profiled>(f: &Folksonomy, list: &[I], k: usize) -> f64 {
    let max = I::max_popularity(f) as f64;
    let top: Vec<I> = list.iter().take(k).copied().collect();
    if top.is_empty() || max == 0.0 {
        return 0.0;
    }
    top.iter().map(|i| 1.0 - i.popularity(f) as f64 / max).sum::<f64>() / top.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::f0;

    fn set(items: &[char]) -> BTreeSet<char> {
        items.iter().copied().collect()
    }

    #[test]
    fn two_item_list() {
        let m = accuracy_at(&['a', 'b'], &set(&['a', 'c']), 2);
        assert_eq!((m.recall, m.precision, m.mrr), (0.5, 0.5, 1.0));
    }

    #[test]
    fn ndcg_and_map_by_hand() {
        let list = ['a', 'b', 'c'];
        let truth = set(&['b', 'c']);
        // (1/log2 3 + 1/log2 4) / (1 + 1/log2 3)
        assert!((ndcg_at(&list, &truth, 3) - 0.693426).abs() < 1e-6);
        // (1/2 + 2/3) / 2
        assert!((map_at(&list, &truth, 3) - 0.583333).abs() < 1e-6);
    }

    #[test]
    fn perfect_list() {
        let m = accuracy_at(&['x', 'y'], &set(&['x', 'y']), 2);
        assert_eq!(m, Accuracy { recall: 1.0, precision: 1.0, f1: 1.0, mrr: 1.0, map: 1.0, ndcg: 1.0 });
    }

    #[test]
    fn short_list_is_penalized_in_precision() {
        assert_eq!(precision_at(&['a'], &set(&['a']), 4), 0.25);
        assert_eq!(accuracy_at::<char>(&[], &set(&['a']), 3), Accuracy::default());
    }

    #[test]
    fn aip_of_most_popular_is_zero() {
        let f = Folksonomy::build(&f0());
        let a = f.tag_id("a").unwrap();
        assert_eq!(aip_at(&f, &[a], 5), 0.0);
        let d = f.tag_id("d").unwrap();
        assert!((aip_at(&f, &[d], 5) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn aild_f0_tags() {
        let f = Folksonomy::build(&f0());
        let t = |n| f.tag_id(n).unwrap();
        // rows: a {b:1,c:1}, d {b:1}: cosine 1/sqrt 2
        let expected = 1.0 - core::f64::consts::FRAC_1_SQRT_2;
        assert!((aild_at(&f, &[t("a"), t("d")], 5) - expected).abs() < 1e-12);
        assert_eq!(aild_at(&f, &[t("a")], 5), 0.0);
        assert_eq!(aild_at(&f, &[t("a"), t("d")], 5), aild_at(&f, &[t("d"), t("a")], 5));
    }
}
