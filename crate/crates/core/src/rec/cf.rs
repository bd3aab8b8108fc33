//! User-based collaborative filtering.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::popularity::most_popular_items;
use super::{as_f64, lookup, rank, sparse_cosine, RecList, RecRequest, TagRecommender};
use crate::error::{Error, Result};
use crate::model::{Folksonomy, TagId, UserId};

pub const CF: &str = "cf";

/// Which user profile the similarity is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum UserProfile {
    /// Tag usage counts.
    #[default]
    TagFrequency,
    /// Binary resource bookmark indicators.
    BinaryResources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CfConfig {
    pub k_nn: usize,
    /// Profile used by the tag recommender; resource CF always uses
    /// binary resource vectors.
    pub profile: UserProfile,
}

impl Default for CfConfig {
    fn default() -> Self {
        Self { k_nn: 20, profile: UserProfile::TagFrequency }
    }
}

impl CfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_nn == 0 {
            return Err(Error::Config(format!("k_nn must be >= 1, got {}", self.k_nn)));
        }
        Ok(())
    }
}

pub(crate) fn profile(f: &Folksonomy, user: UserId, kind: UserProfile) -> Vec<(u32, f64)> {
    match kind {
        UserProfile::TagFrequency => as_f64(f.user_tag_counts(user)).into_iter().map(|(t, x)| (t.0, x)).collect(),
        UserProfile::BinaryResources => f.user_resources(user).iter().map(|r| (r.0, 1.0)).collect(),
    }
}

/// Cosine similarity between two users.
pub fn user_similarity(f: &Folksonomy, a: UserId, b: UserId, kind: UserProfile) -> f64 {
    sparse_cosine(&profile(f, a, kind), &profile(f, b, kind))
}

/// The `k_nn` most similar other users with positive similarity, most
/// similar first (ties by lower id).
pub fn neighbors(f: &Folksonomy, user: UserId, k_nn: usize, kind: UserProfile) -> Vec<(UserId, f64)> {
    let me = profile(f, user, kind);
    let mut sims: Vec<(UserId, f64)> = f
        .user_ids()
        .filter(|&v| v != user)
        .map(|v| (v, sparse_cosine(&me, &profile(f, v, kind))))
        .filter(|&(_, s)| s > 0.0)
        .collect();
    sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    sims.truncate(k_nn);
    sims
}

/// Tags weighted by neighbor similarity times the neighbor's normalized tag
/// frequency. Unknown users and empty neighborhoods fall back to MostPopular.
pub fn rec_cf_tags(f: &Folksonomy, req: &RecRequest, cfg: &CfConfig) -> RecList<TagId> {
    let fallback = || RecList { items: most_popular_items(f, req.k), algorithm: CF, request: req.clone() };
    let Some(user) = lookup(f, req).0 else {
        return fallback();
    };
    let hood = neighbors(f, user, cfg.k_nn, cfg.profile);
    if hood.is_empty() {
        return fallback();
    }
    let mut scores: BTreeMap<TagId, f64> = BTreeMap::new();
    for (v, sim) in hood {
        let counts = f.user_tag_counts(v);
        let total: u32 = counts.iter().map(|&(_, n)| n).sum();
        for &(t, n) in counts {
            *scores.entry(t).or_default() += sim * n as f64 / total as f64;
        }
    }
    RecList { items: rank(f, scores, req.k), algorithm: CF, request: req.clone() }
}

pub struct CfTags<'f> {
    pub model: &'f Folksonomy,
    pub config: CfConfig,
}

impl TagRecommender for CfTags<'_> {
    fn name(&self) -> &'static str {
        CF
    }
    fn recommend(&self, req: &RecRequest) -> RecList<TagId> {
        rec_cf_tags(self.model, req, &self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::f0;
    use crate::dataset::{DatasetSample, Post};
    use crate::rec::rec_most_popular;

    #[test]
    fn f0_tag_cosine() {
        let f = Folksonomy::build(&f0());
        let (u1, u2) = (f.user_id("u1").unwrap(), f.user_id("u2").unwrap());
        // 3 / (sqrt 6 * sqrt 3)
        let sim = user_similarity(&f, u1, u2, UserProfile::TagFrequency);
        assert!((sim - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        // binary resources: 1 / (sqrt 2 * sqrt 2)
        assert!((user_similarity(&f, u1, u2, UserProfile::BinaryResources) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_users_have_similarity_one() {
        let s =
            DatasetSample::from_posts("x", [Post::new("a", "r1", 1, ["x", "y"]), Post::new("b", "r2", 2, ["x", "y"])]);
        let f = Folksonomy::build(&s);
        let sim = user_similarity(&f, UserId(0), UserId(1), UserProfile::TagFrequency);
        assert!((sim - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lone_user_falls_back_to_most_popular() {
        let s = DatasetSample::from_posts("x", [Post::new("a", "r1", 1, ["x", "y"]), Post::new("a", "r2", 2, ["x"])]);
        let f = Folksonomy::build(&s);
        let req = RecRequest::new("a", "r1", 5, 3);
        assert_eq!(rec_cf_tags(&f, &req, &CfConfig::default()).items, rec_most_popular(&f, &req).items);
        let unknown = RecRequest::new("zz", "r1", 5, 3);
        assert_eq!(rec_cf_tags(&f, &unknown, &CfConfig::default()).items, rec_most_popular(&f, &unknown).items);
    }

    #[test]
    fn f0_scores_from_single_neighbor() {
        let f = Folksonomy::build(&f0());
        let list = rec_cf_tags(&f, &RecRequest::new("u1", "r1", 50, 5), &CfConfig::default());
        // u2 has {a, b, d} once each, times similarity 1/sqrt 2
        assert_eq!(list.names(&f), ["a", "b", "d"]);
        let expected = core::f64::consts::FRAC_1_SQRT_2 / 3.0;
        assert!(list.items.iter().all(|s| (s.score - expected).abs() < 1e-12));
    }

    #[test]
    fn zero_knn_rejected() {
        assert!(CfConfig { k_nn: 0, ..CfConfig::default() }.validate().is_err());
    }
}
