//! Resource recommenders: ranked resources the user has not bookmarked yet.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::model::{Folksonomy, ResourceId, UserId};
use crate::rec::cf::{neighbors, CfConfig, UserProfile};
use crate::rec::{rank, RecList, RecRequest, Scored};

pub mod cirtt;
pub mod sustain;

pub use cirtt::rec_cirtt;
pub use sustain::{rec_sustain_cf, sustain_train, SustainConfig, SustainUserModel};

pub const CF_RESOURCES: &str = "cf_r";

fn request(user: &str, k: usize, reference_time: i64) -> RecRequest {
    RecRequest::new(user, "", reference_time, k)
}

fn unseen_by_popularity(f: &Folksonomy, user: Option<UserId>, k: usize) -> Vec<Scored<ResourceId>> {
    let max = f.max_resource_frequency() as f64;
    if max == 0.0 {
        return Vec::new();
    }
    let candidates = f
        .resource_ids()
        .filter(|&r| user.is_none_or(|u| !f.has_bookmarked(u, r)))
        .map(|r| (r, f.resource_frequency(r) as f64 / max));
    rank(f, candidates, k)
}

pub(crate) fn cf_resource_items(f: &Folksonomy, user: &str, k: usize, cfg: &CfConfig) -> Vec<Scored<ResourceId>> {
    let Some(u) = f.user_id(user) else {
        return unseen_by_popularity(f, None, k);
    };
    let hood = neighbors(f, u, cfg.k_nn, UserProfile::BinaryResources);
    if hood.is_empty() {
        return unseen_by_popularity(f, Some(u), k);
    }
    let mut scores: BTreeMap<ResourceId, f64> = BTreeMap::new();
    for (v, sim) in hood {
        for &r in f.user_resources(v) {
            if !f.has_bookmarked(u, r) {
                *scores.entry(r).or_default() += sim;
            }
        }
    }
    rank(f, scores, k)
}

/// User-based CF over binary bookmark vectors. Users without positively
/// similar neighbors get the most popular resources they have not seen.
pub fn rec_cf_resources(f: &Folksonomy, user: &str, k: usize, cfg: &CfConfig) -> RecList<ResourceId> {
    RecList {
        items: cf_resource_items(f, user, k, cfg),
        algorithm: CF_RESOURCES,
        request: request(user, k, f.latest_timestamp().unwrap_or(0)),
    }
}

/// Candidates with CF scores divided by the best CF score.
pub(crate) fn normalized_candidates(f: &Folksonomy, user: &str, n: usize, cfg: &CfConfig) -> Vec<Scored<ResourceId>> {
    let mut items = cf_resource_items(f, user, n, cfg);
    if let Some(max) = items.first().map(|s| s.score) {
        for s in &mut items {
            s.score /= max;
        }
    }
    items
}

/// A resource recommender prepared over one model snapshot.
pub trait ResourceRecommender {
    fn name(&self) -> &'static str;
    fn recommend(&self, user: &str, k: usize, reference_time: i64) -> RecList<ResourceId>;
}

pub struct CfResources<'f> {
    pub model: &'f Folksonomy,
    pub config: CfConfig,
}

impl ResourceRecommender for CfResources<'_> {
    fn name(&self) -> &'static str {
        CF_RESOURCES
    }
    fn recommend(&self, user: &str, k: usize, reference_time: i64) -> RecList<ResourceId> {
        RecList {
            items: cf_resource_items(self.model, user, k, &self.config),
            algorithm: CF_RESOURCES,
            request: request(user, k, reference_time),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::f0;
    use crate::dataset::{DatasetSample, Post};

    #[test]
    fn f0_recommends_r3_to_u1() {
        let f = Folksonomy::build(&f0());
        let list = rec_cf_resources(&f, "u1", 5, &CfConfig::default());
        assert_eq!(list.names(&f), ["r3"]);
        assert!((list.items[0].score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn user_who_has_everything_gets_nothing() {
        let s = DatasetSample::from_posts(
            "x",
            [Post::new("a", "r1", 1, ["t"]), Post::new("a", "r2", 2, ["t"]), Post::new("b", "r1", 3, ["t"])],
        );
        let f = Folksonomy::build(&s);
        assert!(rec_cf_resources(&f, "a", 5, &CfConfig::default()).is_empty());
    }

    #[test]
    fn disjoint_users_get_popularity() {
        let s = DatasetSample::from_posts(
            "x",
            [
                Post::new("a", "r1", 1, ["t"]),
                Post::new("b", "r2", 2, ["t"]),
                Post::new("c", "r2", 3, ["t"]),
                Post::new("c", "r3", 4, ["t"]),
            ],
        );
        let f = Folksonomy::build(&s);
        let list = rec_cf_resources(&f, "a", 5, &CfConfig::default());
        assert_eq!(list.names(&f), ["r2", "r3"]);
        assert_eq!(list.items[0].score, 1.0);
        let unknown = rec_cf_resources(&f, "nobody", 5, &CfConfig::default());
        assert_eq!(unknown.names(&f), ["r2", "r1", "r3"]);
    }
}
