//! SUSTAIN user model and the SUSTAIN+CF resource recommender.
//!
//! Resources are binary vectors over the most frequent training tags. A user
//! learns clusters incrementally from their bookmarks in chronological order;
//! each feature carries an attention tuning `lambda_f`. Cluster activation for
//! an item `x` is
//!
//! ```text
//! H_j = sum_f lambda_f^r * exp(-lambda_f * |x_f - c_jf|) / sum_f lambda_f^r
//! ```
//!
//! An item whose best activation falls below `tau` recruits a new cluster at
//! the item; otherwise the winning cluster moves towards it and attention is
//! retuned.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{normalized_candidates, request, ResourceRecommender};
use crate::error::{Error, Result};
use crate::model::{Folksonomy, ResourceId, TagId};
use crate::rec::cf::CfConfig;
use crate::rec::{rank, RecList};

pub const SUSTAIN: &str = "sustain";

/// Attention tunings never drop below this.
pub const ATTENTION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SustainConfig {
    /// Attentional focus exponent.
    pub r: f64,
    /// Cluster competition exponent.
    pub beta_c: f64,
    /// Learning rate.
    pub eta: f64,
    /// Recruitment threshold on the winner's activation.
    pub tau: f64,
    pub n_features: usize,
    /// Number of CF candidates re-ranked.
    pub candidate_n: usize,
}

impl Default for SustainConfig {
    fn default() -> Self {
        Self { r: 2.0, beta_c: 1.0, eta: 0.1, tau: 0.5, n_features: 20, candidate_n: 50 }
    }
}

impl SustainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0 && self.beta_c >= 0.0) {
            return Err(Error::Config("SUSTAIN r and beta_c must be >= 0".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!("SUSTAIN eta must be in (0,1], got {}", self.eta)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("SUSTAIN tau must be in (0,1), got {}", self.tau)));
        }
        if self.n_features == 0 || self.candidate_n == 0 {
            return Err(Error::Config("SUSTAIN n_features and candidate_n must be >= 1".into()));
        }
        Ok(())
    }
}

/// What happened when one item was presented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Presentation {
    Recruited { cluster: usize },
    Updated { cluster: usize, activation: f64, competition: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SustainUserModel {
    pub attention: Vec<f64>,
    pub clusters: Vec<Vec<f64>>,
    /// Feature tags, in feature order.
    pub features: Vec<TagId>,
    /// Number of items presented so far.
    pub cursor: usize,
}

impl SustainUserModel {
    /// Untrained model with unit attention.
    pub fn new(features: Vec<TagId>) -> Self {
        let n = features.len();
        Self { attention: vec![1.0; n], clusters: Vec::new(), features, cursor: 0 }
    }

    /// Activation of each cluster for item `x`.
    pub fn activations(&self, x: &[f64], cfg: &SustainConfig) -> Vec<f64> {
        let focus: Vec<f64> = self.attention.iter().map(|&l| libm::pow(l, cfg.r)).collect();
        let total: f64 = focus.iter().sum();
        self.clusters
            .iter()
            .map(|c| {
                if total == 0.0 {
                    return 1.0;
                }
                let num: f64 =
                    (0..x.len()).map(|f| focus[f] * libm::exp(-self.attention[f] * libm::fabs(x[f] - c[f]))).sum();
                num / total
            })
            .collect()
    }

    /// Best cluster activation for `x`, or `None` without clusters.
    pub fn best_activation(&self, x: &[f64], cfg: &SustainConfig) -> Option<f64> {
        self.activations(x, cfg).into_iter().reduce(f64::max)
    }

    /// Presents one item and learns from it.
    pub fn present(&mut self, x: &[f64], cfg: &SustainConfig) -> Presentation {
        self.cursor += 1;
        let acts = self.activations(x, cfg);
        // argmax, lowest index on ties
        let winner = acts.iter().enumerate().fold(None::<(usize, f64)>, |best, (j, &h)| match best {
            Some((_, bh)) if bh >= h => best,
            _ => Some((j, h)),
        });
        let Some((win, h_win)) = winner.filter(|&(_, h)| h >= cfg.tau) else {
            self.clusters.push(x.to_vec());
            return Presentation::Recruited { cluster: self.clusters.len() - 1 };
        };
        let denom: f64 = acts.iter().map(|&h| libm::pow(h, cfg.beta_c)).sum();
        let competition = if denom > 0.0 { libm::pow(h_win, cfg.beta_c) / denom } else { 0.0 };

        let center = &mut self.clusters[win];
        // distances are taken before the winner moves
        let dist: Vec<f64> = (0..x.len()).map(|f| libm::fabs(x[f] - center[f])).collect();
        for f in 0..x.len() {
            center[f] += cfg.eta * (x[f] - center[f]);
        }
        for (f, lambda) in self.attention.iter_mut().enumerate() {
            let ld = *lambda * dist[f];
            *lambda = (*lambda + cfg.eta * libm::exp(-ld) * (1.0 - ld)).max(ATTENTION_FLOOR);
        }
        Presentation::Updated { cluster: win, activation: h_win, competition }
    }
}

/// The `n` globally most frequent tags (ties by name).
pub fn feature_tags(f: &Folksonomy, n: usize) -> Vec<TagId> {
    let mut tags: Vec<TagId> = f.tag_ids().collect();
    tags.sort_by(|a, b| f.tag_frequency(*b).cmp(&f.tag_frequency(*a)).then(a.cmp(b)));
    tags.truncate(n);
    tags
}

/// Binary feature vector of a resource.
pub fn encode_resource(f: &Folksonomy, resource: ResourceId, features: &[TagId]) -> Vec<f64> {
    let row = f.resource_tags(resource);
    features.iter().map(|t| if row.binary_search_by(|(x, _)| x.cmp(t)).is_ok() { 1.0 } else { 0.0 }).collect()
}

/// Trains a user's model on their bookmarks in chronological order. Unknown
/// users get an untrained model.
pub fn sustain_train(f: &Folksonomy, user: &str, cfg: &SustainConfig) -> SustainUserModel {
    let features = feature_tags(f, cfg.n_features);
    let mut model = SustainUserModel::new(features);
    if let Some(u) = f.user_id(user) {
        for &p in f.user_posts(u) {
            let x = encode_resource(f, f.posts()[p].resource, &model.features);
            model.present(&x, cfg);
        }
    }
    model
}

/// CF candidates re-scored by `cf_norm(i) * H_best(i)`.
pub fn rec_sustain_cf(
    f: &Folksonomy,
    user: &str,
    k: usize,
    cfg: &SustainConfig,
    cfg_cf: &CfConfig,
) -> RecList<ResourceId> {
    let reference_time = f.latest_timestamp().unwrap_or(0);
    Sustain { model: f, config: *cfg, cf: *cfg_cf }.recommend(user, k, reference_time)
}

pub struct Sustain<'f> {
    pub model: &'f Folksonomy,
    pub config: SustainConfig,
    pub cf: CfConfig,
}

impl ResourceRecommender for Sustain<'_> {
    fn name(&self) -> &'static str {
        SUSTAIN
    }

    fn recommend(&self, user: &str, k: usize, reference_time: i64) -> RecList<ResourceId> {
        let f = self.model;
        let mut candidates = normalized_candidates(f, user, self.config.candidate_n, &self.cf);
        let learner = sustain_train(f, user, &self.config);
        let items = if learner.clusters.is_empty() {
            candidates.truncate(k);
            candidates
        } else {
            let rescored = candidates.into_iter().map(|c| {
                let x = encode_resource(f, c.item, &learner.features);
                (c.item, c.score * learner.best_activation(&x, &self.config).unwrap_or(0.0))
            });
            rank(f, rescored, k)
        };
        RecList { items, algorithm: SUSTAIN, request: request(user, k, reference_time) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DatasetSample, Post};
    use crate::resource::rec_cf_resources;

    fn model(n: usize) -> SustainUserModel {
        SustainUserModel::new((0..n as u32).map(TagId).collect())
    }

    #[test]
    fn first_item_recruits_at_item() {
        let mut m = model(3);
        let cfg = SustainConfig::default();
        assert_eq!(m.present(&[1.0, 0.0, 1.0], &cfg), Presentation::Recruited { cluster: 0 });
        assert_eq!(m.clusters, [vec![1.0, 0.0, 1.0]]);
    }

    #[test]
    fn identical_item_does_not_recruit() {
        let cfg = SustainConfig { tau: 0.99, ..Default::default() };
        let mut m = model(2);
        m.present(&[1.0, 0.0], &cfg);
        match m.present(&[1.0, 0.0], &cfg) {
            Presentation::Updated { activation, .. } => assert_eq!(activation, 1.0),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(m.clusters.len(), 1);
        // zero distance: lambda += eta * e^0 * (1 - 0)
        assert!(m.attention.iter().all(|&l| (l - 1.1).abs() < 1e-12));
    }

    #[test]
    fn opposite_items_recruit_two_clusters() {
        let cfg = SustainConfig { tau: 0.99, ..Default::default() };
        let mut m = model(2);
        m.present(&[1.0, 1.0], &cfg);
        // H = e^-1 ~ 0.368 < 0.99
        let h = m.best_activation(&[0.0, 0.0], &cfg).unwrap();
        assert!((h - libm::exp(-1.0)).abs() < 1e-12);
        assert_eq!(m.present(&[0.0, 0.0], &cfg), Presentation::Recruited { cluster: 1 });
        assert_eq!(m.clusters.len(), 2);
    }

    #[test]
    fn attention_shrinks_on_mismatch() {
        let cfg = SustainConfig { eta: 1.0, tau: 0.01, ..Default::default() };
        let mut m = model(1);
        m.attention = vec![3.0];
        m.clusters.push(vec![0.0]);
        m.present(&[1.0], &cfg);
        // 3 + e^-3 * (1 - 3) < 3 but stays positive
        assert!((m.attention[0] - (3.0 - 2.0 * libm::exp(-3.0))).abs() < 1e-12);
        assert!(m.attention[0] >= ATTENTION_FLOOR);
    }

    #[test]
    fn no_history_matches_cf() {
        let s = DatasetSample::from_posts(
            "x",
            [Post::new("a", "r1", 1, ["t"]), Post::new("b", "r1", 2, ["t"]), Post::new("b", "r2", 3, ["u"])],
        );
        let f = Folksonomy::build(&s);
        let trained = sustain_train(&f, "ghost", &SustainConfig::default());
        assert!(trained.clusters.is_empty());
        let a = rec_sustain_cf(&f, "ghost", 5, &SustainConfig::default(), &CfConfig::default());
        let b = rec_cf_resources(&f, "ghost", 5, &CfConfig::default());
        assert_eq!(a.ids(), b.ids());
    }

    #[test]
    fn matching_candidate_rises() {
        // `me` bookmarked two rust resources. Neighbor `n1` offers "zz" (rust),
        // `n2` offers "aa" (cooking). CF ties, lexicographic puts aa first.
        let s = DatasetSample::from_posts(
            "x",
            [
                Post::new("me", "r0", 1, ["rust"]),
                Post::new("me", "r1", 2, ["rust"]),
                Post::new("n1", "r0", 3, ["web"]),
                Post::new("n2", "r0", 4, ["web"]),
                Post::new("n1", "zz", 5, ["rust"]),
                Post::new("n2", "aa", 6, ["cooking"]),
            ],
        );
        let f = Folksonomy::build(&s);
        let cf = rec_cf_resources(&f, "me", 5, &CfConfig::default());
        assert_eq!(cf.names(&f), ["aa", "zz"]);
        let list = rec_sustain_cf(&f, "me", 5, &SustainConfig::default(), &CfConfig::default());
        assert_eq!(list.names(&f), ["zz", "aa"]);
        let short = rec_sustain_cf(&f, "me", 10, &SustainConfig::default(), &CfConfig::default());
        assert_eq!(short.len(), 2);
    }
}
