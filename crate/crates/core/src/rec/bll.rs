//! Base-level learning (BLL) tag recommenders.
//!
//! The activation of a tag the user applied at times `t_1..t_n` before the
//! reference time `t_ref` is
//!
//! ```text
//! A(tag) = ln( sum_j max(t_ref - t_j, eps)^(-d) )
//! ```
//!
//! Activations are turned into a distribution over the user's tags with a
//! softmax and blended linearly with a resource-side component: the
//! resource's own tag distribution (`bll`) or tags associated with it through
//! co-occurrence (`bll_ac`).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{lookup, rank, RecList, RecRequest, TagRecommender};
use crate::error::{Error, Result};
use crate::model::{Folksonomy, ResourceId, TagId, UserId};

pub const BLL: &str = "bll";
pub const BLL_AC: &str = "bll_ac";

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BllConfig {
    /// Decay exponent.
    pub d: f64,
    /// Weight of the user's BLL distribution; `1 - beta` goes to the resource side.
    pub beta: f64,
    /// Ages are clamped to at least this many seconds.
    pub epsilon_seconds: i64,
}

impl Default for BllConfig {
    fn default() -> Self {
        Self { d: 0.5, beta: 0.5, epsilon_seconds: 1 }
    }
}

impl BllConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::Config(format!("BLL decay d must be > 0, got {}", self.d)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("BLL beta must be in [0,1], got {}", self.beta)));
        }
        if self.epsilon_seconds < 1 {
            return Err(Error::Config("BLL epsilon_seconds must be >= 1".into()));
        }
        Ok(())
    }
}

/// Activation of a single tag from its usage times.
///
/// Uses log-sum-exp so that large ages or decays do not underflow. Returns
/// `None` when no usage precedes `reference_time`.
pub fn activation(usages: impl IntoIterator<Item = i64>, reference_time: i64, cfg: &BllConfig) -> Option<f64> {
    let logs: Vec<f64> = usages
        .into_iter()
        .filter(|&t| t < reference_time)
        .map(|t| -cfg.d * libm::log((reference_time - t).max(cfg.epsilon_seconds) as f64))
        .collect();
    log_sum_exp(&logs)
}

fn log_sum_exp(xs: &[f64]) -> Option<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() {
        return None;
    }
    Some(max + libm::log(xs.iter().map(|x| libm::exp(x - max)).sum::<f64>()))
}

/// Activations of every tag the user applied before `reference_time`,
/// sorted by tag id.
pub fn bll_activations(f: &Folksonomy, user: UserId, reference_time: i64, cfg: &BllConfig) -> Vec<(TagId, f64)> {
    let mut by_tag: BTreeMap<TagId, Vec<i64>> = BTreeMap::new();
    for &(tag, ts) in f.user_timeline(user) {
        by_tag.entry(tag).or_default().push(ts);
    }
    by_tag.into_iter().filter_map(|(tag, times)| activation(times, reference_time, cfg).map(|a| (tag, a))).collect()
}

/// Softmax of the user's activations. Sums to 1 when non-empty.
pub fn bll_weights(f: &Folksonomy, user: UserId, reference_time: i64, cfg: &BllConfig) -> Vec<(TagId, f64)> {
    softmax(bll_activations(f, user, reference_time, cfg))
}

fn softmax(mut acts: Vec<(TagId, f64)>) -> Vec<(TagId, f64)> {
    let max = acts.iter().map(|&(_, a)| a).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (_, a) in acts.iter_mut() {
        *a = libm::exp(*a - max);
        total += *a;
    }
    for (_, a) in acts.iter_mut() {
        *a /= total;
    }
    acts
}

/// The resource's tag counts normalized to sum to 1.
pub(crate) fn resource_distribution(f: &Folksonomy, resource: ResourceId) -> Vec<(TagId, f64)> {
    let row = f.resource_tags(resource);
    let total: u32 = row.iter().map(|&(_, n)| n).sum();
    row.iter().map(|&(t, n)| (t, n as f64 / total as f64)).collect()
}

/// Tags associated with the resource's tags through co-occurrence: each
/// resource tag spreads its co-occurrence row, normalized by the row sum; the
/// result is normalized to sum to 1 (empty when there is no associative mass).
pub fn associative_distribution(f: &Folksonomy, resource: ResourceId) -> Vec<(TagId, f64)> {
    let mut mass: BTreeMap<TagId, f64> = BTreeMap::new();
    for &(sigma, _) in f.resource_tags(resource) {
        let row = f.cooccurrence_row(sigma);
        let row_total: u32 = row.iter().map(|&(_, n)| n).sum();
        if row_total == 0 {
            continue;
        }
        for &(tau, n) in row {
            *mass.entry(tau).or_default() += n as f64 / row_total as f64;
        }
    }
    let total: f64 = mass.values().sum();
    if total == 0.0 {
        return Vec::new();
    }
    mass.into_iter().map(|(t, m)| (t, m / total)).collect()
}

fn blend(user_part: Vec<(TagId, f64)>, other: Vec<(TagId, f64)>, beta: f64) -> BTreeMap<TagId, f64> {
    let mut scores: BTreeMap<TagId, f64> = BTreeMap::new();
    for (t, p) in user_part {
        *scores.entry(t).or_default() += beta * p;
    }
    for (t, p) in other {
        *scores.entry(t).or_default() += (1.0 - beta) * p;
    }
    scores
}

fn user_weights(f: &Folksonomy, user: Option<UserId>, req: &RecRequest, cfg: &BllConfig) -> Vec<(TagId, f64)> {
    user.map(|u| bll_weights(f, u, req.reference_time, cfg)).unwrap_or_default()
}

/// BLL blended with the resource's tag distribution.
pub fn rec_bll(f: &Folksonomy, req: &RecRequest, cfg: &BllConfig) -> RecList<TagId> {
    let (user, resource) = lookup(f, req);
    let resource_part = resource.map(|r| resource_distribution(f, r)).unwrap_or_default();
    let scores = blend(user_weights(f, user, req, cfg), resource_part, cfg.beta);
    RecList { items: rank(f, scores, req.k), algorithm: BLL, request: req.clone() }
}

/// BLL blended with the associative (co-occurrence) component.
pub fn rec_bll_ac(f: &Folksonomy, req: &RecRequest, cfg: &BllConfig) -> RecList<TagId> {
    let (user, resource) = lookup(f, req);
    let assoc = resource.map(|r| associative_distribution(f, r)).unwrap_or_default();
    let scores = blend(user_weights(f, user, req, cfg), assoc, cfg.beta);
    RecList { items: rank(f, scores, req.k), algorithm: BLL_AC, request: req.clone() }
}

pub struct Bll<'f> {
    pub model: &'f Folksonomy,
    pub config: BllConfig,
    pub associative: bool,
}

impl TagRecommender for Bll<'_> {
    fn name(&self) -> &'static str {
        if self.associative {
            BLL_AC
        } else {
            BLL
        }
    }
    fn recommend(&self, req: &RecRequest) -> RecList<TagId> {
        if self.associative {
            rec_bll_ac(self.model, req, &self.config)
        } else {
            rec_bll(self.model, req, &self.config)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::f0;
    use crate::dataset::{DatasetSample, Post};
    use crate::rec::rec_most_popular;

    fn beta(b: f64) -> BllConfig {
        BllConfig { beta: b, ..BllConfig::default() }
    }

    #[test]
    fn f0_activations() {
        let f = Folksonomy::build(&f0());
        let u1 = f.user_id("u1").unwrap();
        let acts = bll_activations(&f, u1, 30, &beta(1.0));
        let get = |n: &str| acts.iter().find(|(t, _)| *t == f.tag_id(n).unwrap()).unwrap().1;
        // a at 10 and 20, b at 10, c at 20:
        // ln(20^-0.5 + 10^-0.5), ln(20^-0.5), ln(10^-0.5)
        assert!((get("a") - -0.6165).abs() < 1e-3);
        assert!((get("b") - -1.4979).abs() < 1e-3);
        assert!((get("c") - -1.1513).abs() < 1e-3);
        let list = rec_bll(&f, &RecRequest::new("u1", "unseen", 30, 3), &beta(1.0));
        assert_eq!(list.names(&f), ["a", "c", "b"]);
    }

    #[test]
    fn weights_sum_to_one() {
        let f = Folksonomy::build(&f0());
        let w = bll_weights(&f, f.user_id("u2").unwrap(), 100, &BllConfig::default());
        assert!((w.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn usages_at_or_after_reference_are_ignored() {
        let cfg = BllConfig::default();
        assert_eq!(activation([10, 20], 10, &cfg), None);
        assert_eq!(activation([9, 10, 20], 10, &cfg), Some(0.0));
    }

    #[test]
    fn single_fresh_use_has_zero_activation() {
        let s = DatasetSample::from_posts("x", [Post::new("u", "r", 99, ["t"])]);
        let f = Folksonomy::build(&s);
        let u = f.user_id("u").unwrap();
        assert_eq!(bll_activations(&f, u, 100, &beta(1.0))[0].1, 0.0);
        let list = rec_bll(&f, &RecRequest::new("u", "other", 100, 1), &beta(1.0));
        assert_eq!(list.items[0].score, 1.0);
    }

    #[test]
    fn beta_zero_ranks_resource_tags() {
        let s = DatasetSample::from_posts(
            "x",
            [
                Post::new("u1", "r", 1, ["x", "y"]),
                Post::new("u2", "r", 2, ["y"]),
                Post::new("u3", "q", 3, ["z", "x", "w"]),
                Post::new("u3", "q2", 4, ["w"]),
            ],
        );
        let f = Folksonomy::build(&s);
        let list = rec_bll(&f, &RecRequest::new("u3", "r", 10, 5), &beta(0.0));
        assert_eq!(list.names(&f), ["y", "x"]);
        let mp_restricted: Vec<&str> = rec_most_popular(&f, &RecRequest::new("u3", "r", 10, 10))
            .names(&f)
            .into_iter()
            .filter(|t| *t == "x" || *t == "y")
            .collect();
        // x and y both have global frequency 2, so the resource counts decide
        assert_eq!(mp_restricted, ["x", "y"]);
    }

    #[test]
    fn ac_without_resource_tags_matches_pure_bll_ranking() {
        let f = Folksonomy::build(&f0());
        let req = RecRequest::new("u2", "nowhere", 50, 5);
        let ac = rec_bll_ac(&f, &req, &BllConfig::default());
        let pure = rec_bll(&f, &req, &beta(1.0));
        assert_eq!(ac.ids(), pure.ids());
        let ac1 = rec_bll_ac(&f, &req, &beta(1.0));
        assert_eq!(ac1.items, pure.items);
    }

    #[test]
    fn ac_beta_one_equals_bll_beta_one() {
        let f = Folksonomy::build(&f0());
        let req = RecRequest::new("u1", "r3", 50, 5);
        assert_eq!(rec_bll_ac(&f, &req, &beta(1.0)).items, rec_bll(&f, &req, &beta(1.0)).items);
    }

    #[test]
    fn associative_mass_for_b_comes_from_a() {
        let f = Folksonomy::build(&f0());
        let t = |n: &str| f.tag_id(n).unwrap();
        assert_eq!(f.cooccurrence(t("b"), t("a")), 1);
        assert_eq!(f.cooccurrence(t("b"), t("c")), 0);
        // r2 carries {a, c}; rows: a -> {b:1, c:1}, c -> {a:1}
        let dist = associative_distribution(&f, f.resource_id("r2").unwrap());
        let named: Vec<(&str, f64)> = dist.iter().map(|&(x, p)| (f.tag_name(x), p)).collect();
        assert_eq!(named.len(), 3);
        assert!((named[0].1 - 0.5).abs() < 1e-12 && named[0].0 == "a");
        assert!((named[1].1 - 0.25).abs() < 1e-12 && named[1].0 == "b");
        assert!((named[2].1 - 0.25).abs() < 1e-12 && named[2].0 == "c");
    }

    #[test]
    fn invalid_config() {
        assert!(BllConfig { d: 0.0, ..Default::default() }.validate().is_err());
        assert!(BllConfig { beta: 1.5, ..Default::default() }.validate().is_err());
        assert!(BllConfig { epsilon_seconds: 0, ..Default::default() }.validate().is_err());
        assert!(BllConfig::default().validate().is_ok());
    }
}
