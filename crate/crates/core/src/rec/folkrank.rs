//! FolkRank: differential personalized weight spreading over the tripartite
//! user/resource/tag graph.
//!
//! Nodes are laid out as users, then resources, then tags. Edge weights count
//! co-occurrences in posts: one per post for user-resource, one per tag
//! assignment for user-tag and resource-tag. The spreading step is
//! `w <- lambda * S w + (1 - lambda) * p` where `S` is the column-normalized
//! adjacency matrix and `p` the preference vector.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::popularity::most_popular_items;
use super::{lookup, rank_signed, RecList, RecRequest, TagRecommender};
use crate::error::{Error, Result};
use crate::model::{Folksonomy, ResourceId, TagId, UserId};

pub const FOLKRANK: &str = "folkrank";

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FolkRankConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// L1 change between iterations below which spreading stops.
    pub tol: f64,
    /// Extra preference on the requesting user; `None` means `|U|`.
    pub pref_boost_user: Option<f64>,
    /// Extra preference on the target resource; `None` means `|R|`.
    pub pref_boost_resource: Option<f64>,
}

impl Default for FolkRankConfig {
    fn default() -> Self {
        Self { lambda: 0.7, max_iters: 100, tol: 1e-6, pref_boost_user: None, pref_boost_resource: None }
    }
}

impl FolkRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::Config(format!("FolkRank lambda must be in (0,1), got {}", self.lambda)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("FolkRank tol must be > 0".into()));
        }
        let bad = |b: Option<f64>| b.is_some_and(|x| !(x >= 0.0 && x.is_finite()));
        if bad(self.pref_boost_user) || bad(self.pref_boost_resource) {
            return Err(Error::Config("FolkRank preference boosts must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Symmetric weighted adjacency in compressed sparse row form.
#[derive(Debug, Clone)]
pub struct FolkGraph {
    num_users: usize,
    num_resources: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    /// column sums of the adjacency (= weighted degree)
    degree: Vec<f64>,
}

/// Result of one spreading run.
#[derive(Debug, Clone)]
pub struct Spread {
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the final iteration.
    pub residual: f64,
}

impl FolkGraph {
    pub fn build(f: &Folksonomy) -> Self {
        let (nu, nr) = (f.num_users(), f.num_resources());
        let n = nu + nr + f.num_tags();
        let mut adj: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); n];
        let mut link = |a: usize, b: usize| {
            *adj[a].entry(b as u32).or_default() += 1.0;
            *adj[b].entry(a as u32).or_default() += 1.0;
        };
        for post in f.posts() {
            let u = post.user.index();
            let r = nu + post.resource.index();
            link(u, r);
            for t in &post.tags {
                let t = nu + nr + t.index();
                link(u, t);
                link(r, t);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for row in adj {
            for (j, w) in row {
                targets.push(j);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        let mut g = Self { num_users: nu, num_resources: nr, offsets, targets, weights, degree: Vec::new() };
        g.recompute_degree();
        g
    }

    fn recompute_degree(&mut self) {
        self.degree =
            (0..self.node_count()).map(|i| self.weights[self.offsets[i]..self.offsets[i + 1]].iter().sum()).collect();
    }

    /// The same graph with every edge weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut g = self.clone();
        for w in &mut g.weights {
            *w *= factor;
        }
        g.recompute_degree();
        g
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn user_node(&self, u: UserId) -> usize {
        u.index()
    }
    pub fn resource_node(&self, r: ResourceId) -> usize {
        self.num_users + r.index()
    }
    pub fn tag_node(&self, t: TagId) -> usize {
        self.num_users + self.num_resources + t.index()
    }
    pub fn tag_range(&self) -> core::ops::Range<usize> {
        self.num_users + self.num_resources..self.node_count()
    }

    /// Preference vector with mass 1 per node plus the given boosts,
    /// normalized to sum to 1.
    pub fn preference(&self, boosts: &[(usize, f64)]) -> Vec<f64> {
        let n = self.node_count();
        let mut p = vec![1.0; n];
        for &(node, b) in boosts {
            p[node] += b;
        }
        let total: f64 = p.iter().sum();
        for x in &mut p {
            *x /= total;
        }
        p
    }

    /// `S w`, accumulated in a fixed order.
    fn propagate(&self, w: &[f64], out: &mut [f64]) {
        for (i, x) in out.iter_mut().enumerate() {
            *x = (self.offsets[i]..self.offsets[i + 1])
                .map(|e| {
                    let j = self.targets[e] as usize;
                    self.weights[e] * w[j] / self.degree[j]
                })
                .sum();
        }
    }

    /// Iterates the spreading step from `w = preference` until the L1 change
    /// drops below `tol` or `max_iters` is reached.
    pub fn spread(&self, preference: &[f64], cfg: &FolkRankConfig) -> Spread {
        let mut w = preference.to_vec();
        let mut next = vec![0.0; w.len()];
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        if w.is_empty() {
            return Spread { weights: w, iterations, residual: 0.0 };
        }
        while iterations < cfg.max_iters {
            self.propagate(&w, &mut next);
            residual = 0.0;
            for (i, x) in next.iter_mut().enumerate() {
                *x = cfg.lambda * *x + (1.0 - cfg.lambda) * preference[i];
                residual += libm::fabs(*x - w[i]);
            }
            core::mem::swap(&mut w, &mut next);
            iterations += 1;
            if residual < cfg.tol {
                break;
            }
        }
        Spread { weights: w, iterations, residual }
    }
}

/// Graph plus the unpersonalized baseline, reusable across requests.
pub struct FolkRank<'f> {
    model: &'f Folksonomy,
    graph: FolkGraph,
    baseline: Spread,
    config: FolkRankConfig,
}

impl<'f> FolkRank<'f> {
    pub fn new(model: &'f Folksonomy, config: FolkRankConfig) -> Self {
        let graph = FolkGraph::build(model);
        let baseline = graph.spread(&graph.preference(&[]), &config);
        Self { model, graph, baseline, config }
    }

    pub fn graph(&self) -> &FolkGraph {
        &self.graph
    }

    pub fn baseline(&self) -> &Spread {
        &self.baseline
    }

    /// Personalized spreading for the request's user and resource.
    pub fn personalized(&self, user: Option<UserId>, resource: Option<ResourceId>) -> Spread {
        let mut boosts = Vec::new();
        if let Some(u) = user {
            let b = self.config.pref_boost_user.unwrap_or(self.model.num_users() as f64);
            boosts.push((self.graph.user_node(u), b));
        }
        if let Some(r) = resource {
            let b = self.config.pref_boost_resource.unwrap_or(self.model.num_resources() as f64);
            boosts.push((self.graph.resource_node(r), b));
        }
        self.graph.spread(&self.graph.preference(&boosts), &self.config)
    }

    /// Personalized minus baseline weight for every tag, indexed by tag id.
    /// Differences can be negative: the boosted nodes keep part of the mass.
    pub fn tag_differences(&self, user: Option<UserId>, resource: Option<ResourceId>) -> Vec<f64> {
        let personal = self.personalized(user, resource);
        self.graph.tag_range().map(|i| personal.weights[i] - self.baseline.weights[i]).collect()
    }
}

impl TagRecommender for FolkRank<'_> {
    fn name(&self) -> &'static str {
        FOLKRANK
    }

    fn recommend(&self, req: &RecRequest) -> RecList<TagId> {
        let (user, resource) = lookup(self.model, req);
        if user.is_none() && resource.is_none() {
            return RecList { items: most_popular_items(self.model, req.k), algorithm: FOLKRANK, request: req.clone() };
        }
        let diffs = self.tag_differences(user, resource);
        let items = rank_signed(self.model, diffs.into_iter().enumerate().map(|(i, d)| (TagId(i as u32), d)), req.k);
        RecList { items, algorithm: FOLKRANK, request: req.clone() }
    }
}

pub fn rec_folkrank(f: &Folksonomy, req: &RecRequest, cfg: &FolkRankConfig) -> RecList<TagId> {
    FolkRank::new(f, *cfg).recommend(req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::f0;
    use crate::rec::rec_most_popular;

    #[test]
    fn f0_graph_shape() {
        let f = Folksonomy::build(&f0());
        let g = FolkGraph::build(&f);
        assert_eq!(g.node_count(), 9);
        // u1 links r1, r2 and tags a(2), b, c
        let u1 = g.user_node(f.user_id("u1").unwrap());
        assert_eq!(g.degree[u1], 2.0 + 4.0);
    }

    #[test]
    fn zero_boost_difference_vanishes() {
        let f = Folksonomy::build(&f0());
        let cfg = FolkRankConfig { pref_boost_user: Some(0.0), pref_boost_resource: Some(0.0), ..Default::default() };
        let fr = FolkRank::new(&f, cfg);
        let diffs = fr.tag_differences(f.user_id("u1"), f.resource_id("r1"));
        assert!(diffs.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn boosting_user_raises_mass_on_their_tags() {
        let f = Folksonomy::build(&f0());
        let fr = FolkRank::new(&f, FolkRankConfig { pref_boost_resource: Some(0.0), ..Default::default() });
        // normalization lets the boosted user absorb mass, so compare the
        // share of tag mass held by u1's tags
        let share = |w: &[f64]| {
            let tags = &w[fr.graph().tag_range()];
            let own: f64 = ["a", "b", "c"].iter().map(|t| tags[f.tag_id(t).unwrap().index()]).sum();
            own / tags.iter().sum::<f64>()
        };
        let personal = fr.personalized(f.user_id("u1"), None);
        assert!(share(&personal.weights) > share(&fr.baseline().weights));
    }

    #[test]
    fn small_lambda_puts_users_own_tags_first() {
        let f = Folksonomy::build(&f0());
        let cfg = FolkRankConfig { lambda: 0.1, ..Default::default() };
        let list = rec_folkrank(&f, &RecRequest::new("u1", "nowhere", 50, 4), &cfg);
        assert_eq!(list.names(&f), ["a", "c", "b", "d"]);
    }

    #[test]
    fn spread_sums_to_one_and_converges() {
        let f = Folksonomy::build(&f0());
        let fr = FolkRank::new(&f, FolkRankConfig::default());
        let s = fr.personalized(f.user_id("u2"), f.resource_id("r1"));
        assert!(s.residual < 1e-6);
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unknown_user_and_resource_fall_back() {
        let f = Folksonomy::build(&f0());
        let req = RecRequest::new("x", "y", 50, 3);
        assert_eq!(rec_folkrank(&f, &req, &FolkRankConfig::default()).items, rec_most_popular(&f, &req).items);
    }

    #[test]
    fn lambda_bounds() {
        assert!(FolkRankConfig { lambda: 1.0, ..Default::default() }.validate().is_err());
        assert!(FolkRankConfig { lambda: 0.0, ..Default::default() }.validate().is_err());
        assert!(FolkRankConfig { tol: 0.0, ..Default::default() }.validate().is_err());
    }
}
