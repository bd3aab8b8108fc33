//! Offline evaluation: replay every test post against a recommender trained
//! on the training split and macro-average the metrics.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{DatasetSample, Post, SplitSample};
use crate::error::{Error, Result};
use crate::metrics::{accuracy_at, aild_at, aip_at, f1, Profiled};
use crate::model::{Folksonomy, ResourceId, TagId};
use crate::rec::bll::{Bll, BllConfig};
use crate::rec::cf::{CfConfig, CfTags};
use crate::rec::folkrank::{FolkRank, FolkRankConfig};
use crate::rec::popularity::{MostPopular, MostRecent};
use crate::rec::{RecRequest, TagRecommender};
use crate::resource::cirtt::{Cirtt, DEFAULT_CANDIDATES};
use crate::resource::sustain::{Sustain, SustainConfig};
use crate::resource::{CfResources, ResourceRecommender};

/// Registered algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Algorithm {
    MostPopular,
    MostRecent,
    Bll,
    BllAc,
    Cf,
    FolkRank,
    CfResources,
    Cirtt,
    Sustain,
}

/// What an algorithm predicts for a test post.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Tags,
    Resources,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::MostPopular,
        Algorithm::MostRecent,
        Algorithm::Bll,
        Algorithm::BllAc,
        Algorithm::Cf,
        Algorithm::FolkRank,
        Algorithm::CfResources,
        Algorithm::Cirtt,
        Algorithm::Sustain,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::MostPopular => "mp",
            Algorithm::MostRecent => "mr",
            Algorithm::Bll => "bll",
            Algorithm::BllAc => "bll_ac",
            Algorithm::Cf => "cf",
            Algorithm::FolkRank => "folkrank",
            Algorithm::CfResources => "cf_r",
            Algorithm::Cirtt => "cirtt",
            Algorithm::Sustain => "sustain",
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.key() == key)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{key}`")))
    }

    pub fn task(self) -> Task {
        match self {
            Algorithm::CfResources | Algorithm::Cirtt | Algorithm::Sustain => Task::Resources,
            _ => Task::Tags,
        }
    }
}

impl core::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.key())
    }
}

/// Hyperparameters of every algorithm; each one reads its own section.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlgorithmConfig {
    pub bll: BllConfig,
    pub cf: CfConfig,
    pub folkrank: FolkRankConfig,
    pub sustain: SustainConfig,
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<()> {
        self.bll.validate()?;
        self.cf.validate()?;
        self.folkrank.validate()?;
        self.sustain.validate()
    }

    /// Builds the tag recommender for `algorithm`, or `None` for resource
    /// algorithms.
    pub fn tag_recommender<'f>(
        &self,
        algorithm: Algorithm,
        model: &'f Folksonomy,
    ) -> Option<alloc::boxed::Box<dyn TagRecommender + 'f>> {
        use alloc::boxed::Box;
        Some(match algorithm {
            Algorithm::MostPopular => Box::new(MostPopular(model)),
            Algorithm::MostRecent => Box::new(MostRecent(model)),
            Algorithm::Bll => Box::new(Bll { model, config: self.bll, associative: false }),
            Algorithm::BllAc => Box::new(Bll { model, config: self.bll, associative: true }),
            Algorithm::Cf => Box::new(CfTags { model, config: self.cf }),
            Algorithm::FolkRank => Box::new(FolkRank::new(model, self.folkrank)),
            _ => return None,
        })
    }

    /// Builds the resource recommender for `algorithm`, or `None` for tag
    /// algorithms.
    pub fn resource_recommender<'f>(
        &self,
        algorithm: Algorithm,
        model: &'f Folksonomy,
    ) -> Option<alloc::boxed::Box<dyn ResourceRecommender + 'f>> {
        use alloc::boxed::Box;
        Some(match algorithm {
            Algorithm::CfResources => Box::new(CfResources { model, config: self.cf }),
            Algorithm::Cirtt => Box::new(Cirtt { model, cf: self.cf, bll: self.bll, candidate_n: DEFAULT_CANDIDATES }),
            Algorithm::Sustain => Box::new(Sustain { model, config: self.sustain, cf: self.cf }),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalConfig {
    pub cutoffs: Vec<usize>,
    pub primary_k: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { cutoffs: alloc::vec![1, 5, 10, 20], primary_k: 10 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoffs.is_empty() || self.cutoffs[0] == 0 {
            return Err(Error::Config("cutoffs must be non-empty and >= 1".into()));
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("cutoffs must be strictly increasing".into()));
        }
        if !self.cutoffs.contains(&self.primary_k) {
            return Err(Error::Config(format!("primary k {} is not among the cutoffs", self.primary_k)));
        }
        Ok(())
    }

    pub fn max_cutoff(&self) -> usize {
        self.cutoffs.last().copied().unwrap_or(0)
    }
}

/// Macro-averaged metrics at one cutoff.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CutoffMetrics {
    pub k: usize,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub mrr: f64,
    pub map: f64,
    pub ndcg: f64,
    pub aild: f64,
    pub aip: f64,
}

impl CutoffMetrics {
    /// Named values in report order.
    pub fn values(&self) -> [(&'static str, f64); 8] {
        [
            ("recall", self.recall),
            ("precision", self.precision),
            ("f1", self.f1),
            ("mrr", self.mrr),
            ("map", self.map),
            ("ndcg", self.ndcg),
            ("aild", self.aild),
            ("aip", self.aip),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub algorithm: String,
    pub metrics: Vec<CutoffMetrics>,
    pub primary_k: usize,
    pub n_test_requests: usize,
    pub build_ms: f64,
    pub runtime_ms_total: f64,
    pub runtime_ms_per_request: f64,
    /// Users + resources + tags + posts of the training model.
    pub entity_count: usize,
    /// Peak resident set size, where the platform exposes it.
    pub rss_peak_bytes: Option<u64>,
    /// Requests are evaluated sequentially by this crate.
    pub parallel: bool,
}

impl EvalReport {
    pub fn at(&self, k: usize) -> Option<&CutoffMetrics> {
        self.metrics.iter().find(|m| m.k == k)
    }

    pub fn primary(&self) -> Option<&CutoffMetrics> {
        self.at(self.primary_k)
    }
}

/// Monotonic time source in nanoseconds.
pub trait Clock {
    fn now_nanos(&mut self) -> u64;
}

/// A clock that never advances, for callers that do not measure time.
pub struct NoClock;

impl Clock for NoClock {
    fn now_nanos(&mut self) -> u64 {
        0
    }
}

impl<F: FnMut() -> u64> Clock for F {
    fn now_nanos(&mut self) -> u64 {
        self()
    }
}

#[derive(Default)]
struct Accumulator {
    sums: Vec<CutoffMetrics>,
}

impl Accumulator {
    fn new(cutoffs: &[usize]) -> Self {
        Self { sums: cutoffs.iter().map(|&k| CutoffMetrics { k, ..Default::default() }).collect() }
    }

    fn add<I: Profiled + Ord>(&mut self, f: &Folksonomy, list: &[I], truth: &BTreeSet<I>) {
        for s in &mut self.sums {
            let a = accuracy_at(list, truth, s.k);
            s.recall += a.recall;
            s.precision += a.precision;
            s.mrr += a.mrr;
            s.map += a.map;
            s.ndcg += a.ndcg;
            s.aild += aild_at(f, list, s.k);
            s.aip += aip_at(f, list, s.k);
        }
    }

    fn finish(mut self, n: usize) -> Vec<CutoffMetrics> {
        for s in &mut self.sums {
            if n > 0 {
                let n = n as f64;
                s.recall /= n;
                s.precision /= n;
                s.mrr /= n;
                s.map /= n;
                s.ndcg /= n;
                s.aild /= n;
                s.aip /= n;
            }
            s.f1 = f1(s.precision, s.recall);
        }
        self.sums
    }
}

/// Placeholder id for a truth tag missing from training; it counts towards
/// `|truth|` but can never be recommended.
fn unseen_tag(model: &Folksonomy, i: usize) -> TagId {
    TagId((model.num_tags() + i) as u32)
}

fn millis(nanos: u64) -> f64 {
    nanos as f64 / 1e6
}

/// Evaluates `algorithm` on `split`, timing model construction and
/// recommendation calls with `clock`.
pub fn evaluate_with_clock(
    split: &SplitSample,
    algorithm: Algorithm,
    config: &AlgorithmConfig,
    eval: &EvalConfig,
    clock: &mut dyn Clock,
) -> Result<EvalReport> {
    evaluate_posts_with_clock(&split.train, split.test.posts(), algorithm, config, eval, clock)
}

/// [`evaluate_with_clock`] over an arbitrary list of test posts.
pub fn evaluate_posts_with_clock(
    train: &DatasetSample,
    posts: &[Post],
    algorithm: Algorithm,
    config: &AlgorithmConfig,
    eval: &EvalConfig,
    clock: &mut dyn Clock,
) -> Result<EvalReport> {
    eval.validate()?;
    config.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidArgument("training split is empty".into()));
    }
    let k = eval.max_cutoff();
    let t0 = clock.now_nanos();
    let model = Folksonomy::build(train);
    let tag_rec = config.tag_recommender(algorithm, &model);
    let res_rec = config.resource_recommender(algorithm, &model);
    let build_ns = clock.now_nanos().saturating_sub(t0);

    let mut acc = Accumulator::new(&eval.cutoffs);
    let mut rec_ns = 0u64;
    for post in posts {
        match (&tag_rec, &res_rec) {
            (Some(rec), _) => {
                let req = RecRequest::new(post.user.as_str(), post.resource.as_str(), post.timestamp, k);
                let start = clock.now_nanos();
                let list = rec.recommend(&req);
                rec_ns += clock.now_nanos().saturating_sub(start);
                let truth = post
                    .tags
                    .iter()
                    .enumerate()
                    .map(|(i, t)| model.tag_id(t).unwrap_or(unseen_tag(&model, i)))
                    .collect();
                acc.add(&model, &list.ids(), &truth);
            }
            (None, Some(rec)) => {
                let start = clock.now_nanos();
                let list = rec.recommend(&post.user, k, post.timestamp);
                rec_ns += clock.now_nanos().saturating_sub(start);
                let truth = [model.resource_id(&post.resource).unwrap_or(ResourceId(u32::MAX))].into();
                acc.add(&model, &list.ids(), &truth);
            }
            (None, None) => unreachable!("every algorithm has a task"),
        }
    }
    let n = posts.len();
    let mut report = EvalReport {
        algorithm: String::from(algorithm.key()),
        metrics: acc.finish(n),
        primary_k: eval.primary_k,
        n_test_requests: n,
        build_ms: millis(build_ns),
        runtime_ms_total: millis(rec_ns),
        runtime_ms_per_request: if n == 0 { 0.0 } else { millis(rec_ns) / n as f64 },
        entity_count: model.entity_count(),
        rss_peak_bytes: None,
        parallel: false,
    };
    report.metrics.sort_by_key(|m| m.k);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::f0;
    use crate::dataset::{temporal_split, DatasetSample, Post};

    #[test]
    fn keys_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::from_key(a.key()).unwrap(), a);
        }
        assert!(Algorithm::from_key("nosuch").is_err());
    }

    #[test]
    fn cutoff_validation() {
        assert!(EvalConfig { cutoffs: alloc::vec![5, 5], primary_k: 5 }.validate().is_err());
        assert!(EvalConfig { cutoffs: alloc::vec![0, 5], primary_k: 5 }.validate().is_err());
        assert!(EvalConfig { cutoffs: alloc::vec![1, 5], primary_k: 10 }.validate().is_err());
        assert!(EvalConfig::default().validate().is_ok());
    }

    #[test]
    fn f0_most_recent() {
        let split = temporal_split(&f0());
        let r =
            evaluate_with_clock(&split, Algorithm::MostRecent, &Default::default(), &Default::default(), &mut NoClock)
                .unwrap();
        assert_eq!(r.n_test_requests, 2);
        // u1 history {a,b}, truth {a,c}; u2 history {a}, truth {b,d}
        let at1 = r.at(1).unwrap();
        assert_eq!(at1.precision, 0.5);
        assert_eq!(at1.recall, 0.25);
        let at5 = r.at(5).unwrap();
        assert!((at5.precision - 0.1).abs() < 1e-12);
        assert!((at5.f1 - f1(at5.precision, at5.recall)).abs() < 1e-15);
    }

    #[test]
    fn empty_test_gives_zero_report() {
        let s = DatasetSample::from_posts("x", [Post::new("u", "r", 1, ["t"])]);
        let split = temporal_split(&s);
        let r = evaluate_with_clock(&split, Algorithm::Bll, &Default::default(), &Default::default(), &mut NoClock)
            .unwrap();
        assert_eq!(r.n_test_requests, 0);
        assert!(r.metrics.iter().all(|m| m.values().iter().all(|(_, v)| *v == 0.0)));
    }

    #[test]
    fn empty_train_is_an_error() {
        let split = temporal_split(&DatasetSample::empty("e"));
        assert!(evaluate_with_clock(&split, Algorithm::Bll, &Default::default(), &Default::default(), &mut NoClock)
            .is_err());
    }

    #[test]
    fn resource_task_runs() {
        let split = temporal_split(&f0());
        for alg in [Algorithm::CfResources, Algorithm::Cirtt, Algorithm::Sustain] {
            let r = evaluate_with_clock(&split, alg, &Default::default(), &Default::default(), &mut NoClock).unwrap();
            assert_eq!(r.n_test_requests, 2);
            assert!(r.metrics.iter().all(|m| (0.0..=1.0).contains(&m.recall)));
        }
    }

    #[test]
    fn clock_is_used() {
        let split = temporal_split(&f0());
        let mut t = 0u64;
        let mut tick = move || {
            t += 1_000_000;
            t
        };
        let r =
            evaluate_with_clock(&split, Algorithm::MostPopular, &Default::default(), &Default::default(), &mut tick)
                .unwrap();
        assert_eq!(r.build_ms, 1.0);
        assert_eq!(r.runtime_ms_total, 2.0);
        assert_eq!(r.runtime_ms_per_request, 1.0);
    }
}
