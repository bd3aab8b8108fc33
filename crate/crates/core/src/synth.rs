//! Deterministic synthetic folksonomies for tests and benchmarks.
//!
//! Tags and resources follow Zipf-like popularity. Each tag of a post is, with
//! probability `recency_bias`, a reuse of one of the user's own recent tag
//! assignments (more recent ones are likelier), and otherwise a draw from the
//! global popularity distribution.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetSample, Post};
use crate::error::{Error, Result};

/// Size of the recent-assignment window a user reuses tags from.
const RECENT_WINDOW: usize = 20;
const MAX_TAGS_PER_POST: usize = 3;
const START_TIME: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub users: usize,
    pub resources: usize,
    pub tags: usize,
    pub posts: usize,
    pub recency_bias: f64,
    pub seed: u64,
}

fn zipf(n: usize, exponent: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|i| 1.0 / libm::pow((i + 1) as f64, exponent))).expect("n >= 1")
}

pub fn generate_synthetic(
    users: usize,
    resources: usize,
    tags: usize,
    posts: usize,
    recency_bias: f64,
    seed: u64,
) -> Result<DatasetSample> {
    generate(&SyntheticSpec { users, resources, tags, posts, recency_bias, seed })
}

pub fn generate(spec: &SyntheticSpec) -> Result<DatasetSample> {
    let SyntheticSpec { users, resources, tags, posts, recency_bias, seed } = *spec;
    if users == 0 || resources == 0 {
        return Err(Error::InvalidArgument("users and resources must be >= 1".into()));
    }
    if tags < 2 {
        return Err(Error::InvalidArgument("tags must be >= 2".into()));
    }
    if posts < users {
        return Err(Error::InvalidArgument(format!("posts ({posts}) must be >= users ({users})")));
    }
    if posts > users.saturating_mul(resources) {
        return Err(Error::InvalidArgument("posts exceed users * resources".into()));
    }
    if !(0.0..=1.0).contains(&recency_bias) {
        return Err(Error::InvalidArgument("recency_bias must be in [0,1]".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag_pop = zipf(tags, 1.0);
    let resource_pop = zipf(resources, 0.8);
    let activity = zipf(users, 0.5);

    // every user posts at least once; extra posts go to more active users
    let mut owners: Vec<usize> = (0..users).collect();
    let mut load = alloc::vec![1usize; users];
    while owners.len() < posts {
        let u = activity.sample(&mut rng);
        if load[u] < resources {
            load[u] += 1;
            owners.push(u);
        }
    }
    owners.shuffle(&mut rng);

    let user_names: Vec<String> = (0..users).map(|u| format!("u{u:04}")).collect();
    let mut bookmarked: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); users];
    let mut history: Vec<Vec<usize>> = alloc::vec![Vec::new(); users];
    let mut out = Vec::with_capacity(posts);
    let mut time = START_TIME;

    for u in owners {
        time += 1 + rng.gen_range(0..3600);
        let resource = pick_resource(&mut rng, &resource_pop, &bookmarked[u], resources);
        bookmarked[u].insert(resource);

        let n_tags = rng.gen_range(1..=MAX_TAGS_PER_POST);
        let mut chosen = BTreeSet::new();
        for _ in 0..n_tags {
            let recent = &history[u];
            let tag = if !recent.is_empty() && rng.gen::<f64>() < recency_bias {
                let window = &recent[recent.len().saturating_sub(RECENT_WINDOW)..];
                // weight 1 / (age rank + 1), most recent assignment first
                let by_age = WeightedIndex::new((0..window.len()).map(|a| 1.0 / (a + 1) as f64)).unwrap();
                window[window.len() - 1 - by_age.sample(&mut rng)]
            } else {
                tag_pop.sample(&mut rng)
            };
            chosen.insert(tag);
        }
        history[u].extend(chosen.iter().copied());
        out.push(Post::new(
            user_names[u].as_str(),
            format!("r{resource:05}"),
            time,
            chosen.iter().map(|t| format!("t{t:04}")),
        ));
    }
    Ok(DatasetSample::from_posts(format!("synthetic_{users}_{resources}_{tags}_{posts}_{seed}"), out))
}

fn pick_resource(rng: &mut ChaCha8Rng, pop: &WeightedIndex<f64>, seen: &BTreeSet<usize>, n: usize) -> usize {
    for _ in 0..64 {
        let r = pop.sample(rng);
        if !seen.contains(&r) {
            return r;
        }
    }
    let start = rng.gen_range(0..n);
    (0..n).map(|i| (start + i) % n).find(|r| !seen.contains(r)).expect("callers guarantee an unseen resource exists")
}
