//! Indexed, immutable view of a training sample.
//!
//! Identifiers are interned into dense integers. Interning tables are sorted,
//! so comparing two ids of the same kind is the same as comparing their
//! strings lexicographically; recommenders rely on this for tie-breaking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::DatasetSample;

macro_rules! id_type {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(UserId, "Dense user index.");
id_type!(ResourceId, "Dense resource index.");
id_type!(TagId, "Dense tag index.");

/// Sorted string table.
#[derive(Debug, Clone, Default)]
struct Interner {
    names: Vec<String>,
}

impl Interner {
    fn from_set(set: BTreeSet<&str>) -> Self {
        Self { names: set.into_iter().map(String::from).collect() }
    }

    fn get(&self, name: &str) -> Option<u32> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok().map(|i| i as u32)
    }

    fn len(&self) -> usize {
        self.names.len()
    }
}

/// One post with interned ids; `tags` is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedPost {
    pub user: UserId,
    pub resource: ResourceId,
    pub timestamp: i64,
    pub tags: Vec<TagId>,
}

/// Basic corpus statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetStats {
    pub users: usize,
    pub resources: usize,
    pub tags: usize,
    pub posts: usize,
    pub assignments: usize,
    pub mean_tags_per_post: f64,
    pub mean_posts_per_user: f64,
}

/// A user's tag: how often it was used and when last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TagUsage {
    pub tag: TagId,
    pub count: u32,
    pub last_timestamp: i64,
}

#[derive(Debug, Clone, Default)]
pub struct Folksonomy {
    users: Interner,
    resources: Interner,
    tags: Interner,
    posts: Vec<IndexedPost>,
    /// per user: post indices in chronological order
    user_posts: Vec<Vec<usize>>,
    /// per user: (tag, timestamp) sorted by timestamp, then tag
    user_timeline: Vec<Vec<(TagId, i64)>>,
    /// per user: sparse tag counts sorted by tag
    user_tags: Vec<Vec<(TagId, u32)>>,
    /// per user: sorted bookmarked resources
    user_resources: Vec<Vec<ResourceId>>,
    /// per resource: sparse tag counts sorted by tag
    resource_tags: Vec<Vec<(TagId, u32)>>,
    resource_posts: Vec<u32>,
    tag_freq: Vec<u32>,
    /// per tag: sparse co-occurrence row sorted by tag, no diagonal
    cooc: Vec<Vec<(TagId, u32)>>,
}

fn sparse_counts<K: Ord + Copy>(items: impl IntoIterator<Item = K>) -> Vec<(K, u32)> {
    let mut map: BTreeMap<K, u32> = BTreeMap::new();
    for k in items {
        *map.entry(k).or_default() += 1;
    }
    map.into_iter().collect()
}

fn sparse_get<K: Ord>(row: &[(K, u32)], key: &K) -> u32 {
    row.binary_search_by(|(k, _)| k.cmp(key)).map(|i| row[i].1).unwrap_or(0)
}

impl Folksonomy {
    pub fn build(sample: &DatasetSample) -> Self {
        let posts_in = sample.posts();
        let users = Interner::from_set(posts_in.iter().map(|p| p.user.as_str()).collect());
        let resources = Interner::from_set(posts_in.iter().map(|p| p.resource.as_str()).collect());
        let tags = Interner::from_set(posts_in.iter().flat_map(|p| p.tags.iter().map(String::as_str)).collect());

        let posts: Vec<IndexedPost> = posts_in
            .iter()
            .map(|p| IndexedPost {
                user: UserId(users.get(&p.user).unwrap()),
                resource: ResourceId(resources.get(&p.resource).unwrap()),
                timestamp: p.timestamp,
                // BTreeSet iteration is sorted, so ids come out sorted too
                tags: p.tags.iter().map(|t| TagId(tags.get(t).unwrap())).collect(),
            })
            .collect();

        let (nu, nr, nt) = (users.len(), resources.len(), tags.len());
        let mut user_posts = vec![Vec::new(); nu];
        let mut user_timeline: Vec<Vec<(TagId, i64)>> = vec![Vec::new(); nu];
        let mut user_resources = vec![Vec::new(); nu];
        let mut resource_posts = vec![0u32; nr];
        let mut tag_freq = vec![0u32; nt];
        let mut resource_tag_lists: Vec<Vec<TagId>> = vec![Vec::new(); nr];
        let mut cooc_maps: Vec<BTreeMap<TagId, u32>> = vec![BTreeMap::new(); nt];

        for (i, post) in posts.iter().enumerate() {
            let u = post.user.index();
            user_posts[u].push(i);
            user_resources[u].push(post.resource);
            resource_posts[post.resource.index()] += 1;
            for &t in &post.tags {
                user_timeline[u].push((t, post.timestamp));
                tag_freq[t.index()] += 1;
                resource_tag_lists[post.resource.index()].push(t);
                for &s in &post.tags {
                    if s != t {
                        *cooc_maps[t.index()].entry(s).or_default() += 1;
                    }
                }
            }
        }
        for list in &mut user_timeline {
            list.sort_by_key(|&(t, ts)| (ts, t));
        }
        for list in &mut user_resources {
            list.sort();
        }
        let user_tags = user_timeline.iter().map(|tl| sparse_counts(tl.iter().map(|&(t, _)| t))).collect();
        let resource_tags = resource_tag_lists.into_iter().map(sparse_counts).collect();
        let cooc = cooc_maps.into_iter().map(|m| m.into_iter().collect()).collect();

        Self {
            users,
            resources,
            tags,
            posts,
            user_posts,
            user_timeline,
            user_tags,
            user_resources,
            resource_tags,
            resource_posts,
            tag_freq,
            cooc,
        }
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }
    pub fn num_resources(&self) -> usize {
        self.resources.len()
    }
    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }
    pub fn posts(&self) -> &[IndexedPost] {
        &self.posts
    }
    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn user_id(&self, name: &str) -> Option<UserId> {
        self.users.get(name).map(UserId)
    }
    pub fn resource_id(&self, name: &str) -> Option<ResourceId> {
        self.resources.get(name).map(ResourceId)
    }
    pub fn tag_id(&self, name: &str) -> Option<TagId> {
        self.tags.get(name).map(TagId)
    }
    pub fn user_name(&self, id: UserId) -> &str {
        &self.users.names[id.index()]
    }
    pub fn resource_name(&self, id: ResourceId) -> &str {
        &self.resources.names[id.index()]
    }
    pub fn tag_name(&self, id: TagId) -> &str {
        &self.tags.names[id.index()]
    }

    pub fn user_ids(&self) -> impl Iterator<Item = UserId> {
        (0..self.users.len() as u32).map(UserId)
    }
    pub fn resource_ids(&self) -> impl Iterator<Item = ResourceId> {
        (0..self.resources.len() as u32).map(ResourceId)
    }
    pub fn tag_ids(&self) -> impl Iterator<Item = TagId> {
        (0..self.tags.len() as u32).map(TagId)
    }

    /// Post indices of a user, oldest first.
    pub fn user_posts(&self, user: UserId) -> &[usize] {
        &self.user_posts[user.index()]
    }
    /// Every (tag, timestamp) assignment of a user, oldest first.
    pub fn user_timeline(&self, user: UserId) -> &[(TagId, i64)] {
        &self.user_timeline[user.index()]
    }
    /// Sparse tag counts of a user, sorted by tag id.
    pub fn user_tag_counts(&self, user: UserId) -> &[(TagId, u32)] {
        &self.user_tags[user.index()]
    }
    /// Resources bookmarked by a user, sorted by id.
    pub fn user_resources(&self, user: UserId) -> &[ResourceId] {
        &self.user_resources[user.index()]
    }
    pub fn has_bookmarked(&self, user: UserId, resource: ResourceId) -> bool {
        self.user_resources[user.index()].binary_search(&resource).is_ok()
    }
    /// Sparse tag counts of a resource, sorted by tag id.
    pub fn resource_tags(&self, resource: ResourceId) -> &[(TagId, u32)] {
        &self.resource_tags[resource.index()]
    }
    /// Number of posts on a resource.
    pub fn resource_frequency(&self, resource: ResourceId) -> u32 {
        self.resource_posts[resource.index()]
    }
    /// Number of posts carrying a tag.
    pub fn tag_frequency(&self, tag: TagId) -> u32 {
        self.tag_freq[tag.index()]
    }
    /// Sparse co-occurrence row of a tag, sorted by tag id.
    pub fn cooccurrence_row(&self, tag: TagId) -> &[(TagId, u32)] {
        &self.cooc[tag.index()]
    }
    pub fn cooccurrence(&self, a: TagId, b: TagId) -> u32 {
        sparse_get(&self.cooc[a.index()], &b)
    }
    pub fn max_tag_frequency(&self) -> u32 {
        self.tag_freq.iter().copied().max().unwrap_or(0)
    }
    pub fn max_resource_frequency(&self) -> u32 {
        self.resource_posts.iter().copied().max().unwrap_or(0)
    }
    /// Latest timestamp in the model, if any.
    pub fn latest_timestamp(&self) -> Option<i64> {
        self.posts.iter().map(|p| p.timestamp).max()
    }

    /// The user's tags ordered by count, then recency, then name.
    pub fn tags_of_user(&self, user: UserId) -> Vec<TagUsage> {
        let mut last: BTreeMap<TagId, i64> = BTreeMap::new();
        for &(t, ts) in self.user_timeline(user) {
            last.insert(t, ts);
        }
        let mut out: Vec<TagUsage> = self
            .user_tag_counts(user)
            .iter()
            .map(|&(tag, count)| TagUsage { tag, count, last_timestamp: last[&tag] })
            .collect();
        out.sort_by(|a, b| b.count.cmp(&a.count).then(b.last_timestamp.cmp(&a.last_timestamp)).then(a.tag.cmp(&b.tag)));
        out
    }

    /// [`Self::tags_of_user`] by user name; unknown users have no tags.
    pub fn tags_of_user_named(&self, user: &str) -> Vec<(&str, u32, i64)> {
        match self.user_id(user) {
            Some(u) => {
                self.tags_of_user(u).into_iter().map(|t| (self.tag_name(t.tag), t.count, t.last_timestamp)).collect()
            }
            None => Vec::new(),
        }
    }

    pub fn stats(&self) -> DatasetStats {
        let posts = self.posts.len();
        let assignments: usize = self.posts.iter().map(|p| p.tags.len()).sum();
        let users = self.num_users();
        DatasetStats {
            users,
            resources: self.num_resources(),
            tags: self.num_tags(),
            posts,
            assignments,
            mean_tags_per_post: if posts == 0 { 0.0 } else { assignments as f64 / posts as f64 },
            mean_posts_per_user: if users == 0 { 0.0 } else { posts as f64 / users as f64 },
        }
    }

    /// Size proxy used as the memory metric: users + resources + tags + posts.
    pub fn entity_count(&self) -> usize {
        self.num_users() + self.num_resources() + self.num_tags() + self.posts.len()
    }
}
