//! Folksonomy samples: parsing, cleaning, p-core pruning, temporal splitting
//! and triple export.
//!
//! The line format is `user<TAB>resource<TAB>timestamp<TAB>tag1,tag2,...`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{Error, Result};

/// One tagging event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Post {
    pub user: String,
    pub resource: String,
    pub timestamp: i64,
    pub tags: BTreeSet<String>,
}

impl Post {
    /// Builds a post, lowercasing tags and dropping empty ones.
    pub fn new<I, S>(user: impl Into<String>, resource: impl Into<String>, timestamp: i64, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            user: user.into(),
            resource: resource.into(),
            timestamp,
            tags: tags.into_iter().filter_map(|t| normalize_tag(t.as_ref())).collect(),
        }
    }

    /// Renders the post in the dataset line format (no trailing newline).
    pub fn to_line(&self) -> String {
        let mut line = String::new();
        let _ = write!(line, "{}\t{}\t{}\t", self.user, self.resource, self.timestamp);
        for (i, tag) in self.tags.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(tag);
        }
        line
    }
}

fn normalize_tag(raw: &str) -> Option<String> {
    let tag = raw.trim();
    if tag.is_empty() {
        None
    } else {
        Some(tag.to_lowercase())
    }
}

/// A cleaned, time-ordered list of posts.
///
/// Holds at most one post per (user, resource) pair; posts are in ascending
/// timestamp order with ties kept in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetSample {
    pub name: String,
    posts: Vec<Post>,
}

impl DatasetSample {
    pub fn empty(name: impl Into<String>) -> Self {
        Self { name: name.into(), posts: Vec::new() }
    }

    /// Cleans raw posts: duplicate (user, resource) pairs merge into one post
    /// carrying the latest timestamp and the union of tags, posts without tags
    /// are dropped, and the result is sorted by timestamp (stable).
    pub fn from_posts(name: impl Into<String>, raw: impl IntoIterator<Item = Post>) -> Self {
        // (position of the winning occurrence, merged post)
        let mut merged: Vec<(usize, Post)> = Vec::new();
        let mut slot: BTreeMap<(String, String), usize> = BTreeMap::new();
        for (line, post) in raw.into_iter().enumerate() {
            let key = (post.user.clone(), post.resource.clone());
            match slot.get(&key) {
                Some(&i) => {
                    let (order, existing) = &mut merged[i];
                    if post.timestamp >= existing.timestamp {
                        existing.timestamp = post.timestamp;
                        *order = line;
                    }
                    existing.tags.extend(post.tags);
                }
                None => {
                    slot.insert(key, merged.len());
                    merged.push((line, post));
                }
            }
        }
        merged.retain(|(_, p)| !p.tags.is_empty());
        merged.sort_by_key(|(order, p)| (p.timestamp, *order));
        Self { name: name.into(), posts: merged.into_iter().map(|(_, p)| p).collect() }
    }

    /// Wraps posts that are already clean and ordered, e.g. a subsequence of
    /// another sample.
    fn from_ordered(name: String, posts: Vec<Post>) -> Self {
        Self { name, posts }
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn into_posts(self) -> Vec<Post> {
        self.posts
    }

    /// Total number of (user, resource, tag) assignments.
    pub fn assignment_count(&self) -> usize {
        self.posts.iter().map(|p| p.tags.len()).sum()
    }

    /// Renders the sample in the dataset line format, one LF-terminated line
    /// per post.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for post in &self.posts {
            out.push_str(&post.to_line());
            out.push('\n');
        }
        out
    }
}

/// Parses dataset text. Empty lines are skipped; any other malformed line is
/// an error naming its 1-based line number.
pub fn parse_folksonomy(name: impl Into<String>, text: &str) -> Result<DatasetSample> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        raw.push(parse_line(line, i + 1)?);
    }
    Ok(DatasetSample::from_posts(name, raw))
}

fn parse_line(line: &str, number: usize) -> Result<Post> {
    let err = |reason: &str| Error::Parse { line: number, reason: reason.to_string() };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(Error::Parse {
            line: number,
            reason: alloc::format!("expected 4 tab-separated fields, found {}", fields.len()),
        });
    }
    let (user, resource) = (fields[0], fields[1]);
    if user.is_empty() || resource.is_empty() {
        return Err(err("empty user or resource id"));
    }
    let timestamp: i64 = fields[2].trim().parse().map_err(|_| err("timestamp is not an integer"))?;
    if timestamp < 0 {
        return Err(err("negative timestamp"));
    }
    let post = Post::new(user, resource, timestamp, fields[3].split(','));
    if post.tags.is_empty() {
        return Err(err("empty tag list"));
    }
    Ok(post)
}

/// Removes users, resources and tags occurring in fewer than `p` posts until
/// nothing changes. Posts left without tags are dropped.
pub fn p_core_prune(sample: &DatasetSample, p: usize) -> DatasetSample {
    let mut posts = sample.posts.clone();
    loop {
        let mut users: BTreeMap<&str, usize> = BTreeMap::new();
        let mut resources: BTreeMap<&str, usize> = BTreeMap::new();
        let mut tags: BTreeMap<&str, usize> = BTreeMap::new();
        for post in &posts {
            *users.entry(&post.user).or_default() += 1;
            *resources.entry(&post.resource).or_default() += 1;
            for tag in &post.tags {
                *tags.entry(tag).or_default() += 1;
            }
        }
        let weak_tags: BTreeSet<String> = tags.iter().filter(|(_, &n)| n < p).map(|(t, _)| (*t).to_string()).collect();
        let keep: Vec<bool> =
            posts.iter().map(|post| users[post.user.as_str()] >= p && resources[post.resource.as_str()] >= p).collect();
        if weak_tags.is_empty() && keep.iter().all(|&k| k) {
            break;
        }
        posts = posts
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .filter_map(|(mut post, _)| {
                post.tags.retain(|t| !weak_tags.contains(t));
                (!post.tags.is_empty()).then_some(post)
            })
            .collect();
    }
    DatasetSample::from_ordered(sample.name.clone(), posts)
}

/// A train/test partition of one sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSample {
    pub train: DatasetSample,
    pub test: DatasetSample,
}

/// Leave-latest-out split: every user with at least two posts contributes
/// their latest post to the test set.
pub fn temporal_split(sample: &DatasetSample) -> SplitSample {
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    let mut last: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, post) in sample.posts.iter().enumerate() {
        *count.entry(&post.user).or_default() += 1;
        // sample order is (timestamp, input order), so the last index wins ties
        last.insert(&post.user, i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, post) in sample.posts.iter().enumerate() {
        let user = post.user.as_str();
        if count[user] >= 2 && last[user] == i {
            test.push(post.clone());
        } else {
            train.push(post.clone());
        }
    }
    SplitSample {
        train: DatasetSample::from_ordered(alloc::format!("{}_train", sample.name), train),
        test: DatasetSample::from_ordered(alloc::format!("{}_test", sample.name), test),
    }
}

/// One exported (user, resource, tag) assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple<'a> {
    pub timestamp: i64,
    pub user: &'a str,
    pub resource: &'a str,
    pub tag: &'a str,
}

impl Triple<'_> {
    pub fn to_line(&self) -> String {
        alloc::format!("{}\t{}\t{}", self.user, self.resource, self.tag)
    }
}

/// All tag assignments sorted by (timestamp, user, resource, tag).
pub fn triples(sample: &DatasetSample) -> Vec<Triple<'_>> {
    let mut out: Vec<Triple<'_>> = sample
        .posts
        .iter()
        .flat_map(|p| {
            p.tags.iter().map(move |tag| Triple { timestamp: p.timestamp, user: &p.user, resource: &p.resource, tag })
        })
        .collect();
    out.sort();
    out
}

/// Reads an exported triple file back into posts. Consecutive lines sharing a
/// (user, resource) pair form one post; its timestamp is the 0-based ordinal
/// of the group, so relative post order survives while absolute times do not.
pub fn parse_triples(name: impl Into<String>, text: &str) -> Result<DatasetSample> {
    let mut posts: Vec<Post> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse { line: i + 1, reason: "expected user<TAB>resource<TAB>tag".to_string() });
        }
        let continues = posts.last().is_some_and(|p| p.user == fields[0] && p.resource == fields[1]);
        if continues {
            if let Some(tag) = normalize_tag(fields[2]) {
                posts.last_mut().unwrap().tags.insert(tag);
            }
        } else {
            let ordinal = posts.len() as i64;
            posts.push(Post::new(fields[0], fields[1], ordinal, [fields[2]]));
        }
    }
    Ok(DatasetSample::from_posts(name, posts))
}


#[cfg(test)]
mod tests {
    use super::fixtures::f0;
    use super::*;
    use alloc::vec;

    fn keyset(s: &DatasetSample) -> Vec<(String, String, i64)> {
        s.posts().iter().map(|p| (p.user.clone(), p.resource.clone(), p.timestamp)).collect()
    }

    #[test]
    fn parses_single_line() {
        let s = parse_folksonomy("x", "u1\tr1\t10\ta,b").unwrap();
        assert_eq!(s.posts(), &[Post::new("u1", "r1", 10, ["a", "b"])]);
    }

    #[test]
    fn collapses_duplicate_pairs() {
        let s = parse_folksonomy("x", "u1\tr1\t10\ta\nu1\tr1\t20\tb\n").unwrap();
        assert_eq!(s.posts(), &[Post::new("u1", "r1", 20, ["a", "b"])]);
    }

    #[test]
    fn collapse_keeps_latest_even_when_it_comes_first() {
        let s = parse_folksonomy("x", "u1\tr1\t20\ta\nu2\tr9\t15\tz\nu1\tr1\t10\tb\n").unwrap();
        assert_eq!(keyset(&s), vec![("u2".into(), "r9".into(), 15), ("u1".into(), "r1".into(), 20)]);
        assert_eq!(s.posts()[1].tags.len(), 2);
    }

    #[test]
    fn rejects_bad_timestamp() {
        let err = parse_folksonomy("x", "u1\tr1\tten\ta").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_wrong_field_count_and_empty_tags() {
        assert!(matches!(parse_folksonomy("x", "u1\tr1\t1\ta\nu2\tr2\t3").unwrap_err(), Error::Parse { line: 2, .. }));
        assert!(matches!(parse_folksonomy("x", "u1\tr1\t1\t").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(parse_folksonomy("x", "u1\tr1\t1\t , ").unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_file_is_empty_sample() {
        assert!(parse_folksonomy("x", "").unwrap().is_empty());
    }

    #[test]
    fn tags_are_lowercased_and_deduplicated() {
        let s = parse_folksonomy("x", "u\tr\t1\tRust,rust,RUST,go").unwrap();
        let tags: Vec<&str> = s.posts()[0].tags.iter().map(String::as_str).collect();
        assert_eq!(tags, ["go", "rust"]);
    }

    #[test]
    fn ties_keep_input_order() {
        let s = parse_folksonomy("x", "b\tr\t5\tt\na\tr\t5\tt\n").unwrap();
        assert_eq!(s.posts()[0].user, "b");
    }

    #[test]
    fn one_core_is_identity() {
        assert_eq!(p_core_prune(&f0(), 1), f0());
    }

    #[test]
    fn f0_two_core_is_empty() {
        assert!(p_core_prune(&f0(), 2).is_empty());
        assert!(p_core_prune(&f0(), 100).is_empty());
    }

    #[test]
    fn two_core_keeps_dense_block() {
        let s = DatasetSample::from_posts(
            "x",
            [
                Post::new("u1", "r1", 1, ["a", "z"]),
                Post::new("u1", "r2", 2, ["a"]),
                Post::new("u2", "r1", 3, ["a"]),
                Post::new("u2", "r2", 4, ["a"]),
                Post::new("u3", "r3", 5, ["q"]),
            ],
        );
        let pruned = p_core_prune(&s, 2);
        assert_eq!(pruned.len(), 4);
        assert!(pruned.posts().iter().all(|p| p.tags.len() == 1 && p.tags.contains("a")));
    }

    #[test]
    fn split_f0() {
        let split = temporal_split(&f0());
        assert_eq!(keyset(&split.test), vec![("u1".into(), "r2".into(), 20), ("u2".into(), "r3".into(), 40)]);
        assert_eq!(keyset(&split.train), vec![("u1".into(), "r1".into(), 10), ("u2".into(), "r1".into(), 30)]);
    }

    #[test]
    fn split_single_post_user_goes_to_train() {
        let s = DatasetSample::from_posts("x", [Post::new("u", "r", 3, ["t"])]);
        let split = temporal_split(&s);
        assert!(split.test.is_empty());
        assert_eq!(split.train.posts(), s.posts());
        let empty = temporal_split(&DatasetSample::empty("e"));
        assert!(empty.train.is_empty() && empty.test.is_empty());
    }

    #[test]
    fn split_tie_on_latest_timestamp_takes_later_line() {
        let s = parse_folksonomy("x", "u\tr1\t7\ta\nu\tr2\t7\tb\n").unwrap();
        let split = temporal_split(&s);
        assert_eq!(split.test.posts()[0].resource, "r2");
    }

    #[test]
    fn triples_of_f0() {
        let f0 = f0();
        let t = triples(&f0);
        // 2 + 2 + 1 + 2 assignments
        assert_eq!(t.len(), 7);
        assert_eq!(t[0].to_line(), "u1\tr1\ta");
        assert_eq!(t[6].to_line(), "u2\tr3\td");
        assert!(triples(&DatasetSample::empty("e")).is_empty());
        let three = DatasetSample::from_posts("x", [Post::new("u", "r", 1, ["x", "y", "z"])]);
        assert_eq!(triples(&three).len(), 3);
    }

    #[test]
    fn text_round_trip() {
        let f0 = f0();
        assert_eq!(parse_folksonomy("f0", &f0.to_text()).unwrap(), f0);
    }
}
