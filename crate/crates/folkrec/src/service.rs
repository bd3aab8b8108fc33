//! HTTP front end for live tag recommendation and acceptance logging.
//!
//! Recommendations are computed over an immutable snapshot. Submitted posts
//! land in a delta buffer; the buffer is merged into a fresh snapshot before
//! the next recommendation is served, or earlier once it holds
//! [`ServiceOptions::merge_every`] posts or is older than
//! [`ServiceOptions::merge_interval`].

use std::collections::{BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use folkrec_core::dataset::{DatasetSample, Post};
use folkrec_core::eval::Task;
use folkrec_core::rec::RecRequest;
use folkrec_core::{Algorithm, AlgorithmConfig, DatasetStats, Folksonomy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    pub default_algorithm: Algorithm,
    pub config: AlgorithmConfig,
    pub merge_every: usize,
    pub merge_interval: Duration,
    pub log_path: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self {
            default_algorithm: Algorithm::BllAc,
            config: AlgorithmConfig::default(),
            merge_every: 100,
            merge_interval: Duration::from_secs(60),
            log_path: None,
            static_dir: None,
        }
    }
}

struct Snapshot {
    sample: DatasetSample,
    model: Folksonomy,
}

impl Snapshot {
    fn new(sample: DatasetSample) -> Self {
        let model = Folksonomy::build(&sample);
        Self { sample, model }
    }
}

struct Delta {
    posts: Vec<Post>,
    since: Instant,
}

/// One shown recommendation and, once submitted, the tags the user saved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineLogEntry {
    pub request_id: String,
    pub user: String,
    pub resource: String,
    pub algorithm: String,
    pub shown: Vec<String>,
    pub applied: Option<Vec<String>>,
    pub category: Option<String>,
    pub timestamp: i64,
}

/// Line-delimited log records.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum LogRecord {
    Shown {
        request_id: String,
        user: String,
        resource: String,
        algorithm: String,
        shown: Vec<String>,
        timestamp: i64,
    },
    Applied {
        request_id: Option<String>,
        user: String,
        resource: String,
        applied: Vec<String>,
        category: Option<String>,
        timestamp: i64,
    },
}

#[derive(Default)]
struct OnlineLog {
    entries: Vec<OnlineLogEntry>,
    by_id: HashMap<String, usize>,
    unpaired: usize,
    next_id: u64,
    file: Option<File>,
}

impl OnlineLog {
    fn open(path: Option<&PathBuf>) -> std::io::Result<Self> {
        let mut log = OnlineLog::default();
        let Some(path) = path else {
            return Ok(log);
        };
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: LogRecord =
                    serde_json::from_str(&line).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
                log.apply(record);
            }
        }
        log.file = Some(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(log)
    }

    fn apply(&mut self, record: LogRecord) {
        match record {
            LogRecord::Shown { request_id, user, resource, algorithm, shown, timestamp } => {
                if let Some(n) = request_id.strip_prefix("req-").and_then(|n| n.parse::<u64>().ok()) {
                    self.next_id = self.next_id.max(n + 1);
                }
                self.by_id.insert(request_id.clone(), self.entries.len());
                self.entries.push(OnlineLogEntry {
                    request_id,
                    user,
                    resource,
                    algorithm,
                    shown,
                    applied: None,
                    category: None,
                    timestamp,
                });
            }
            LogRecord::Applied { request_id, applied, category, .. } => {
                match request_id.and_then(|id| self.by_id.get(&id).copied()) {
                    Some(i) => {
                        self.entries[i].applied = Some(applied);
                        self.entries[i].category = category;
                    }
                    None => self.unpaired += 1,
                }
            }
        }
    }

    fn record(&mut self, record: LogRecord) -> std::io::Result<()> {
        if let Some(file) = &mut self.file {
            let line = serde_json::to_string(&record).map_err(std::io::Error::other)?;
            writeln!(file, "{line}")?;
            file.flush()?;
        }
        self.apply(record);
        Ok(())
    }

    fn next_request_id(&mut self) -> String {
        let id = format!("req-{:08}", self.next_id);
        self.next_id += 1;
        id
    }
}

/// Online acceptance over paired log entries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceStats {
    /// Mean of `|applied ∩ shown| / |applied|`.
    pub acceptance_rate: f64,
    /// Mean of `|applied ∩ shown| / |shown|`.
    pub precision_of_shown: f64,
    pub paired_entries: usize,
    pub shown_entries: usize,
    pub unpaired_submissions: usize,
}

pub fn acceptance(entries: &[OnlineLogEntry], unpaired: usize) -> AcceptanceStats {
    let mut stats =
        AcceptanceStats { shown_entries: entries.len(), unpaired_submissions: unpaired, ..Default::default() };
    let (mut rate, mut precision) = (0.0, 0.0);
    for e in entries {
        let Some(applied) = &e.applied else { continue };
        let applied: BTreeSet<&str> = applied.iter().map(String::as_str).collect();
        let shown: BTreeSet<&str> = e.shown.iter().map(String::as_str).collect();
        let overlap = applied.intersection(&shown).count() as f64;
        if !applied.is_empty() {
            rate += overlap / applied.len() as f64;
        }
        if !shown.is_empty() {
            precision += overlap / shown.len() as f64;
        }
        stats.paired_entries += 1;
    }
    if stats.paired_entries > 0 {
        stats.acceptance_rate = rate / stats.paired_entries as f64;
        stats.precision_of_shown = precision / stats.paired_entries as f64;
    }
    stats
}

pub struct AppState {
    snapshot: RwLock<Arc<Snapshot>>,
    delta: Mutex<Delta>,
    log: Mutex<OnlineLog>,
    options: ServiceOptions,
}

impl AppState {
    pub fn new(seed: DatasetSample, options: ServiceOptions) -> std::io::Result<Arc<Self>> {
        let log = OnlineLog::open(options.log_path.as_ref())?;
        Ok(Arc::new(Self {
            snapshot: RwLock::new(Arc::new(Snapshot::new(seed))),
            delta: Mutex::new(Delta { posts: Vec::new(), since: Instant::now() }),
            log: Mutex::new(log),
            options,
        }))
    }

    fn current(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap().clone()
    }

    /// Folds buffered posts into a new snapshot. Callers hold the delta lock,
    /// which serializes writers.
    fn merge(&self, delta: &mut Delta) {
        if delta.posts.is_empty() {
            return;
        }
        let base = self.current();
        let posts = base.sample.posts().iter().cloned().chain(delta.posts.drain(..));
        let next = Arc::new(Snapshot::new(DatasetSample::from_posts(base.sample.name.clone(), posts)));
        *self.snapshot.write().unwrap() = next;
        delta.since = Instant::now();
    }

    /// Snapshot including every acknowledged post.
    fn fresh(&self) -> Arc<Snapshot> {
        let mut delta = self.delta.lock().unwrap();
        self.merge(&mut delta);
        drop(delta);
        self.current()
    }

    pub fn acceptance(&self) -> AcceptanceStats {
        let log = self.log.lock().unwrap();
        acceptance(&log.entries, log.unpaired)
    }

    pub fn log_entries(&self) -> Vec<OnlineLogEntry> {
        self.log.lock().unwrap().entries.clone()
    }
}

fn now_seconds() -> i64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0)
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| bad_request(format!("malformed body: {e}")))
}

#[derive(Debug, Deserialize)]
pub struct RecommendBody {
    pub user: String,
    pub resource: String,
    pub k: i64,
    pub algorithm: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ScoredTag {
    pub tag: String,
    pub score: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RecommendResponse {
    pub request_id: String,
    pub algorithm: String,
    pub tags: Vec<ScoredTag>,
}

async fn recommend(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<RecommendResponse>, ApiError> {
    let body: RecommendBody = parse_body(&body)?;
    if body.k < 1 {
        return Err(bad_request("k must be >= 1"));
    }
    let algorithm = match &body.algorithm {
        Some(key) => Algorithm::from_key(key).map_err(|e| bad_request(e.to_string()))?,
        None => state.options.default_algorithm,
    };
    if algorithm.task() != Task::Tags {
        return Err(bad_request(format!("`{algorithm}` recommends resources, not tags")));
    }
    let snap = state.fresh();
    let reference_time = now_seconds().max(snap.model.latest_timestamp().unwrap_or(0)) + 1;
    let req = RecRequest::new(body.user.as_str(), body.resource.as_str(), reference_time, body.k as usize);
    let recommender = state.options.config.tag_recommender(algorithm, &snap.model).expect("tag algorithm");
    let list = recommender.recommend(&req);
    let tags: Vec<ScoredTag> =
        list.named(&snap.model).into_iter().map(|(tag, score)| ScoredTag { tag: tag.to_string(), score }).collect();

    let mut log = state.log.lock().unwrap();
    let request_id = log.next_request_id();
    log.record(LogRecord::Shown {
        request_id: request_id.clone(),
        user: body.user,
        resource: body.resource,
        algorithm: algorithm.key().to_string(),
        shown: tags.iter().map(|t| t.tag.clone()).collect(),
        timestamp: reference_time - 1,
    })
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(RecommendResponse { request_id, algorithm: algorithm.key().to_string(), tags }))
}

#[derive(Debug, Deserialize)]
pub struct SubmitBody {
    pub user: String,
    pub resource: String,
    pub tags: Vec<String>,
    pub request_id: Option<String>,
    pub category: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SubmitResponse {
    pub accepted: bool,
    /// Whether `request_id` matched a logged recommendation.
    pub paired: bool,
    pub timestamp: i64,
}

async fn submit(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<SubmitResponse>, ApiError> {
    let body: SubmitBody = parse_body(&body)?;
    if body.user.is_empty() || body.resource.is_empty() {
        return Err(bad_request("user and resource must be non-empty"));
    }
    if body.tags.iter().any(|t| t.contains([',', '\t', '\n'])) {
        return Err(bad_request("tags may not contain commas, tabs or newlines"));
    }
    let snap_latest = state.current().model.latest_timestamp().unwrap_or(0);
    let timestamp = now_seconds().max(snap_latest);
    let post = Post::new(body.user.as_str(), body.resource.as_str(), timestamp, &body.tags);
    if post.tags.is_empty() {
        return Err(bad_request("tags must be non-empty"));
    }
    let applied: Vec<String> = post.tags.iter().cloned().collect();
    {
        let mut delta = state.delta.lock().unwrap();
        if delta.posts.is_empty() {
            delta.since = Instant::now();
        }
        delta.posts.push(post);
        if delta.posts.len() >= state.options.merge_every || delta.since.elapsed() >= state.options.merge_interval {
            state.merge(&mut delta);
        }
    }
    let mut log = state.log.lock().unwrap();
    let paired = body.request_id.as_ref().is_some_and(|id| log.by_id.contains_key(id));
    log.record(LogRecord::Applied {
        request_id: body.request_id,
        user: body.user,
        resource: body.resource,
        applied,
        category: body.category,
        timestamp,
    })
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(SubmitResponse { accepted: true, paired, timestamp }))
}

async fn log_entry(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<OnlineLogEntry>, ApiError> {
    let log = state.log.lock().unwrap();
    match log.by_id.get(&id) {
        Some(&i) => Ok(Json(log.entries[i].clone())),
        None => Err(ApiError(StatusCode::NOT_FOUND, format!("unknown request id `{id}`"))),
    }
}

async fn acceptance_handler(State(state): State<Arc<AppState>>) -> Json<AcceptanceStats> {
    Json(state.acceptance())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsResponse {
    #[serde(flatten)]
    pub stats: DatasetStats,
    pub pending_posts: usize,
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<StatsResponse> {
    let pending_posts = state.delta.lock().unwrap().posts.len();
    Json(StatsResponse { stats: state.current().model.stats(), pending_posts })
}

pub fn router(state: Arc<AppState>) -> Router {
    let static_dir = state.options.static_dir.clone();
    let api = Router::new()
        .route("/api/recommend/tags", post(recommend))
        .route("/api/posts", post(submit))
        .route("/api/log/{request_id}", get(log_entry))
        .route("/api/acceptance", get(acceptance_handler))
        .route("/api/stats", get(stats))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(seed: DatasetSample, options: ServiceOptions, addr: SocketAddr) -> std::io::Result<()> {
    let state = AppState::new(seed, options)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("folkrec: listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(shown: &[&str], applied: Option<&[&str]>) -> OnlineLogEntry {
        OnlineLogEntry {
            request_id: "r".into(),
            user: "u".into(),
            resource: "x".into(),
            algorithm: "mr".into(),
            shown: shown.iter().map(|s| s.to_string()).collect(),
            applied: applied.map(|a| a.iter().map(|s| s.to_string()).collect()),
            category: None,
            timestamp: 0,
        }
    }

    #[test]
    fn acceptance_by_hand() {
        let s = acceptance(&[entry(&["a", "b", "c"], Some(&["a", "d"]))], 0);
        assert_eq!(s.acceptance_rate, 0.5);
        assert!((s.precision_of_shown - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.paired_entries, 1);
    }

    #[test]
    fn acceptance_edge_cases() {
        let full = acceptance(&[entry(&["a", "b"], Some(&["b"]))], 0);
        assert_eq!(full.acceptance_rate, 1.0);
        let none = acceptance(&[entry(&["a"], None)], 3);
        assert_eq!((none.acceptance_rate, none.precision_of_shown, none.paired_entries), (0.0, 0.0, 0));
        assert_eq!((none.shown_entries, none.unpaired_submissions), (1, 3));
        assert_eq!(acceptance(&[], 0), AcceptanceStats::default());
    }

    #[test]
    fn log_replays_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("online.jsonl");
        {
            let mut log = OnlineLog::open(Some(&path)).unwrap();
            let id = log.next_request_id();
            log.record(LogRecord::Shown {
                request_id: id.clone(),
                user: "u".into(),
                resource: "r".into(),
                algorithm: "mr".into(),
                shown: vec!["a".into(), "b".into(), "c".into()],
                timestamp: 1,
            })
            .unwrap();
            log.record(LogRecord::Applied {
                request_id: Some(id),
                user: "u".into(),
                resource: "r".into(),
                applied: vec!["a".into(), "d".into()],
                category: Some("work".into()),
                timestamp: 2,
            })
            .unwrap();
        }
        let mut log = OnlineLog::open(Some(&path)).unwrap();
        assert_eq!(acceptance(&log.entries, log.unpaired).acceptance_rate, 0.5);
        assert_eq!(log.entries[0].category.as_deref(), Some("work"));
        assert_eq!(log.next_request_id(), "req-00000001");
    }
}
