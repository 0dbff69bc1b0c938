//! HTTP API over a built topic map and, optionally, the embedding model it
//! came from.
//!
//! | route                                 | body                                   |
//! |---------------------------------------|----------------------------------------|
//! | `GET /api/map`                        | the map file, byte for byte            |
//! | `GET /api/neighbors/{term}?k&depth`   | breadth-first nearest-neighbor expansion |
//! | `GET /api/compound?terms=a,b&k`       | neighbors of the averaged vector       |
//! | `GET /`                               | explorer UI                            |
//!
//! Errors are JSON objects with an `error` code.

use std::collections::{HashMap, HashSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use topicmap::embedding::{EmbeddingModel, Query as Probe};
use topicmap::mapbuilder::TopicMap;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub const DEFAULT_PORT: u16 = 8787;
pub const MAX_K: usize = 50;
pub const MAX_DEPTH: usize = 3;

const INDEX_HTML: &str = include_str!("../assets/index.html");

/// Everything the handlers read. Loaded once, never mutated.
#[derive(Debug, Default)]
pub struct ServeState {
    map_json: Option<Vec<u8>>,
    base_threshold: f64,
    model: Option<EmbeddingModel>,
}

impl ServeState {
    /// `map_json` is served verbatim; it must parse as a topic map.
    pub fn new(map_json: Option<Vec<u8>>, model: Option<EmbeddingModel>) -> topicmap::Result<Self> {
        let base_threshold = match &map_json {
            Some(bytes) => {
                let text = std::str::from_utf8(bytes)
                    .map_err(|e| topicmap::Error::MalformedMap(e.to_string()))?;
                TopicMap::from_json(text)?.base_threshold().unwrap_or(0.0)
            }
            None => 0.0,
        };
        Ok(ServeState {
            map_json,
            base_threshold,
            model,
        })
    }

    pub fn load(map: &Path, model: Option<&Path>) -> topicmap::Result<Self> {
        let bytes = std::fs::read(map).map_err(|source| topicmap::Error::Path {
            path: map.to_path_buf(),
            source,
        })?;
        let model = model.map(topicmap::embedding::load_model).transpose()?;
        Self::new(Some(bytes), model)
    }

    /// Neighborhood links must reach this raw similarity.
    pub fn base_threshold(&self) -> f64 {
        self.base_threshold
    }
}

#[derive(Debug)]
pub enum ApiError {
    MapNotLoaded,
    ModelNotLoaded,
    BadRequest(String),
    UnknownTerm(String),
    ZeroVector,
    Internal(String),
}

impl From<topicmap::Error> for ApiError {
    fn from(e: topicmap::Error) -> Self {
        match e {
            topicmap::Error::UnknownTerm(t) => ApiError::UnknownTerm(t),
            topicmap::Error::ZeroVector => ApiError::ZeroVector,
            topicmap::Error::InvalidParams(m) => ApiError::BadRequest(m),
            topicmap::Error::EmptyInput => ApiError::BadRequest("no terms given".into()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::MapNotLoaded => (
                StatusCode::SERVICE_UNAVAILABLE,
                json!({"error": "MapNotLoaded"}),
            ),
            ApiError::ModelNotLoaded => (
                StatusCode::SERVICE_UNAVAILABLE,
                json!({"error": "ModelNotLoaded"}),
            ),
            ApiError::BadRequest(message) => (
                StatusCode::BAD_REQUEST,
                json!({"error": "InvalidParams", "message": message}),
            ),
            ApiError::UnknownTerm(term) => (
                StatusCode::NOT_FOUND,
                json!({"error": "UnknownTerm", "term": term}),
            ),
            ApiError::ZeroVector => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "ZeroVector"}),
            ),
            ApiError::Internal(message) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({"error": "Internal", "message": message}),
            ),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn int_param(q: &HashMap<String, String>, name: &str, default: usize, lo: usize, hi: usize) -> ApiResult<usize> {
    let Some(raw) = q.get(name) else {
        return Ok(default);
    };
    match raw.parse::<usize>() {
        Ok(v) if (lo..=hi).contains(&v) => Ok(v),
        _ => Err(ApiError::BadRequest(format!(
            "{name} must be an integer in [{lo}, {hi}], got {raw:?}"
        ))),
    }
}

fn model(state: &ServeState) -> ApiResult<&EmbeddingModel> {
    state.model.as_ref().ok_or(ApiError::ModelNotLoaded)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct NeighborhoodNode {
    pub id: String,
    pub level: usize,
    /// Cosine similarity to the queried term.
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct NeighborhoodLink {
    pub source: String,
    pub target: String,
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Neighborhood {
    pub term: String,
    pub k: usize,
    pub depth: usize,
    pub nodes: Vec<NeighborhoodNode>,
    pub links: Vec<NeighborhoodLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CompoundResult {
    pub terms: Vec<String>,
    pub k: usize,
    pub neighbors: Vec<RankedTerm>,
}

/// Level 0 is `term`; each further level holds the `k` nearest terms of
/// every term on the previous level that were not seen before. Links join
/// returned terms whose similarity reaches `threshold`.
pub fn neighborhood(
    model: &EmbeddingModel,
    term: &str,
    k: usize,
    depth: usize,
    threshold: f64,
) -> topicmap::Result<Neighborhood> {
    model.index_of(term)?;
    let mut seen: HashSet<String> = HashSet::from([term.to_string()]);
    let mut nodes = vec![NeighborhoodNode {
        id: term.to_string(),
        level: 0,
        similarity: 1.0,
    }];
    let mut frontier = vec![term.to_string()];
    for level in 1..=depth {
        let mut next = Vec::new();
        for t in &frontier {
            let exclude = HashSet::from([t.clone()]);
            for n in model.nearest(Probe::Term(t), k, &exclude)? {
                if seen.insert(n.term.clone()) {
                    nodes.push(NeighborhoodNode {
                        similarity: model.similarity(term, &n.term)?,
                        id: n.term.clone(),
                        level,
                    });
                    next.push(n.term);
                }
            }
        }
        frontier = next;
    }

    let mut links = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let raw = model.similarity(&a.id, &b.id)?;
            if raw >= threshold {
                let (source, target) = if a.id < b.id { (&a.id, &b.id) } else { (&b.id, &a.id) };
                links.push(NeighborhoodLink {
                    source: source.clone(),
                    target: target.clone(),
                    raw,
                });
            }
        }
    }
    links.sort_by(|x, y| (&x.source, &x.target).cmp(&(&y.source, &y.target)));
    Ok(Neighborhood {
        term: term.to_string(),
        k,
        depth,
        nodes,
        links,
    })
}

async fn get_map(State(state): State<Arc<ServeState>>) -> ApiResult<Response> {
    let bytes = state.map_json.clone().ok_or(ApiError::MapNotLoaded)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

async fn get_neighbors(
    State(state): State<Arc<ServeState>>,
    UrlPath(term): UrlPath<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<Neighborhood>> {
    let k = int_param(&q, "k", 10, 1, MAX_K)?;
    let depth = int_param(&q, "depth", 1, 0, MAX_DEPTH)?;
    let model = model(&state)?;
    Ok(Json(neighborhood(model, &term, k, depth, state.base_threshold)?))
}

async fn get_compound(
    State(state): State<Arc<ServeState>>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<CompoundResult>> {
    let k = int_param(&q, "k", 10, 1, MAX_K)?;
    let terms: Vec<String> = q
        .get("terms")
        .map(|t| {
            t.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect()
        })
        .unwrap_or_default();
    if terms.is_empty() {
        return Err(ApiError::BadRequest("terms must list at least one term".into()));
    }
    let model = model(&state)?;
    let v = model.compound(&terms)?;
    let exclude: HashSet<String> = terms.iter().cloned().collect();
    let neighbors = model
        .nearest(Probe::Vector(&v), k, &exclude)?
        .into_iter()
        .map(|n| RankedTerm {
            term: n.term,
            similarity: n.similarity,
        })
        .collect();
    Ok(Json(CompoundResult { terms, k, neighbors }))
}

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

/// Routes for `state`. Static files come from `ui_dir` when given, else a
/// built-in placeholder page is served at `/`.
pub fn router(state: ServeState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/map", get(get_map))
        .route("/api/neighbors/{term}", get(get_neighbors))
        .route("/api/compound", get(get_compound))
        .layer(CorsLayer::permissive())
        .with_state(Arc::new(state));
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(index)),
    }
}

pub async fn serve(state: ServeState, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, ui_dir)).await
}
