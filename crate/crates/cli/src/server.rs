//! HTTP session API. Each session owns a drill-down stack over the shared,
//! read-only network; mutations of one session are serialized by its lock.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use citnet_core::{
    cluster, export_records, extract_core, intermediates, layout, mark, parse_blocks, parse_query,
    select_display, CitationGraph, ClusterLabel, ClusterOptions, Clustering, DrillSession, Error,
    ExportFormat, ExportView, Field, LayoutParams, LayoutResult, PubId, QueryOptions,
    DEFAULT_DISPLAY, DEFAULT_MIN_CLUSTER_SIZE, DEFAULT_RESOLUTION, DEFAULT_RESTARTS,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    position: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            position: None,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        let position = match &e {
            Error::Query { position, .. } => Some(*position),
            _ => None,
        };
        ApiError {
            status,
            message: e.to_string(),
            position,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(p) = self.position {
            body["position"] = json!(p);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Analyses attached to one level of the drill stack.
#[derive(Default)]
struct Extras {
    clustering: Option<Clustering>,
    layout: Option<LayoutResult>,
}

struct Session {
    drill: DrillSession,
    extras: Vec<Extras>,
}

impl Session {
    fn extras(&mut self) -> &mut Extras {
        self.extras.last_mut().expect("one entry per drill level")
    }
}

pub struct AppState {
    graph: Arc<CitationGraph>,
    sessions: RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    next_token: AtomicU64,
}

impl AppState {
    fn session(&self, token: &str) -> ApiResult<Arc<RwLock<Session>>> {
        self.sessions
            .read()
            .unwrap()
            .get(token)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {token:?}"))
            })
    }
}

type Shared = Arc<AppState>;

pub fn router(graph: Arc<CitationGraph>) -> Router {
    let state = Arc::new(AppState {
        graph,
        sessions: RwLock::new(HashMap::new()),
        next_token: AtomicU64::new(1),
    });
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{token}/network", get(network))
        .route("/sessions/{token}/stats", get(stats))
        .route("/sessions/{token}/mark", post(mark_handler))
        .route("/sessions/{token}/drill", post(drill))
        .route("/sessions/{token}/drillup", post(drill_up))
        .route("/sessions/{token}/cores", post(cores))
        .route("/sessions/{token}/cluster", post(cluster_handler))
        .route("/sessions/{token}/layout", get(layout_handler))
        .route("/sessions/{token}/export", get(export))
        .with_state(state)
}

pub async fn serve(
    listener: tokio::net::TcpListener,
    graph: Arc<CitationGraph>,
) -> anyhow::Result<()> {
    axum::serve(listener, router(graph)).await?;
    Ok(())
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

#[derive(Serialize)]
struct NetworkView {
    token: String,
    depth: usize,
    breadcrumbs: Vec<String>,
    publications: usize,
    citation_relations: usize,
    marked: Vec<PubId>,
}

fn network_view(token: &str, s: &Session) -> NetworkView {
    let level = s.drill.current();
    NetworkView {
        token: token.to_string(),
        depth: s.drill.depth(),
        breadcrumbs: s
            .drill
            .levels()
            .iter()
            .map(|l| l.description.clone())
            .collect(),
        publications: level.graph.node_count(),
        citation_relations: level.graph.edge_count(),
        marked: level.marked.iter().copied().collect(),
    }
}

async fn create_session(State(app): State<Shared>) -> (StatusCode, Json<NetworkView>) {
    let token = app.next_token.fetch_add(1, Ordering::Relaxed).to_string();
    let session = Session {
        drill: DrillSession::new(app.graph.clone()),
        extras: vec![Extras::default()],
    };
    let view = network_view(&token, &session);
    app.sessions
        .write()
        .unwrap()
        .insert(token, Arc::new(RwLock::new(session)));
    (StatusCode::CREATED, Json(view))
}

async fn network(
    State(app): State<Shared>,
    Path(token): Path<String>,
) -> ApiResult<Json<NetworkView>> {
    let s = app.session(&token)?;
    let s = s.read().unwrap();
    Ok(Json(network_view(&token, &s)))
}

#[derive(Deserialize)]
struct StatsParams {
    blocks: Option<String>,
}

async fn stats(
    State(app): State<Shared>,
    Path(token): Path<String>,
    Query(p): Query<StatsParams>,
) -> ApiResult<Json<Value>> {
    let s = app.session(&token)?;
    let graph = s.read().unwrap().drill.graph().clone();
    let years = graph.year_range();
    let blocks = match &p.blocks {
        Some(spec) => graph.block_stats(&parse_blocks(spec)?)?.blocks,
        None => Vec::new(),
    };
    let blocks: Vec<Value> = blocks
        .iter()
        .map(|b| {
            json!({
                "block": b.label,
                "start_year": b.start_year,
                "end_year": b.end_year,
                "links": b.link_count,
                "publications": b.publication_count,
            })
        })
        .collect();
    Ok(Json(json!({
        "publications": graph.node_count(),
        "citation_relations": graph.edge_count(),
        "first_year": years.map(|y| y.0),
        "last_year": years.map(|y| y.1),
        "blocks": blocks,
    })))
}

#[derive(Deserialize)]
struct MarkBody {
    query: String,
    fields: Option<Vec<Field>>,
}

async fn mark_handler(
    State(app): State<Shared>,
    Path(token): Path<String>,
    Json(body): Json<MarkBody>,
) -> ApiResult<Json<Value>> {
    let options = match body.fields {
        Some(f) if f.is_empty() => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "fields must not be empty",
            ))
        }
        Some(f) => QueryOptions { default_fields: f },
        None => QueryOptions::default(),
    };
    let query = parse_query(&body.query, &options)?;
    let s = app.session(&token)?;
    let mut s = s.write().unwrap();
    let marked = mark(s.drill.graph(), &query);
    s.drill.set_marked(marked.clone())?;
    Ok(Json(json!({ "count": marked.len(), "marked": marked })))
}

#[derive(Deserialize)]
struct DrillBody {
    #[serde(default)]
    include_intermediates: bool,
    marked: Option<Vec<PubId>>,
}

async fn drill(
    State(app): State<Shared>,
    Path(token): Path<String>,
    Json(body): Json<DrillBody>,
) -> ApiResult<Json<Value>> {
    let s = app.session(&token)?;
    blocking(move || {
        let mut s = s.write().unwrap();
        let marked: BTreeSet<PubId> = match body.marked {
            Some(ids) => ids.into_iter().collect(),
            None => s.drill.current().marked.clone(),
        };
        let found = if body.include_intermediates {
            intermediates(s.drill.graph(), &marked)?.len()
        } else {
            0
        };
        s.drill.drill_down(marked, body.include_intermediates)?;
        s.extras.push(Extras::default());
        let mut view = serde_json::to_value(network_view(&token, &s)).unwrap();
        view["intermediates"] = json!(found);
        Ok(Json(view))
    })
    .await
}

async fn drill_up(
    State(app): State<Shared>,
    Path(token): Path<String>,
) -> ApiResult<Json<NetworkView>> {
    let s = app.session(&token)?;
    let mut s = s.write().unwrap();
    s.drill.drill_up()?;
    s.extras.pop();
    Ok(Json(network_view(&token, &s)))
}

#[derive(Deserialize)]
struct CoresBody {
    k: usize,
}

/// Computes the k-core of the current view and marks its members.
async fn cores(
    State(app): State<Shared>,
    Path(token): Path<String>,
    Json(body): Json<CoresBody>,
) -> ApiResult<Json<Value>> {
    let s = app.session(&token)?;
    blocking(move || {
        let mut s = s.write().unwrap();
        let core = extract_core(s.drill.graph(), body.k);
        s.drill.set_marked(core.members.clone())?;
        Ok(Json(json!({
            "k": body.k,
            "count": core.len(),
            "members": core.members,
        })))
    })
    .await
}

fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}
fn default_min_size() -> usize {
    DEFAULT_MIN_CLUSTER_SIZE
}
fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

#[derive(Deserialize)]
struct ClusterBody {
    #[serde(default = "default_resolution")]
    resolution: f64,
    #[serde(default = "default_min_size")]
    min_size: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_restarts")]
    restarts: usize,
}

async fn cluster_handler(
    State(app): State<Shared>,
    Path(token): Path<String>,
    Json(body): Json<ClusterBody>,
) -> ApiResult<Json<Value>> {
    if !(body.resolution.is_finite() && body.resolution >= 0.0) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "resolution must be a non-negative number",
        ));
    }
    let s = app.session(&token)?;
    blocking(move || {
        let mut s = s.write().unwrap();
        let c = cluster(
            s.drill.graph(),
            &ClusterOptions {
                resolution: body.resolution,
                min_cluster_size: body.min_size,
                seed: body.seed,
                restarts: body.restarts,
            },
        );
        let out = json!({
            "resolution": c.resolution,
            "min_size": c.min_cluster_size,
            "seed": c.seed,
            "clusters": c.cluster_count(),
            "sizes": c.cluster_sizes(),
            "unassigned": c.unassigned().count(),
            "quality": c.quality,
            "assignment": c.assignment,
        });
        s.extras().clustering = Some(c);
        Ok(Json(out))
    })
    .await
}

#[derive(Deserialize)]
struct LayoutQuery {
    n: Option<usize>,
    seed: Option<u64>,
    d_min: Option<f64>,
    iterations: Option<usize>,
}

fn cluster_json(c: Option<ClusterLabel>) -> Value {
    c.map_or(Value::Null, |l| serde_json::to_value(l).unwrap())
}

async fn layout_handler(
    State(app): State<Shared>,
    Path(token): Path<String>,
    Query(q): Query<LayoutQuery>,
) -> ApiResult<Json<Value>> {
    let s = app.session(&token)?;
    blocking(move || {
        let mut s = s.write().unwrap();
        let graph = s.drill.graph().clone();
        let marked = s.drill.current().marked.clone();
        let display = select_display(&graph, q.n.unwrap_or(DEFAULT_DISPLAY));
        let defaults = LayoutParams::default();
        let result = layout(
            &graph,
            &display,
            &LayoutParams {
                d_min: q.d_min,
                iterations: q.iterations.unwrap_or(defaults.iterations),
                seed: q.seed.unwrap_or(defaults.seed),
            },
        )?;
        let clustering = s.extras().clustering.as_ref();
        let mut nodes = Vec::with_capacity(result.nodes.len());
        for n in &result.nodes {
            let rec = graph.record(n.id)?;
            nodes.push(json!({
                "id": n.id,
                "label": n.label,
                "year": n.year,
                "layer": n.layer,
                "x": n.x,
                "cluster": cluster_json(clustering.and_then(|c| c.label(n.id))),
                "marked": marked.contains(&n.id),
                "authors": rec.authors,
                "title": rec.title,
                "source": rec.source,
                "internal_citation_score": graph.internal_citation_score(n.id)?,
                "external_citation_score": rec.external_citation_count,
            }));
        }
        let out = json!({
            "nodes": nodes,
            "edges": result.edges,
            "layer_years": result.layer_years,
            "d_min": result.d_min,
            "stress": result.stress,
            "initial_stress": result.initial_stress,
            "clusters": clustering.map(|c| c.cluster_count()),
        });
        s.extras().layout = Some(result);
        Ok(Json(out))
    })
    .await
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
    n: Option<usize>,
}

fn content_type(format: ExportFormat) -> &'static str {
    match format {
        ExportFormat::Tsv => "text/tab-separated-values; charset=utf-8",
        ExportFormat::Csv => "text/csv; charset=utf-8",
        ExportFormat::JsonLines => "application/x-ndjson",
    }
}

/// Exports the publications of the last layout of the current view, or the
/// top `n` by internal score when none has been computed.
async fn export(
    State(app): State<Shared>,
    Path(token): Path<String>,
    Query(q): Query<ExportQuery>,
) -> ApiResult<Response> {
    let format: ExportFormat = q.format.as_deref().unwrap_or("tsv").parse()?;
    let s = app.session(&token)?;
    let s = s.read().unwrap();
    let graph = s.drill.graph();
    let extras = s.extras.last().expect("one entry per drill level");
    let view = match &extras.layout {
        Some(l) => ExportView::from_layout(graph, l, extras.clustering.as_ref()),
        None => ExportView {
            graph,
            display: select_display(graph, q.n.unwrap_or(DEFAULT_DISPLAY)),
            clustering: extras.clustering.as_ref(),
            layout: None,
        },
    };
    let (bytes, warnings) = export_records(&view, format)?;
    let mut response = (
        StatusCode::OK,
        [(header::CONTENT_TYPE, content_type(format))],
        bytes,
    )
        .into_response();
    if !warnings.is_empty() {
        if let Ok(v) = HeaderValue::from_str(&warnings.join("; ")) {
            response.headers_mut().insert("x-citnet-warnings", v);
        }
    }
    Ok(response)
}
