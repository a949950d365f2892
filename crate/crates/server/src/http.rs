use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use archex_core::query::ConnectionRef;
use archex_core::Scope;
use serde_json::Value;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::api::{parse_key, ApiError, QueryParams, Snapshot};
use crate::state::AppState;

pub const GENERATION_HEADER: &str = "x-archex-generation";

type Shared = State<Arc<AppState>>;
type Params = Result<Query<QueryParams>, QueryRejection>;

enum Body {
    Json(Value),
    Csv(Vec<u8>, String),
    Transcript(Vec<u8>),
}

struct Reply {
    generation: u64,
    result: Result<Body, ApiError>,
}

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        let mut resp = match self.result {
            Ok(Body::Json(v)) => Json(v).into_response(),
            Ok(Body::Csv(bytes, name)) => (
                [
                    (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()),
                    (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{name}\"")),
                ],
                bytes,
            )
                .into_response(),
            Ok(Body::Transcript(bytes)) => ([(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
            Err(e) => {
                let status = StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
                (status, Json(e.body(self.generation))).into_response()
            }
        };
        resp.headers_mut()
            .insert(HeaderName::from_static(GENERATION_HEADER), HeaderValue::from(self.generation));
        resp
    }
}

/// Runs `f` against exactly one snapshot.
fn reply(state: &AppState, f: impl FnOnce(&Snapshot) -> Result<Body, ApiError>) -> Reply {
    let snap = state.snapshot();
    Reply { generation: snap.generation, result: f(&snap) }
}

fn params(p: Params) -> Result<QueryParams, ApiError> {
    p.map(|Query(q)| q).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn csv_name(stem: &str) -> String {
    let stem: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("{stem}.csv")
}

#[derive(Clone, Copy)]
enum Output {
    Rows,
    RowsCsv,
    Groups,
    GroupsCsv,
}

fn table(
    snap: &Snapshot,
    scope: Scope,
    category: &str,
    connection: Option<ConnectionRef>,
    p: QueryParams,
    out: Output,
) -> Result<Body, ApiError> {
    let name_base = connection.as_ref().map_or(category, |c| c.label.as_str()).to_string();
    let q = p.to_query(scope, category, connection)?;
    Ok(match out {
        Output::Rows => Body::Json(snap.rows(&q)?),
        Output::RowsCsv => Body::Csv(snap.rows_csv(&q)?, csv_name(&name_base)),
        Output::Groups => Body::Json(snap.group_by(&q, p.group_column()?)?),
        Output::GroupsCsv => {
            let col = p.group_column()?;
            Body::Csv(snap.group_by_csv(&q, col)?, csv_name(&format!("{name_base}_by_{col}")))
        }
    })
}

fn source_table(out: Output) -> impl Fn(Shared, Path<(String, String)>, Params) -> std::future::Ready<Reply> + Clone {
    move |State(st): Shared, Path((id, cat)): Path<(String, String)>, p: Params| {
        std::future::ready(reply(&st, |s| table(s, Scope::Source(id), &cat, None, params(p)?, out)))
    }
}

fn connection_table(
    out: Output,
) -> impl Fn(Shared, Path<(String, String, String, String)>, Params) -> std::future::Ready<Reply> + Clone {
    move |State(st): Shared, Path((id, cat, key, label)): Path<(String, String, String, String)>, p: Params| {
        std::future::ready(reply(&st, |s| {
            let conn = ConnectionRef { key: parse_key(&key)?, label };
            table(s, Scope::Source(id), &cat, Some(conn), params(p)?, out)
        }))
    }
}

fn global_table(out: Output) -> impl Fn(Shared, Path<String>, Params) -> std::future::Ready<Reply> + Clone {
    move |State(st): Shared, Path(cat): Path<String>, p: Params| {
        std::future::ready(reply(&st, |s| table(s, Scope::Global, &cat, None, params(p)?, out)))
    }
}

async fn health(State(st): Shared) -> Reply {
    reply(&st, |s| Ok(Body::Json(s.health())))
}

async fn templates(State(st): Shared) -> Reply {
    reply(&st, |s| Ok(Body::Json(s.templates())))
}

async fn records(State(st): Shared, Path(id): Path<String>) -> Reply {
    reply(&st, |s| s.records(&id).map(Body::Json))
}

async fn categories(State(st): Shared, Path(id): Path<String>, p: Params) -> Reply {
    reply(&st, |s| {
        let p = params(p)?;
        s.categories(&id, p.record.as_deref()).map(Body::Json)
    })
}

async fn entity(State(st): Shared, Path((id, cat, key)): Path<(String, String, String)>) -> Reply {
    reply(&st, |s| s.entity(&id, &cat, &parse_key(&key)?).map(Body::Json))
}

async fn global_categories(State(st): Shared) -> Reply {
    reply(&st, |s| Ok(Body::Json(s.global_categories())))
}

async fn entity_sources(State(st): Shared, Path((cat, key)): Path<(String, String)>) -> Reply {
    reply(&st, |s| s.entity_sources(&cat, &parse_key(&key)?).map(Body::Json))
}

async fn transcript(State(st): Shared, Path((id, rec)): Path<(String, String)>) -> Reply {
    reply(&st, |s| s.record_text(&id, &rec).map(Body::Transcript))
}

async fn reload(State(st): Shared) -> Reply {
    if !st.admin {
        let generation = st.snapshot().generation;
        return Reply {
            generation,
            result: Err(ApiError::new(403, "forbidden", "reload is disabled; start the server with --admin")),
        };
    }
    match st.reload().await {
        Ok(v) => {
            let generation = v["generation"].as_u64().unwrap_or_default();
            Reply { generation, result: Ok(Body::Json(v)) }
        }
        Err(e) => Reply { generation: st.snapshot().generation, result: Err(e) },
    }
}

async fn fallback(State(st): Shared) -> Reply {
    reply(&st, |_| Err(ApiError::new(404, "not_found", "no such endpoint")))
}

/// `origins` empty means any origin.
pub fn cors(origins: &[String]) -> CorsLayer {
    let allow = if origins.is_empty() {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
        .expose_headers([HeaderName::from_static(GENERATION_HEADER), header::CONTENT_DISPOSITION])
}

pub fn router(state: Arc<AppState>) -> Router {
    let src = "/api/sources/{id}/categories/{cat}";
    let conn = "/api/sources/{id}/categories/{cat}/entities/{key}/connections/{label}";
    let all = "/api/all/categories/{cat}";
    Router::new()
        .route("/api/health", get(health))
        .route("/api/templates", get(templates))
        .route("/api/sources/{id}/records", get(records))
        .route("/api/sources/{id}/categories", get(categories))
        .route(&format!("{src}/rows"), get(source_table(Output::Rows)))
        .route(&format!("{src}/rows/export.csv"), get(source_table(Output::RowsCsv)))
        .route(&format!("{src}/groupby"), get(source_table(Output::Groups)))
        .route(&format!("{src}/groupby/export.csv"), get(source_table(Output::GroupsCsv)))
        .route(&format!("{src}/entities/{{key}}"), get(entity))
        .route(&format!("{conn}/rows"), get(connection_table(Output::Rows)))
        .route(&format!("{conn}/rows/export.csv"), get(connection_table(Output::RowsCsv)))
        .route(&format!("{conn}/groupby"), get(connection_table(Output::Groups)))
        .route(&format!("{conn}/groupby/export.csv"), get(connection_table(Output::GroupsCsv)))
        .route("/api/all/categories", get(global_categories))
        .route(&format!("{all}/rows"), get(global_table(Output::Rows)))
        .route(&format!("{all}/rows/export.csv"), get(global_table(Output::RowsCsv)))
        .route(&format!("{all}/groupby"), get(global_table(Output::Groups)))
        .route(&format!("{all}/groupby/export.csv"), get(global_table(Output::GroupsCsv)))
        .route(&format!("{all}/entities/{{key}}/sources"), get(entity_sources))
        .route("/api/records/{source}/{record}", get(transcript))
        .route("/api/admin/reload", post(reload))
        .fallback(fallback)
        .with_state(state)
}
