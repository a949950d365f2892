//! Response payloads, shared by the HTTP handlers and the `query` command so
//! both produce identical bytes for identical parameters.

use std::collections::BTreeMap;

use archex_core::catalog::{ColumnDesc, EntityKey};
use archex_core::config::ValueKind;
use archex_core::export::{group_by_csv, selection_csv};
use archex_core::query::{
    self, ConnectionRef, Filter, FilterOp, Page, QueryError, SortSpec, DEFAULT_PAGE_LIMIT,
};
use archex_core::{Engine, EngineError, Scope, TableQuery};
use percent_encoding::utf8_percent_encode;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Every failure a client can see.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(status: u16, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), detail: None }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(400, "bad_request", message)
    }

    pub fn not_found(what: &str, name: &str) -> Self {
        ApiError {
            detail: Some(json!({ what: name })),
            ..Self::new(404, "not_found", format!("{what} {name:?} not found"))
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    /// Body of an error response.
    pub fn body(&self, generation: u64) -> Value {
        json!({ "error": self, "generation": generation })
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let status = if e.code() == "not_found" { 404 } else { 400 };
        ApiError { status, code: e.code(), message: e.to_string(), detail: e.detail() }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub fn reload_failed(err: &EngineError) -> ApiError {
    let detail = match err {
        EngineError::Invalid(report) => json!({
            "report": report,
            "summary": report.to_string().lines().last().unwrap_or_default(),
        }),
        other => json!({ "error": other.to_string() }),
    };
    ApiError::new(422, "reload_failed", format!("reload failed: {err}")).with_detail(detail)
}

/// Query-string parameters of the listing, grouping, and export endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize, Serialize)]
pub struct QueryParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filters: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

fn page_number(name: &str, text: Option<&str>, default: usize) -> Result<usize, ApiError> {
    match text {
        None => Ok(default),
        Some(t) => t.trim().parse().map_err(|_| {
            ApiError::from(QueryError::BadPage(format!("{name} must be a non-negative integer, got {t:?}")))
        }),
    }
}

impl QueryParams {
    pub fn to_query(
        &self,
        scope: Scope,
        category: &str,
        connection: Option<ConnectionRef>,
    ) -> Result<TableQuery, ApiError> {
        let filters = match self.filters.as_deref() {
            None | Some("") => Vec::new(),
            Some(text) => Filter::parse_list(text)?,
        };
        let ascending = match self.order.as_deref() {
            None | Some("asc") => true,
            Some("desc") => false,
            Some(other) => return Err(ApiError::bad_request(format!("order must be asc or desc, got {other:?}"))),
        };
        if self.order.is_some() && self.sort.is_none() {
            return Err(ApiError::bad_request("order given without sort"));
        }
        let page = Page {
            offset: page_number("offset", self.offset.as_deref(), 0)?,
            limit: page_number("limit", self.limit.as_deref(), DEFAULT_PAGE_LIMIT)?,
        };
        Ok(TableQuery {
            scope,
            category: category.to_string(),
            record: self.record.clone(),
            connection,
            filters,
            sort: self.sort.clone().map(|column| SortSpec { column, ascending }),
            page,
        })
    }

    pub fn group_column(&self) -> Result<&str, ApiError> {
        self.column.as_deref().ok_or_else(|| ApiError::bad_request("missing column parameter"))
    }
}

/// Accepts any non-empty JSON array of strings and returns its canonical key.
pub fn parse_key(text: &str) -> Result<EntityKey, ApiError> {
    let parts: Vec<String> = serde_json::from_str(text).map_err(|_| {
        ApiError::bad_request(format!("entity key must be a JSON array of strings, got {text:?}"))
    })?;
    if parts.is_empty() {
        return Err(ApiError::bad_request("entity key must not be empty"));
    }
    Ok(EntityKey::from_parts(&parts))
}

fn enc(s: &str) -> String {
    utf8_percent_encode(s, archex_core::URL_SEGMENT).to_string()
}

pub fn record_path(source: &str, record: &str) -> String {
    format!("/api/records/{}/{}", enc(source), enc(record))
}

pub fn entity_path(source: &str, category: &str, key: &EntityKey) -> String {
    format!("/api/sources/{}/categories/{}/entities/{}", enc(source), enc(category), key.percent_encoded())
}

fn stamp(mut v: Value, generation: u64) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("generation".into(), json!(generation));
    }
    v
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payloads serialize")
}

fn operators(kind: ValueKind) -> Vec<FilterOp> {
    FilterOp::ALL.into_iter().filter(|op| op.legal_for(kind)).collect()
}

fn column_payload(columns: &[ColumnDesc]) -> Value {
    columns
        .iter()
        .map(|c| json!({ "name": c.name, "kind": c.kind, "operators": operators(c.kind) }))
        .collect()
}

/// One immutable engine build plus its generation number.
#[derive(Debug)]
pub struct Snapshot {
    pub generation: u64,
    pub engine: Engine,
}

impl Snapshot {
    pub fn new(engine: Engine, generation: u64) -> Self {
        Snapshot { generation, engine }
    }

    fn source(&self, id: &str) -> Result<&archex_core::catalog::SourceCatalog, ApiError> {
        self.engine.catalogs.sources.get(id).ok_or_else(|| ApiError::not_found("source", id))
    }

    pub fn health(&self) -> Value {
        stamp(json!({ "status": "ok" }), self.generation)
    }

    /// Source types grouped by label, groups in first-declared order.
    pub fn templates(&self) -> Value {
        let mut groups: Vec<(String, Vec<Value>)> = Vec::new();
        for t in &self.engine.bundle.templates {
            let entry = json!({
                "id": t.source_type_id,
                "name": t.display_name,
                "description": t.description,
                "record_count": self.engine.corpus.record_count(&t.source_type_id),
            });
            match groups.iter_mut().find(|(g, _)| *g == t.group_label) {
                Some((_, list)) => list.push(entry),
                None => groups.push((t.group_label.clone(), vec![entry])),
            }
        }
        let groups: Vec<Value> = groups
            .into_iter()
            .map(|(group, sources)| json!({ "group": group, "sources": sources }))
            .collect();
        stamp(json!({ "groups": groups }), self.generation)
    }

    pub fn records(&self, source: &str) -> Result<Value, ApiError> {
        let src = self.source(source)?;
        let records: Vec<Value> = src
            .record_ids
            .iter()
            .map(|r| {
                let external = src.template.transcript_url(r);
                json!({
                    "record_id": r,
                    "external": external.is_some(),
                    "url": external.unwrap_or_else(|| record_path(source, r)),
                })
            })
            .collect();
        Ok(stamp(
            json!({ "source": source, "name": src.template.display_name, "records": records }),
            self.generation,
        ))
    }

    pub fn categories(&self, source: &str, record: Option<&str>) -> Result<Value, ApiError> {
        let src = self.source(source)?;
        let counts = src.category_counts(record).map_err(|_| {
            ApiError::not_found("record", record.unwrap_or_default())
        })?;
        let categories: Vec<Value> = src
            .categories
            .iter()
            .zip(counts)
            .map(|(cat, (name, rows))| {
                let connections: Vec<Value> = cat
                    .connections
                    .iter()
                    .map(|c| json!({ "label": c.label, "target": src.categories[c.target].table.name }))
                    .collect();
                json!({
                    "name": name,
                    "rows": rows,
                    "columns": column_payload(&cat.table.columns),
                    "identity": self.engine.bundle.sources[source].categories.iter()
                        .find(|c| c.name == name).map(|c| c.identity.clone()).unwrap_or_default(),
                    "connections": connections,
                })
            })
            .collect();
        Ok(stamp(
            json!({ "source": source, "record": record, "categories": categories }),
            self.generation,
        ))
    }

    pub fn rows(&self, q: &TableQuery) -> Result<Value, ApiError> {
        let page = query::run_table_query(&self.engine.catalogs, q)?;
        Ok(stamp(to_value(&page), self.generation))
    }

    pub fn rows_csv(&self, q: &TableQuery) -> Result<Vec<u8>, ApiError> {
        let sel = query::select(&self.engine.catalogs, q)?;
        Ok(selection_csv(&sel))
    }

    pub fn group_by(&self, q: &TableQuery, column: &str) -> Result<Value, ApiError> {
        let g = query::group_by(&self.engine.catalogs, q, column)?;
        Ok(stamp(to_value(&g), self.generation))
    }

    pub fn group_by_csv(&self, q: &TableQuery, column: &str) -> Result<Vec<u8>, ApiError> {
        let g = query::group_by(&self.engine.catalogs, q, column)?;
        Ok(group_by_csv(&g))
    }

    /// Entity detail; record links fall back to the internal transcript path.
    pub fn entity(&self, source: &str, category: &str, key: &EntityKey) -> Result<Value, ApiError> {
        let d = query::entity_detail(&self.engine.catalogs, source, category, key)?;
        let mut v = to_value(&d);
        if let Some(records) = v["records"].as_array_mut() {
            for (rec, link) in records.iter_mut().zip(&d.records) {
                rec["external"] = json!(link.url.is_some());
                rec["url"] = json!(link.url.clone().unwrap_or_else(|| record_path(source, &link.record_id)));
            }
        }
        if let Some(conns) = v["connections"].as_array_mut() {
            let cat = &self.engine.catalogs.sources[source];
            for (c, t) in conns.iter_mut().zip(&d.connections) {
                let target = cat.category(&t.target_category).expect("resolved target");
                c["columns"] = column_payload(&target.table.columns);
            }
        }
        v["columns"] = column_payload(&d.columns);
        Ok(stamp(v, self.generation))
    }

    pub fn global_categories(&self) -> Value {
        let mut groups: Vec<(String, Vec<Value>)> = Vec::new();
        for gc in &self.engine.catalogs.global.categories {
            let mapped: Vec<Value> = gc
                .mapped
                .iter()
                .map(|m| json!({ "source": m.source_type_id, "category": m.category, "rows": m.rows.len() }))
                .collect();
            let entry = json!({
                "name": gc.table.name,
                "rows": gc.table.rows.len(),
                "columns": column_payload(&gc.table.columns),
                "mapped": mapped,
            });
            match groups.iter_mut().find(|(g, _)| *g == gc.group_label) {
                Some((_, list)) => list.push(entry),
                None => groups.push((gc.group_label.clone(), vec![entry])),
            }
        }
        let groups: Vec<Value> = groups
            .into_iter()
            .map(|(group, categories)| json!({ "group": group, "categories": categories }))
            .collect();
        stamp(json!({ "groups": groups }), self.generation)
    }

    pub fn entity_sources(&self, category: &str, key: &EntityKey) -> Result<Value, ApiError> {
        let sources = query::entity_sources(&self.engine.catalogs, category, key)?;
        let list: Vec<Value> = sources
            .iter()
            .map(|s| {
                let mut v = to_value(s);
                v["redirect"] = json!(entity_path(&s.source_type_id, &s.category, key));
                v
            })
            .collect();
        Ok(stamp(json!({ "category": category, "key": key, "sources": list }), self.generation))
    }

    pub fn record_text(&self, source: &str, record: &str) -> Result<Vec<u8>, ApiError> {
        self.source(source)?;
        let rec = self
            .engine
            .corpus
            .record(source, record)
            .ok_or_else(|| ApiError::not_found("record", record))?;
        rec.record_text().map_err(|e| ApiError::new(500, "retrieval_failed", e.to_string()))
    }

    /// Counts printed by `ingest`, also useful after a reload.
    pub fn summary(&self) -> Value {
        let sources: BTreeMap<&str, Value> = self
            .engine
            .catalogs
            .sources
            .iter()
            .map(|(id, src)| {
                let cats: Vec<Value> = src
                    .categories
                    .iter()
                    .map(|c| json!({ "name": c.table.name, "rows": c.table.rows.len() }))
                    .collect();
                (id.as_str(), json!({ "records": src.record_ids.len(), "categories": cats }))
            })
            .collect();
        stamp(json!({ "sources": sources }), self.generation)
    }
}
