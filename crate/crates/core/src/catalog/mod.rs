//! Entity tables extracted from the corpus, per source and across sources.

mod cell;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};

use crate::config::{
    ConfigBundle, EntityCategoryConfig, ExploreAllConfig, JoinKind, SourceConfig, TemplateEntry,
    ValueKind,
};
use crate::corpus::{coerce_scalar, evaluate_from, evaluate_path, Corpus, Scalar, SourceRecords};

pub use cell::{CellValue, PartialDate, TypedValue, ABSENT_DISPLAY, MISSING_DISPLAY};

/// Separator between several values a column path matches under one base node.
pub const MULTI_VALUE_SEPARATOR: &str = "; ";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("unresolved reference: {0}")]
    UnresolvedReference(String),
    #[error("{what} {name:?} not found")]
    NotFound { what: &'static str, name: String },
}

impl CatalogError {
    fn not_found(what: &'static str, name: &str) -> Self {
        CatalogError::NotFound { what, name: name.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildWarning {
    pub source_type_id: String,
    pub record_id: String,
    pub locator: String,
    pub message: String,
}

/// JSON array of the identity columns' display strings, in configured order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct EntityKey(String);

impl<'de> Deserialize<'de> for EntityKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        EntityKey::parse(&text)
            .ok_or_else(|| serde::de::Error::custom("entity key must be a canonical JSON array of strings"))
    }
}

impl EntityKey {
    pub fn from_parts<S: AsRef<str>>(parts: &[S]) -> Self {
        let parts: Vec<&str> = parts.iter().map(AsRef::as_ref).collect();
        EntityKey(serde_json::to_string(&parts).expect("string arrays serialize"))
    }

    /// Accepts only a canonical key: a JSON array of strings, serialized the
    /// way [`EntityKey::from_parts`] would.
    pub fn parse(text: &str) -> Option<Self> {
        let parts: Vec<String> = serde_json::from_str(text).ok()?;
        let key = Self::from_parts(&parts);
        (key.0 == text && !parts.is_empty()).then_some(key)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn parts(&self) -> Vec<String> {
        serde_json::from_str(&self.0).expect("canonical key")
    }

    pub fn percent_encoded(&self) -> String {
        percent_encoding::utf8_percent_encode(&self.0, crate::URL_SEGMENT)
            .to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityRow {
    pub source_type_id: Arc<str>,
    pub category: Arc<str>,
    pub cells: Vec<CellValue>,
    /// Sorted, deduplicated record ids.
    pub provenance: Vec<Arc<str>>,
    pub key: EntityKey,
}

impl EntityRow {
    pub fn entity_key(&self) -> &EntityKey {
        &self.key
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnDesc {
    pub name: String,
    pub kind: ValueKind,
}

/// Rows of one entity category plus lookup indexes.
#[derive(Debug, Clone, Serialize)]
pub struct EntityTable {
    pub name: String,
    pub columns: Vec<ColumnDesc>,
    pub rows: Vec<EntityRow>,
    #[serde(skip)]
    by_key: HashMap<EntityKey, Vec<usize>>,
    #[serde(skip)]
    by_record: HashMap<Arc<str>, Vec<usize>>,
}

impl EntityTable {
    fn new(name: String, columns: Vec<ColumnDesc>, rows: Vec<EntityRow>) -> Self {
        let mut by_key: HashMap<EntityKey, Vec<usize>> = HashMap::new();
        let mut by_record: HashMap<Arc<str>, Vec<usize>> = HashMap::new();
        for (i, row) in rows.iter().enumerate() {
            by_key.entry(row.key.clone()).or_default().push(i);
            for rec in &row.provenance {
                by_record.entry(rec.clone()).or_default().push(i);
            }
        }
        Self { name, columns, rows, by_key, by_record }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Indices of rows bearing `key`, in table order.
    pub fn rows_with_key(&self, key: &EntityKey) -> &[usize] {
        self.by_key.get(key).map_or(&[], Vec::as_slice)
    }

    /// Indices of rows whose provenance includes `record_id`, in table order.
    pub fn rows_in_record(&self, record_id: &str) -> &[usize] {
        self.by_record.get(record_id).map_or(&[], Vec::as_slice)
    }

    pub fn lookup(&self, key: &EntityKey) -> Vec<&EntityRow> {
        self.rows_with_key(key).iter().map(|&i| &self.rows[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ResolvedJoin {
    SameRecord,
    KeyMatch { local: usize, remote: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Connection {
    pub label: String,
    /// Index of the target category within the same source catalog.
    pub target: usize,
    pub join: ResolvedJoin,
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceCategory {
    pub table: EntityTable,
    pub connections: Vec<Connection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceCatalog {
    pub template: TemplateEntry,
    pub categories: Vec<SourceCategory>,
    /// Every record of the source, sorted.
    pub record_ids: Vec<Arc<str>>,
}

impl SourceCatalog {
    pub fn source_type_id(&self) -> &str {
        &self.template.source_type_id
    }

    pub fn category(&self, name: &str) -> Option<&SourceCategory> {
        self.categories.iter().find(|c| c.table.name == name)
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c.table.name == name)
    }

    pub fn has_record(&self, record_id: &str) -> bool {
        self.record_ids.binary_search_by(|r| (**r).cmp(record_id)).is_ok()
    }

    /// Deduplicated row count per category, optionally scoped to one record.
    pub fn category_counts(&self, record_id: Option<&str>) -> Result<Vec<(String, usize)>, CatalogError> {
        if let Some(r) = record_id {
            if !self.has_record(r) {
                return Err(CatalogError::not_found("record", r));
            }
        }
        Ok(self
            .categories
            .iter()
            .map(|c| {
                let n = match record_id {
                    Some(r) => c.table.rows_in_record(r).len(),
                    None => c.table.rows.len(),
                };
                (c.table.name.clone(), n)
            })
            .collect())
    }

    pub fn lookup(&self, category: &str, key: &EntityKey) -> Result<Vec<&EntityRow>, CatalogError> {
        let cat = self
            .category(category)
            .ok_or_else(|| CatalogError::not_found("category", category))?;
        Ok(cat.table.lookup(key))
    }
}

struct Extractor<'a> {
    config: &'a EntityCategoryConfig,
    identity: Vec<usize>,
}

impl<'a> Extractor<'a> {
    fn new(config: &'a EntityCategoryConfig) -> Result<Self, CatalogError> {
        let identity = config
            .identity
            .iter()
            .map(|c| {
                config.column_index(c).ok_or_else(|| {
                    CatalogError::UnresolvedReference(format!(
                        "identity column {c:?} of {:?}",
                        config.name
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { config, identity })
    }

    /// One candidate cell tuple per base node, in document order.
    fn candidates(
        &self,
        record: &crate::corpus::TranscriptRecord,
        warnings: &mut Vec<BuildWarning>,
    ) -> Vec<Vec<CellValue>> {
        let mut out = Vec::new();
        for base in evaluate_path(record, &self.config.base_path) {
            let mut cells = Vec::with_capacity(self.config.columns.len());
            for col in &self.config.columns {
                let mut values = Vec::new();
                for m in evaluate_from(base.node, &base.locator, &col.path) {
                    match coerce_scalar(m.node) {
                        Scalar::Text(t) => values.push(t),
                        Scalar::Blank => {}
                        Scalar::Composite => warnings.push(BuildWarning {
                            source_type_id: record.source_type_id.clone(),
                            record_id: record.record_id.clone(),
                            locator: m.locator,
                            message: format!(
                                "column {:?} of {:?} expects a scalar, found a composite value; ignored",
                                col.name, self.config.name
                            ),
                        }),
                    }
                }
                cells.push(if values.is_empty() {
                    CellValue::MissingInRecord
                } else {
                    CellValue::present(values.join(MULTI_VALUE_SEPARATOR), col.kind)
                });
            }
            out.push(cells);
        }
        out
    }

    fn key(&self, cells: &[CellValue]) -> EntityKey {
        let parts: Vec<&str> = self.identity.iter().map(|&i| cells[i].display()).collect();
        EntityKey::from_parts(&parts)
    }
}

/// Extracts, merges, and indexes every category of one source type.
///
/// Candidate rows with identical cells merge into one row whose provenance is
/// the union of their records; row order is first appearance.
pub fn build_source_catalog(
    template: &TemplateEntry,
    config: &SourceConfig,
    records: Option<&SourceRecords>,
) -> Result<(SourceCatalog, Vec<BuildWarning>), CatalogError> {
    let source_id: Arc<str> = Arc::from(template.source_type_id.as_str());
    let record_list = records.map(SourceRecords::records).unwrap_or_default();
    let record_ids: Vec<Arc<str>> = record_list.iter().map(|r| Arc::from(r.record_id.as_str())).collect();
    let mut warnings = Vec::new();
    let mut categories = Vec::with_capacity(config.categories.len());

    for cat in &config.categories {
        let extractor = Extractor::new(cat)?;
        let cat_name: Arc<str> = Arc::from(cat.name.as_str());
        let mut rows: Vec<EntityRow> = Vec::new();
        let mut merged: HashMap<Vec<Option<String>>, usize> = HashMap::new();
        for (record, rid) in record_list.iter().zip(&record_ids) {
            for cells in extractor.candidates(record, &mut warnings) {
                let merge_key: Vec<Option<String>> =
                    cells.iter().map(|c| c.merge_key().map(str::to_owned)).collect();
                if let Some(&i) = merged.get(&merge_key) {
                    let prov = &mut rows[i].provenance;
                    if prov.last() != Some(rid) {
                        prov.push(rid.clone());
                    }
                    continue;
                }
                merged.insert(merge_key, rows.len());
                rows.push(EntityRow {
                    source_type_id: source_id.clone(),
                    category: cat_name.clone(),
                    key: extractor.key(&cells),
                    cells,
                    provenance: vec![rid.clone()],
                });
            }
        }
        let columns = cat
            .columns
            .iter()
            .map(|c| ColumnDesc { name: c.name.clone(), kind: c.kind })
            .collect();
        let connections = resolve_connections(config, cat)?;
        categories.push(SourceCategory {
            table: EntityTable::new(cat.name.clone(), columns, rows),
            connections,
        });
    }

    Ok((SourceCatalog { template: template.clone(), categories, record_ids }, warnings))
}

fn resolve_connections(
    config: &SourceConfig,
    cat: &EntityCategoryConfig,
) -> Result<Vec<Connection>, CatalogError> {
    let unresolved = |what: String| CatalogError::UnresolvedReference(format!("{what} in {:?}", cat.name));
    cat.connections
        .iter()
        .map(|conn| {
            let target = config
                .categories
                .iter()
                .position(|c| c.name == conn.target_category)
                .ok_or_else(|| unresolved(format!("target {:?}", conn.target_category)))?;
            let join = match &conn.join {
                JoinKind::SameRecord => ResolvedJoin::SameRecord,
                JoinKind::KeyMatch { local_column, remote_column } => ResolvedJoin::KeyMatch {
                    local: cat
                        .column_index(local_column)
                        .ok_or_else(|| unresolved(format!("local column {local_column:?}")))?,
                    remote: config.categories[target]
                        .column_index(remote_column)
                        .ok_or_else(|| unresolved(format!("remote column {remote_column:?}")))?,
                },
            };
            Ok(Connection { label: conn.label.clone(), target, join })
        })
        .collect()
}

/// Where a global table's rows came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappedTable {
    pub source_type_id: String,
    pub category: String,
    /// Half-open row range within the global table.
    pub rows: std::ops::Range<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalCategory {
    pub group_label: String,
    pub table: EntityTable,
    pub mapped: Vec<MappedTable>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GlobalCatalog {
    pub categories: Vec<GlobalCategory>,
}

impl GlobalCatalog {
    pub fn category(&self, name: &str) -> Option<&GlobalCategory> {
        self.categories.iter().find(|c| c.table.name == name)
    }
}

/// Concatenates mapped source tables under a unified column list.
///
/// Rows are never merged across sources; a column a source lacks holds
/// [`CellValue::ColumnAbsentInSource`]. Each unified column takes the kind of
/// its first occurrence, and cells from other sources are read under it.
pub fn build_global_catalog(
    sources: &BTreeMap<String, SourceCatalog>,
    config: &ExploreAllConfig,
) -> Result<GlobalCatalog, CatalogError> {
    let mut categories = Vec::with_capacity(config.categories.len());
    for gc in &config.categories {
        let mut tables = Vec::with_capacity(gc.mappings.len());
        for m in &gc.mappings {
            let table = sources
                .get(&m.source)
                .and_then(|s| s.category(&m.category))
                .map(|c| &c.table)
                .ok_or_else(|| {
                    CatalogError::UnresolvedReference(format!(
                        "global {:?} maps missing table {:?}/{:?}",
                        gc.name, m.source, m.category
                    ))
                })?;
            tables.push((m, table));
        }

        let mut columns: Vec<ColumnDesc> = Vec::new();
        for (_, t) in &tables {
            for c in &t.columns {
                if !columns.iter().any(|u| u.name == c.name) {
                    columns.push(c.clone());
                }
            }
        }

        let mut rows = Vec::new();
        let mut mapped = Vec::with_capacity(tables.len());
        for (m, t) in &tables {
            // (source position, whether the unified kind differs)
            let positions: Vec<Option<(usize, bool)>> = columns
                .iter()
                .map(|u| t.column_index(&u.name).map(|i| (i, t.columns[i].kind != u.kind)))
                .collect();
            let start = rows.len();
            rows.extend(t.rows.iter().map(|row| EntityRow {
                cells: positions
                    .iter()
                    .zip(&columns)
                    .map(|(p, u)| match *p {
                        None => CellValue::ColumnAbsentInSource,
                        Some((i, false)) => row.cells[i].clone(),
                        Some((i, true)) => row.cells[i].retyped(u.kind),
                    })
                    .collect(),
                ..row.clone()
            }));
            mapped.push(MappedTable {
                source_type_id: m.source.clone(),
                category: m.category.clone(),
                rows: start..rows.len(),
            });
        }
        categories.push(GlobalCategory {
            group_label: gc.group_label.clone(),
            table: EntityTable::new(gc.name.clone(), columns, rows),
            mapped,
        });
    }
    Ok(GlobalCatalog { categories })
}

/// Source catalogs keyed by source type id, plus the global view.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Catalogs {
    pub sources: BTreeMap<String, SourceCatalog>,
    pub global: GlobalCatalog,
}

impl Catalogs {
    pub fn build(bundle: &ConfigBundle, corpus: &Corpus) -> Result<(Self, Vec<BuildWarning>), CatalogError> {
        let built: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = bundle
                .templates
                .iter()
                .map(|t| {
                    scope.spawn(move || {
                        let config = bundle.sources.get(&t.source_type_id).ok_or_else(|| {
                            CatalogError::UnresolvedReference(format!(
                                "no configuration for {:?}",
                                t.source_type_id
                            ))
                        })?;
                        build_source_catalog(t, config, corpus.source(&t.source_type_id))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("catalog build panicked")).collect()
        });
        let mut sources = BTreeMap::new();
        let mut warnings = Vec::new();
        for result in built {
            let (catalog, w) = result?;
            warnings.extend(w);
            sources.insert(catalog.source_type_id().to_string(), catalog);
        }
        let global = build_global_catalog(&sources, &bundle.explore_all)?;
        Ok((Self { sources, global }, warnings))
    }

    /// Serialization used to compare builds byte for byte.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("catalogs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_keys_are_canonical_json_arrays() {
        let k = EntityKey::from_parts(&["Aurora"]);
        assert_eq!(k.as_str(), r#"["Aurora"]"#);
        assert_eq!(EntityKey::parse(r#"["Aurora"]"#), Some(k.clone()));
        assert_eq!(EntityKey::parse(r#"[ "Aurora" ]"#), None);
        assert_eq!(EntityKey::parse("[]"), None);
        assert_eq!(EntityKey::parse("Aurora"), None);
        assert_eq!(k.percent_encoded(), "%5B%22Aurora%22%5D");
        let tricky = EntityKey::from_parts(&["a\"b", "c/d", "é"]);
        assert_eq!(EntityKey::parse(tricky.as_str()), Some(tricky.clone()));
        assert_eq!(tricky.parts(), ["a\"b", "c/d", "é"]);
    }

    #[test]
    fn distinct_tuples_give_distinct_keys() {
        assert_ne!(EntityKey::from_parts(&["a,b"]), EntityKey::from_parts(&["a", "b"]));
    }
}
