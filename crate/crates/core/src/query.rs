//! Filtering, sorting, paging, grouping, and entity navigation over catalogs.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::{
    CellValue, Catalogs, ColumnDesc, EntityKey, EntityRow, EntityTable, ResolvedJoin,
    SourceCatalog, TypedValue,
};
use crate::config::ValueKind;
use crate::fold::fold;

pub const DEFAULT_PAGE_LIMIT: usize = 100;
pub const MAX_PAGE_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("{what} {name:?} not found")]
    NotFound { what: &'static str, name: String },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("filter on {column:?}: {message}")]
    BadFilter { column: String, message: String },
    #[error("bad page: {0}")]
    BadPage(String),
    #[error("bad request: {0}")]
    BadRequest(String),
}

impl QueryError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::NotFound { .. } => "not_found",
            QueryError::UnknownColumn(_) => "unknown_column",
            QueryError::BadFilter { .. } => "bad_filter",
            QueryError::BadPage(_) => "bad_page",
            QueryError::BadRequest(_) => "bad_request",
        }
    }

    pub fn detail(&self) -> Option<Value> {
        match self {
            QueryError::NotFound { what, name } => Some(serde_json::json!({ what.to_string(): name })),
            QueryError::UnknownColumn(c) | QueryError::BadFilter { column: c, .. } => {
                Some(serde_json::json!({ "column": c }))
            }
            _ => None,
        }
    }

    fn not_found(what: &'static str, name: &str) -> Self {
        QueryError::NotFound { what, name: name.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterOp {
    Contains,
    NotContains,
    Equals,
    NotEquals,
    StartsWith,
    EndsWith,
    NumEquals,
    NumNotEquals,
    LessThan,
    GreaterThan,
    InRange,
}

impl FilterOp {
    pub const ALL: [FilterOp; 11] = [
        FilterOp::Contains,
        FilterOp::NotContains,
        FilterOp::Equals,
        FilterOp::NotEquals,
        FilterOp::StartsWith,
        FilterOp::EndsWith,
        FilterOp::NumEquals,
        FilterOp::NumNotEquals,
        FilterOp::LessThan,
        FilterOp::GreaterThan,
        FilterOp::InRange,
    ];

    pub fn is_text(self) -> bool {
        matches!(
            self,
            FilterOp::Contains
                | FilterOp::NotContains
                | FilterOp::Equals
                | FilterOp::NotEquals
                | FilterOp::StartsWith
                | FilterOp::EndsWith
        )
    }

    /// Text operators apply to every column through its display string;
    /// the others need a numeric or date column.
    pub fn legal_for(self, kind: ValueKind) -> bool {
        self.is_text() || kind.is_typed()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    One(String),
    Range(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFilter")]
pub struct Filter {
    pub column: String,
    pub op: FilterOp,
    pub value: Operand,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    column: String,
    op: FilterOp,
    value: Value,
}

fn operand_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl TryFrom<RawFilter> for Filter {
    type Error = String;

    fn try_from(raw: RawFilter) -> Result<Self, String> {
        let value = match (&raw.value, raw.op) {
            (Value::Array(pair), FilterOp::InRange) if pair.len() == 2 => {
                match (operand_text(&pair[0]), operand_text(&pair[1])) {
                    (Some(a), Some(b)) => Operand::Range(a, b),
                    _ => return Err("in_range bounds must be strings or numbers".into()),
                }
            }
            (_, FilterOp::InRange) => return Err("in_range needs a [low, high] pair".into()),
            (v, _) => Operand::One(operand_text(v).ok_or("filter value must be a string or number")?),
        };
        Ok(Filter { column: raw.column, op: raw.op, value })
    }
}

impl Filter {
    pub fn new(column: impl Into<String>, op: FilterOp, value: impl Into<String>) -> Self {
        Filter { column: column.into(), op, value: Operand::One(value.into()) }
    }

    pub fn range(column: impl Into<String>, low: impl Into<String>, high: impl Into<String>) -> Self {
        Filter {
            column: column.into(),
            op: FilterOp::InRange,
            value: Operand::Range(low.into(), high.into()),
        }
    }

    /// Parses the wire form: a JSON array of `{column, op, value}` objects.
    pub fn parse_list(text: &str) -> Result<Vec<Filter>, QueryError> {
        serde_json::from_str(text).map_err(|e| QueryError::BadFilter {
            column: String::new(),
            message: format!("malformed filter list: {e}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Scope {
    Source(String),
    Global,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Source(id) => write!(f, "source {id:?}"),
            Scope::Global => f.write_str("global"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortSpec {
    pub column: String,
    pub ascending: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub offset: usize,
    pub limit: usize,
}

impl Default for Page {
    fn default() -> Self {
        Page { offset: 0, limit: DEFAULT_PAGE_LIMIT }
    }
}

/// Rows of a connection of one entity, listed instead of the whole category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionRef {
    pub key: EntityKey,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableQuery {
    pub scope: Scope,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<String>,
    /// When set, the listed table is the connection's target category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<ConnectionRef>,
    #[serde(default)]
    pub filters: Vec<Filter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<SortSpec>,
    #[serde(default)]
    pub page: Page,
}

impl TableQuery {
    pub fn new(scope: Scope, category: impl Into<String>) -> Self {
        TableQuery {
            scope,
            category: category.into(),
            record: None,
            connection: None,
            filters: Vec::new(),
            sort: None,
            page: Page::default(),
        }
    }

    pub fn source(source_type_id: impl Into<String>, category: impl Into<String>) -> Self {
        Self::new(Scope::Source(source_type_id.into()), category)
    }

    pub fn global(category: impl Into<String>) -> Self {
        Self::new(Scope::Global, category)
    }

    pub fn with_filter(mut self, filter: Filter) -> Self {
        self.filters.push(filter);
        self
    }

    pub fn with_record(mut self, record_id: impl Into<String>) -> Self {
        self.record = Some(record_id.into());
        self
    }

    pub fn sorted_by(mut self, column: impl Into<String>, ascending: bool) -> Self {
        self.sort = Some(SortSpec { column: column.into(), ascending });
        self
    }

    pub fn paged(mut self, offset: usize, limit: usize) -> Self {
        self.page = Page { offset, limit };
        self
    }
}

enum Predicate {
    Text { op: FilterOp, needle: String },
    Typed { op: FilterOp, low: TypedValue, high: Option<TypedValue> },
}

struct CompiledFilter {
    column: usize,
    predicate: Predicate,
}

impl CompiledFilter {
    fn compile(filter: &Filter, columns: &[ColumnDesc]) -> Result<Self, QueryError> {
        let bad = |message: String| QueryError::BadFilter { column: filter.column.clone(), message };
        let column = columns
            .iter()
            .position(|c| c.name == filter.column)
            .ok_or_else(|| QueryError::UnknownColumn(filter.column.clone()))?;
        let kind = columns[column].kind;
        if !filter.op.legal_for(kind) {
            return Err(bad(format!("operator {:?} is not available for {} columns", filter.op, kind.as_str())));
        }
        let operand_kind = match kind {
            ValueKind::Integer | ValueKind::Decimal => ValueKind::Decimal,
            k => k,
        };
        let parse = |text: &str| {
            TypedValue::parse(text, operand_kind)
                .ok_or_else(|| bad(format!("{text:?} is not a valid {} operand", kind.as_str())))
        };
        let predicate = match (&filter.value, filter.op) {
            (Operand::One(v), op) if op.is_text() => Predicate::Text { op, needle: fold(v).into_owned() },
            (Operand::Range(..), op) if op != FilterOp::InRange => {
                return Err(bad(format!("operator {op:?} takes a single value")))
            }
            (Operand::One(_), FilterOp::InRange) => return Err(bad("in_range needs a [low, high] pair".into())),
            (Operand::One(v), op) => Predicate::Typed { op, low: parse(v)?, high: None },
            (Operand::Range(a, b), op) => {
                let (low, high) = (parse(a)?, parse(b)?);
                if compare_typed(&low, &high) != Some(Ordering::Less)
                    && compare_typed(&low, &high) != Some(Ordering::Equal)
                {
                    return Err(bad("in_range needs low <= high".into()));
                }
                Predicate::Typed { op, low, high: Some(high) }
            }
        };
        Ok(CompiledFilter { column, predicate })
    }

    fn matches(&self, row: &EntityRow) -> bool {
        apply_compiled(&row.cells[self.column], &self.predicate)
    }
}

fn compare_typed(a: &TypedValue, b: &TypedValue) -> Option<Ordering> {
    match (a, b) {
        (TypedValue::Number(x), TypedValue::Number(y)) => x.partial_cmp(y),
        (TypedValue::Date(x), TypedValue::Date(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

fn apply_compiled(cell: &CellValue, predicate: &Predicate) -> bool {
    match predicate {
        Predicate::Text { op, needle } => {
            let hay = fold(cell.display());
            match op {
                FilterOp::Contains => hay.contains(needle.as_str()),
                FilterOp::NotContains => !hay.contains(needle.as_str()),
                FilterOp::Equals => *hay == **needle,
                FilterOp::NotEquals => *hay != **needle,
                FilterOp::StartsWith => hay.starts_with(needle.as_str()),
                FilterOp::EndsWith => hay.ends_with(needle.as_str()),
                _ => unreachable!("text predicate with typed operator"),
            }
        }
        Predicate::Typed { op, low, high } => {
            let Some(value) = cell.typed() else { return false };
            let Some(ord) = compare_typed(&value, low) else { return false };
            match op {
                FilterOp::NumEquals => ord == Ordering::Equal,
                FilterOp::NumNotEquals => ord != Ordering::Equal,
                FilterOp::LessThan => ord == Ordering::Less,
                FilterOp::GreaterThan => ord == Ordering::Greater,
                FilterOp::InRange => {
                    ord != Ordering::Less
                        && high
                            .as_ref()
                            .and_then(|h| compare_typed(&value, h))
                            .is_some_and(|o| o != Ordering::Greater)
                }
                _ => unreachable!("typed predicate with text operator"),
            }
        }
    }
}

/// Evaluates one filter against one cell.
///
/// The filter must already be legal for the cell's column; an operand that
/// does not parse under `kind` makes the filter match nothing.
pub fn apply_filter(cell: &CellValue, filter: &Filter, kind: ValueKind) -> bool {
    let columns = [ColumnDesc { name: filter.column.clone(), kind }];
    match CompiledFilter::compile(filter, &columns) {
        Ok(f) => apply_compiled(cell, &f.predicate),
        Err(_) => false,
    }
}

/// One row as served: cells are display strings aligned with the columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowView {
    pub source: String,
    pub category: String,
    pub key: EntityKey,
    pub cells: Vec<String>,
    pub provenance: Vec<String>,
}

impl RowView {
    pub fn of(row: &EntityRow) -> Self {
        RowView {
            source: row.source_type_id.to_string(),
            category: row.category.to_string(),
            key: row.key.clone(),
            cells: row.cells.iter().map(|c| c.display().to_string()).collect(),
            provenance: row.provenance.iter().map(|r| r.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TablePage {
    pub query: TableQuery,
    pub table: String,
    pub columns: Vec<ColumnDesc>,
    pub total_after_filter: usize,
    pub rows: Vec<RowView>,
}

/// Every row passing a query's scope and filters, sorted, before paging.
pub struct Selection<'a> {
    pub table: &'a EntityTable,
    pub rows: Vec<usize>,
}

impl<'a> Selection<'a> {
    pub fn rows(&self) -> impl Iterator<Item = &'a EntityRow> + '_ {
        self.rows.iter().map(|&i| &self.table.rows[i])
    }
}

fn source_catalog<'a>(catalogs: &'a Catalogs, id: &str) -> Result<&'a SourceCatalog, QueryError> {
    catalogs.sources.get(id).ok_or_else(|| QueryError::not_found("source", id))
}

/// Table and candidate rows (in table order) a query's scope selects.
fn scoped<'a>(catalogs: &'a Catalogs, q: &TableQuery) -> Result<(&'a EntityTable, Vec<usize>), QueryError> {
    if q.record.is_some() && q.connection.is_some() {
        return Err(QueryError::BadRequest("record and connection restrictions are exclusive".into()));
    }
    match &q.scope {
        Scope::Global => {
            if q.record.is_some() || q.connection.is_some() {
                return Err(QueryError::BadRequest(
                    "record and connection restrictions need a source scope".into(),
                ));
            }
            let cat = catalogs
                .global
                .category(&q.category)
                .ok_or_else(|| QueryError::not_found("category", &q.category))?;
            Ok((&cat.table, (0..cat.table.rows.len()).collect()))
        }
        Scope::Source(id) => {
            let src = source_catalog(catalogs, id)?;
            let cat = src
                .category(&q.category)
                .ok_or_else(|| QueryError::not_found("category", &q.category))?;
            if let Some(conn) = &q.connection {
                return connection_rows(src, &q.category, &conn.key, &conn.label);
            }
            match &q.record {
                Some(r) if !src.has_record(r) => Err(QueryError::not_found("record", r)),
                Some(r) => Ok((&cat.table, cat.table.rows_in_record(r).to_vec())),
                None => Ok((&cat.table, (0..cat.table.rows.len()).collect())),
            }
        }
    }
}

fn connection_rows<'a>(
    src: &'a SourceCatalog,
    category: &str,
    key: &EntityKey,
    label: &str,
) -> Result<(&'a EntityTable, Vec<usize>), QueryError> {
    let cat = src
        .category(category)
        .ok_or_else(|| QueryError::not_found("category", category))?;
    let conn = cat
        .connections
        .iter()
        .find(|c| c.label == label)
        .ok_or_else(|| QueryError::not_found("connection", label))?;
    let subject = cat.table.lookup(key);
    if subject.is_empty() {
        return Err(QueryError::not_found("entity", key.as_str()));
    }
    let target = &src.categories[conn.target].table;
    let rows = match conn.join {
        ResolvedJoin::SameRecord => {
            let records: BTreeSet<&Arc<str>> = subject.iter().flat_map(|r| &r.provenance).collect();
            let picked: BTreeSet<usize> = records
                .into_iter()
                .flat_map(|r| target.rows_in_record(r).iter().copied())
                .collect();
            picked.into_iter().collect()
        }
        ResolvedJoin::KeyMatch { local, remote } => {
            let wanted: HashSet<String> = subject
                .iter()
                .map(|r| &r.cells[local])
                .filter(|c| !c.is_sentinel())
                .map(|c| fold(c.display()).into_owned())
                .collect();
            target
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| {
                    let cell = &r.cells[remote];
                    !cell.is_sentinel() && wanted.contains(fold(cell.display()).as_ref())
                })
                .map(|(i, _)| i)
                .collect()
        }
    };
    Ok((target, rows))
}

enum SortKey<'a> {
    Typed(TypedValue),
    Text(std::borrow::Cow<'a, str>),
    Sentinel,
}

impl SortKey<'_> {
    fn class(&self) -> u8 {
        match self {
            SortKey::Typed(_) => 0,
            SortKey::Text(_) => 1,
            SortKey::Sentinel => 2,
        }
    }

    fn within(&self, other: &Self) -> Ordering {
        match (self, other) {
            (SortKey::Typed(a), SortKey::Typed(b)) => a.total_cmp(b),
            (SortKey::Text(a), SortKey::Text(b)) => a.cmp(b),
            _ => Ordering::Equal,
        }
    }
}

fn sort_key(cell: &CellValue, kind: ValueKind) -> SortKey<'_> {
    match cell {
        CellValue::Present { display, typed } => match typed {
            Some(t) if kind.is_typed() => SortKey::Typed(*t),
            _ => SortKey::Text(fold(display)),
        },
        _ => SortKey::Sentinel,
    }
}

/// Scope, then filters, then a stable sort.
///
/// Typed columns order typed values numerically or chronologically, then
/// unparsed text; text columns compare folded display strings. Sentinels
/// always come last, in either direction.
pub fn select<'a>(catalogs: &'a Catalogs, q: &TableQuery) -> Result<Selection<'a>, QueryError> {
    let (table, candidates) = scoped(catalogs, q)?;
    let filters = q
        .filters
        .iter()
        .map(|f| CompiledFilter::compile(f, &table.columns))
        .collect::<Result<Vec<_>, _>>()?;
    let sort_col = match &q.sort {
        Some(s) => Some((
            table
                .column_index(&s.column)
                .ok_or_else(|| QueryError::UnknownColumn(s.column.clone()))?,
            s.ascending,
        )),
        None => None,
    };
    let mut rows: Vec<usize> = candidates
        .into_iter()
        .filter(|&i| filters.iter().all(|f| f.matches(&table.rows[i])))
        .collect();
    if let Some((col, ascending)) = sort_col {
        let kind = table.columns[col].kind;
        let mut keyed: Vec<(SortKey<'_>, usize)> =
            rows.iter().map(|&i| (sort_key(&table.rows[i].cells[col], kind), i)).collect();
        keyed.sort_by(|(a, _), (b, _)| {
            a.class().cmp(&b.class()).then_with(|| {
                let o = a.within(b);
                if ascending { o } else { o.reverse() }
            })
        });
        rows = keyed.into_iter().map(|(_, i)| i).collect();
    }
    Ok(Selection { table, rows })
}

fn check_page(page: &Page) -> Result<(), QueryError> {
    if page.limit == 0 || page.limit > MAX_PAGE_LIMIT {
        return Err(QueryError::BadPage(format!(
            "limit must be between 1 and {MAX_PAGE_LIMIT}, got {}",
            page.limit
        )));
    }
    Ok(())
}

pub fn run_table_query(catalogs: &Catalogs, q: &TableQuery) -> Result<TablePage, QueryError> {
    check_page(&q.page)?;
    let sel = select(catalogs, q)?;
    let rows = sel
        .rows
        .iter()
        .skip(q.page.offset)
        .take(q.page.limit)
        .map(|&i| RowView::of(&sel.table.rows[i]))
        .collect();
    Ok(TablePage {
        query: q.clone(),
        table: sel.table.name.clone(),
        columns: sel.table.columns.clone(),
        total_after_filter: sel.rows.len(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub label: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupByResult {
    pub query: TableQuery,
    pub column: String,
    pub groups: Vec<Group>,
    pub total: usize,
}

/// Orders groups by count descending, then folded label, then raw label.
pub fn order_groups(groups: &mut [Group]) {
    groups.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| fold(&a.label).cmp(&fold(&b.label)))
            .then_with(|| a.label.cmp(&b.label))
    });
}

/// Row counts per display value of `column` over every row passing the
/// query's scope and filters. Sort and paging are ignored.
pub fn group_by(catalogs: &Catalogs, q: &TableQuery, column: &str) -> Result<GroupByResult, QueryError> {
    let mut unsorted = q.clone();
    unsorted.sort = None;
    let sel = select(catalogs, &unsorted)?;
    let col = sel
        .table
        .column_index(column)
        .ok_or_else(|| QueryError::UnknownColumn(column.to_string()))?;
    let mut counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for row in sel.rows() {
        *counts.entry(row.cells[col].display()).or_default() += 1;
    }
    let mut groups: Vec<Group> = counts
        .into_iter()
        .map(|(label, count)| Group { label: label.to_string(), count })
        .collect();
    order_groups(&mut groups);
    Ok(GroupByResult {
        query: q.clone(),
        column: column.to_string(),
        groups,
        total: sel.rows.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionTable {
    pub label: String,
    pub target_category: String,
    pub page: TablePage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordLink {
    pub record_id: String,
    pub source_name: String,
    /// External transcript URL, when the source defines a pattern.
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityDetail {
    pub source: String,
    pub category: String,
    pub key: EntityKey,
    pub columns: Vec<ColumnDesc>,
    pub subject: Vec<RowView>,
    pub connections: Vec<ConnectionTable>,
    pub records: Vec<RecordLink>,
}

/// An entity's rows, one first page per connection, and the records that
/// mention it.
pub fn entity_detail(
    catalogs: &Catalogs,
    source_type_id: &str,
    category: &str,
    key: &EntityKey,
) -> Result<EntityDetail, QueryError> {
    let src = source_catalog(catalogs, source_type_id)?;
    let cat = src
        .category(category)
        .ok_or_else(|| QueryError::not_found("category", category))?;
    let subject = cat.table.lookup(key);
    if subject.is_empty() {
        return Err(QueryError::not_found("entity", key.as_str()));
    }
    let connections = cat
        .connections
        .iter()
        .map(|conn| {
            let mut q = TableQuery::source(source_type_id, category);
            q.connection = Some(ConnectionRef { key: key.clone(), label: conn.label.clone() });
            Ok(ConnectionTable {
                label: conn.label.clone(),
                target_category: src.categories[conn.target].table.name.clone(),
                page: run_table_query(catalogs, &q)?,
            })
        })
        .collect::<Result<_, QueryError>>()?;
    let records: BTreeSet<&Arc<str>> = subject.iter().flat_map(|r| &r.provenance).collect();
    let records = records
        .into_iter()
        .map(|r| RecordLink {
            record_id: r.to_string(),
            source_name: src.template.display_name.clone(),
            url: src.template.transcript_url(r),
        })
        .collect();
    Ok(EntityDetail {
        source: source_type_id.to_string(),
        category: category.to_string(),
        key: key.clone(),
        columns: cat.table.columns.clone(),
        subject: subject.into_iter().map(RowView::of).collect(),
        connections,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntitySource {
    pub source_type_id: String,
    pub display_name: String,
    /// Category name inside the source, for redirecting to its entity view.
    pub category: String,
    pub rows: usize,
}

/// Sources contributing at least one row with `key` to a global category,
/// in mapping order.
pub fn entity_sources(
    catalogs: &Catalogs,
    category: &str,
    key: &EntityKey,
) -> Result<Vec<EntitySource>, QueryError> {
    let gc = catalogs
        .global
        .category(category)
        .ok_or_else(|| QueryError::not_found("category", category))?;
    let hits = gc.table.rows_with_key(key);
    Ok(gc
        .mapped
        .iter()
        .filter_map(|m| {
            let n = hits.iter().filter(|i| m.rows.contains(i)).count();
            (n > 0).then(|| EntitySource {
                source_type_id: m.source_type_id.clone(),
                display_name: catalogs
                    .sources
                    .get(&m.source_type_id)
                    .map(|s| s.template.display_name.clone())
                    .unwrap_or_default(),
                category: m.category.clone(),
                rows: n,
            })
        })
        .collect())
}
