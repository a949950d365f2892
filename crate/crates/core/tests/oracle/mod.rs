//! Naive full-scan reference implementation used to cross-check the engine.
//!
//! Everything here works directly on the raw JSON trees and plain vectors:
//! no indexes, no hashing, no shared code with the engine beyond the input
//! types.
#![allow(dead_code)]

use std::cmp::Ordering;

use archex_core::config::{ConfigBundle, JoinKind, ValueKind};
use archex_core::corpus::Corpus;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::Value;

pub const MISSING: &str = "None or unfilled";
pub const ABSENT: &str = "n/a";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Absent,
    Text(String),
}

impl Cell {
    pub fn show(&self) -> &str {
        match self {
            Cell::Missing => MISSING,
            Cell::Absent => ABSENT,
            Cell::Text(t) => t,
        }
    }
    fn sentinel(&self) -> bool {
        !matches!(self, Cell::Text(_))
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub source: String,
    pub cells: Vec<Cell>,
    pub prov: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<(String, ValueKind)>,
    pub rows: Vec<Row>,
}

fn split_path(p: &str) -> Vec<(String, bool)> {
    p.split('.')
        .map(|s| match s.strip_suffix("[]") {
            Some(f) => (f.to_string(), true),
            None => (s.to_string(), false),
        })
        .collect()
}

fn resolve<'a>(node: &'a Value, path: &[(String, bool)]) -> Vec<&'a Value> {
    if path.is_empty() {
        return if node.is_null() { vec![] } else { vec![node] };
    }
    let (field, iter) = &path[0];
    let child = match node {
        Value::Object(m) => match m.get(field) {
            Some(c) => c,
            None => return vec![],
        },
        _ => return vec![],
    };
    let mut out = Vec::new();
    if *iter {
        if let Value::Array(items) = child {
            for it in items {
                out.extend(resolve(it, &path[1..]));
            }
        }
    } else {
        out.extend(resolve(child, &path[1..]));
    }
    out
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.trim().is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(if *b { "true".into() } else { "false".into() }),
        _ => None,
    }
}

/// One cell tuple per base node of a record, in document order.
pub fn candidates(root: &Value, cat: &archex_core::config::EntityCategoryConfig) -> Vec<Vec<Cell>> {
    let base = split_path(&cat.base_path.to_string());
    resolve(root, &base)
        .into_iter()
        .map(|node| {
            cat.columns
                .iter()
                .map(|col| {
                    let texts: Vec<String> = resolve(node, &split_path(&col.path.to_string()))
                        .into_iter()
                        .filter_map(scalar_text)
                        .collect();
                    if texts.is_empty() { Cell::Missing } else { Cell::Text(texts.join("; ")) }
                })
                .collect()
        })
        .collect()
}

/// Extracts one source table: one candidate per base node, identical
/// candidates collapse with their records collected.
pub fn source_table(bundle: &ConfigBundle, corpus: &Corpus, source: &str, category: &str) -> Option<Table> {
    let cfg = bundle.sources.get(source)?;
    let cat = cfg.categories.iter().find(|c| c.name == category)?;
    let mut records: Vec<_> = corpus.source(source).map(|s| s.records().to_vec()).unwrap_or_default();
    records.sort_by(|a, b| a.record_id.cmp(&b.record_id));
    let mut rows: Vec<Row> = Vec::new();
    for rec in &records {
        for cells in candidates(&rec.root, cat) {
            let mut found = false;
            for r in rows.iter_mut() {
                if r.cells == cells {
                    if !r.prov.contains(&rec.record_id) {
                        r.prov.push(rec.record_id.clone());
                    }
                    found = true;
                    break;
                }
            }
            if !found {
                rows.push(Row { source: source.to_string(), cells, prov: vec![rec.record_id.clone()] });
            }
        }
    }
    Some(Table {
        columns: cat.columns.iter().map(|c| (c.name.clone(), c.kind)).collect(),
        rows,
    })
}

pub fn global_table(bundle: &ConfigBundle, corpus: &Corpus, name: &str) -> Option<Table> {
    let g = bundle.explore_all.categories.iter().find(|g| g.name == name)?;
    let parts: Vec<Table> = g
        .mappings
        .iter()
        .map(|m| source_table(bundle, corpus, &m.source, &m.category).unwrap())
        .collect();
    let mut columns: Vec<(String, ValueKind)> = Vec::new();
    for t in &parts {
        for c in &t.columns {
            if columns.iter().all(|u| u.0 != c.0) {
                columns.push(c.clone());
            }
        }
    }
    let mut rows = Vec::new();
    for t in &parts {
        for r in &t.rows {
            let cells = columns
                .iter()
                .map(|(n, _)| match t.columns.iter().position(|c| &c.0 == n) {
                    Some(i) => r.cells[i].clone(),
                    None => Cell::Absent,
                })
                .collect();
            rows.push(Row { cells, ..r.clone() });
        }
    }
    Some(Table { columns, rows })
}

pub fn fold(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c == 'ς' {
            out.push('σ');
            continue;
        }
        let low: Vec<char> = c.to_lowercase().collect();
        if low.len() == 1 {
            out.push(low[0]);
        } else {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Typed {
    Num(f64),
    Date(u32, u32, u32),
}

fn leap(y: u32) -> bool {
    y % 400 == 0 || (y % 4 == 0 && y % 100 != 0)
}

fn parse_date(s: &str) -> Option<Typed> {
    let b = s.as_bytes();
    let num = |r: std::ops::Range<usize>| -> Option<u32> {
        let piece = s.get(r)?;
        if piece.bytes().all(|c| c.is_ascii_digit()) { piece.parse().ok() } else { None }
    };
    let (y, m, d) = match b.len() {
        4 => (num(0..4)?, 0, 0),
        7 if b[4] == b'-' => (num(0..4)?, num(5..7)?, 0),
        10 if b[4] == b'-' && b[7] == b'-' => (num(0..4)?, num(5..7)?, num(8..10)?),
        _ => return None,
    };
    if b.len() >= 7 && !(1..=12).contains(&m) {
        return None;
    }
    if b.len() == 10 {
        let max = [31, if leap(y) { 29 } else { 28 }, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31][m as usize - 1];
        if d < 1 || d > max {
            return None;
        }
    }
    Some(Typed::Date(y, m, d))
}

/// Typed reading of a cell's text under a column kind.
pub fn typed(text: &str, kind: ValueKind) -> Option<Typed> {
    let t = text.trim();
    match kind {
        ValueKind::Text => None,
        ValueKind::Integer => t.parse::<i64>().ok().map(|i| Typed::Num(i as f64)),
        ValueKind::Decimal => t.parse::<f64>().ok().filter(|f| f.is_finite()).map(Typed::Num),
        ValueKind::Date => parse_date(t),
    }
}

fn operand(text: &str, kind: ValueKind) -> Option<Typed> {
    match kind {
        ValueKind::Date => parse_date(text.trim()),
        _ => text.trim().parse::<f64>().ok().filter(|f| f.is_finite()).map(Typed::Num),
    }
}

#[derive(Debug, Clone)]
pub struct OFilter {
    pub column: String,
    pub op: &'static str,
    pub values: Vec<String>,
}

pub const TEXT_OPS: [&str; 6] = ["contains", "not_contains", "equals", "not_equals", "starts_with", "ends_with"];
pub const TYPED_OPS: [&str; 5] = ["num_equals", "num_not_equals", "less_than", "greater_than", "in_range"];

/// Returns None when the engine is expected to reject the filter.
fn filter_pred(f: &OFilter, columns: &[(String, ValueKind)]) -> Option<Box<dyn Fn(&Cell) -> bool>> {
    let col = columns.iter().position(|c| c.0 == f.column)?;
    let kind = columns[col].1;
    if TEXT_OPS.contains(&f.op) {
        let needle = fold(&f.values[0]);
        let op = f.op;
        return Some(Box::new(move |c: &Cell| {
            let hay = fold(c.show());
            match op {
                "contains" => hay.contains(&needle),
                "not_contains" => !hay.contains(&needle),
                "equals" => hay == needle,
                "not_equals" => hay != needle,
                "starts_with" => hay.starts_with(&needle),
                _ => hay.ends_with(&needle),
            }
        }));
    }
    if kind == ValueKind::Text {
        return None;
    }
    let low = operand(&f.values[0], kind)?;
    let high = if f.op == "in_range" {
        let h = operand(&f.values[1], kind)?;
        if low.partial_cmp(&h) == Some(Ordering::Greater) {
            return None;
        }
        Some(h)
    } else {
        None
    };
    let op = f.op;
    Some(Box::new(move |c: &Cell| {
        let Cell::Text(t) = c else { return false };
        let Some(v) = typed(t, kind) else { return false };
        let Some(o) = v.partial_cmp(&low) else { return false };
        match op {
            "num_equals" => o == Ordering::Equal,
            "num_not_equals" => o != Ordering::Equal,
            "less_than" => o == Ordering::Less,
            "greater_than" => o == Ordering::Greater,
            _ => o != Ordering::Less && v.partial_cmp(&high.unwrap()).is_some_and(|p| p != Ordering::Greater),
        }
    }))
}

#[derive(Debug, Clone)]
pub enum OScope {
    Source(String),
    Global,
}

#[derive(Debug, Clone)]
pub struct OQuery {
    pub scope: OScope,
    pub category: String,
    pub record: Option<String>,
    pub connection: Option<(Vec<String>, String)>,
    pub filters: Vec<OFilter>,
    pub sort: Option<(String, bool)>,
}

fn key_of(bundle: &ConfigBundle, source: &str, category: &str, row: &Row) -> Vec<String> {
    let cat = bundle.sources[source].categories.iter().find(|c| c.name == category).unwrap();
    cat.identity
        .iter()
        .map(|id| row.cells[cat.columns.iter().position(|c| &c.name == id).unwrap()].show().to_string())
        .collect()
}

/// Rows selected by the query in final order, or None if the engine should
/// reject it.
pub fn run(bundle: &ConfigBundle, corpus: &Corpus, q: &OQuery) -> Option<(Table, Vec<Row>)> {
    let (table, mut rows) = match (&q.scope, &q.connection) {
        (OScope::Global, None) if q.record.is_none() => {
            let t = global_table(bundle, corpus, &q.category)?;
            let rows = t.rows.clone();
            (t, rows)
        }
        (OScope::Global, _) => return None,
        (OScope::Source(s), None) => {
            let t = source_table(bundle, corpus, s, &q.category)?;
            let rows = match &q.record {
                None => t.rows.clone(),
                Some(r) => {
                    if !corpus.source(s).is_some_and(|x| x.records().iter().any(|x| &x.record_id == r)) {
                        return None;
                    }
                    t.rows.iter().filter(|row| row.prov.contains(r)).cloned().collect()
                }
            };
            (t, rows)
        }
        (OScope::Source(s), Some((key, label))) => {
            if q.record.is_some() {
                return None;
            }
            let cat = bundle.sources.get(s)?.categories.iter().find(|c| c.name == q.category)?;
            let conn = cat.connections.iter().find(|c| &c.label == label)?;
            let subject_table = source_table(bundle, corpus, s, &q.category)?;
            let subject: Vec<&Row> = subject_table
                .rows
                .iter()
                .filter(|r| &key_of(bundle, s, &q.category, r) == key)
                .collect();
            if subject.is_empty() {
                return None;
            }
            let target = source_table(bundle, corpus, s, &conn.target_category).unwrap();
            let rows = match &conn.join {
                JoinKind::SameRecord => target
                    .rows
                    .iter()
                    .filter(|r| r.prov.iter().any(|p| subject.iter().any(|s| s.prov.contains(p))))
                    .cloned()
                    .collect(),
                JoinKind::KeyMatch { local_column, remote_column } => {
                    let li = cat.columns.iter().position(|c| &c.name == local_column).unwrap();
                    let ri = target.columns.iter().position(|c| &c.0 == remote_column).unwrap();
                    let wanted: Vec<String> = subject
                        .iter()
                        .filter(|r| !r.cells[li].sentinel())
                        .map(|r| fold(r.cells[li].show()))
                        .collect();
                    target
                        .rows
                        .iter()
                        .filter(|r| !r.cells[ri].sentinel() && wanted.contains(&fold(r.cells[ri].show())))
                        .cloned()
                        .collect()
                }
            };
            (target, rows)
        }
    };
    for f in &q.filters {
        let pred = filter_pred(f, &table.columns)?;
        let ci = table.columns.iter().position(|c| c.0 == f.column).unwrap();
        rows.retain(|r| pred(&r.cells[ci]));
    }
    if let Some((col, asc)) = &q.sort {
        let ci = table.columns.iter().position(|c| &c.0 == col)?;
        let kind = table.columns[ci].1;
        let class = |c: &Cell| match c {
            Cell::Text(t) if typed(t, kind).is_some() => 0,
            Cell::Text(_) => 1,
            _ => 2,
        };
        // insertion sort: stable by construction
        let mut sorted: Vec<Row> = Vec::new();
        for r in rows {
            let mut at = sorted.len();
            while at > 0 {
                let prev = &sorted[at - 1];
                let (a, b) = (&prev.cells[ci], &r.cells[ci]);
                let ord = class(a).cmp(&class(b)).then_with(|| {
                    let o = match (a, b) {
                        (Cell::Text(x), Cell::Text(y)) if class(a) == 0 => {
                            typed(x, kind).partial_cmp(&typed(y, kind)).unwrap()
                        }
                        (Cell::Text(x), Cell::Text(y)) => fold(x).cmp(&fold(y)),
                        _ => Ordering::Equal,
                    };
                    if *asc { o } else { o.reverse() }
                });
                if ord == Ordering::Greater {
                    at -= 1;
                } else {
                    break;
                }
            }
            sorted.insert(at, r);
        }
        rows = sorted;
    }
    Some((table, rows))
}

pub fn group(bundle: &ConfigBundle, corpus: &Corpus, q: &OQuery, column: &str) -> Option<Vec<(String, usize)>> {
    let (table, rows) = run(bundle, corpus, q)?;
    let ci = table.columns.iter().position(|c| c.0 == column)?;
    let mut out: Vec<(String, usize)> = Vec::new();
    for r in &rows {
        let label = r.cells[ci].show();
        match out.iter_mut().find(|(l, _)| l == label) {
            Some(e) => e.1 += 1,
            None => out.push((label.to_string(), 1)),
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| fold(&a.0).cmp(&fold(&b.0))).then_with(|| a.0.cmp(&b.0)));
    Some(out)
}

const NEEDLES: [&str; 12] = ["genoa", "GEN", "o", "ålesund", "10", "2", "1870", "None or unfilled", "n/a", "; ", "\"", "zz"];
const OPERANDS: [&str; 10] = ["2", "10", "0.5", "-1", "1870", "1870-05", "1861-03-01", "1861", "x", "1871-02-30"];

/// Draws a query that is usually valid but sometimes names unknown things or
/// uses illegal operator/kind combinations.
pub fn random_query<R: Rng>(rng: &mut R, bundle: &ConfigBundle, corpus: &Corpus) -> OQuery {
    let global = !bundle.explore_all.categories.is_empty() && rng.random_bool(0.3);
    let (scope, category, columns, source) = if global {
        let g = bundle.explore_all.categories.choose(rng).unwrap();
        let t = global_table(bundle, corpus, &g.name).unwrap();
        (OScope::Global, g.name.clone(), t.columns, None)
    } else {
        let s = bundle.sources.values().collect::<Vec<_>>().choose(rng).copied().unwrap();
        let c = s.categories.choose(rng).unwrap();
        let cols = c.columns.iter().map(|x| (x.name.clone(), x.kind)).collect::<Vec<_>>();
        (OScope::Source(s.source_type_id.clone()), c.name.clone(), cols, Some(s.source_type_id.clone()))
    };
    let mut q = OQuery { scope, category, record: None, connection: None, filters: vec![], sort: None };
    let mut columns = columns;
    if let Some(s) = &source {
        let roll = rng.random_range(0..10);
        if roll < 2 {
            let n = corpus.record_count(s);
            q.record = Some(format!("r{}", rng.random_range(0..n + 1)));
        } else if roll < 4 {
            let t = source_table(bundle, corpus, s, &q.category).unwrap();
            if let Some(r) = t.rows.choose(rng) {
                let key = key_of(bundle, s, &q.category, r);
                let cat = bundle.sources[s].categories.iter().find(|c| c.name == q.category).unwrap();
                let conn = &cat.connections[0];
                let target = bundle.sources[s].categories.iter().find(|c| c.name == conn.target_category).unwrap();
                columns = target.columns.iter().map(|x| (x.name.clone(), x.kind)).collect();
                q.connection = Some((key, conn.label.clone()));
            }
        }
    }
    for _ in 0..rng.random_range(0..3) {
        let column = if rng.random_bool(0.05) {
            "zz".to_string()
        } else if columns.is_empty() {
            "a".to_string()
        } else {
            columns.choose(rng).unwrap().0.clone()
        };
        let typed_op = rng.random_bool(0.4);
        let op = if typed_op { *TYPED_OPS.choose(rng).unwrap() } else { *TEXT_OPS.choose(rng).unwrap() };
        let values = if typed_op {
            let mut v = vec![OPERANDS.choose(rng).unwrap().to_string(), OPERANDS.choose(rng).unwrap().to_string()];
            if op != "in_range" {
                v.truncate(1);
            }
            v
        } else {
            vec![NEEDLES.choose(rng).unwrap().to_string()]
        };
        q.filters.push(OFilter { column, op, values });
    }
    if !columns.is_empty() && rng.random_bool(0.6) {
        q.sort = Some((columns.choose(rng).unwrap().0.clone(), rng.random_bool(0.5)));
    }
    q
}

pub fn to_engine(q: &OQuery) -> archex_core::TableQuery {
    let scope = match &q.scope {
        OScope::Source(s) => serde_json::json!({"kind": "source", "id": s}),
        OScope::Global => serde_json::json!({"kind": "global"}),
    };
    let filters: Vec<Value> = q
        .filters
        .iter()
        .map(|f| {
            let value = if f.op == "in_range" { serde_json::json!(f.values) } else { serde_json::json!(f.values[0]) };
            serde_json::json!({"column": f.column, "op": f.op, "value": value})
        })
        .collect();
    let mut v = serde_json::json!({"scope": scope, "category": q.category, "filters": filters});
    if let Some(r) = &q.record {
        v["record"] = serde_json::json!(r);
    }
    if let Some((key, label)) = &q.connection {
        v["connection"] = serde_json::json!({"key": serde_json::to_string(key).unwrap(), "label": label});
    }
    if let Some((c, asc)) = &q.sort {
        v["sort"] = serde_json::json!({"column": c, "ascending": asc});
    }
    serde_json::from_value(v).unwrap()
}

fn engine_cell(c: &archex_core::CellValue) -> Cell {
    match c {
        archex_core::CellValue::MissingInRecord => Cell::Missing,
        archex_core::CellValue::ColumnAbsentInSource => Cell::Absent,
        other => Cell::Text(other.display().to_string()),
    }
}

fn same_rows<'a>(
    what: &str,
    engine: impl Iterator<Item = &'a archex_core::EntityRow>,
    oracle: &[Row],
) -> Result<(), String> {
    let got: Vec<(String, Vec<Cell>, Vec<String>)> = engine
        .map(|r| {
            (
                r.source_type_id.to_string(),
                r.cells.iter().map(engine_cell).collect(),
                r.provenance.iter().map(|p| p.to_string()).collect(),
            )
        })
        .collect();
    let want: Vec<(String, Vec<Cell>, Vec<String>)> =
        oracle.iter().map(|r| (r.source.clone(), r.cells.clone(), r.prov.clone())).collect();
    if got != want {
        return Err(format!("{what}: engine {got:?}\noracle {want:?}"));
    }
    Ok(())
}

/// Builds the seed's bundle, compares every table and `queries` random
/// queries (rows in order, plus a grouping) against the oracle.
pub fn check_seed(seed: u64, queries: usize) -> Result<(), String> {
    use archex_core::query::{group_by, run_table_query, select};
    use rand::SeedableRng;

    let (bundle, corpus) = archex_core::synth::random_bundle(seed);
    let (catalogs, _) = archex_core::Catalogs::build(&bundle, &corpus).map_err(|e| e.to_string())?;
    for (sid, src) in &catalogs.sources {
        for cat in &src.categories {
            let want = source_table(&bundle, &corpus, sid, &cat.table.name).unwrap();
            same_rows(&format!("seed {seed} table {sid}/{}", cat.table.name), cat.table.rows.iter(), &want.rows)?;
            for rec in corpus.source(sid).map(|s| s.records()).unwrap_or_default() {
                let n = want.rows.iter().filter(|r| r.prov.contains(&rec.record_id)).count();
                if cat.table.rows_in_record(&rec.record_id).len() != n {
                    return Err(format!("seed {seed} count {sid}/{}/{}", cat.table.name, rec.record_id));
                }
            }
        }
    }
    for g in &catalogs.global.categories {
        let want = global_table(&bundle, &corpus, &g.table.name).unwrap();
        let names: Vec<_> = g.table.columns.iter().map(|c| (c.name.clone(), c.kind)).collect();
        if names != want.columns {
            return Err(format!("seed {seed} global {} columns {names:?} vs {:?}", g.table.name, want.columns));
        }
        same_rows(&format!("seed {seed} global {}", g.table.name), g.table.rows.iter(), &want.rows)?;
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for i in 0..queries {
        let oq = random_query(&mut rng, &bundle, &corpus);
        let q = to_engine(&oq);
        let expected = run(&bundle, &corpus, &oq);
        match (select(&catalogs, &q), &expected) {
            (Ok(sel), Some((_, rows))) => {
                same_rows(&format!("seed {seed} query {i} {oq:?}"), sel.rows(), rows)?;
                let (offset, limit) = (rng.random_range(0..=rows.len()), rng.random_range(1..=8));
                let page = run_table_query(&catalogs, &q.clone().paged(offset, limit)).map_err(|e| e.to_string())?;
                let got: Vec<Vec<String>> = page.rows.iter().map(|r| r.cells.clone()).collect();
                let want: Vec<Vec<String>> = rows
                    .iter()
                    .skip(offset)
                    .take(limit)
                    .map(|r| r.cells.iter().map(|c| c.show().to_string()).collect())
                    .collect();
                if got != want || page.total_after_filter != rows.len() {
                    return Err(format!("seed {seed} query {i} page {offset}+{limit}: {got:?} vs {want:?}"));
                }
            }
            (Err(_), None) => {}
            (got, _) => {
                return Err(format!(
                    "seed {seed} query {i} {oq:?}: engine ok={} oracle ok={}",
                    got.is_ok(),
                    expected.is_some()
                ))
            }
        }
        let column = match &expected {
            Some((t, _)) if !t.columns.is_empty() && rng.random_bool(0.95) => t.columns.choose(&mut rng).unwrap().0.clone(),
            _ => "zz".to_string(),
        };
        let want = group(&bundle, &corpus, &oq, &column);
        match (group_by(&catalogs, &q, &column), want) {
            (Ok(g), Some(w)) => {
                let got: Vec<(String, usize)> = g.groups.iter().map(|g| (g.label.clone(), g.count)).collect();
                if got != w {
                    return Err(format!("seed {seed} group {i} {oq:?} by {column}: {got:?} vs {w:?}"));
                }
            }
            (Err(_), None) => {}
            (got, w) => {
                return Err(format!(
                    "seed {seed} group {i} {oq:?} by {column}: engine ok={} oracle ok={}",
                    got.is_ok(),
                    w.is_some()
                ))
            }
        }
    }
    Ok(())
}
