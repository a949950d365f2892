//! Demo fixture: two crew-list records sharing one ship.

use std::path::PathBuf;

use archex_core::catalog::{CellValue, EntityKey};
use archex_core::query::{
    entity_detail, entity_sources, group_by, run_table_query, Filter, FilterOp, Group, TableQuery,
};
use archex_core::Engine;
use serde_json::Value;

fn demo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

fn demo() -> Engine {
    let root = demo_root();
    Engine::load(&root.join("config"), &root.join("data")).unwrap()
}

fn two_source() -> Engine {
    let root = demo_root().join("two_source");
    Engine::load(&root.join("config"), &root.join("data")).unwrap()
}

fn groups(pairs: &[(&str, usize)]) -> Vec<Group> {
    pairs.iter().map(|(l, c)| Group { label: l.to_string(), count: *c }).collect()
}

/// Independent extraction straight from the JSON files: every base node is a
/// candidate tuple; identical tuples merge.
fn brute_force_rows(base: &str, cols: &[&str]) -> Vec<(Vec<String>, Vec<String>)> {
    let mut out: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    for rec in ["r1", "r2"] {
        let path = demo_root().join(format!("data/crew_list/{rec}.json"));
        let v: Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        let nodes: Vec<&Value> = match &v[base] {
            Value::Array(a) => a.iter().collect(),
            Value::Null => vec![],
            o => vec![o],
        };
        for n in nodes {
            let cells: Vec<String> = cols
                .iter()
                .map(|c| match &n[*c] {
                    Value::Null => "None or unfilled".to_string(),
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            match out.iter_mut().find(|(c, _)| *c == cells) {
                Some((_, prov)) => prov.push(rec.to_string()),
                None => out.push((cells, vec![rec.to_string()])),
            }
        }
    }
    out
}

fn catalog_rows(engine: &Engine, cat: &str) -> Vec<(Vec<String>, Vec<String>)> {
    let table = &engine.catalogs.sources["crew_list"].category(cat).unwrap().table;
    table
        .rows
        .iter()
        .map(|r| {
            (
                r.cells.iter().map(|c| c.display().to_string()).collect(),
                r.provenance.iter().map(|p| p.to_string()).collect(),
            )
        })
        .collect()
}

#[test]
fn ships_merge_into_one_row_with_both_records() {
    let e = demo();
    let rows = catalog_rows(&e, "Ships");
    assert_eq!(rows, brute_force_rows("ship", &["name", "construction_place"]));
    assert_eq!(rows, vec![(vec!["Aurora".into(), "Genoa".into()], vec!["r1".into(), "r2".into()])]);
}

#[test]
fn crew_rows_and_missing_age_sentinel() {
    let e = demo();
    let rows = catalog_rows(&e, "Crew members");
    assert_eq!(rows, brute_force_rows("crew", &["name", "residence", "age"]));
    assert_eq!(rows.len(), 3);
    let table = &e.catalogs.sources["crew_list"].category("Crew members").unwrap().table;
    let bianchi = &table.rows[1];
    assert_eq!(bianchi.cells[0].display(), "G. Bianchi");
    assert_eq!(bianchi.cells[2], CellValue::MissingInRecord);
    assert_eq!(bianchi.cells[2].display(), "None or unfilled");
}

#[test]
fn category_counts_whole_source_and_per_record() {
    let e = demo();
    let src = &e.catalogs.sources["crew_list"];
    let owned = |v: Vec<(String, usize)>| v;
    assert_eq!(
        owned(src.category_counts(None).unwrap()),
        vec![("Ships".to_string(), 1), ("Crew members".to_string(), 3)]
    );
    assert_eq!(
        src.category_counts(Some("r2")).unwrap(),
        vec![("Ships".to_string(), 1), ("Crew members".to_string(), 1)]
    );
    assert!(src.category_counts(Some("r9")).is_err());
}

#[test]
fn identity_lookup() {
    let e = demo();
    let src = &e.catalogs.sources["crew_list"];
    assert_eq!(src.lookup("Ships", &EntityKey::from_parts(&["Aurora"])).unwrap().len(), 1);
    assert_eq!(src.lookup("Crew members", &EntityKey::from_parts(&["P. Rossi"])).unwrap().len(), 1);
    assert!(src.lookup("Crew members", &EntityKey::from_parts(&["Nobody"])).unwrap().is_empty());
    assert!(src.lookup("Cargo", &EntityKey::from_parts(&["x"])).is_err());
}

fn names(page: &archex_core::query::TablePage) -> Vec<&str> {
    page.rows.iter().map(|r| r.cells[0].as_str()).collect()
}

#[test]
fn crew_table_queries() {
    let e = demo();
    let all = run_table_query(&e.catalogs, &TableQuery::source("crew_list", "Crew members")).unwrap();
    assert_eq!(all.total_after_filter, 3);
    assert_eq!(names(&all), ["P. Rossi", "G. Bianchi", "M. Costa"]);

    let cam = TableQuery::source("crew_list", "Crew members")
        .with_filter(Filter::new("residence", FilterOp::Contains, "cam"));
    let page = run_table_query(&e.catalogs, &cam).unwrap();
    assert_eq!(page.total_after_filter, 2);
    assert_eq!(names(&page), ["P. Rossi", "M. Costa"]);

    let r2 = TableQuery::source("crew_list", "Crew members").with_record("r2");
    assert_eq!(names(&run_table_query(&e.catalogs, &r2).unwrap()), ["M. Costa"]);
}

#[test]
fn crew_sorting_puts_sentinels_last() {
    let e = demo();
    let q = |asc| TableQuery::source("crew_list", "Crew members").sorted_by("age", asc);
    assert_eq!(names(&run_table_query(&e.catalogs, &q(true)).unwrap()), ["P. Rossi", "M. Costa", "G. Bianchi"]);
    assert_eq!(names(&run_table_query(&e.catalogs, &q(false)).unwrap()), ["M. Costa", "P. Rossi", "G. Bianchi"]);
}

#[test]
fn crew_groupings() {
    let e = demo();
    let q = TableQuery::source("crew_list", "Crew members");
    let g = group_by(&e.catalogs, &q, "residence").unwrap();
    assert_eq!(g.groups, groups(&[("Camogli", 2), ("Genoa", 1)]));
    assert_eq!(g.total, 3);

    let g = group_by(&e.catalogs, &q, "age").unwrap();
    assert_eq!(g.groups, groups(&[("31", 1), ("42", 1), ("None or unfilled", 1)]));

    let genoa = q.clone().with_filter(Filter::new("residence", FilterOp::Equals, "Genoa"));
    let g = group_by(&e.catalogs, &genoa, "age").unwrap();
    assert_eq!(g.groups, groups(&[("None or unfilled", 1)]));
    assert_eq!(g.total, 1);

    assert_eq!(group_by(&e.catalogs, &q, "height").unwrap_err().code(), "unknown_column");
}

#[test]
fn ship_detail_lists_crew_and_records() {
    let e = demo();
    let d = entity_detail(&e.catalogs, "crew_list", "Ships", &EntityKey::from_parts(&["Aurora"])).unwrap();
    assert_eq!(d.subject.len(), 1);
    assert_eq!(d.connections.len(), 1);
    assert_eq!(d.connections[0].label, "Crew members");
    assert_eq!(d.connections[0].page.total_after_filter, 3);
    let recs: Vec<_> = d.records.iter().map(|r| r.record_id.as_str()).collect();
    assert_eq!(recs, ["r1", "r2"]);
    assert!(d.records.iter().all(|r| r.url.is_none() && r.source_name == "Crew List"));

    let nemo = entity_detail(&e.catalogs, "crew_list", "Ships", &EntityKey::from_parts(&["Nemo"]));
    assert_eq!(nemo.unwrap_err().code(), "not_found");
}

#[test]
fn global_ships_single_source() {
    let e = demo();
    let g = e.catalogs.global.category("Ships").unwrap();
    assert_eq!(g.group_label, "Vessels");
    assert_eq!(g.table.rows.len(), 1);
    assert_eq!(&*g.table.rows[0].source_type_id, "crew_list");
    let s = entity_sources(&e.catalogs, "Ships", &EntityKey::from_parts(&["Aurora"])).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!((s[0].source_type_id.as_str(), s[0].display_name.as_str(), s[0].rows), ("crew_list", "Crew List", 1));
    assert!(entity_sources(&e.catalogs, "Ships", &EntityKey::from_parts(&["Nemo"])).unwrap().is_empty());
    assert!(entity_sources(&e.catalogs, "Boats", &EntityKey::from_parts(&["Nemo"])).is_err());
}

#[test]
fn two_source_union_marks_absent_columns() {
    let e = two_source();
    let g = e.catalogs.global.category("Ships").unwrap();
    let cols: Vec<_> = g.table.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(cols, ["name", "construction_place", "tonnage"]);
    let crew_row = &g.table.rows[0];
    assert_eq!(&*crew_row.source_type_id, "crew_list");
    assert_eq!(crew_row.cells[2], CellValue::ColumnAbsentInSource);
    assert_eq!(crew_row.cells[2].display(), "n/a");
    let payroll_row = &g.table.rows[1];
    assert_eq!(payroll_row.cells[1].display(), "n/a");
    assert_eq!(payroll_row.cells[2].display(), "320");

    let s = entity_sources(&e.catalogs, "Ships", &EntityKey::from_parts(&["Aurora"])).unwrap();
    let ids: Vec<_> = s.iter().map(|s| s.source_type_id.as_str()).collect();
    assert_eq!(ids, ["crew_list", "payroll"]);
}

#[test]
fn transcript_url_pattern_substitution() {
    let e = two_source();
    let d = entity_detail(&e.catalogs, "payroll", "Ships", &EntityKey::from_parts(&["Aurora"])).unwrap();
    assert_eq!(d.records[0].url.as_deref(), Some("https://fastcat.example/p1"));
}

#[test]
fn empty_global_category_has_no_columns() {
    let mut e = demo();
    e.bundle.explore_all.categories.push(archex_core::config::GlobalCategoryConfig {
        name: "Persons".into(),
        group_label: "People".into(),
        mappings: vec![],
    });
    let g = archex_core::catalog::build_global_catalog(&e.catalogs.sources, &e.bundle.explore_all).unwrap();
    let p = g.category("Persons").unwrap();
    assert!(p.table.rows.is_empty() && p.table.columns.is_empty());
}

#[test]
fn builds_are_byte_identical() {
    assert_eq!(demo().catalogs.canonical_json(), demo().catalogs.canonical_json());
    assert_eq!(two_source().catalogs.canonical_json(), two_source().catalogs.canonical_json());
}
