//! Deterministic synthetic corpus and configuration bundle.
//!
//! Every source type resembles a crew list: a ship with owners, voyages, and
//! a crew. Column sets vary between sources so the cross-source view has
//! columns some sources lack. Output is a pure function of the options.

use std::fs;
use std::io;
use std::path::Path;

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{
    ColumnSpec, ConfigBundle, ConnectionSpec, EntityCategoryConfig, ExploreAllConfig,
    GlobalCategoryConfig, JoinKind, PathExpr, SourceConfig, SourceMapping, TemplateEntry, ValueKind,
};
use crate::corpus::{Corpus, SourceRecords, TranscriptRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub seed: u64,
    pub sources: usize,
    pub records: usize,
    pub persons_per_record: usize,
    /// Probability that an optional field is left unfilled.
    pub missing_rate: f64,
    /// Probability that a crew entry repeats an earlier person of the same
    /// source verbatim.
    pub repeat_rate: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            seed: 0,
            sources: 20,
            records: 600,
            persons_per_record: 180,
            missing_rate: 0.1,
            repeat_rate: 0.03,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthSummary {
    pub sources: usize,
    pub records: usize,
    pub crew_entries: usize,
}

const SOURCE_KINDS: [(&str, &str, &str); 20] = [
    ("crew_list", "Crew List", "Crew and displacement lists"),
    ("displacement_list", "Displacement List", "Crew and displacement lists"),
    ("crew_agreement", "Crew Agreement", "Crew and displacement lists"),
    ("logbook", "Logbook", "Logbooks"),
    ("deck_logbook", "Deck Logbook", "Logbooks"),
    ("payroll", "Payroll", "Payrolls and accounts"),
    ("seamens_fund_payroll", "Seamen's Fund Payroll", "Payrolls and accounts"),
    ("account_book", "Account Book", "Payrolls and accounts"),
    ("sailors_register", "Sailors Register", "Registers"),
    ("naval_ship_register", "Naval Ship Register", "Registers"),
    ("ship_register", "Ship Register", "Registers"),
    ("seamen_register", "Seamen Register", "Registers"),
    ("register_of_exams", "Register of Exams", "Registers"),
    ("census", "Census", "Civil records"),
    ("civil_register", "Civil Register", "Civil records"),
    ("employment_record", "Employment Record", "Employment records"),
    ("personnel_file", "Personnel File", "Employment records"),
    ("notarial_deed", "Notarial Deed", "Legal documents"),
    ("insurance_record", "Insurance Record", "Legal documents"),
    ("port_authority_list", "Port Authority List", "Port records"),
];

const GIVEN: [&str; 40] = [
    "Giovanni", "Giuseppe", "Antonio", "Francesco", "Luigi", "Pietro", "Nicolò", "Andrea",
    "Domenico", "Stefano", "Georgios", "Ioannis", "Nikolaos", "Dimitrios", "Konstantinos",
    "Panagiotis", "Vasileios", "Emmanouil", "Michail", "Spyridon", "Josep", "Joan", "Miquel",
    "Francesc", "Pere", "Jean", "Pierre", "Louis", "Joseph", "François", "Ivan", "Petar",
    "Nikola", "Marko", "Stjepan", "Alexei", "Sergei", "Mikhail", "Dmitri", "Pavel",
];

const SURNAMES: [&str; 61] = [
    "Rossi", "Bianchi", "Costa", "Ferrari", "Esposito", "Romano", "Gallo", "Conti", "Bruno",
    "Ricci", "Marino", "Greco", "Lombardi", "Moretti", "Barbieri", "Fontana", "Papadopoulos",
    "Nikolaidis", "Georgiou", "Vlachos", "Karalis", "Angelopoulos", "Dimitriou", "Kostas",
    "Makris", "Pappas", "Oikonomou", "Zervos", "Garcia", "Puig", "Vidal", "Ferrer", "Soler",
    "Roca", "Serra", "Font", "Martin", "Bernard", "Dubois", "Laurent", "Moreau", "Girard",
    "Roux", "Fournier", "Horvat", "Kovacic", "Babic", "Maric", "Juric", "Novak", "Ivanov",
    "Smirnov", "Kuznetsov", "Popov", "Sokolov", "Lebedev", "Kozlov", "Novikov", "Morozov",
    "Volkov", "Petrov",
];

const PORTS: [&str; 32] = [
    "Genoa", "Camogli", "Trieste", "Naples", "Venice", "Livorno", "Palermo", "Messina",
    "Piraeus", "Syros", "Galaxidi", "Chania", "Patras", "Barcelona", "Marseille", "Toulon",
    "Odessa", "Constantinople", "Taganrog", "Varna", "Sulina", "Braila", "Smyrna", "Alexandria",
    "Malta", "Gibraltar", "Cardiff", "Liverpool", "Antwerp", "Hamburg", "Rijeka", "Split",
];

const ROLES: [&str; 10] = [
    "Captain", "Mate", "Boatswain", "Carpenter", "Cook", "Sailor", "Sailor", "Sailor",
    "Deck boy", "Ordinary seaman",
];

const FLAGS: [&str; 6] = ["Italian", "Greek", "Spanish", "French", "Austro-Hungarian", "Russian"];

const SHIP_NAMES: [&str; 30] = [
    "Aurora", "Speranza", "Fortuna", "Provvidenza", "Maria", "Concordia", "Evangelistria",
    "Agios Nikolaos", "Panagia", "Santa Lucia", "Nuova Fortuna", "Stella Maris", "Elpis",
    "Aspasia", "Sirena", "Carmen", "Esperanza", "Belle Marie", "Étoile", "Saint Pierre",
    "Slavija", "Dubrovnik", "Nadezhda", "Odessa", "Victoria", "Annunziata", "Giuseppina",
    "Eleni", "Anastasia", "Caterina",
];

struct SourceKind {
    id: String,
    name: String,
    group: String,
    has_tonnage: bool,
    has_age: bool,
    has_flag: bool,
    has_url: bool,
}

fn source_kinds(n: usize) -> Vec<SourceKind> {
    (0..n)
        .map(|i| {
            let (id, name, group) = SOURCE_KINDS[i % SOURCE_KINDS.len()];
            let round = i / SOURCE_KINDS.len();
            let (id, name) = if round == 0 {
                (id.to_string(), name.to_string())
            } else {
                (format!("{id}_{}", round + 1), format!("{name} {}", round + 1))
            };
            SourceKind {
                id,
                name,
                group: group.to_string(),
                has_tonnage: i % 2 == 0,
                has_age: i % 3 == 0,
                has_flag: i % 4 != 3,
                has_url: i % 2 == 1,
            }
        })
        .collect()
}

fn col(name: &str, kind: &str) -> Value {
    json!({ "name": name, "kind": kind })
}

fn col_at(name: &str, path: &str, kind: &str) -> Value {
    json!({ "name": name, "path": path, "kind": kind })
}

fn same_record(label: &str, target: &str) -> Value {
    json!({ "label": label, "target": target, "join": "same_record" })
}

fn key_match(label: &str, target: &str, local: &str, remote: &str) -> Value {
    json!({ "label": label, "target": target, "join": "key_match",
            "local_column": local, "remote_column": remote })
}

fn source_config(kind: &SourceKind) -> Value {
    let mut ship_cols = vec![col("name", "text")];
    if kind.has_flag {
        ship_cols.push(col("flag", "text"));
    }
    ship_cols.push(col("construction_place", "text"));
    if kind.has_tonnage {
        ship_cols.push(col("tonnage", "integer"));
    }
    let mut crew_cols = vec![
        col("name", "text"),
        col("surname", "text"),
        col("birth_date", "date"),
        col("residence", "text"),
        col("role", "text"),
    ];
    if kind.has_age {
        crew_cols.push(col("age", "integer"));
    }
    json!({ "categories": [
        { "name": "Ships", "base": "ship", "columns": ship_cols, "identity": ["name"],
          "connections": [
              same_record("Owners", "Owners"),
              same_record("Voyages", "Voyages"),
              same_record("Crew members", "Crew members"),
              same_record("Departure ports", "Departure ports"),
              same_record("Arrival ports", "Arrival ports"),
          ] },
        { "name": "Owners", "base": "ship.owners[]",
          "columns": [col("name", "text"), col("residence", "text")],
          "identity": ["name"],
          "connections": [same_record("Ships", "Ships")] },
        { "name": "Voyages", "base": "voyages[]",
          "columns": [col("ship", "text"), col("departure_port", "text"), col("departure_date", "date"),
                      col("arrival_port", "text"), col("arrival_date", "date")],
          "identity": ["ship", "departure_date"],
          "connections": [key_match("Voyages from the same port", "Voyages", "departure_port", "departure_port")] },
        { "name": "Crew members", "base": "crew[]", "columns": crew_cols,
          "identity": ["name", "surname", "birth_date"],
          "connections": [
              same_record("Ship", "Ships"),
              key_match("Same residence", "Crew members", "residence", "residence"),
          ] },
        { "name": "Departure ports", "base": "voyages[]",
          "columns": [col_at("name", "departure_port", "text"), col_at("departure_date", "departure_date", "date")],
          "identity": ["name"],
          "connections": [key_match("Ships departing from this port", "Voyages", "name", "departure_port")] },
        { "name": "Arrival ports", "base": "voyages[]",
          "columns": [col_at("name", "arrival_port", "text"), col_at("arrival_date", "arrival_date", "date")],
          "identity": ["name"],
          "connections": [key_match("Ships arriving at this port", "Voyages", "name", "arrival_port")] },
    ]})
}

struct Ship {
    value: Map<String, Value>,
}

fn random_date(rng: &mut ChaCha8Rng, from: u32, to: u32) -> String {
    let year = rng.random_range(from..=to);
    match rng.random_range(0..10) {
        0 => year.to_string(),
        1 => format!("{year}-{:02}", rng.random_range(1..=12)),
        _ => format!("{year}-{:02}-{:02}", rng.random_range(1..=12), rng.random_range(1..=28)),
    }
}

/// Inserts `value` unless the field is randomly left unfilled, in one of the
/// three ways transcripts leave a field empty.
fn maybe_put(
    map: &mut Map<String, Value>,
    rng: &mut ChaCha8Rng,
    rate: f64,
    field: &str,
    value: impl FnOnce(&mut ChaCha8Rng) -> Value,
) {
    if rng.random_bool(rate) {
        match rng.random_range(0..3) {
            0 => {}
            1 => {
                map.insert(field.into(), Value::Null);
            }
            _ => {
                map.insert(field.into(), Value::String(String::new()));
            }
        }
    } else {
        let v = value(rng);
        map.insert(field.into(), v);
    }
}

fn make_ship(rng: &mut ChaCha8Rng, kind: &SourceKind, opts: &SynthOptions, index: usize) -> Ship {
    let base = SHIP_NAMES[index % SHIP_NAMES.len()];
    let name = if index < SHIP_NAMES.len() { base.to_string() } else { format!("{base} {}", index / SHIP_NAMES.len() + 1) };
    let mut value = Map::new();
    value.insert("name".into(), json!(name));
    if kind.has_flag {
        maybe_put(&mut value, rng, opts.missing_rate, "flag", |r| json!(*FLAGS.choose(r).unwrap()));
    }
    maybe_put(&mut value, rng, opts.missing_rate, "construction_place", |r| json!(*PORTS.choose(r).unwrap()));
    if kind.has_tonnage {
        maybe_put(&mut value, rng, opts.missing_rate, "tonnage", |r| json!(r.random_range(80..1200)));
    }
    let owners: Vec<Value> = (0..rng.random_range(1..=3))
        .map(|_| {
            let mut o = Map::new();
            o.insert(
                "name".into(),
                json!(format!("{} {}", GIVEN.choose(rng).unwrap(), SURNAMES.choose(rng).unwrap())),
            );
            maybe_put(&mut o, rng, opts.missing_rate, "residence", |r| json!(*PORTS.choose(r).unwrap()));
            Value::Object(o)
        })
        .collect();
    value.insert("owners".into(), Value::Array(owners));
    Ship { value }
}

fn make_person(rng: &mut ChaCha8Rng, kind: &SourceKind, opts: &SynthOptions) -> Value {
    let mut p = Map::new();
    p.insert("name".into(), json!(*GIVEN.choose(rng).unwrap()));
    p.insert("surname".into(), json!(*SURNAMES.choose(rng).unwrap()));
    maybe_put(&mut p, rng, opts.missing_rate, "birth_date", |r| json!(random_date(r, 1820, 1905)));
    maybe_put(&mut p, rng, opts.missing_rate, "residence", |r| json!(*PORTS.choose(r).unwrap()));
    maybe_put(&mut p, rng, opts.missing_rate, "role", |r| json!(*ROLES.choose(r).unwrap()));
    if kind.has_age {
        maybe_put(&mut p, rng, opts.missing_rate, "age", |r| {
            if r.random_bool(0.01) {
                json!("unknown")
            } else {
                json!(r.random_range(12..70))
            }
        });
    }
    Value::Object(p)
}

fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
    bytes.push(b'\n');
    fs::write(path, bytes)
}

/// Writes `<out>/config/…` and `<out>/data/<source>/<record>.json`.
pub fn generate(opts: &SynthOptions, out: &Path) -> io::Result<SynthSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let config_dir = out.join("config");
    let data_dir = out.join("data");
    fs::create_dir_all(&config_dir)?;
    fs::create_dir_all(&data_dir)?;

    let kinds = source_kinds(opts.sources);
    let templates: Vec<Value> = kinds
        .iter()
        .map(|k| {
            let mut t = json!({
                "id": k.id, "group": k.group, "name": k.name,
                "description": format!("Synthetic {} transcripts", k.name.to_lowercase()),
                "config_file": format!("{}.json", k.id),
            });
            if k.has_url {
                t["transcript_url_pattern"] =
                    json!(format!("https://transcripts.example.org/{}/{{record_id}}", k.id));
            }
            t
        })
        .collect();
    write_json(&config_dir.join("templates.json"), &Value::Array(templates))?;
    for k in &kinds {
        write_json(&config_dir.join(format!("{}.json", k.id)), &source_config(k))?;
    }

    let globals = [
        ("Ships", "Vessels", vec!["Ships"]),
        ("Persons", "People", vec!["Crew members"]),
        ("Owners", "Legal entities", vec!["Owners"]),
        ("Ports", "Places", vec!["Departure ports", "Arrival ports"]),
    ];
    let explore_all: Vec<Value> = globals.iter().map(|(n, g, _)| json!({ "name": n, "group": g })).collect();
    let conf: Vec<Value> = globals
        .iter()
        .map(|(n, _, tables)| {
            let tables: Vec<Value> = kinds
                .iter()
                .flat_map(|k| tables.iter().map(move |t| json!({ "source": k.id, "table": t })))
                .collect();
            json!({ "category": n, "tables": tables })
        })
        .collect();
    write_json(&config_dir.join("explore_all.json"), &Value::Array(explore_all))?;
    write_json(&config_dir.join("explore_all_conf.json"), &Value::Array(conf))?;

    let mut summary = SynthSummary { sources: kinds.len(), ..Default::default() };
    let per_source = if kinds.is_empty() { 0 } else { opts.records / kinds.len() };
    let remainder = if kinds.is_empty() { 0 } else { opts.records % kinds.len() };
    for (si, k) in kinds.iter().enumerate() {
        let dir = data_dir.join(&k.id);
        fs::create_dir_all(&dir)?;
        let n_records = per_source + usize::from(si < remainder);
        let fleet: Vec<Ship> = (0..(n_records / 3).max(1)).map(|i| make_ship(&mut rng, k, opts, i)).collect();
        let mut people: Vec<Value> = Vec::new();
        for r in 0..n_records {
            let ship = &fleet[rng.random_range(0..fleet.len())];
            let ship_name = ship.value["name"].clone();
            let voyages: Vec<Value> = (0..rng.random_range(1..=4))
                .map(|_| {
                    let mut v = Map::new();
                    v.insert("ship".into(), ship_name.clone());
                    v.insert("departure_port".into(), json!(*PORTS.choose(&mut rng).unwrap()));
                    maybe_put(&mut v, &mut rng, opts.missing_rate, "departure_date", |r| json!(random_date(r, 1850, 1920)));
                    maybe_put(&mut v, &mut rng, opts.missing_rate, "arrival_port", |r| json!(*PORTS.choose(r).unwrap()));
                    maybe_put(&mut v, &mut rng, opts.missing_rate, "arrival_date", |r| json!(random_date(r, 1850, 1920)));
                    Value::Object(v)
                })
                .collect();
            let mut crew = Vec::with_capacity(opts.persons_per_record);
            for _ in 0..opts.persons_per_record {
                let person = if !people.is_empty() && rng.random_bool(opts.repeat_rate) {
                    people[rng.random_range(0..people.len())].clone()
                } else {
                    let p = make_person(&mut rng, k, opts);
                    people.push(p.clone());
                    p
                };
                crew.push(person);
            }
            summary.crew_entries += crew.len();
            let record = json!({
                "ship": Value::Object(ship.value.clone()),
                "voyages": voyages,
                "crew": crew,
            });
            write_json(&dir.join(format!("rec{r:04}.json")), &record)?;
            summary.records += 1;
        }
    }
    Ok(summary)
}

const SMALL_TEXT: [&str; 14] = [
    "Genoa", "genoa", "Camogli", "Rossi, P.", "say \"hi\"", "two\nlines", "Ålesund", "ÅLESUND",
    "10", "2", "1870", "1870-05", "1871-02-30", "n/a",
];

fn small_value(rng: &mut ChaCha8Rng) -> Value {
    match rng.random_range(0..20) {
        0 => Value::Null,
        1 => json!(""),
        2 => json!(rng.random_range(-3..40)),
        3 => json!(rng.random_range(0..8) as f64 / 4.0),
        4 => json!(true),
        5 => json!([1, 2]),
        6 => json!(format!("{}-{:02}-{:02}", rng.random_range(1860..1863), rng.random_range(1..13), rng.random_range(1..29))),
        _ => json!(*SMALL_TEXT.choose(rng).unwrap()),
    }
}

fn random_node(rng: &mut ChaCha8Rng, cat: &EntityCategoryConfig) -> Value {
    let mut obj = Map::new();
    for col in &cat.columns {
        let field = &col.path.segments()[0].field;
        if col.path.segments().len() > 1 {
            let vals: Vec<Value> = (0..rng.random_range(0..3))
                .map(|_| json!({ "v": small_value(rng) }))
                .collect();
            obj.insert(field.clone(), Value::Array(vals));
        } else if rng.random_bool(0.85) {
            obj.insert(field.clone(), small_value(rng));
        }
    }
    Value::Object(obj)
}

/// A small random bundle and corpus held in memory, for property tests.
///
/// Sources share column names and draw values from tiny pools, so duplicate
/// rows, sentinels, multi-valued cells, kind mismatches and quoting edge cases
/// are all common. The bundle always validates cleanly.
pub fn random_bundle(seed: u64) -> (ConfigBundle, Corpus) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let fields = ["a", "b", "c", "d"];
    let kinds = [ValueKind::Text, ValueKind::Text, ValueKind::Integer, ValueKind::Decimal, ValueKind::Date];
    let n_sources = rng.random_range(2..=4);

    let mut templates = Vec::new();
    let mut sources = BTreeMap::new();
    let mut corpus = BTreeMap::new();
    let mut tables: Vec<(String, String)> = Vec::new();
    for s in 0..n_sources {
        let id = format!("s{s}");
        let n_cats = rng.random_range(1..=3);
        let mut categories = Vec::new();
        for c in 0..n_cats {
            let base = if rng.random_bool(0.7) {
                PathExpr::parse(&format!("items{c}[]")).unwrap()
            } else {
                PathExpr::parse(&format!("head{c}")).unwrap()
            };
            let n_cols = rng.random_range(1..=4);
            let mut names: Vec<&str> = fields.to_vec();
            names.shuffle(rng);
            let columns: Vec<ColumnSpec> = names[..n_cols]
                .iter()
                .map(|n| ColumnSpec {
                    name: n.to_string(),
                    path: if rng.random_bool(0.2) {
                        PathExpr::parse(&format!("{n}s[].v")).unwrap()
                    } else {
                        PathExpr::field(*n)
                    },
                    kind: *kinds.choose(rng).unwrap(),
                })
                .collect();
            let identity = vec![columns[0].name.clone()];
            categories.push(EntityCategoryConfig {
                name: format!("C{c}"),
                base_path: base,
                columns,
                identity,
                connections: Vec::new(),
            });
        }
        for c in 0..categories.len() {
            let target = rng.random_range(0..categories.len());
            let local = categories[c].columns.choose(rng).unwrap().name.clone();
            let remote = categories[target].columns.choose(rng).unwrap().name.clone();
            let join = if rng.random_bool(0.5) {
                JoinKind::SameRecord
            } else {
                JoinKind::KeyMatch { local_column: local, remote_column: remote }
            };
            let target_category = categories[target].name.clone();
            categories[c].connections.push(ConnectionSpec { label: "link".into(), target_category, join });
        }

        let mut records = Vec::new();
        for r in 0..rng.random_range(0..=6) {
            let mut root = Map::new();
            for cat in &categories {
                let field = &cat.base_path.segments()[0].field;
                if cat.base_path.iterates() {
                    let n = rng.random_range(0..=4);
                    let items: Vec<Value> = (0..n).map(|_| random_node(rng, cat)).collect();
                    root.insert(field.clone(), Value::Array(items));
                } else if rng.random_bool(0.8) {
                    root.insert(field.clone(), random_node(rng, cat));
                }
            }
            records.push(TranscriptRecord::new(id.clone(), format!("r{r}"), Value::Object(root)));
        }
        for cat in &categories {
            tables.push((id.clone(), cat.name.clone()));
        }
        templates.push(TemplateEntry {
            source_type_id: id.clone(),
            group_label: format!("G{}", s % 2),
            display_name: format!("Source {s}"),
            description: String::new(),
            config_file: format!("{id}.json"),
            transcript_url_pattern: rng.random_bool(0.5).then(|| format!("https://t.example/{id}/{{record_id}}")),
        });
        sources.insert(id.clone(), SourceConfig { source_type_id: id.clone(), categories });
        corpus.insert(id, SourceRecords::from_records(records));
    }

    let mut globals = Vec::new();
    for g in 0..rng.random_range(1..=3) {
        tables.shuffle(rng);
        let take = rng.random_range(0..=tables.len().min(4));
        let mappings = tables[..take]
            .iter()
            .map(|(s, c)| SourceMapping { source: s.clone(), category: c.clone() })
            .collect();
        globals.push(GlobalCategoryConfig {
            name: format!("Global{g}"),
            group_label: "All".into(),
            mappings,
        });
    }
    let bundle = ConfigBundle {
        templates,
        sources,
        explore_all: ExploreAllConfig { categories: globals },
    };
    (bundle, Corpus::from_sources(corpus))
}
