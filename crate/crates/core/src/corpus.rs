//! Transcript corpus: one folder per source type, one JSON file per record.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::{strip_bom, PathExpr, TemplateEntry};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: root value is not a JSON object")]
    NonObjectRoot { path: PathBuf },
    #[error("record {record_id:?} of {source_type_id:?} is no longer retrievable: {source}")]
    Retrieval {
        source_type_id: String,
        record_id: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadWarning {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct TranscriptRecord {
    pub record_id: String,
    pub source_type_id: String,
    pub root: Value,
    file: PathBuf,
}

impl TranscriptRecord {
    pub fn new(source_type_id: impl Into<String>, record_id: impl Into<String>, root: Value) -> Self {
        Self {
            record_id: record_id.into(),
            source_type_id: source_type_id.into(),
            root,
            file: PathBuf::new(),
        }
    }

    pub fn file(&self) -> &Path {
        &self.file
    }

    /// Original file bytes, unmodified.
    pub fn record_text(&self) -> Result<Vec<u8>, CorpusError> {
        fs::read(&self.file).map_err(|source| CorpusError::Retrieval {
            source_type_id: self.source_type_id.clone(),
            record_id: self.record_id.clone(),
            source,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct SourceRecords {
    records: Vec<TranscriptRecord>,
    by_id: HashMap<String, usize>,
}

impl SourceRecords {
    pub fn from_records(mut records: Vec<TranscriptRecord>) -> Self {
        records.sort_by(|a, b| a.record_id.cmp(&b.record_id));
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.record_id.clone(), i))
            .collect();
        Self { records, by_id }
    }

    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    pub fn get(&self, record_id: &str) -> Option<&TranscriptRecord> {
        self.by_id.get(record_id).map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Every loaded record, grouped by source type. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    sources: BTreeMap<String, SourceRecords>,
}

impl Corpus {
    pub fn from_sources(sources: BTreeMap<String, SourceRecords>) -> Self {
        Self { sources }
    }

    pub fn source(&self, source_type_id: &str) -> Option<&SourceRecords> {
        self.sources.get(source_type_id)
    }

    pub fn record(&self, source_type_id: &str, record_id: &str) -> Option<&TranscriptRecord> {
        self.source(source_type_id)?.get(record_id)
    }

    pub fn record_count(&self, source_type_id: &str) -> usize {
        self.source(source_type_id).map_or(0, SourceRecords::len)
    }

    pub fn source_ids(&self) -> impl Iterator<Item = &str> {
        self.sources.keys().map(String::as_str)
    }

    pub fn total_records(&self) -> usize {
        self.sources.values().map(SourceRecords::len).sum()
    }
}

/// Loads `<root>/<source_type_id>/<record_id>.json` for every template.
///
/// Records are ordered by record id. Folders that match no template are
/// skipped with a warning.
pub fn load_corpus(
    root: &Path,
    templates: &[TemplateEntry],
) -> Result<(Corpus, Vec<LoadWarning>), CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    let mut warnings = Vec::new();
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io(root))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io(root))?;
    dirs.sort();

    let mut sources = BTreeMap::new();
    for dir in dirs {
        if !dir.is_dir() {
            continue;
        }
        let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        if !templates.iter().any(|t| t.source_type_id == name) {
            warnings.push(LoadWarning {
                path: dir.clone(),
                message: "folder does not match any source type; skipped".into(),
            });
            continue;
        }
        let mut records = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io(&dir))? {
            let path = entry.map_err(io(&dir))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") || !path.is_file() {
                continue;
            }
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
                warnings.push(LoadWarning {
                    path: path.clone(),
                    message: "file name is not valid UTF-8; skipped".into(),
                });
                continue;
            };
            let bytes = fs::read(&path).map_err(io(&path))?;
            let root: Value = serde_json::from_slice(strip_bom(&bytes))
                .map_err(|source| CorpusError::Parse { path: path.clone(), source })?;
            if !root.is_object() {
                return Err(CorpusError::NonObjectRoot { path });
            }
            records.push(TranscriptRecord {
                record_id: stem.to_string(),
                source_type_id: name.clone(),
                root,
                file: path,
            });
        }
        sources.insert(name, SourceRecords::from_records(records));
    }
    Ok((Corpus { sources }, warnings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathMatch<'a> {
    pub node: &'a Value,
    /// JSON pointer of `node` relative to the record root.
    pub locator: String,
}

/// All nodes reached by `path`, depth first in document order.
pub fn evaluate_path<'a>(record: &'a TranscriptRecord, path: &PathExpr) -> Vec<PathMatch<'a>> {
    evaluate_from(&record.root, "", path)
}

/// Evaluates `path` starting at `node`, whose own pointer is `locator`.
///
/// Missing fields, nulls, and type mismatches end a branch silently.
pub fn evaluate_from<'a>(node: &'a Value, locator: &str, path: &PathExpr) -> Vec<PathMatch<'a>> {
    let mut out = Vec::new();
    let mut loc = String::from(locator);
    walk(node, &mut loc, path.segments(), &mut out);
    out
}

fn walk<'a>(
    node: &'a Value,
    loc: &mut String,
    segments: &[crate::config::Segment],
    out: &mut Vec<PathMatch<'a>>,
) {
    let Some((seg, rest)) = segments.split_first() else {
        if !node.is_null() {
            out.push(PathMatch { node, locator: loc.clone() });
        }
        return;
    };
    let Some(child) = node.as_object().and_then(|o| o.get(&seg.field)) else {
        return;
    };
    let mark = loc.len();
    loc.push('/');
    push_escaped(loc, &seg.field);
    if seg.iterate {
        if let Value::Array(items) = child {
            let field_mark = loc.len();
            for (i, item) in items.iter().enumerate() {
                let _ = write!(loc, "/{i}");
                walk(item, loc, rest, out);
                loc.truncate(field_mark);
            }
        }
    } else {
        walk(child, loc, rest, out);
    }
    loc.truncate(mark);
}

fn push_escaped(buf: &mut String, field: &str) {
    for c in field.chars() {
        match c {
            '~' => buf.push_str("~0"),
            '/' => buf.push_str("~1"),
            c => buf.push(c),
        }
    }
}

/// Text form of a scalar node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Text(String),
    /// Null, or a string that is empty after trimming.
    Blank,
    /// An object or array where a scalar was expected.
    Composite,
}

pub fn coerce_scalar(node: &Value) -> Scalar {
    match node {
        Value::Null => Scalar::Blank,
        Value::String(s) if s.trim().is_empty() => Scalar::Blank,
        Value::String(s) => Scalar::Text(s.clone()),
        Value::Bool(b) => Scalar::Text(b.to_string()),
        Value::Number(n) => Scalar::Text(n.to_string()),
        Value::Array(_) | Value::Object(_) => Scalar::Composite,
    }
}
