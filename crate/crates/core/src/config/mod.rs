//! Configuration bundle: `templates.json`, one config file per source type,
//! and the optional `explore_all.json` / `explore_all_conf.json` pair.

mod path;
mod validate;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use path::{PathExpr, PathSyntaxError, Segment};
pub use validate::{validate_bundle, Finding, Severity, ValidationReport};

pub const TEMPLATES_FILE: &str = "templates.json";
pub const EXPLORE_ALL_FILE: &str = "explore_all.json";
pub const EXPLORE_ALL_CONF_FILE: &str = "explore_all_conf.json";
pub const RECORD_ID_PLACEHOLDER: &str = "{record_id}";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: malformed JSON: {source}")]
    Json {
        file: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{file}: entry {index}: {message}")]
    Entry {
        file: String,
        index: usize,
        message: String,
    },
    #[error("{file}: category {category:?}, {field}: {error}")]
    Path {
        file: String,
        category: String,
        field: String,
        error: PathSyntaxError,
    },
    #[error("{file}: global category {category:?}: {message}")]
    Mapping {
        file: String,
        category: String,
        message: String,
    },
}

/// One archival source type as declared in `templates.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateEntry {
    #[serde(rename = "id")]
    pub source_type_id: String,
    #[serde(rename = "group")]
    pub group_label: String,
    #[serde(rename = "name")]
    pub display_name: String,
    #[serde(default)]
    pub description: String,
    pub config_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript_url_pattern: Option<String>,
}

impl TemplateEntry {
    /// External transcript URL for a record, when a pattern is configured.
    pub fn transcript_url(&self, record_id: &str) -> Option<String> {
        let pattern = self.transcript_url_pattern.as_deref()?;
        let encoded =
            percent_encoding::utf8_percent_encode(record_id, crate::URL_SEGMENT);
        Some(pattern.replacen(RECORD_ID_PLACEHOLDER, &encoded.to_string(), 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Text,
    Integer,
    Decimal,
    Date,
}

impl ValueKind {
    pub fn is_typed(self) -> bool {
        !matches!(self, ValueKind::Text)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Text => "text",
            ValueKind::Integer => "integer",
            ValueKind::Decimal => "decimal",
            ValueKind::Date => "date",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnSpec {
    pub name: String,
    /// Relative to the category base node.
    pub path: PathExpr,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "join", rename_all = "snake_case")]
pub enum JoinKind {
    /// Target rows sharing at least one provenance record with the subject.
    SameRecord,
    /// Target rows whose `remote_column` equals the subject's `local_column`.
    KeyMatch {
        local_column: String,
        remote_column: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectionSpec {
    pub label: String,
    pub target_category: String,
    #[serde(flatten)]
    pub join: JoinKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityCategoryConfig {
    pub name: String,
    pub base_path: PathExpr,
    pub columns: Vec<ColumnSpec>,
    pub identity: Vec<String>,
    pub connections: Vec<ConnectionSpec>,
}

impl EntityCategoryConfig {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceConfig {
    pub source_type_id: String,
    pub categories: Vec<EntityCategoryConfig>,
}

impl SourceConfig {
    pub fn category(&self, name: &str) -> Option<&EntityCategoryConfig> {
        self.categories.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMapping {
    pub source: String,
    #[serde(rename = "table")]
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlobalCategoryConfig {
    pub name: String,
    pub group_label: String,
    pub mappings: Vec<SourceMapping>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExploreAllConfig {
    pub categories: Vec<GlobalCategoryConfig>,
}

impl ExploreAllConfig {
    pub fn category(&self, name: &str) -> Option<&GlobalCategoryConfig> {
        self.categories.iter().find(|c| c.name == name)
    }
}

/// Every parsed configuration part, keyed for lookup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigBundle {
    pub templates: Vec<TemplateEntry>,
    pub sources: BTreeMap<String, SourceConfig>,
    pub explore_all: ExploreAllConfig,
}

impl ConfigBundle {
    pub fn template(&self, source_type_id: &str) -> Option<&TemplateEntry> {
        self.templates.iter().find(|t| t.source_type_id == source_type_id)
    }

    /// Reads and parses every file of a bundle under `root`.
    ///
    /// Only syntax is checked here. Cross-references, including a template
    /// whose configuration file does not exist, are left to
    /// [`validate_bundle`] so that one report lists every problem.
    pub fn load(root: &Path) -> Result<Self, ConfigError> {
        let templates = parse_templates(&read(&root.join(TEMPLATES_FILE))?)?;
        let mut sources = BTreeMap::new();
        for t in &templates {
            let path = root.join(&t.config_file);
            if !path.is_file() || sources.contains_key(&t.source_type_id) {
                continue;
            }
            let bytes = read(&path)?;
            let config = parse_source_config_named(&bytes, &t.source_type_id, &t.config_file)?;
            sources.insert(t.source_type_id.clone(), config);
        }
        let cats = root.join(EXPLORE_ALL_FILE);
        let maps = root.join(EXPLORE_ALL_CONF_FILE);
        let explore_all = match (cats.exists(), maps.exists()) {
            (false, false) => ExploreAllConfig::default(),
            _ => parse_explore_all(&read(&cats)?, &read(&maps)?)?,
        };
        Ok(Self { templates, sources, explore_all })
    }
}

fn read(path: &Path) -> Result<Vec<u8>, ConfigError> {
    fs::read(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

fn json_array(bytes: &[u8], file: &str) -> Result<Vec<Value>, ConfigError> {
    let value: Value = serde_json::from_slice(strip_bom(bytes))
        .map_err(|source| ConfigError::Json { file: file.into(), source })?;
    match value {
        Value::Array(items) => Ok(items),
        _ => Err(ConfigError::Entry {
            file: file.into(),
            index: 0,
            message: "top-level value must be an array".into(),
        }),
    }
}

pub(crate) fn strip_bom(bytes: &[u8]) -> &[u8] {
    bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes)
}

fn entry<T: serde::de::DeserializeOwned>(
    value: Value,
    file: &str,
    index: usize,
) -> Result<T, ConfigError> {
    serde_json::from_value(value).map_err(|e| ConfigError::Entry {
        file: file.into(),
        index,
        message: e.to_string(),
    })
}

pub fn parse_templates(bytes: &[u8]) -> Result<Vec<TemplateEntry>, ConfigError> {
    json_array(bytes, TEMPLATES_FILE)?
        .into_iter()
        .enumerate()
        .map(|(index, value)| entry(value, TEMPLATES_FILE, index))
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSourceConfig {
    categories: Vec<RawCategory>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    name: String,
    base: String,
    columns: Vec<RawColumn>,
    identity: Vec<String>,
    #[serde(default)]
    connections: Vec<RawConnection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumn {
    name: String,
    #[serde(default)]
    path: Option<String>,
    #[serde(default = "default_kind")]
    kind: ValueKind,
}

fn default_kind() -> ValueKind {
    ValueKind::Text
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawJoin {
    SameRecord,
    KeyMatch,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    label: String,
    target: String,
    join: RawJoin,
    #[serde(default)]
    local_column: Option<String>,
    #[serde(default)]
    remote_column: Option<String>,
}

/// Parses one source type's configuration file. Names and references are
/// not checked; see [`validate_bundle`].
pub fn parse_source_config(
    bytes: &[u8],
    source_type_id: &str,
) -> Result<SourceConfig, ConfigError> {
    parse_source_config_named(bytes, source_type_id, &format!("{source_type_id}.json"))
}

fn parse_source_config_named(
    bytes: &[u8],
    source_type_id: &str,
    file: &str,
) -> Result<SourceConfig, ConfigError> {
    let raw: RawSourceConfig = serde_json::from_slice(strip_bom(bytes))
        .map_err(|source| ConfigError::Json { file: file.into(), source })?;

    let mut categories = Vec::with_capacity(raw.categories.len());
    for (index, rc) in raw.categories.iter().enumerate() {
        let path_err = |field: String, error| ConfigError::Path {
            file: file.into(),
            category: rc.name.clone(),
            field,
            error,
        };
        let base_path = PathExpr::parse(&rc.base).map_err(|e| path_err("base".into(), e))?;

        let mut columns = Vec::with_capacity(rc.columns.len());
        for col in &rc.columns {
            let path = match &col.path {
                Some(p) => PathExpr::parse(p)
                    .map_err(|e| path_err(format!("column {:?} path", col.name), e))?,
                None => PathExpr::field(col.name.clone()),
            };
            columns.push(ColumnSpec { name: col.name.clone(), path, kind: col.kind });
        }

        let mut connections = Vec::with_capacity(rc.connections.len());
        for conn in &rc.connections {
            let join = match conn.join {
                RawJoin::SameRecord => JoinKind::SameRecord,
                RawJoin::KeyMatch => match (&conn.local_column, &conn.remote_column) {
                    (Some(l), Some(r)) => JoinKind::KeyMatch {
                        local_column: l.clone(),
                        remote_column: r.clone(),
                    },
                    _ => {
                        return Err(ConfigError::Entry {
                            file: file.into(),
                            index,
                            message: format!(
                                "key_match connection {:?} needs local_column and remote_column",
                                conn.label
                            ),
                        })
                    }
                },
            };
            connections.push(ConnectionSpec {
                label: conn.label.clone(),
                target_category: conn.target.clone(),
                join,
            });
        }

        categories.push(EntityCategoryConfig {
            name: rc.name.clone(),
            base_path,
            columns,
            identity: rc.identity.clone(),
            connections,
        });
    }

    Ok(SourceConfig { source_type_id: source_type_id.to_string(), categories })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGlobalCategory {
    name: String,
    group: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGlobalMapping {
    category: String,
    tables: Vec<SourceMapping>,
}

/// Parses the global category list and its per-source table mappings.
///
/// A mapping must name a declared global category (the first one, if the
/// name repeats); what it maps is checked by [`validate_bundle`].
pub fn parse_explore_all(
    categories_bytes: &[u8],
    mappings_bytes: &[u8],
) -> Result<ExploreAllConfig, ConfigError> {
    let mut categories: Vec<GlobalCategoryConfig> = Vec::new();
    for (index, v) in json_array(categories_bytes, EXPLORE_ALL_FILE)?.into_iter().enumerate() {
        let raw: RawGlobalCategory = entry(v, EXPLORE_ALL_FILE, index)?;
        categories.push(GlobalCategoryConfig {
            name: raw.name,
            group_label: raw.group,
            mappings: Vec::new(),
        });
    }

    let file = EXPLORE_ALL_CONF_FILE;
    for (index, v) in json_array(mappings_bytes, file)?.into_iter().enumerate() {
        let raw: RawGlobalMapping = entry(v, file, index)?;
        let mapping_err = |message: String| ConfigError::Mapping {
            file: file.into(),
            category: raw.category.clone(),
            message,
        };
        let Some(target) = categories.iter_mut().find(|c| c.name == raw.category) else {
            return Err(mapping_err(format!("not declared in {EXPLORE_ALL_FILE}")));
        };
        target.mappings.extend(raw.tables.iter().cloned());
    }
    Ok(ExploreAllConfig { categories })
}
