use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{ConfigBundle, JoinKind, ValueKind, RECORD_ID_PLACEHOLDER, TEMPLATES_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn count(&self, severity: Severity) -> usize {
        self.findings.iter().filter(|f| f.severity == severity).count()
    }

    pub fn errors(&self) -> usize {
        self.count(Severity::Error)
    }

    pub fn is_usable(&self) -> bool {
        self.errors() == 0
    }

    fn push(&mut self, severity: Severity, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity,
            location: location.into(),
            message: message.into(),
        });
    }

    fn error(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, location, message);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        write!(
            f,
            "{} errors, {} warnings",
            self.errors(),
            self.count(Severity::Warning)
        )
    }
}

/// Cross-checks every reference in a parsed bundle.
///
/// The bundle is usable iff the report carries no error findings; catalog
/// construction relies on that guarantee.
pub fn validate_bundle(bundle: &ConfigBundle) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut ids = HashSet::new();

    for (i, t) in bundle.templates.iter().enumerate() {
        let loc = format!("{TEMPLATES_FILE}[{i}]");
        if t.source_type_id.is_empty() {
            report.error(&loc, "empty source type id");
        } else if !ids.insert(t.source_type_id.as_str()) {
            report.error(&loc, format!("duplicate source type id {:?}", t.source_type_id));
        }
        if let Some(pattern) = &t.transcript_url_pattern {
            let n = pattern.matches(RECORD_ID_PLACEHOLDER).count();
            if n != 1 {
                report.error(
                    format!("{loc}.transcript_url_pattern"),
                    format!("must contain {RECORD_ID_PLACEHOLDER} exactly once, found {n}"),
                );
            }
        }
        if !bundle.sources.contains_key(&t.source_type_id) {
            report.error(&loc, format!("no configuration loaded from {:?}", t.config_file));
        }
    }
    for id in bundle.sources.keys() {
        if !ids.contains(id.as_str()) {
            report.error(id.as_str(), "source configuration without a template entry");
        }
    }

    for (id, source) in &bundle.sources {
        let mut names = HashSet::new();
        for cat in &source.categories {
            let loc = format!("{id}/{}", cat.name);
            if cat.name.is_empty() {
                report.error(&loc, "empty category name");
            } else if !names.insert(cat.name.as_str()) {
                report.error(&loc, "duplicate category name");
            }
            let mut cols = HashSet::new();
            for col in &cat.columns {
                if col.name.is_empty() || !cols.insert(col.name.as_str()) {
                    report.error(&loc, format!("duplicate or empty column name {:?}", col.name));
                }
            }
            if cat.identity.is_empty() {
                report.error(&loc, "identity must list at least one column");
            }
            for c in &cat.identity {
                if !cols.contains(c.as_str()) {
                    report.error(&loc, format!("identity column {c:?} is not a declared column"));
                }
            }
            for (ci, conn) in cat.connections.iter().enumerate() {
                let cloc = format!("{loc}.connections[{ci}]");
                let Some(target) = source.category(&conn.target_category) else {
                    report.error(&cloc, format!("unknown target category {:?}", conn.target_category));
                    continue;
                };
                if let JoinKind::KeyMatch { local_column, remote_column } = &conn.join {
                    if cat.column_index(local_column).is_none() {
                        report.error(&cloc, format!("local_column {local_column:?} not in {:?}", cat.name));
                    }
                    if target.column_index(remote_column).is_none() {
                        report.error(
                            &cloc,
                            format!("remote_column {remote_column:?} not in {:?}", target.name),
                        );
                    }
                }
            }
        }
        for (i, a) in source.categories.iter().enumerate() {
            for b in &source.categories[i + 1..] {
                if a.base_path == b.base_path {
                    report.push(
                        Severity::Info,
                        format!("{id}/{}", b.name),
                        format!("shares base path {:?} with {:?}", b.base_path.to_string(), a.name),
                    );
                }
            }
        }
    }

    let mut globals = HashSet::new();
    for gc in &bundle.explore_all.categories {
        let loc = format!("explore_all/{}", gc.name);
        if !globals.insert(gc.name.as_str()) {
            report.error(&loc, "duplicate global category");
        }
        let mut seen = HashSet::new();
        let mut kinds: BTreeMap<&str, ValueKind> = BTreeMap::new();
        for m in &gc.mappings {
            if !seen.insert((m.source.as_str(), m.category.as_str())) {
                report.error(&loc, format!("table {:?}/{:?} mapped twice", m.source, m.category));
            }
            let Some(src) = bundle.sources.get(&m.source).filter(|_| ids.contains(m.source.as_str()))
            else {
                report.error(&loc, format!("undeclared source type {:?}", m.source));
                continue;
            };
            let Some(cat) = src.category(&m.category) else {
                report.error(&loc, format!("source {:?} has no category {:?}", m.source, m.category));
                continue;
            };
            for col in &cat.columns {
                match kinds.get(col.name.as_str()) {
                    Some(&k) if k != col.kind => report.push(
                        Severity::Warning,
                        &loc,
                        format!(
                            "column {:?} is {} in {:?} but {} elsewhere",
                            col.name,
                            col.kind.as_str(),
                            m.source,
                            k.as_str()
                        ),
                    ),
                    Some(_) => {}
                    None => {
                        kinds.insert(&col.name, col.kind);
                    }
                }
            }
        }
    }

    report
}
