//! One consistent snapshot of configuration, corpus, and catalogs.

use std::path::{Path, PathBuf};

use crate::catalog::{BuildWarning, CatalogError, Catalogs};
use crate::config::{validate_bundle, ConfigBundle, ConfigError, ValidationReport};
use crate::corpus::{load_corpus, Corpus, CorpusError, LoadWarning};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("configuration has {} error(s)", .0.errors())]
    Invalid(ValidationReport),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Debug)]
pub struct Engine {
    pub config_root: PathBuf,
    pub data_root: PathBuf,
    pub bundle: ConfigBundle,
    pub report: ValidationReport,
    pub corpus: Corpus,
    pub catalogs: Catalogs,
    pub load_warnings: Vec<LoadWarning>,
    pub build_warnings: Vec<BuildWarning>,
}

impl Engine {
    /// Loads, validates, and builds everything, refusing bundles with
    /// error-severity findings.
    pub fn load(config_root: &Path, data_root: &Path) -> Result<Self, EngineError> {
        let bundle = ConfigBundle::load(config_root)?;
        let report = validate_bundle(&bundle);
        if !report.is_usable() {
            return Err(EngineError::Invalid(report));
        }
        let (corpus, load_warnings) = load_corpus(data_root, &bundle.templates)?;
        let (catalogs, build_warnings) = Catalogs::build(&bundle, &corpus)?;
        Ok(Self {
            config_root: config_root.to_path_buf(),
            data_root: data_root.to_path_buf(),
            bundle,
            report,
            corpus,
            catalogs,
            load_warnings,
            build_warnings,
        })
    }
}
