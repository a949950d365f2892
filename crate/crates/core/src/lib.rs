//! Entity-centric exploration of transcribed archival documents.
//!
//! A declarative configuration says which entity categories live where in
//! each source type's JSON transcripts. From it the crate extracts entity
//! tables with record-level provenance, builds a cross-source view, and
//! answers filtered, sorted, paged, and grouped queries over them.

pub mod catalog;
pub mod config;
pub mod corpus;
pub mod engine;
pub mod export;
pub mod fold;
pub mod query;
pub mod synth;

/// Characters escaped when a value is placed in a URL path segment: all but
/// the unreserved set.
pub const URL_SEGMENT: &percent_encoding::AsciiSet = &percent_encoding::NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

pub use catalog::{CellValue, Catalogs, EntityKey, EntityRow};
pub use config::{ConfigBundle, PathExpr, ValidationReport};
pub use corpus::{Corpus, TranscriptRecord};
pub use engine::{Engine, EngineError};
pub use query::{Filter, FilterOp, Scope, TableQuery};
