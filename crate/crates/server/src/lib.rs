//! HTTP service and command-line front end for the archex engine.

pub mod api;
pub mod http;
pub mod state;

pub use api::{ApiError, QueryParams, Snapshot};
pub use http::router;
pub use state::AppState;
