use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use archex_core::Engine;
use serde_json::{json, Value};

use crate::api::{reload_failed, ApiError, Snapshot};

/// The served snapshot. Readers clone the `Arc` and never wait on a build;
/// reload builds a new engine off to the side and swaps the pointer.
pub struct AppState {
    current: RwLock<Arc<Snapshot>>,
    reload_gate: tokio::sync::Mutex<()>,
    config_root: PathBuf,
    data_root: PathBuf,
    pub admin: bool,
}

impl AppState {
    pub fn new(engine: Engine, admin: bool) -> Self {
        AppState {
            config_root: engine.config_root.clone(),
            data_root: engine.data_root.clone(),
            current: RwLock::new(Arc::new(Snapshot::new(engine, 1))),
            reload_gate: tokio::sync::Mutex::new(()),
            admin,
        }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("state lock").clone()
    }

    /// Rebuilds from disk. On failure the old snapshot stays in place.
    pub async fn reload(&self) -> Result<Value, ApiError> {
        let _one_at_a_time = self.reload_gate.lock().await;
        let (config, data) = (self.config_root.clone(), self.data_root.clone());
        let built = tokio::task::spawn_blocking(move || Engine::load(&config, &data))
            .await
            .map_err(|e| ApiError::new(500, "reload_failed", format!("reload task failed: {e}")))?;
        let engine = built.map_err(|e| {
            let err = reload_failed(&e);
            tracing::warn!(%err, "reload rejected");
            err
        })?;
        let warnings = engine.load_warnings.len() + engine.build_warnings.len();
        let mut slot = self.current.write().expect("state lock");
        let generation = slot.generation + 1;
        *slot = Arc::new(Snapshot::new(engine, generation));
        tracing::info!(generation, "reloaded");
        Ok(json!({ "generation": generation, "warnings": warnings }))
    }
}
