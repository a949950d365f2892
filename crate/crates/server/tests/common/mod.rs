#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use archex_core::Engine;
use archex_server::{router, AppState};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde_json::Value;
use tower::ServiceExt;

pub fn demo_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

pub fn engine_at(root: &Path) -> Engine {
    Engine::load(&root.join("config"), &root.join("data")).unwrap()
}

pub fn app_at(root: &Path, admin: bool) -> (Arc<AppState>, Router) {
    let state = Arc::new(AppState::new(engine_at(root), admin));
    (state.clone(), router(state))
}

pub fn demo_app() -> Router {
    app_at(&demo_dir(), false).1
}

pub fn two_source_app() -> Router {
    app_at(&demo_dir().join("two_source"), false).1
}

pub fn enc(s: &str) -> String {
    utf8_percent_encode(s, NON_ALPHANUMERIC).to_string()
}

pub struct Resp {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub body: Vec<u8>,
}

impl Resp {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| {
            panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body))
        })
    }

    pub fn generation(&self) -> u64 {
        self.headers["x-archex-generation"].to_str().unwrap().parse().unwrap()
    }

    pub fn error_code(&self) -> String {
        self.json()["error"]["code"].as_str().unwrap().to_string()
    }
}

pub async fn call(app: &Router, method: &str, uri: &str) -> Resp {
    let req = Request::builder().method(method).uri(uri).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Resp { status, headers, body }
}

pub async fn get(app: &Router, uri: &str) -> Resp {
    call(app, "GET", uri).await
}

pub fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}
