//! HTTP binding of [`Store`].

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use semiom_core::algebra::{NodeId, Workspace};
use semiom_core::conversation::Move;
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

use crate::error::{ErrorBody, ServiceError};
use crate::store::{Handle, LegalView, PackInfo, Posted, Store};

type Shared = State<Arc<Store>>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).expect("service statuses are valid");
        (status, Json(self.body())).into_response()
    }
}

fn bad_json(rejection: JsonRejection) -> ServiceError {
    ServiceError::BadRequest(rejection.body_text())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    pack_id: String,
    #[serde(default)]
    workspace: Option<Workspace>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PostMove {
    #[serde(rename = "move")]
    mv: Move,
    expected_revision: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwapPack {
    pack_id: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderQuery {
    manifest: Option<String>,
    focus: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Rendered<T> {
    revision: u64,
    tree: T,
}

#[derive(Debug, Serialize)]
struct WorkspaceView {
    revision: u64,
    workspace: Workspace,
}

async fn list_packs(State(store): Shared) -> Json<Vec<PackInfo>> {
    Json(store.packs())
}

async fn create_session(
    State(store): Shared,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Handle>), ServiceError> {
    let Json(body) = body.map_err(bad_json)?;
    let handle = store.create_session(&body.pack_id, body.workspace)?;
    Ok((StatusCode::CREATED, Json(handle)))
}

async fn session(State(store): Shared, Path(id): Path<String>) -> Result<Json<Handle>, ServiceError> {
    store.handle(&id).map(Json)
}

async fn render(
    State(store): Shared,
    Path(id): Path<String>,
    query: Result<Query<RenderQuery>, QueryRejection>,
) -> Result<Response, ServiceError> {
    let Query(query) = query.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let (revision, tree) = store.render(&id, query.manifest.as_deref(), query.focus.map(NodeId))?;
    Ok(Json(Rendered { revision, tree }).into_response())
}

async fn legal(State(store): Shared, Path(id): Path<String>) -> Result<Json<LegalView>, ServiceError> {
    store.legal(&id).map(Json)
}

async fn post_move(
    State(store): Shared,
    Path(id): Path<String>,
    body: Result<Json<PostMove>, JsonRejection>,
) -> Result<Json<Posted>, ServiceError> {
    let Json(body) = body.map_err(bad_json)?;
    store.post_move(&id, body.mv, body.expected_revision).map(Json)
}

async fn swap_pack(
    State(store): Shared,
    Path(id): Path<String>,
    body: Result<Json<SwapPack>, JsonRejection>,
) -> Result<Json<Handle>, ServiceError> {
    let Json(body) = body.map_err(bad_json)?;
    store.swap_pack(&id, &body.pack_id).map(Json)
}

async fn workspace(State(store): Shared, Path(id): Path<String>) -> Result<Json<WorkspaceView>, ServiceError> {
    let (revision, workspace) = store.workspace(&id)?;
    Ok(Json(WorkspaceView { revision, workspace }))
}

async fn no_route() -> Response {
    let body = ErrorBody {
        code: "unknown_route",
        message_key: "error.bad-request",
        message: "no such endpoint".to_owned(),
        revision: None,
    };
    (StatusCode::NOT_FOUND, Json(body)).into_response()
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/packs", get(list_packs))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/render", get(render))
        .route("/sessions/{id}/moves", get(legal).post(post_move))
        .route("/sessions/{id}/pack", put(swap_pack))
        .route("/sessions/{id}/workspace", get(workspace))
        .fallback(no_route)
        .with_state(store)
}

/// Serves `store` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    store: Arc<Store>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(store)).with_graceful_shutdown(shutdown).await
}

/// A server on an ephemeral local port, running on its own thread until
/// dropped.
pub struct Background {
    addr: SocketAddr,
    store: Arc<Store>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl Background {
    pub fn start(store: Arc<Store>) -> io::Result<Background> {
        let listener = std::net::TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let served = store.clone();
        let thread = std::thread::spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?;
                serve(listener, served, async move {
                    let _ = stopped.await;
                })
                .await
            })
        });
        Ok(Background { addr, store, stop: Some(stop), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }
}

impl Drop for Background {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
