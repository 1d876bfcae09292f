//! HTTP/JSON front end for teacher-in-the-loop search sessions.
//!
//! | method | path | purpose |
//! |---|---|---|
//! | POST | `/api/sessions` | start a session and return the first batch |
//! | POST | `/api/sessions/{id}/feedback` | record relevance judgments |
//! | POST | `/api/sessions/{id}/more` | refresh the query and return the next batch |
//! | GET | `/api/sessions/{id}/export?format=txt\|csv\|json` | download relevant sentences |
//! | GET | `/api/health` | index size and dimension |

mod config;
mod error;
mod routes;
mod store;

use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use axum::http::{header, HeaderValue, Method};
use axum::Router;
use titl_core::{load_index, load_model, SearchEngine, SearchMode};
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use config::ServiceConfig;
pub use error::{ApiError, ServiceError};
pub use routes::ResultItem;
pub use store::{RestoreOutcome, SessionSlot, SessionStore};

/// Shared state behind every handler.
#[derive(Debug)]
pub struct AppState {
    pub engine: Arc<SearchEngine>,
    pub store: SessionStore,
    pub default_k: usize,
    pub default_mode: SearchMode,
}

impl AppState {
    pub fn new(engine: Arc<SearchEngine>, config: &ServiceConfig) -> Result<Self, ServiceError> {
        Ok(AppState {
            engine,
            store: SessionStore::new(config.session_ttl()),
            default_k: config.default_k.max(1),
            default_mode: config.default_search_mode()?,
        })
    }
}

pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Router {
    let app = routes::api_routes().with_state(state);
    if cors_origins.is_empty() {
        return app;
    }
    let allow = if cors_origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(
            cors_origins
                .iter()
                .filter_map(|o| HeaderValue::from_str(o).ok()),
        )
    };
    app.layer(
        CorsLayer::new()
            .allow_origin(allow)
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([header::CONTENT_TYPE])
            .expose_headers([header::CONTENT_DISPOSITION]),
    )
}

/// Loads the index and model named in `config` and builds the search engine.
pub fn load_engine(config: &ServiceConfig) -> Result<SearchEngine, ServiceError> {
    let index = load_index(&config.index_path)?;
    let model = load_model(&config.model_path)?;
    Ok(SearchEngine::new(index, Arc::new(model), config.tokenizer())?)
}

/// Serves on `listener` until `shutdown` resolves, then writes the session
/// snapshot if one is configured.
pub async fn serve_on(
    listener: TcpListener,
    state: Arc<AppState>,
    config: &ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let app = router(Arc::clone(&state), &config.cors_origins);

    let sweeper = {
        let state = Arc::clone(&state);
        let period = Duration::from_secs(config.session_ttl_secs.clamp(1, 60));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                let evicted = state.store.evict_expired(store::unix_now());
                if evicted > 0 {
                    tracing::info!(evicted, "expired sessions removed");
                }
            }
        })
    };

    let served = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    write_snapshot(&state, config);
    served.map_err(ServiceError::Server)
}

fn write_snapshot(state: &AppState, config: &ServiceConfig) {
    let Some(path) = &config.snapshot_path else {
        return;
    };
    match state.store.write_snapshot(path, state.engine.index().len()) {
        Ok(()) => tracing::info!(path = %path.display(), sessions = state.store.len(), "session snapshot written"),
        Err(e) => tracing::error!(path = %path.display(), error = %e, "cannot write session snapshot"),
    }
}

/// Restores sessions from the configured snapshot, logging the outcome.
pub fn restore_sessions(state: &AppState, config: &ServiceConfig) -> RestoreOutcome {
    let Some(path) = &config.snapshot_path else {
        return RestoreOutcome::Missing;
    };
    let outcome = state.store.restore(path, &state.engine);
    match &outcome {
        RestoreOutcome::Missing => tracing::info!(path = %path.display(), "no session snapshot"),
        RestoreOutcome::Restored(n) => tracing::info!(path = %path.display(), sessions = n, "sessions restored"),
        RestoreOutcome::Rejected(reason) => {
            tracing::warn!(path = %path.display(), %reason, "ignoring session snapshot; starting empty")
        }
    }
    outcome
}

/// Runs the service described by `config` until SIGINT/SIGTERM.
pub async fn run(config: ServiceConfig) -> Result<(), ServiceError> {
    config.validate()?;
    let engine = Arc::new(load_engine(&config)?);
    let state = Arc::new(AppState::new(engine, &config)?);
    restore_sessions(&state, &config);
    let addr = config.socket_addr()?;
    let listener = TcpListener::bind(addr).await.map_err(|source| ServiceError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    tracing::info!(%addr, sentences = state.engine.index().len(), "listening");
    serve_on(listener, state, &config, shutdown_signal()).await
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
    tracing::info!("shutting down");
}
