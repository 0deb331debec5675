//! HTTP JSON API and command-line operations over a persisted platform.

pub mod api;
pub mod commands;
pub mod config;
pub mod error;

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use thiserror::Error;
use tokio::net::TcpListener;

use semaps_core::kb::{load_kb, KbError, KnowledgeGraph};
use semaps_core::lod::{LodError, LodService};
use semaps_core::platform::{Platform, PlatformError};

pub use api::{router, AppState};
pub use config::{Config, ConfigError};
pub use error::{ApiError, ErrorCode};

#[derive(Debug, Error)]
pub enum StartError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("knowledge base: {0}")]
    Kb(#[from] KbError),
    #[error("LOD sources: {0}")]
    Lod(#[from] LodError),
    #[error("platform store: {0}")]
    Platform(#[from] PlatformError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Serve(#[source] std::io::Error),
}

pub fn load_graph(config: &Config) -> Result<KnowledgeGraph, KbError> {
    load_kb(&config.kb_concepts, &config.kb_relations)
}

/// Loads the KB, recovers the store and prepares the LOD sources.
pub fn build_state(config: &Config) -> Result<AppState, StartError> {
    let kb = load_graph(config)?;
    let lod = LodService::new(config.sources.clone(), config.fetch_timeout)?;
    let platform = Platform::open(&config.data_dir, config.platform())?;
    tracing::info!(
        concepts = kb.len(),
        relations = kb.relation_count(),
        seq = platform.seq(),
        "platform ready"
    );
    Ok(AppState {
        platform: Arc::new(RwLock::new(platform)),
        kb: Arc::new(kb),
        lod,
        default_depth: config.expansion_depth,
    })
}

pub async fn bind(addr: SocketAddr) -> Result<TcpListener, StartError> {
    TcpListener::bind(addr).await.map_err(|source| StartError::Bind { addr, source })
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), StartError> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(StartError::Serve)
}
