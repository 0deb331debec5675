use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::TripleStore;
use crate::sparql::{self, results, QueryResults};
use crate::turtle::parse_turtle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceKind {
    /// A Turtle file queried in process.
    Fixture(PathBuf),
    /// A SPARQL protocol endpoint URL.
    Remote(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LodSource {
    pub name: String,
    pub kind: SourceKind,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FetchFailure {
    #[error("timed out after {0:?}")]
    Timeout(Duration),
    #[error("network failure: {0}")]
    Network(String),
    #[error("endpoint answered HTTP {0}")]
    Http(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("unavailable: {0}")]
    Unavailable(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("source {source_name}: {failure}")]
pub struct FetchError {
    pub source_name: String,
    pub failure: FetchFailure,
}

/// Anything that answers SELECT queries in the supported subset.
pub trait QueryRunner: Send + Sync {
    fn select(&self, query: &str) -> Result<QueryResults, FetchFailure>;
}

/// A Turtle file, reparsed whenever its modification time changes.
#[derive(Debug)]
pub struct FixtureRunner {
    path: PathBuf,
    cache: Mutex<Option<(SystemTime, Arc<TripleStore>)>>,
}

impl FixtureRunner {
    pub fn new(path: PathBuf) -> Self {
        FixtureRunner {
            path,
            cache: Mutex::new(None),
        }
    }

    /// Loads the file now, failing if it is missing or malformed.
    pub fn check(&self) -> Result<(), FetchFailure> {
        self.store().map(|_| ())
    }

    fn store(&self) -> Result<Arc<TripleStore>, FetchFailure> {
        let unavailable = |e: std::io::Error| FetchFailure::Unavailable(format!("{}: {e}", self.path.display()));
        let modified = std::fs::metadata(&self.path)
            .and_then(|m| m.modified())
            .map_err(unavailable)?;
        let mut cache = self.cache.lock().unwrap_or_else(|p| p.into_inner());
        if let Some((at, store)) = cache.as_ref() {
            if *at == modified {
                return Ok(store.clone());
            }
        }
        let text = std::fs::read_to_string(&self.path).map_err(unavailable)?;
        let base = format!("file://{}", self.path.display());
        let triples = parse_turtle(&text, &base)
            .map_err(|e| FetchFailure::Malformed(format!("{}: {e}", self.path.display())))?;
        let store = Arc::new(triples.into_iter().collect::<TripleStore>());
        *cache = Some((modified, store.clone()));
        Ok(store)
    }
}

impl QueryRunner for FixtureRunner {
    fn select(&self, query: &str) -> Result<QueryResults, FetchFailure> {
        let store = self.store()?;
        sparql::query(&store, query).map_err(|e| FetchFailure::Malformed(e.to_string()))
    }
}

/// A SPARQL endpoint reached with HTTP GET and JSON results.
#[derive(Debug, Clone)]
pub struct RemoteRunner {
    endpoint: String,
    timeout: Duration,
}

impl RemoteRunner {
    pub fn new(endpoint: String, timeout: Duration) -> Self {
        RemoteRunner { endpoint, timeout }
    }
}

impl QueryRunner for RemoteRunner {
    fn select(&self, query: &str) -> Result<QueryResults, FetchFailure> {
        // The blocking client owns a runtime, so it is built and dropped on the calling worker thread.
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| FetchFailure::Network(e.to_string()))?;
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                FetchFailure::Timeout(self.timeout)
            } else {
                FetchFailure::Network(e.to_string())
            }
        };
        let response = client
            .get(&self.endpoint)
            .query(&[("query", query)])
            .header(reqwest::header::ACCEPT, "application/sparql-results+json")
            .send()
            .map_err(classify)?;
        if !response.status().is_success() {
            return Err(FetchFailure::Http(response.status().as_u16()));
        }
        let body = response.text().map_err(classify)?;
        let json: serde_json::Value =
            serde_json::from_str(&body).map_err(|e| FetchFailure::Malformed(e.to_string()))?;
        results::from_json(&json).map_err(FetchFailure::Malformed)
    }
}
