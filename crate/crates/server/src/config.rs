//! TOML configuration. Relative paths resolve against the config file's directory.
//!
//! ```toml
//! base_namespace = "http://semaps.example/ns#"
//! listen = "127.0.0.1:8080"
//! data_dir = "data"
//! expansion_depth = 1
//! fetch_timeout_secs = 5
//! snapshot_every = 50
//!
//! [kb]
//! concepts = "kb/concepts.tsv"
//! relations = "kb/relations.tsv"
//!
//! [[sources]]
//! name = "nyt"
//! fixture = "lod/nyt.ttl"
//!
//! [[sources]]
//! name = "dbpedia"
//! endpoint = "https://dbpedia.org/sparql"
//! enabled = false
//!
//! [reliability]
//! DirectWitness = 0.75
//! ```

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use semaps_core::kb::MAX_EXPANSION_DEPTH;
use semaps_core::lod::{LodSource, SourceKind, DEFAULT_TIMEOUT};
use semaps_core::ontology::{ReliabilityTable, SourceType};
use semaps_core::platform::{PlatformConfig, DEFAULT_SNAPSHOT_EVERY};
use semaps_core::rdf::is_absolute_iri;
use semaps_core::vocab::DEFAULT_BASE;

/// Environment variable consulted when no config path is given.
pub const CONFIG_ENV: &str = "SEMAPS_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("no config file given and {CONFIG_ENV} is not set")]
    Missing,
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config {path}: {field}: {message}")]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_base")]
    base_namespace: String,
    #[serde(default = "default_listen")]
    listen: String,
    #[serde(default = "default_data_dir")]
    data_dir: PathBuf,
    #[serde(default = "default_depth")]
    expansion_depth: u8,
    #[serde(default = "default_timeout")]
    fetch_timeout_secs: f64,
    #[serde(default = "default_snapshot_every")]
    snapshot_every: u64,
    kb: RawKb,
    #[serde(default)]
    sources: Vec<RawSource>,
    #[serde(default)]
    reliability: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKb {
    concepts: PathBuf,
    relations: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    name: String,
    fixture: Option<PathBuf>,
    endpoint: Option<String>,
    #[serde(default = "enabled")]
    enabled: bool,
}

fn default_base() -> String {
    DEFAULT_BASE.to_string()
}

fn default_listen() -> String {
    "127.0.0.1:8080".to_string()
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_depth() -> u8 {
    1
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT.as_secs_f64()
}

fn default_snapshot_every() -> u64 {
    DEFAULT_SNAPSHOT_EVERY
}

fn enabled() -> bool {
    true
}

#[derive(Debug, Clone)]
pub struct Config {
    pub path: PathBuf,
    pub base_namespace: String,
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub kb_concepts: PathBuf,
    pub kb_relations: PathBuf,
    pub sources: Vec<LodSource>,
    pub reliability: ReliabilityTable,
    pub expansion_depth: u8,
    pub fetch_timeout: Duration,
    pub snapshot_every: u64,
}

impl Config {
    /// Uses `path`, or the `SEMAPS_CONFIG` variable when `path` is `None`.
    pub fn locate(path: Option<&Path>) -> Result<Config, ConfigError> {
        match path {
            Some(p) => Config::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => Config::load(Path::new(&p)),
                None => Err(ConfigError::Missing),
            },
        }
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Config::parse(&text, path)
    }

    /// Parses and validates `text` as if it were read from `path`.
    pub fn parse(text: &str, path: &Path) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { dir.join(p) };
        let invalid = |field: &str, message: String| ConfigError::Invalid {
            path: path.to_path_buf(),
            field: field.to_string(),
            message,
        };

        if !is_absolute_iri(&raw.base_namespace) {
            return Err(invalid("base_namespace", format!("{:?} is not an absolute IRI", raw.base_namespace)));
        }
        let listen: SocketAddr = raw
            .listen
            .parse()
            .map_err(|e| invalid("listen", format!("{:?}: {e}", raw.listen)))?;
        if !(1..=MAX_EXPANSION_DEPTH).contains(&raw.expansion_depth) {
            return Err(invalid(
                "expansion_depth",
                format!("{} is outside 1..={MAX_EXPANSION_DEPTH}", raw.expansion_depth),
            ));
        }
        if !(raw.fetch_timeout_secs.is_finite() && raw.fetch_timeout_secs > 0.0) {
            return Err(invalid("fetch_timeout_secs", "must be a positive number".into()));
        }

        let kb_concepts = resolve(&raw.kb.concepts);
        let kb_relations = resolve(&raw.kb.relations);
        for (field, file) in [("kb.concepts", &kb_concepts), ("kb.relations", &kb_relations)] {
            if !file.is_file() {
                return Err(invalid(field, format!("{} does not exist", file.display())));
            }
        }

        let mut sources = Vec::new();
        for (i, s) in raw.sources.into_iter().enumerate() {
            let field = format!("sources[{i}]");
            if s.name.trim().is_empty() {
                return Err(invalid(&field, "name is empty".into()));
            }
            if sources.iter().any(|o: &LodSource| o.name == s.name) {
                return Err(invalid(&field, format!("duplicate source name {:?}", s.name)));
            }
            let kind = match (s.fixture, s.endpoint) {
                (Some(f), None) => {
                    let f = resolve(&f);
                    if s.enabled && !f.is_file() {
                        return Err(invalid(&field, format!("fixture {} does not exist", f.display())));
                    }
                    SourceKind::Fixture(f)
                }
                (None, Some(e)) => {
                    if !(e.starts_with("http://") || e.starts_with("https://")) {
                        return Err(invalid(&field, format!("endpoint {e:?} is not an http(s) URL")));
                    }
                    SourceKind::Remote(e)
                }
                _ => return Err(invalid(&field, "set exactly one of fixture or endpoint".into())),
            };
            sources.push(LodSource {
                name: s.name,
                kind,
                enabled: s.enabled,
            });
        }

        let mut reliability = ReliabilityTable::default();
        for (name, value) in raw.reliability {
            let source: SourceType = name.parse().map_err(|e: String| invalid("reliability", e))?;
            reliability = reliability
                .with_override(source, value)
                .map_err(|e| invalid("reliability", e.to_string()))?;
        }

        Ok(Config {
            path: path.to_path_buf(),
            base_namespace: raw.base_namespace,
            listen,
            data_dir: resolve(&raw.data_dir),
            kb_concepts,
            kb_relations,
            sources,
            reliability,
            expansion_depth: raw.expansion_depth,
            fetch_timeout: Duration::from_secs_f64(raw.fetch_timeout_secs),
            snapshot_every: raw.snapshot_every,
        })
    }

    pub fn platform(&self) -> PlatformConfig {
        PlatformConfig {
            base: self.base_namespace.clone(),
            reliability: self.reliability.clone(),
            snapshot_every: self.snapshot_every,
        }
    }
}
