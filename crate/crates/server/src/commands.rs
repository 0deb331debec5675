//! Operations behind the offline CLI subcommands.

use std::path::Path;

use semaps_core::kb::KnowledgeGraph;
use semaps_core::platform::{self, Command, Outcome, Platform};
use semaps_core::rdb2rdf::{apply_mapping, parse_mapping, MappingError, TableData};
use semaps_core::sparql::{self, results, QueryError};
use semaps_core::turtle::serialize_turtle;
use thiserror::Error;

use crate::config::Config;
use crate::StartError;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Start(#[from] StartError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<platform::PlatformError> for CommandError {
    fn from(e: platform::PlatformError) -> Self {
        CommandError::Start(StartError::Platform(e))
    }
}

fn open(config: &Config) -> Result<Platform, CommandError> {
    Ok(Platform::open(&config.data_dir, config.platform())?)
}

fn import(platform: &mut Platform, turtle: String) -> Result<usize, CommandError> {
    match platform.execute(Command::ImportTurtle { turtle })? {
        Outcome::Imported(n) => Ok(n),
        _ => Ok(0),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbSummary {
    pub concepts: usize,
    pub relations: usize,
    pub new_triples: usize,
}

/// Validates the configured KB and publishes it into the store.
pub fn load_kb(config: &Config) -> Result<KbSummary, CommandError> {
    let kb: KnowledgeGraph = crate::load_graph(config).map_err(StartError::from)?;
    let triples = kb.to_triples(&config.base_namespace);
    let mut platform = open(config)?;
    let turtle = serialize_turtle(&triples, &platform::prefixes(&config.base_namespace));
    let new_triples = import(&mut platform, turtle)?;
    Ok(KbSummary {
        concepts: kb.len(),
        relations: kb.relation_count(),
        new_triples,
    })
}

/// Maps CSV tables through a mapping file into the store; returns the
/// number of mapped triples and how many of them were new.
pub fn import_csv(config: &Config, mapping: &Path, csvs: &[&Path]) -> Result<(usize, usize), CommandError> {
    let text = std::fs::read_to_string(mapping).map_err(|source| CommandError::Io {
        path: mapping.display().to_string(),
        source,
    })?;
    let rules = parse_mapping(&text)?;
    let tables = csvs.iter().map(|p| TableData::read_csv(p)).collect::<Result<Vec<_>, _>>()?;
    let triples = apply_mapping(&rules, &tables)?;
    let mut platform = open(config)?;
    let turtle = serialize_turtle(&triples, &platform::prefixes(&config.base_namespace));
    let added = import(&mut platform, turtle)?;
    Ok((triples.len(), added))
}

/// Writes the persisted store as Turtle; returns the triple count.
pub fn export(config: &Config, out: &Path) -> Result<usize, CommandError> {
    let platform = open(config)?;
    std::fs::write(out, platform.export_turtle()).map_err(|source| CommandError::Io {
        path: out.display().to_string(),
        source,
    })?;
    Ok(platform.store().len())
}

/// Runs a query against the persisted store and returns the JSON results.
pub fn query(config: &Config, text: &str) -> Result<serde_json::Value, CommandError> {
    let platform = open(config)?;
    let rows = sparql::query(platform.store(), text)?;
    Ok(results::to_json(&rows))
}
