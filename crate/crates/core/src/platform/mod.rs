//! Single-writer command interface over the ontology, with an append-only
//! JSON-lines command log and periodic Turtle snapshots.
//!
//! Layout of a data directory:
//! - `commands.log`: one `{"seq":..,"op":..,"args":{..},"timestamp":..}` object per line.
//! - `snapshot.ttl`: the whole store, preceded by a `# seq <n>` comment naming
//!   the last command it contains.
//!
//! Recovery loads the snapshot, rebuilds the registry from it and replays
//! the log entries with a higher sequence number.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::Viewport;
use crate::kb::ConceptId;
use crate::ontology::{
    ConceptClass, CrowdMap, MarkerRecord, Ontology, OntologyError, ReliabilityTable, SourceType, TopClass, Verdict,
    VoteOutcome, WikiUserAccount,
};
use crate::rdf::{Iri, TripleStore};
use crate::turtle::{parse_turtle, serialize_turtle, PrefixMap, TurtleError};
use crate::vocab::{self, owl, rdf, rdfs, xsd};

pub const LOG_FILE: &str = "commands.log";
pub const SNAPSHOT_FILE: &str = "snapshot.ttl";
pub const DEFAULT_SNAPSHOT_EVERY: u64 = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum Command {
    CreateAccount {
        login: String,
        display_name: String,
    },
    AddFriend {
        a: u64,
        b: u64,
    },
    CreateMap {
        title: String,
        owner: u64,
        viewport: Option<Viewport>,
    },
    CreateConcept {
        map: u64,
        label: String,
        top_class: TopClass,
        kb_concept: ConceptId,
        external_links: Vec<Iri>,
    },
    CreateMarker {
        map: u64,
        class: u64,
        creator: u64,
        lat: f64,
        lon: f64,
        description: String,
        source_type: SourceType,
        created: DateTime<Utc>,
    },
    Vote {
        marker: u64,
        account: u64,
        verdict: Verdict,
    },
    /// Adds arbitrary triples, carried as Turtle text.
    ImportTurtle {
        turtle: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    #[serde(flatten)]
    pub command: Command,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Account(WikiUserAccount),
    Friends,
    Map(CrowdMap),
    Concept(ConceptClass),
    Marker(MarkerRecord),
    Vote(VoteOutcome),
    Imported(usize),
}

#[derive(Debug, Error)]
pub enum PlatformError {
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Turtle(#[from] TurtleError),
    #[error("I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    CorruptLog { path: PathBuf, line: usize, message: String },
    #[error("replaying command {seq} failed: {source}")]
    Replay {
        seq: u64,
        #[source]
        source: Box<PlatformError>,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PlatformError + '_ {
    move |source| PlatformError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct PlatformConfig {
    pub base: String,
    pub reliability: ReliabilityTable,
    /// Commands between snapshots; 0 disables automatic snapshots.
    pub snapshot_every: u64,
}

impl Default for PlatformConfig {
    fn default() -> Self {
        PlatformConfig {
            base: vocab::DEFAULT_BASE.to_string(),
            reliability: ReliabilityTable::default(),
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }
}

/// Prefixes used when the store is written out as Turtle.
pub fn prefixes(base: &str) -> PrefixMap {
    [
        ("ns", base),
        ("rdf", rdf::NS),
        ("rdfs", rdfs::NS),
        ("owl", owl::NS),
        ("xsd", xsd::NS),
        ("lod", vocab::lod::NS),
    ]
    .into_iter()
    .map(|(p, ns)| (p.to_string(), ns.to_string()))
    .collect()
}

#[derive(Debug)]
struct Persistence {
    dir: PathBuf,
    log: File,
    since_snapshot: u64,
}

/// The platform state: ontology plus store, mutated only through [`Platform::execute`].
#[derive(Debug)]
pub struct Platform {
    config: PlatformConfig,
    ontology: Ontology,
    seq: u64,
    persistence: Option<Persistence>,
}

impl Platform {
    /// A platform that keeps nothing on disk.
    pub fn in_memory(config: PlatformConfig) -> Self {
        Platform {
            ontology: Ontology::new(&config.base, config.reliability.clone()),
            config,
            seq: 0,
            persistence: None,
        }
    }

    /// Opens (or initializes) a data directory and recovers its state.
    pub fn open(dir: &Path, config: PlatformConfig) -> Result<Self, PlatformError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let (mut platform, snapshot_seq) = match fs::read_to_string(&snapshot_path) {
            Ok(text) => {
                let seq = snapshot_seq(&text);
                let store: TripleStore = parse_turtle(&text, &config.base)?.into_iter().collect();
                let ontology = Ontology::hydrate(&config.base, config.reliability.clone(), store)?;
                let platform = Platform {
                    config,
                    ontology,
                    seq,
                    persistence: None,
                };
                (platform, seq)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => (Platform::in_memory(config), 0),
            Err(e) => return Err(io_err(&snapshot_path)(e)),
        };

        let log_path = dir.join(LOG_FILE);
        let mut replayed = 0;
        let (entries, intact) = scan_log(&log_path)?;
        for entry in entries {
            if entry.seq <= snapshot_seq {
                continue;
            }
            platform.apply(entry.command).map_err(|e| PlatformError::Replay {
                seq: entry.seq,
                source: Box::new(e),
            })?;
            platform.seq = entry.seq;
            replayed += 1;
        }
        tracing::info!(seq = platform.seq, replayed, "recovered platform state");

        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(io_err(&log_path))?;
        if log.metadata().map_err(io_err(&log_path))?.len() > intact {
            log.set_len(intact).map_err(io_err(&log_path))?;
        }
        platform.persistence = Some(Persistence {
            dir: dir.to_path_buf(),
            log,
            since_snapshot: replayed,
        });
        Ok(platform)
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn store(&self) -> &TripleStore {
        self.ontology.store()
    }

    pub fn config(&self) -> &PlatformConfig {
        &self.config
    }

    /// Sequence number of the last applied command.
    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Applies a command and, when persistent, appends it to the log.
    pub fn execute(&mut self, command: Command) -> Result<Outcome, PlatformError> {
        let entry = LogEntry {
            seq: self.seq + 1,
            command: command.clone(),
            timestamp: Utc::now(),
        };
        let outcome = self.apply(command)?;
        self.seq = entry.seq;
        if let Some(p) = &mut self.persistence {
            let mut line = serde_json::to_string(&entry).expect("commands serialize");
            line.push('\n');
            let path = p.dir.join(LOG_FILE);
            p.log.write_all(line.as_bytes()).map_err(io_err(&path))?;
            p.log.sync_data().map_err(io_err(&path))?;
            p.since_snapshot += 1;
            if self.config.snapshot_every > 0 && p.since_snapshot >= self.config.snapshot_every {
                self.snapshot()?;
            }
        }
        Ok(outcome)
    }

    fn apply(&mut self, command: Command) -> Result<Outcome, PlatformError> {
        let o = &mut self.ontology;
        Ok(match command {
            Command::CreateAccount { login, display_name } => Outcome::Account(o.create_account(&login, &display_name)?),
            Command::AddFriend { a, b } => {
                o.add_friend(a, b)?;
                Outcome::Friends
            }
            Command::CreateMap { title, owner, viewport } => Outcome::Map(o.create_map(&title, owner, viewport)?),
            Command::CreateConcept {
                map,
                label,
                top_class,
                kb_concept,
                external_links,
            } => Outcome::Concept(o.create_concept(map, &label, top_class, kb_concept, external_links)?),
            Command::CreateMarker {
                map,
                class,
                creator,
                lat,
                lon,
                description,
                source_type,
                created,
            } => Outcome::Marker(o.create_marker(map, class, creator, lat, lon, &description, source_type, created)?),
            Command::Vote {
                marker,
                account,
                verdict,
            } => Outcome::Vote(o.vote(marker, account, verdict)?),
            Command::ImportTurtle { turtle } => {
                let triples = parse_turtle(&turtle, &self.config.base)?;
                Outcome::Imported(o.import(triples)?)
            }
        })
    }

    /// The whole store as Turtle.
    pub fn export_turtle(&self) -> String {
        serialize_turtle(&self.store().triples(), &prefixes(&self.config.base))
    }

    /// Writes `snapshot.ttl` atomically. A no-op for in-memory platforms.
    pub fn snapshot(&mut self) -> Result<(), PlatformError> {
        let text = format!("# seq {}\n{}", self.seq, self.export_turtle());
        let Some(p) = &mut self.persistence else {
            return Ok(());
        };
        let path = p.dir.join(SNAPSHOT_FILE);
        let tmp = p.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(text.as_bytes()).map_err(io_err(&tmp))?;
        file.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        p.since_snapshot = 0;
        tracing::debug!(seq = self.seq, "snapshot written");
        Ok(())
    }
}

fn snapshot_seq(text: &str) -> u64 {
    text.lines()
        .next()
        .and_then(|l| l.strip_prefix("# seq "))
        .and_then(|n| n.trim().parse().ok())
        .unwrap_or(0)
}

/// Reads the log, tolerating a torn final line left by a crash mid-append.
pub fn read_log(path: &Path) -> Result<Vec<LogEntry>, PlatformError> {
    Ok(scan_log(path)?.0)
}

/// Entries plus the byte length of the intact prefix of the file.
fn scan_log(path: &Path) -> Result<(Vec<LogEntry>, u64), PlatformError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut entries = Vec::new();
    let mut last_seq = 0;
    let mut intact = 0;
    let line_count = text.split_inclusive('\n').count();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let is_last = i + 1 == line_count;
        if line.trim().is_empty() {
            intact += line.len();
            continue;
        }
        let torn = is_last && !line.ends_with('\n');
        let entry = match serde_json::from_str::<LogEntry>(line) {
            Ok(entry) if !torn => entry,
            _ if is_last => {
                tracing::warn!(line = i + 1, "ignoring torn final log line");
                break;
            }
            Err(e) => {
                return Err(PlatformError::CorruptLog {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
            Ok(_) => unreachable!("only the last line can be torn"),
        };
        if entry.seq <= last_seq {
            return Err(PlatformError::CorruptLog {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("sequence {} does not follow {last_seq}", entry.seq),
            });
        }
        last_seq = entry.seq;
        intact += line.len();
        entries.push(entry);
    }
    Ok((entries, intact as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn config(snapshot_every: u64) -> PlatformConfig {
        PlatformConfig {
            snapshot_every,
            ..PlatformConfig::default()
        }
    }

    fn script() -> Vec<Command> {
        let created = Utc.with_ymd_and_hms(2026, 5, 2, 9, 30, 0).unwrap();
        vec![
            Command::CreateAccount {
                login: "ana".into(),
                display_name: "Ana".into(),
            },
            Command::CreateAccount {
                login: "bia".into(),
                display_name: "Bia".into(),
            },
            Command::AddFriend { a: 1, b: 2 },
            Command::CreateMap {
                title: "Illinois".into(),
                owner: 1,
                viewport: Some(Viewport::new(-91.6, 36.9, -87.0, 42.6).unwrap()),
            },
            Command::CreateConcept {
                map: 1,
                label: "politician".into(),
                top_class: TopClass::Person,
                kb_concept: ConceptId(1),
                external_links: vec![Iri::new("http://dbpedia.org/resource/Politician").unwrap()],
            },
            Command::CreateMarker {
                map: 1,
                class: 1,
                creator: 1,
                lat: 40.0,
                lon: -89.0,
                description: "town hall".into(),
                source_type: SourceType::DirectWitness,
                created,
            },
            Command::Vote {
                marker: 1,
                account: 2,
                verdict: Verdict::Confirm,
            },
            Command::ImportTurtle {
                turtle: "<urn:a> <urn:b> \"c\" .".into(),
            },
        ]
    }

    #[test]
    fn log_line_shape() {
        let entry = LogEntry {
            seq: 3,
            command: Command::AddFriend { a: 1, b: 2 },
            timestamp: Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap(),
        };
        let json: serde_json::Value = serde_json::to_value(&entry).unwrap();
        assert_eq!(json["op"], "add_friend");
        assert_eq!(json["args"]["b"], 2);
        assert_eq!(json["seq"], 3);
        let back: LogEntry = serde_json::from_value(json).unwrap();
        assert_eq!(back, entry);
    }

    #[test]
    fn failed_commands_are_not_logged() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = Platform::open(dir.path(), config(0)).unwrap();
        assert!(p.execute(Command::AddFriend { a: 1, b: 2 }).is_err());
        assert_eq!(p.seq(), 0);
        assert!(read_log(&dir.path().join(LOG_FILE)).unwrap().is_empty());
    }

    #[test]
    fn recovery_from_log_and_snapshot() {
        for every in [0, 1, 3, 50] {
            let dir = tempfile::tempdir().unwrap();
            let expected = {
                let mut p = Platform::open(dir.path(), config(every)).unwrap();
                for c in script() {
                    p.execute(c).unwrap();
                }
                p.export_turtle()
            };
            let p = Platform::open(dir.path(), config(every)).unwrap();
            assert_eq!(p.export_turtle(), expected, "snapshot_every = {every}");
            assert_eq!(p.seq(), script().len() as u64);
            assert_eq!(p.ontology().account(1).unwrap().reputation, 2.0 / 3.0);
        }
    }

    #[test]
    fn ids_continue_after_restart() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = Platform::open(dir.path(), config(2)).unwrap();
        for c in script() {
            p.execute(c).unwrap();
        }
        drop(p);
        let mut p = Platform::open(dir.path(), config(2)).unwrap();
        let Outcome::Concept(c) = p
            .execute(Command::CreateConcept {
                map: 1,
                label: "law".into(),
                top_class: TopClass::Event,
                kb_concept: ConceptId(2),
                external_links: vec![],
            })
            .unwrap()
        else {
            panic!("expected a concept");
        };
        assert_eq!(c.id, 2);
        assert_eq!(p.seq(), script().len() as u64 + 1);
    }

    #[test]
    fn torn_final_line_is_ignored_but_corruption_is_not() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut p = Platform::open(dir.path(), config(0)).unwrap();
            for c in script().into_iter().take(2) {
                p.execute(c).unwrap();
            }
        }
        let log = dir.path().join(LOG_FILE);
        let mut text = fs::read_to_string(&log).unwrap();
        text.push_str("{\"seq\":3,\"op\":\"add_fr");
        fs::write(&log, &text).unwrap();
        let mut p = Platform::open(dir.path(), config(0)).unwrap();
        assert_eq!(p.seq(), 2);
        // The torn tail is cut so later appends start on a fresh line.
        p.execute(Command::AddFriend { a: 1, b: 2 }).unwrap();
        drop(p);
        assert_eq!(read_log(&log).unwrap().len(), 3);

        fs::write(&log, format!("garbage\n{text}")).unwrap();
        assert!(matches!(
            Platform::open(dir.path(), config(0)),
            Err(PlatformError::CorruptLog { line: 1, .. })
        ));
    }
}
