//! Shared harness for the server integration and acceptance tests.
#![allow(dead_code)]

pub mod generate;
pub mod oracle;
pub mod sparql_oracle;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use serde_json::Value;
use tempfile::TempDir;

pub const SOURCES: [&str; 2] = ["nyt", "dbpedia"];

pub fn core_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

/// A temporary directory holding a config, copies of the fixtures and the data directory.
pub struct Workspace {
    pub dir: TempDir,
    pub config: PathBuf,
}

impl Workspace {
    pub fn new(snapshot_every: u64) -> Workspace {
        let sources: String = SOURCES
            .iter()
            .map(|name| format!("\n[[sources]]\nname = \"{name}\"\nfixture = \"lod/{name}.ttl\"\n"))
            .collect();
        Workspace::with_sources(snapshot_every, &sources)
    }

    /// `sources` is the config's `[[sources]]` section, written verbatim.
    pub fn with_sources(snapshot_every: u64, sources: &str) -> Workspace {
        let dir = tempfile::tempdir().unwrap();
        for sub in ["kb", "lod"] {
            std::fs::create_dir(dir.path().join(sub)).unwrap();
            for entry in std::fs::read_dir(core_fixtures().join(sub)).unwrap() {
                let path = entry.unwrap().path();
                std::fs::copy(&path, dir.path().join(sub).join(path.file_name().unwrap())).unwrap();
            }
        }
        let config = dir.path().join("semaps.toml");
        let text = format!(
            "listen = \"127.0.0.1:0\"\ndata_dir = \"data\"\nsnapshot_every = {snapshot_every}\n\
             fetch_timeout_secs = 5\nexpansion_depth = 1\n\n\
             [kb]\nconcepts = \"kb/concepts.tsv\"\nrelations = \"kb/relations.tsv\"\n{sources}"
        );
        std::fs::write(&config, text).unwrap();
        Workspace { dir, config }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn start(&self) -> Server {
        Server::start(&self.config, &self.path("server.log"))
    }

    /// Runs the CLI with this workspace's config.
    pub fn cli(&self, args: &[&str]) -> std::process::Output {
        Command::new(env!("CARGO_BIN_EXE_semaps"))
            .arg("--config")
            .arg(&self.config)
            .args(args)
            .env_remove("SEMAPS_CONFIG")
            .output()
            .unwrap()
    }
}

/// A `semaps serve` child process; killed (SIGKILL) on drop.
pub struct Server {
    child: Child,
    pub api: Api,
}

impl Server {
    pub fn start(config: &Path, log: &Path) -> Server {
        let log = File::options().create(true).append(true).open(log).unwrap();
        let mut child = Command::new(env!("CARGO_BIN_EXE_semaps"))
            .arg("serve")
            .arg("--config")
            .arg(config)
            .stdout(Stdio::piped())
            .stderr(log)
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let base = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("server did not start (see log); first line {line:?}"))
            .to_string();
        Server {
            child,
            api: Api::new(base),
        }
    }

    /// Simulates a crash: no shutdown, no flushing beyond what already happened.
    pub fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct Api {
    client: reqwest::blocking::Client,
    pub base: String,
}

impl Api {
    pub fn new(base: String) -> Api {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .unwrap();
        Api { client, base }
    }

    fn finish(response: reqwest::blocking::Response) -> (u16, Value) {
        let status = response.status().as_u16();
        let text = response.text().unwrap();
        let body = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, body)
    }

    pub fn get(&self, path: &str, query: &[(&str, &str)]) -> (u16, Value) {
        Api::finish(
            self.client
                .get(format!("{}{path}", self.base))
                .query(query)
                .send()
                .unwrap(),
        )
    }

    pub fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        Api::finish(self.client.post(format!("{}{path}", self.base)).json(body).send().unwrap())
    }

    pub fn post_as(&self, account: u64, path: &str, body: &Value) -> (u16, Value) {
        Api::finish(
            self.client
                .post(format!("{}{path}", self.base))
                .header("X-Account", account.to_string())
                .json(body)
                .send()
                .unwrap(),
        )
    }

    pub fn sparql(&self, query: &str) -> (u16, Value) {
        self.get("/sparql", &[("query", query)])
    }
}

/// Values of `var` in a SPARQL JSON result, in result order.
pub fn column(results: &Value, var: &str) -> Vec<String> {
    results["results"]["bindings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b[var]["value"].as_str().unwrap().to_string())
        .collect()
}
