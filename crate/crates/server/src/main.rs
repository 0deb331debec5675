use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semaps_server::commands;
use semaps_server::config::{Config, CONFIG_ENV};

#[derive(Parser)]
#[command(name = "semaps", version, about = "Semantic crowd map platform")]
struct Cli {
    /// Config file (TOML).
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the HTTP API.
    Serve,
    /// Validate the configured knowledge base and publish it into the store.
    LoadKb,
    /// Map CSV tables into the store.
    ImportCsv {
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long, required = true)]
        csv: Vec<PathBuf>,
    },
    /// Write the persisted store as Turtle.
    Export {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a SPARQL SELECT against the persisted store.
    Query {
        #[arg(long)]
        sparql: String,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_max_level(
            std::env::var("RUST_LOG")
                .ok()
                .and_then(|l| l.parse::<tracing::Level>().ok())
                .unwrap_or(tracing::Level::INFO),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let config = Config::locate(cli.config.as_deref()).map_err(|e| e.to_string())?;
    match cli.command {
        Sub::Serve => serve(config),
        Sub::LoadKb => {
            let s = commands::load_kb(&config).map_err(|e| e.to_string())?;
            println!(
                "loaded {} concepts and {} relations ({} new triples)",
                s.concepts, s.relations, s.new_triples
            );
            Ok(())
        }
        Sub::ImportCsv { mapping, csv } => {
            let csvs: Vec<&std::path::Path> = csv.iter().map(PathBuf::as_path).collect();
            let (mapped, added) = commands::import_csv(&config, &mapping, &csvs).map_err(|e| e.to_string())?;
            println!("mapped {mapped} triples ({added} new)");
            Ok(())
        }
        Sub::Export { out } => {
            let n = commands::export(&config, &out).map_err(|e| e.to_string())?;
            println!("exported {n} triples to {}", out.display());
            Ok(())
        }
        Sub::Query { sparql } => {
            let json = commands::query(&config, &sparql).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&json).expect("JSON values serialize"));
            Ok(())
        }
    }
}

fn serve(config: Config) -> Result<(), String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let state = semaps_server::build_state(&config).map_err(|e| e.to_string())?;
        let listener = semaps_server::bind(config.listen).await.map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        println!("listening on http://{addr}");
        let _ = std::io::stdout().flush();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        semaps_server::serve(listener, state, shutdown).await.map_err(|e| e.to_string())
    })
}
