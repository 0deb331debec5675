use std::collections::BTreeSet;
use std::path::PathBuf;

use semaps_core::rdf::Triple;
use semaps_core::turtle::{parse_document, parse_turtle, serialize_turtle};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/turtle")
}

fn round_trip(path: &PathBuf) -> (BTreeSet<Triple>, BTreeSet<Triple>) {
    let text = std::fs::read_to_string(path).unwrap();
    let doc = parse_document(&text, "http://base.example/").unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let first: BTreeSet<Triple> = doc.triples.into_iter().collect();
    let written = serialize_turtle(&first, &doc.prefixes);
    let second: BTreeSet<Triple> = parse_turtle(&written, "http://unused.example/")
        .unwrap_or_else(|e| panic!("{}: {e}\n{written}", path.display()))
        .into_iter()
        .collect();
    (first, second)
}

#[test]
fn corpus_documents_round_trip() {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ttl"))
        .collect();
    paths.sort();
    assert_eq!(paths.len(), 50);
    for path in &paths {
        let (first, second) = round_trip(path);
        assert!(!first.is_empty(), "{}", path.display());
        assert_eq!(first, second, "{}", path.display());
    }
}

#[test]
fn hundred_triple_fixture_round_trips() {
    let (first, second) = round_trip(&fixtures().join("hundred.ttl"));
    assert_eq!(first.len(), 100);
    assert_eq!(first, second);
}
