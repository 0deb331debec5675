//! Seeded random stores, queries and tables.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use semaps_core::rdf::{Iri, Literal, Term, Triple};

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).unwrap()
}

/// IRIs with characters that need escaping or prefix handling.
fn awkward_iri(rng: &mut ChaCha8Rng) -> Term {
    let base = pick(rng, &["http://example.org/", "http://semaps.example/ns#", "urn:x:", "https://e.example/a/b?q="]);
    let local = pick(rng, &["a", "b1", "item.2", "x-y", "café", "a/b", "{brace}", "pipe|bar", "caret^", "back\\slash", "tick`", "", "_u", "9lives", "dot."]);
    Term::iri(format!("{base}{local}{}", rng.gen_range(0..20))).unwrap()
}

fn awkward_string(rng: &mut ChaCha8Rng) -> String {
    let parts = ["plain", "quote\"d", "new\nline", "tab\tbed", "back\\slash", "ünï", "😀", "", " ", "\r", "\u{1}", "'single'", "ends with \\"];
    (0..rng.gen_range(1..4)).map(|_| pick(rng, &parts)).collect()
}

fn random_term(rng: &mut ChaCha8Rng, position: usize) -> Term {
    if position == 1 {
        return awkward_iri(rng);
    }
    let choices = if position == 0 { 2 } else { 9 };
    match rng.gen_range(0..choices) {
        0 => awkward_iri(rng),
        1 => Term::blank(format!("b{}", rng.gen_range(0..10))).unwrap(),
        2 => Term::string(awkward_string(rng)),
        3 => Term::Literal(Literal::lang(awkward_string(rng), pick(rng, &["en", "pt", "pt-BR", "en-US"])).unwrap()),
        4 => Term::Literal(Literal::integer(rng.gen_range(-1000..1000))),
        5 => Term::Literal(Literal::typed(format!("{}.{}", rng.gen_range(-99..99), rng.gen_range(0..999)), Iri::new(format!("{XSD}decimal")).unwrap())),
        6 => Term::Literal(Literal::typed(format!("{}e{}", rng.gen_range(0..9), rng.gen_range(-3..3)), Iri::new(format!("{XSD}double")).unwrap())),
        7 => Term::Literal(Literal::typed(pick(rng, &["true", "false"]), Iri::new(format!("{XSD}boolean")).unwrap())),
        _ => Term::Literal(Literal::typed(awkward_string(rng), awkward_iri(rng).as_iri().unwrap().clone())),
    }
}

/// Up to `max` distinct triples.
pub fn random_store(rng: &mut ChaCha8Rng, max: usize) -> Vec<Triple> {
    let n = rng.gen_range(0..=max);
    (0..n)
        .map(|_| Triple::new(random_term(rng, 0), random_term(rng, 1), random_term(rng, 2)).unwrap())
        .collect()
}

/// Query-test vocabulary: a small closed world so joins and filters hit.
pub fn query_term(rng: &mut ChaCha8Rng, position: usize) -> Term {
    match position {
        0 if rng.gen_bool(0.1) => Term::blank(format!("k{}", rng.gen_range(0..3))).unwrap(),
        0 => Term::iri(format!("urn:n{}", rng.gen_range(0..12))).unwrap(),
        1 => Term::iri(format!("urn:p{}", rng.gen_range(0..4))).unwrap(),
        _ => match rng.gen_range(0..8) {
            0 | 1 => Term::iri(format!("urn:n{}", rng.gen_range(0..12))).unwrap(),
            2 => Term::Literal(Literal::integer(rng.gen_range(0..20))),
            3 => Term::Literal(Literal::typed(format!("{}.5", rng.gen_range(0..20)), Iri::new(format!("{XSD}decimal")).unwrap())),
            4 => Term::Literal(Literal::typed(format!("{}e0", rng.gen_range(0..20)), Iri::new(format!("{XSD}double")).unwrap())),
            5 => Term::string(format!("s{}", rng.gen_range(0..6))),
            6 => Term::Literal(Literal::lang(format!("s{}", rng.gen_range(0..6)), "en").unwrap()),
            _ => Term::Literal(Literal::typed(format!("s{}", rng.gen_range(0..6)), Iri::new("urn:dt").unwrap())),
        },
    }
}

pub fn query_store(rng: &mut ChaCha8Rng, max: usize) -> Vec<Triple> {
    let n = rng.gen_range(0..=max);
    let mut out: Vec<Triple> = (0..n)
        .map(|_| Triple::new(query_term(rng, 0), query_term(rng, 1), query_term(rng, 2)).unwrap())
        .collect();
    out.sort();
    out.dedup();
    out
}

/// A random table for the mapping tests: unique `id`, other cells possibly empty.
pub fn random_table(rng: &mut ChaCha8Rng, columns: &[&str]) -> Vec<Vec<String>> {
    let rows = rng.gen_range(0..30);
    (0..rows)
        .map(|i| {
            columns
                .iter()
                .enumerate()
                .map(|(c, _)| {
                    if c == 0 {
                        format!("r{i}")
                    } else if rng.gen_bool(0.2) {
                        String::new()
                    } else {
                        pick(rng, &["x", "a b", "ção", "1.5", "q/r", "%", "#"]).to_string()
                    }
                })
                .collect()
        })
        .collect()
}
