//! Turtle reading and writing for the subset of the grammar the platform uses.

mod parser;
mod serializer;

pub use parser::{parse_document, parse_turtle, Document};
pub use serializer::{serialize_turtle, PrefixMap};

use thiserror::Error;

use crate::rdf::is_absolute_iri;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared prefix '{prefix}:' at line {line}, column {column}")]
    UndeclaredPrefix {
        prefix: String,
        line: usize,
        column: usize,
    },
    #[error("unterminated string starting at line {line}, column {column}")]
    UnterminatedString { line: usize, column: usize },
    #[error("IRI <{iri}> at line {line}, column {column} does not resolve to an absolute IRI")]
    RelativeIri {
        iri: String,
        line: usize,
        column: usize,
    },
}

impl TurtleError {
    pub fn line(&self) -> usize {
        match self {
            TurtleError::Syntax { line, .. }
            | TurtleError::UndeclaredPrefix { line, .. }
            | TurtleError::UnterminatedString { line, .. }
            | TurtleError::RelativeIri { line, .. } => *line,
        }
    }
}

/// Resolves a possibly relative reference against `base`.
///
/// Handles fragment-, query-, network-path-, absolute-path- and
/// relative-path references; dot segments are left as written.
pub fn resolve_iri(base: &str, reference: &str) -> String {
    if is_absolute_iri(reference) || base.is_empty() {
        return reference.to_string();
    }
    let without_fragment = base.split('#').next().unwrap_or(base);
    if reference.is_empty() {
        return without_fragment.to_string();
    }
    if reference.starts_with('#') {
        return format!("{without_fragment}{reference}");
    }
    let scheme_end = base.find(':').map_or(0, |i| i + 1);
    let scheme = &base[..scheme_end];
    if reference.starts_with("//") {
        return format!("{scheme}{reference}");
    }
    let without_query = without_fragment.split('?').next().unwrap_or(without_fragment);
    if reference.starts_with('?') {
        return format!("{without_query}{reference}");
    }
    let rest = &without_query[scheme_end..];
    let (authority, path) = match rest.strip_prefix("//") {
        Some(after) => {
            let end = after.find('/').unwrap_or(after.len());
            (&rest[..end + 2], &after[end..])
        }
        None => ("", rest),
    };
    if reference.starts_with('/') {
        return format!("{scheme}{authority}{reference}");
    }
    let dir = match path.rfind('/') {
        Some(i) => &path[..=i],
        None if !authority.is_empty() => "/",
        None => "",
    };
    format!("{scheme}{authority}{dir}{reference}")
}
