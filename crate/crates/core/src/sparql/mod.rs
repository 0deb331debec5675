//! The SPARQL SELECT subset served by the platform endpoint: basic graph
//! patterns, conjunctive comparison filters and LIMIT.

mod ast;
mod eval;
mod parser;
pub mod results;

pub use ast::{
    Binding, CompareOp, Comparison, FilterExpr, FilterValue, PatternTerm, QueryResults, SelectQuery,
    TriplePattern,
};
pub use eval::{evaluate, execute};
pub use parser::parse_query;

use thiserror::Error;

use crate::rdf::TripleStore;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown prefix '{prefix}:' at position {position}")]
    UnknownPrefix { prefix: String, position: usize },
    #[error("variable ?{0} is not bound by any triple pattern")]
    UnboundVariable(String),
}

impl QueryError {
    pub fn position(&self) -> Option<usize> {
        match self {
            QueryError::Syntax { position, .. } | QueryError::UnknownPrefix { position, .. } => {
                Some(*position)
            }
            QueryError::UnboundVariable(_) => None,
        }
    }
}

/// Parses and runs a query in one step.
pub fn query(store: &TripleStore, text: &str) -> Result<QueryResults, QueryError> {
    let q = parse_query(text)?;
    Ok(execute(store, &q))
}
