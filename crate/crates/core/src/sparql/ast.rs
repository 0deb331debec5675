use std::collections::BTreeMap;
use std::fmt;

use crate::rdf::Term;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

impl PatternTerm {
    pub fn var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.positions().into_iter().filter_map(PatternTerm::var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    /// The operator with its operands swapped (`a < b` ⇔ `b > a`).
    pub fn flipped(self) -> Self {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Ge => CompareOp::Le,
            other => other,
        }
    }

    pub fn holds(self, ordering: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Eq => ordering == Equal,
            CompareOp::Ne => ordering != Equal,
            CompareOp::Lt => ordering == Less,
            CompareOp::Le => ordering != Greater,
            CompareOp::Gt => ordering == Greater,
            CompareOp::Ge => ordering != Less,
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(self, CompareOp::Eq | CompareOp::Ne)
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterValue {
    Numeric(f64),
    /// A plain string constant, compared by code point order.
    Str(String),
    /// An IRI or a typed/tagged literal, compared by term equality only.
    Term(Term),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub variable: String,
    pub op: CompareOp,
    pub value: FilterValue,
}

/// A conjunction of comparisons (`FILTER(a && b)`).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterExpr {
    pub conjuncts: Vec<Comparison>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectQuery {
    pub projection: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub limit: Option<usize>,
}

impl SelectQuery {
    /// Variables of the patterns in order of first appearance.
    pub fn pattern_variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for v in self.patterns.iter().flat_map(TriplePattern::variables) {
            if !out.iter().any(|x| x == v) {
                out.push(v.to_string());
            }
        }
        out
    }
}

/// One solution, restricted to the projected variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Binding(pub BTreeMap<String, Term>);

impl Binding {
    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Projected solutions together with the variable order of the projection.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryResults {
    pub variables: Vec<String>,
    pub bindings: Vec<Binding>,
}
