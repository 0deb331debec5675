//! RDF data model and the indexed in-memory triple store.

mod store;
mod term;

pub use store::{StoreError, TripleStore};
pub use term::{is_absolute_iri, BlankNode, Iri, Literal, Term, TermError};
pub(crate) use term::escape_string;

use std::fmt;

/// Which triple position a validation error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Subject,
    Predicate,
    Object,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Subject => "subject",
            Position::Predicate => "predicate",
            Position::Object => "object",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    /// Builds a triple, checking that the subject is not a literal and the
    /// predicate is an IRI.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, StoreError> {
        let t = Triple {
            subject,
            predicate,
            object,
        };
        t.validate()?;
        Ok(t)
    }

    /// Convenience constructor for the common all-IRI-positions case.
    pub fn from_iris(subject: &Iri, predicate: &Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject: Term::Iri(subject.clone()),
            predicate: Term::Iri(predicate.clone()),
            object: object.into(),
        }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if self.subject.is_literal() {
            return Err(StoreError::InvalidTerm {
                position: Position::Subject,
                reason: "subject may not be a literal".into(),
            });
        }
        if self.predicate.as_iri().is_none() {
            return Err(StoreError::InvalidTerm {
                position: Position::Predicate,
                reason: "predicate must be an IRI".into(),
            });
        }
        for (position, term) in [
            (Position::Subject, &self.subject),
            (Position::Predicate, &self.predicate),
            (Position::Object, &self.object),
        ] {
            if let Term::Iri(iri) = term {
                if !is_absolute_iri(iri.as_str()) {
                    return Err(StoreError::InvalidTerm {
                        position,
                        reason: format!("relative IRI <{}>", iri.as_str()),
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
