//! Declarative mapping of tabular data (CSV) into triples.
//!
//! Rules name a table, a subject IRI template, an optional class and a list
//! of property mappings. Empty cells are NULLs: a property whose template
//! touches an empty cell emits nothing, and a row whose subject template
//! touches one is skipped.

mod mapping;

pub use mapping::{parse_mapping, MappingRule, ObjectSpec, PropertyMapping, Template};

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use thiserror::Error;

use crate::rdf::{is_absolute_iri, Iri, Literal, Term, Triple};
use crate::vocab::rdf;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("mapping line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("mapping line {line}: template uses undeclared column {column:?}")]
    UnknownColumn { line: usize, column: String },
    #[error("mapping line {line}: unknown prefix {prefix:?}")]
    UnknownPrefix { line: usize, prefix: String },
    #[error("mapping line {line}: <{iri}> is not an absolute IRI")]
    RelativeIri { line: usize, iri: String },
    #[error("no table named {0:?} was supplied")]
    MissingTable(String),
    #[error("table {table:?} lacks column {column:?} declared by the mapping")]
    MissingColumn { table: String, column: String },
    #[error("table {table:?} row {row}: subject <{iri}> is not an absolute IRI")]
    InvalidSubject { table: String, row: usize, iri: String },
    #[error("CSV {path}: {message}")]
    Csv { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableData {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TableData {
    pub fn new(name: impl Into<String>, columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self, MappingError> {
        let name = name.into();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            return Err(MappingError::Csv {
                path: name,
                message: format!("row {} has {} fields, expected {}", i + 1, row.len(), columns.len()),
            });
        }
        Ok(TableData { name, columns, rows })
    }

    /// Reads CSV text whose first record is the header.
    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self, MappingError> {
        let name = name.into();
        let csv_err = |e: csv::Error| MappingError::Csv {
            path: name.clone(),
            message: e.to_string(),
        };
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns: Vec<String> = reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            rows.push(record.map_err(csv_err)?.iter().map(str::to_string).collect());
        }
        TableData::new(name, columns, rows)
    }

    /// Reads a CSV file; the table is named after the file stem.
    pub fn read_csv(path: &Path) -> Result<Self, MappingError> {
        let text = std::fs::read_to_string(path).map_err(|e| MappingError::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_csv(name, &text)
    }
}

/// Characters left unescaped when a cell value lands in an IRI: RFC 3986 unreserved.
const IRI_VALUE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

fn encode_iri_value(value: &str) -> String {
    utf8_percent_encode(value, IRI_VALUE).to_string()
}

/// Applies every rule to its table and returns the resulting triple set.
pub fn apply_mapping(rules: &[MappingRule], tables: &[TableData]) -> Result<BTreeSet<Triple>, MappingError> {
    let by_name: HashMap<&str, &TableData> = tables.iter().map(|t| (t.name.as_str(), t)).collect();
    let rdf_type = Iri::new(rdf::TYPE).expect("constant");
    let mut out = BTreeSet::new();
    for rule in rules {
        let table = by_name
            .get(rule.table.as_str())
            .ok_or_else(|| MappingError::MissingTable(rule.table.clone()))?;
        let index: HashMap<&str, usize> = table
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        if let Some(missing) = rule.columns.iter().find(|c| !index.contains_key(c.as_str())) {
            return Err(MappingError::MissingColumn {
                table: table.name.clone(),
                column: missing.clone(),
            });
        }
        for (row_no, row) in table.rows.iter().enumerate() {
            let cell = |c: &str| index.get(c).map(|&i| row[i].clone());
            let Some(subject) = rule.subject.render(cell, encode_iri_value) else {
                continue;
            };
            let subject = Iri::new(subject.clone()).map_err(|_| MappingError::InvalidSubject {
                table: table.name.clone(),
                row: row_no + 1,
                iri: subject,
            })?;
            if let Some(class) = &rule.type_iri {
                out.insert(Triple::from_iris(&subject, &rdf_type, class.clone()));
            }
            for mapping in &rule.properties {
                let object = match &mapping.object {
                    ObjectSpec::Constant(term) => Some(term.clone()),
                    ObjectSpec::Iri(template) => template
                        .render(cell, encode_iri_value)
                        .filter(|iri| is_absolute_iri(iri))
                        .and_then(|iri| Iri::new(iri).ok())
                        .map(Term::Iri),
                    ObjectSpec::Literal {
                        template,
                        datatype,
                        language,
                    } => template.render(cell, str::to_string).map(|text| {
                        Term::Literal(match language {
                            Some(lang) => Literal::lang(text, lang).expect("validated at parse time"),
                            None => Literal::typed(text, datatype.clone()),
                        })
                    }),
                };
                if let Some(object) = object {
                    out.insert(Triple::from_iris(&subject, &mapping.predicate, object));
                }
            }
        }
    }
    Ok(out)
}
