use std::collections::{BTreeMap, HashSet};

use super::{resolve_iri, TurtleError};
use crate::rdf::{BlankNode, Iri, Literal, Term, Triple};
use crate::vocab::{rdf, xsd};

/// Result of parsing a document: the triple set plus the prefixes it declared.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub triples: Vec<Triple>,
    pub prefixes: BTreeMap<String, String>,
}

/// Parses the supported Turtle subset.
///
/// Supported: `@prefix`/`@base` (and the SPARQL-style `PREFIX`/`BASE`),
/// prefixed names, `<IRI>`s resolved against the base, single-line string
/// literals with `^^datatype` or `@lang`, integer/decimal/double shorthand,
/// the `a` keyword, `;` and `,` lists, `_:label` blank nodes and comments.
pub fn parse_document(text: &str, base: &str) -> Result<Document, TurtleError> {
    let mut parser = Parser {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        base: base.to_string(),
        prefixes: BTreeMap::new(),
        triples: Vec::new(),
        seen: HashSet::new(),
    };
    parser.document()?;
    Ok(Document {
        triples: parser.triples,
        prefixes: parser.prefixes,
    })
}

/// Parses a Turtle document into its triple set (document order, no duplicates).
pub fn parse_turtle(text: &str, base: &str) -> Result<Vec<Triple>, TurtleError> {
    parse_document(text, base).map(|d| d.triples)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    base: String,
    prefixes: BTreeMap<String, String>,
    triples: Vec<Triple>,
    seen: HashSet<Triple>,
}

#[derive(Clone, Copy)]
struct Mark {
    line: usize,
    column: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn mark(&self) -> Mark {
        Mark {
            line: self.line,
            column: self.column,
        }
    }

    fn syntax(&self, at: Mark, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax {
            line: at.line,
            column: at.column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, wanted: char) -> Result<(), TurtleError> {
        self.skip_ws();
        let at = self.mark();
        match self.peek() {
            Some(c) if c == wanted => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.syntax(at, format!("expected '{wanted}', found '{c}'"))),
            None => Err(self.syntax(at, format!("expected '{wanted}', found end of input"))),
        }
    }

    fn starts_with_keyword(&self, keyword: &str, case_insensitive: bool) -> bool {
        let n = keyword.chars().count();
        let matches = keyword.chars().enumerate().all(|(i, k)| match self.peek_at(i) {
            Some(c) if case_insensitive => c.eq_ignore_ascii_case(&k),
            Some(c) => c == k,
            None => false,
        });
        matches && self.peek_at(n).is_none_or(|c| c.is_whitespace() || c == '<')
    }

    fn document(&mut self) -> Result<(), TurtleError> {
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(());
            }
            if self.peek() == Some('@') {
                self.at_directive()?;
            } else if self.starts_with_keyword("PREFIX", true) {
                self.advance(6);
                self.prefix_body()?;
            } else if self.starts_with_keyword("BASE", true) {
                self.advance(4);
                self.base_body()?;
            } else {
                self.triples_statement()?;
                self.expect('.')?;
            }
        }
    }

    fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn at_directive(&mut self) -> Result<(), TurtleError> {
        let at = self.mark();
        if self.starts_with_keyword("@prefix", false) {
            self.advance(7);
            self.prefix_body()?;
        } else if self.starts_with_keyword("@base", false) {
            self.advance(5);
            self.base_body()?;
        } else {
            return Err(self.syntax(at, "unknown directive"));
        }
        self.expect('.')
    }

    fn prefix_body(&mut self) -> Result<(), TurtleError> {
        self.skip_ws();
        let at = self.mark();
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                name.push(c);
                self.bump();
            } else {
                return Err(self.syntax(self.mark(), format!("unexpected '{c}' in prefix name")));
            }
        }
        if self.peek() != Some(':') {
            return Err(self.syntax(at, "expected ':' after prefix name"));
        }
        if name.starts_with(|c: char| !c.is_alphabetic()) || name.ends_with('.') {
            return Err(self.syntax(at, format!("invalid prefix name {name:?}")));
        }
        self.bump();
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.prefixes.insert(name, iri.into_string());
        Ok(())
    }

    fn base_body(&mut self) -> Result<(), TurtleError> {
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.base = iri.into_string();
        Ok(())
    }

    fn triples_statement(&mut self) -> Result<(), TurtleError> {
        let subject = self.subject()?;
        loop {
            self.skip_ws();
            let predicate = self.verb()?;
            loop {
                self.skip_ws();
                let object = self.object()?;
                self.emit(subject.clone(), predicate.clone(), object);
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.bump();
                } else {
                    break;
                }
            }
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            // Repeated or trailing semicolons are allowed.
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | None) {
                return Ok(());
            }
        }
    }

    fn emit(&mut self, subject: Term, predicate: Term, object: Term) {
        let t = Triple {
            subject,
            predicate,
            object,
        };
        if self.seen.insert(t.clone()) {
            self.triples.push(t);
        }
    }

    fn subject(&mut self) -> Result<Term, TurtleError> {
        self.skip_ws();
        let at = self.mark();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank(),
            Some('[') | Some('(') => Err(self.syntax(
                at,
                "blank node property lists and collections are not supported",
            )),
            Some('"') | Some('\'') => Err(self.syntax(at, "literal not allowed as subject")),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => {
                Err(self.syntax(at, "literal not allowed as subject"))
            }
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => Err(self.syntax(at, "expected subject, found end of input")),
        }
    }

    fn verb(&mut self) -> Result<Term, TurtleError> {
        let at = self.mark();
        if self.peek() == Some('a')
            && self
                .peek_at(1)
                .is_none_or(|c| c.is_whitespace() || matches!(c, '<' | '"' | '\'' | '_' | '#'))
        {
            self.bump();
            return Ok(Term::Iri(Iri::new_unchecked(rdf::TYPE)));
        }
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => {
                Err(self.syntax(at, "blank node not allowed as predicate"))
            }
            Some(c) if c == '"' || c == '\'' => {
                Err(self.syntax(at, "literal not allowed as predicate"))
            }
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => Err(self.syntax(at, "expected predicate, found end of input")),
        }
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let at = self.mark();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => self.blank(),
            Some('"') | Some('\'') => self.literal(),
            Some('[') | Some('(') => Err(self.syntax(
                at,
                "blank node property lists and collections are not supported",
            )),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-') => self.numeric(),
            Some('.') if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => self.numeric(),
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => Err(self.syntax(at, "expected object, found end of input")),
        }
    }

    fn iri_ref(&mut self) -> Result<Iri, TurtleError> {
        let at = self.mark();
        if self.peek() != Some('<') {
            return Err(self.syntax(at, "expected '<'"));
        }
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => {
                    let c = self.unicode_escape(at)?;
                    value.push(c);
                }
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(self.syntax(at, format!("illegal character {c:?} in IRI")));
                }
                Some(c) => value.push(c),
                None => return Err(self.syntax(at, "unterminated IRI")),
            }
        }
        let resolved = resolve_iri(&self.base, &value);
        Iri::new(resolved).map_err(|_| TurtleError::RelativeIri {
            iri: value,
            line: at.line,
            column: at.column,
        })
    }

    /// Reads the `uXXXX` / `UXXXXXXXX` tail of an escape (the backslash is consumed).
    fn unicode_escape(&mut self, at: Mark) -> Result<char, TurtleError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.syntax(at, "invalid escape in IRI")),
        };
        self.hex_char(width, at)
    }

    fn hex_char(&mut self, width: usize, at: Mark) -> Result<char, TurtleError> {
        let mut code = 0u32;
        for _ in 0..width {
            let digit = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.syntax(at, "invalid unicode escape"))?;
            code = code * 16 + digit;
        }
        char::from_u32(code).ok_or_else(|| self.syntax(at, "escape is not a valid code point"))
    }

    fn blank(&mut self) -> Result<Term, TurtleError> {
        let at = self.mark();
        self.bump();
        self.bump();
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        self.give_back_trailing_dots(&mut label);
        BlankNode::new(label.clone())
            .map(Term::Blank)
            .map_err(|_| self.syntax(at, format!("invalid blank node label {label:?}")))
    }

    /// A name may not end in '.'; any trailing dots belong to the statement terminator.
    fn give_back_trailing_dots(&mut self, name: &mut String) {
        while name.ends_with('.') {
            name.pop();
            self.pos -= 1;
            self.column -= 1;
        }
    }

    fn prefixed_name(&mut self) -> Result<Iri, TurtleError> {
        let at = self.mark();
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                prefix.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if self.peek() != Some(':') {
            let found = self.peek().map_or("end of input".to_string(), |c| format!("'{c}'"));
            return Err(self.syntax(at, format!("expected IRI, prefixed name or literal, found {found}")));
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':') {
                local.push(c);
                self.bump();
            } else {
                break;
            }
        }
        self.give_back_trailing_dots(&mut local);
        let Some(namespace) = self.prefixes.get(&prefix) else {
            return Err(TurtleError::UndeclaredPrefix {
                prefix,
                line: at.line,
                column: at.column,
            });
        };
        let full = format!("{namespace}{local}");
        Iri::new(full.clone()).map_err(|_| TurtleError::RelativeIri {
            iri: full,
            line: at.line,
            column: at.column,
        })
    }

    fn literal(&mut self) -> Result<Term, TurtleError> {
        let at = self.mark();
        let quote = self.bump().expect("caller saw a quote");
        if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
            return Err(self.syntax(at, "long (triple-quoted) strings are not supported"));
        }
        let mut value = String::new();
        loop {
            match self.bump() {
                Some(c) if c == quote => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_char(4, at)?,
                        Some('U') => self.hex_char(8, at)?,
                        _ => return Err(self.syntax(at, "invalid escape sequence in string")),
                    };
                    value.push(c);
                }
                Some('\n') | Some('\r') | None => {
                    return Err(TurtleError::UnterminatedString {
                        line: at.line,
                        column: at.column,
                    });
                }
                Some(c) => value.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let mut tag = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        tag.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Literal::lang(value, &tag)
                    .map(Term::Literal)
                    .map_err(|_| self.syntax(at, format!("invalid language tag {tag:?}")))
            }
            Some('^') if self.peek_at(1) == Some('^') => {
                self.bump();
                self.bump();
                let datatype = if self.peek() == Some('<') {
                    self.iri_ref()?
                } else {
                    self.prefixed_name()?
                };
                if datatype.as_str() == rdf::LANG_STRING {
                    return Err(self.syntax(at, "rdf:langString requires a language tag"));
                }
                Ok(Term::Literal(Literal::typed(value, datatype)))
            }
            _ => Ok(Term::Literal(Literal::string(value))),
        }
    }

    fn numeric(&mut self) -> Result<Term, TurtleError> {
        let at = self.mark();
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            text.push(c);
            self.bump();
        }
        let mut digits = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            text.push(c);
            self.bump();
            digits += 1;
        }
        let mut datatype = xsd::INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
                digits += 1;
            }
            datatype = xsd::DECIMAL;
        }
        if digits == 0 {
            return Err(self.syntax(at, "malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            text.push(e);
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                text.push(c);
                self.bump();
            }
            let mut exp_digits = 0;
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(self.syntax(at, "malformed exponent"));
            }
            datatype = xsd::DOUBLE;
        }
        Ok(Term::Literal(Literal::typed(text, Iri::new_unchecked(datatype))))
    }
}
