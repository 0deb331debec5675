use std::collections::HashMap;

use super::ast::*;
use super::QueryError;
use crate::rdf::{Iri, Literal, Term};
use crate::vocab::{rdf, xsd};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    Number(String),
    LangTag(String),
    Keyword(String),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, message: &str| QueryError::Syntax {
        position: offset,
        message: message.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = match c {
            '<' => {
                // Either an IRI reference or a less-than operator.
                let mut j = i + 1;
                while j < chars.len()
                    && chars[j] != '>'
                    && !chars[j].is_whitespace()
                    && !matches!(chars[j], '<' | '"' | '{' | '}' | '|' | '^' | '`')
                {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '>' {
                    let iri: String = chars[i + 1..j].iter().collect();
                    i = j + 1;
                    Tok::Iri(iri)
                } else if chars.get(i + 1) == Some(&'=') {
                    i += 2;
                    Tok::Punct("<=")
                } else {
                    i += 1;
                    Tok::Punct("<")
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    i += 2;
                    Tok::Punct(">=")
                } else {
                    i += 1;
                    Tok::Punct(">")
                }
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                i += 2;
                Tok::Punct("!=")
            }
            '&' if chars.get(i + 1) == Some(&'&') => {
                i += 2;
                Tok::Punct("&&")
            }
            '^' if chars.get(i + 1) == Some(&'^') => {
                i += 2;
                Tok::Punct("^^")
            }
            '=' => {
                i += 1;
                Tok::Punct("=")
            }
            '{' | '}' | '(' | ')' | '.' | '*' if !(c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                i += 1;
                Tok::Punct(match c {
                    '{' => "{",
                    '}' => "}",
                    '(' => "(",
                    ')' => ")",
                    '.' => ".",
                    _ => "*",
                })
            }
            '?' | '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i + 1..j].iter().collect();
                if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
                    return Err(err(start, "invalid variable name"));
                }
                i = j;
                Tok::Var(name)
            }
            '"' | '\'' => {
                let quote = c;
                let mut j = i + 1;
                let mut value = String::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(err(start, "unterminated string")),
                        Some(&ch) if ch == quote => break,
                        Some('\\') => {
                            let esc = chars.get(j + 1).copied();
                            value.push(match esc {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('r') => '\r',
                                Some('"') => '"',
                                Some('\'') => '\'',
                                Some('\\') => '\\',
                                _ => return Err(err(j, "invalid escape sequence")),
                            });
                            j += 2;
                            continue;
                        }
                        Some(&ch) => value.push(ch),
                    }
                    j += 1;
                }
                i = j + 1;
                Tok::Str(value)
            }
            '@' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '-') {
                    j += 1;
                }
                let tag: String = chars[i + 1..j].iter().collect();
                i = j;
                Tok::LangTag(tag)
            }
            c if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => {
                let mut j = i;
                if matches!(chars[j], '+' | '-') {
                    j += 1;
                }
                let digits_start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' && chars.get(j + 1).is_some_and(char::is_ascii_digit) {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && matches!(chars[j], 'e' | 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && matches!(chars[k], '+' | '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                if j == digits_start {
                    return Err(err(start, "unexpected character"));
                }
                let text: String = chars[i..j].iter().collect();
                i = j;
                Tok::Number(text)
            }
            c if c.is_alphabetic() || c == ':' || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_alphanumeric() || matches!(chars[j], '_' | '-' | '.' | ':'))
                {
                    j += 1;
                }
                while j > i + 1 && chars[j - 1] == '.' {
                    j -= 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j;
                match word.split_once(':') {
                    Some((prefix, local)) => {
                        if prefix == "_" {
                            return Err(err(start, "blank nodes are not supported in queries"));
                        }
                        Tok::PName(prefix.to_string(), local.to_string())
                    }
                    None => Tok::Keyword(word),
                }
            }
            _ => return Err(err(start, &format!("unexpected character '{c}'"))),
        };
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    prefixes: HashMap<String, String>,
}

/// Parses `PREFIX* SELECT (?v)+ WHERE { pattern (. pattern)* FILTER(..)* } (LIMIT n)?`.
///
/// `SELECT *` projects every pattern variable in order of first appearance.
pub fn parse_query(text: &str) -> Result<SelectQuery, QueryError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
        prefixes: HashMap::new(),
    };
    p.query()
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Keyword(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.is_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {kw}")))
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), QueryError> {
        match self.peek() {
            Some(Tok::Punct(q)) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected '{p}'"))),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn query(&mut self) -> Result<SelectQuery, QueryError> {
        while self.is_keyword("PREFIX") {
            self.pos += 1;
            let at = self.offset();
            let prefix = match self.next() {
                Some(Tok::PName(prefix, local)) if local.is_empty() => prefix,
                _ => {
                    return Err(QueryError::Syntax {
                        position: at,
                        message: "expected prefix name".into(),
                    })
                }
            };
            let ns = match self.next() {
                Some(Tok::Iri(iri)) => iri,
                _ => return Err(self.error("expected namespace IRI")),
            };
            self.prefixes.insert(prefix, ns);
        }
        self.expect_keyword("SELECT")?;
        let mut projection = Vec::new();
        let mut select_all = false;
        if self.is_punct("*") {
            self.pos += 1;
            select_all = true;
        } else {
            while let Some(Tok::Var(v)) = self.peek() {
                projection.push(v.clone());
                self.pos += 1;
            }
            if projection.is_empty() {
                return Err(self.error("expected at least one projected variable"));
            }
        }
        self.expect_keyword("WHERE")?;
        self.expect_punct("{")?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            if self.is_punct("}") {
                self.pos += 1;
                break;
            }
            if self.is_keyword("FILTER") {
                self.pos += 1;
                filters.push(self.filter()?);
                if self.is_punct(".") {
                    self.pos += 1;
                }
                continue;
            }
            patterns.push(self.pattern()?);
            if self.is_punct(".") {
                self.pos += 1;
            } else if !self.is_punct("}") && !self.is_keyword("FILTER") {
                return Err(self.error("expected '.', FILTER or '}'"));
            }
        }
        if patterns.is_empty() {
            return Err(self.error("WHERE clause needs at least one triple pattern"));
        }
        let mut limit = None;
        if self.is_keyword("LIMIT") {
            self.pos += 1;
            match self.next() {
                Some(Tok::Number(n)) => match n.parse::<usize>() {
                    Ok(n) if n > 0 => limit = Some(n),
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("LIMIT must be a positive integer"));
                    }
                },
                _ => {
                    self.pos -= 1;
                    return Err(self.error("LIMIT must be a positive integer"));
                }
            }
        }
        if self.peek().is_some() {
            return Err(self.error("unexpected trailing input"));
        }
        let mut query = SelectQuery {
            projection,
            patterns,
            filters,
            limit,
        };
        let bound = query.pattern_variables();
        if select_all {
            query.projection = bound.clone();
        }
        for v in &query.projection {
            if !bound.contains(v) {
                return Err(QueryError::UnboundVariable(v.clone()));
            }
        }
        for c in query.filters.iter().flat_map(|f| &f.conjuncts) {
            if !bound.contains(&c.variable) {
                return Err(QueryError::UnboundVariable(c.variable.clone()));
            }
        }
        Ok(query)
    }

    fn pattern(&mut self) -> Result<TriplePattern, QueryError> {
        let subject = self.pattern_term(false)?;
        if let PatternTerm::Term(Term::Literal(_)) = subject {
            return Err(self.error("literal not allowed as subject"));
        }
        let predicate = self.pattern_term(true)?;
        if let PatternTerm::Term(Term::Literal(_)) = predicate {
            return Err(self.error("literal not allowed as predicate"));
        }
        let object = self.pattern_term(false)?;
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    fn pattern_term(&mut self, verb: bool) -> Result<PatternTerm, QueryError> {
        if verb && matches!(self.peek(), Some(Tok::Keyword(w)) if w == "a") {
            self.pos += 1;
            return Ok(PatternTerm::Term(Term::Iri(Iri::new_unchecked(rdf::TYPE))));
        }
        if let Some(Tok::Var(v)) = self.peek() {
            let v = v.clone();
            self.pos += 1;
            return Ok(PatternTerm::Var(v));
        }
        self.constant_term().map(PatternTerm::Term)
    }

    fn constant_term(&mut self) -> Result<Term, QueryError> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Iri(iri)) => Iri::new(iri.clone()).map(Term::Iri).map_err(|_| QueryError::Syntax {
                position: at,
                message: format!("IRI <{iri}> is not absolute"),
            }),
            Some(Tok::PName(prefix, local)) => self.expand(&prefix, &local, at).map(Term::Iri),
            Some(Tok::Str(value)) => self.literal_tail(value),
            Some(Tok::Number(n)) => Ok(Term::Literal(number_literal(&n))),
            _ => Err(QueryError::Syntax {
                position: at,
                message: "expected a variable, IRI or literal".into(),
            }),
        }
    }

    fn literal_tail(&mut self, value: String) -> Result<Term, QueryError> {
        match self.peek() {
            Some(Tok::LangTag(tag)) => {
                let tag = tag.clone();
                let lit = Literal::lang(value, &tag).map_err(|_| self.error("invalid language tag"))?;
                self.pos += 1;
                Ok(Term::Literal(lit))
            }
            Some(Tok::Punct("^^")) => {
                self.pos += 1;
                let at = self.offset();
                let datatype = match self.next() {
                    Some(Tok::Iri(iri)) => Iri::new(iri).map_err(|_| QueryError::Syntax {
                        position: at,
                        message: "datatype IRI is not absolute".into(),
                    })?,
                    Some(Tok::PName(p, l)) => self.expand(&p, &l, at)?,
                    _ => {
                        return Err(QueryError::Syntax {
                            position: at,
                            message: "expected datatype IRI".into(),
                        })
                    }
                };
                Ok(Term::Literal(Literal::typed(value, datatype)))
            }
            _ => Ok(Term::string(value)),
        }
    }

    fn expand(&self, prefix: &str, local: &str, at: usize) -> Result<Iri, QueryError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| QueryError::UnknownPrefix {
            prefix: prefix.to_string(),
            position: at,
        })?;
        Iri::new(format!("{ns}{local}")).map_err(|_| QueryError::Syntax {
            position: at,
            message: format!("{prefix}:{local} does not expand to an absolute IRI"),
        })
    }

    fn filter(&mut self) -> Result<FilterExpr, QueryError> {
        self.expect_punct("(")?;
        let mut conjuncts = vec![self.comparison()?];
        while self.is_punct("&&") {
            self.pos += 1;
            conjuncts.push(self.comparison()?);
        }
        self.expect_punct(")")?;
        Ok(FilterExpr { conjuncts })
    }

    fn comparison(&mut self) -> Result<Comparison, QueryError> {
        let at = self.offset();
        let (left_var, left_val) = self.operand()?;
        let op = match self.next() {
            Some(Tok::Punct("=")) => CompareOp::Eq,
            Some(Tok::Punct("!=")) => CompareOp::Ne,
            Some(Tok::Punct("<")) => CompareOp::Lt,
            Some(Tok::Punct("<=")) => CompareOp::Le,
            Some(Tok::Punct(">")) => CompareOp::Gt,
            Some(Tok::Punct(">=")) => CompareOp::Ge,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected comparison operator"));
            }
        };
        let (right_var, right_val) = self.operand()?;
        let (variable, op, value) = match (left_var, left_val, right_var, right_val) {
            (Some(v), None, None, Some(c)) => (v, op, c),
            (None, Some(c), Some(v), None) => (v, op.flipped(), c),
            _ => {
                return Err(QueryError::Syntax {
                    position: at,
                    message: "a comparison needs exactly one variable and one constant".into(),
                })
            }
        };
        if let FilterValue::Term(_) = value {
            if !op.is_equality() {
                return Err(QueryError::Syntax {
                    position: at,
                    message: format!("operator {op} needs a numeric or string constant"),
                });
            }
        }
        Ok(Comparison { variable, op, value })
    }

    fn operand(&mut self) -> Result<(Option<String>, Option<FilterValue>), QueryError> {
        if let Some(Tok::Var(v)) = self.peek() {
            let v = v.clone();
            self.pos += 1;
            return Ok((Some(v), None));
        }
        let term = self.constant_term()?;
        let value = match term {
            Term::Literal(lit) if lit.is_plain_string() => FilterValue::Str(lit.lexical().to_string()),
            Term::Literal(lit) if lit.numeric_value().is_some() => {
                FilterValue::Numeric(lit.numeric_value().expect("checked"))
            }
            other => FilterValue::Term(other),
        };
        Ok((None, Some(value)))
    }
}

fn number_literal(text: &str) -> Literal {
    let datatype = if text.contains(['e', 'E']) {
        xsd::DOUBLE
    } else if text.contains('.') {
        xsd::DECIMAL
    } else {
        xsd::INTEGER
    };
    Literal::typed(text, Iri::new_unchecked(datatype))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_query() {
        let q = parse_query("SELECT ?s WHERE { ?s ?p ?o }").unwrap();
        assert_eq!(q.patterns.len(), 1);
        assert_eq!(q.projection, vec!["s"]);
        assert!(q.filters.is_empty());
        assert_eq!(q.limit, None);
    }

    #[test]
    fn range_filters() {
        let q = parse_query("SELECT ?m WHERE { ?m <urn:lat> ?y . FILTER(?y >= 37.0) FILTER(?y <= 42.5) }")
            .unwrap();
        assert_eq!(q.patterns.len(), 1);
        assert_eq!(q.filters.len(), 2);
        assert_eq!(
            q.filters[0].conjuncts[0],
            Comparison {
                variable: "y".into(),
                op: CompareOp::Ge,
                value: FilterValue::Numeric(37.0)
            }
        );
        assert_eq!(q.filters[1].conjuncts[0].op, CompareOp::Le);
    }

    #[test]
    fn projection_must_be_bound() {
        assert_eq!(
            parse_query("SELECT ?x WHERE { ?y <urn:p> ?z }").unwrap_err(),
            QueryError::UnboundVariable("x".into())
        );
        assert!(parse_query("SELECT ?y WHERE { ?y <urn:p> ?z FILTER(?q = 1) }").is_err());
    }

    #[test]
    fn prefixes_keyword_a_and_limit() {
        let q = parse_query(
            "PREFIX ex: <http://semaps.example/ns#>\nSELECT ?m ?c WHERE { ?m a ?c . ?c ex:label \"x\"@en . } LIMIT 3",
        )
        .unwrap();
        assert_eq!(q.limit, Some(3));
        assert_eq!(q.patterns[0].predicate, PatternTerm::Term(Term::iri(rdf::TYPE).unwrap()));
        assert_eq!(
            q.patterns[1].predicate,
            PatternTerm::Term(Term::iri("http://semaps.example/ns#label").unwrap())
        );
    }

    #[test]
    fn unknown_prefix_and_syntax_positions() {
        match parse_query("SELECT ?s WHERE { ?s ex:p ?o }").unwrap_err() {
            QueryError::UnknownPrefix { prefix, position } => {
                assert_eq!(prefix, "ex");
                assert_eq!(position, 21);
            }
            other => panic!("{other:?}"),
        }
        match parse_query("SELECT ?s WHERE { ?s ?p }").unwrap_err() {
            QueryError::Syntax { position, .. } => assert_eq!(position, 24),
            other => panic!("{other:?}"),
        }
        assert!(parse_query("SELECT ?s WHERE { ?s ?p ?o } LIMIT 0").is_err());
        assert!(parse_query("SELECT WHERE { ?s ?p ?o }").is_err());
        assert!(parse_query("SELECT ?s WHERE { ?s ?p ?o ").is_err());
        assert!(parse_query("SELECT ?s WHERE { ?s ?p ?o FILTER(?o < <urn:x>) }").is_err());
        assert!(parse_query("SELECT ?s WHERE { ?s ?p ?o FILTER(?o < ?s) }").is_err());
    }

    #[test]
    fn reversed_comparison_is_normalized() {
        let q = parse_query("SELECT ?o WHERE { ?s ?p ?o FILTER(3 < ?o && ?o != \"x\") }").unwrap();
        let c = &q.filters[0].conjuncts;
        assert_eq!(c[0].op, CompareOp::Gt);
        assert_eq!(c[1].value, FilterValue::Str("x".into()));
    }

    #[test]
    fn select_star() {
        let q = parse_query("SELECT * WHERE { ?s ?p ?o . ?o ?q ?s }").unwrap();
        assert_eq!(q.projection, vec!["s", "p", "o", "q"]);
    }
}
