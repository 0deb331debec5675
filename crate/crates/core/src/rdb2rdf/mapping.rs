use std::collections::HashMap;

use super::MappingError;
use crate::rdf::{is_absolute_iri, Iri, Literal, Term};
use crate::vocab::{owl, rdf, rdfs, xsd};

/// Text with `{column}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    parts: Vec<Part>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Part {
    Text(String),
    Column(String),
}

impl Template {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut parts = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find('{') {
            if open > 0 {
                parts.push(Part::Text(rest[..open].to_string()));
            }
            let close = rest[open..]
                .find('}')
                .ok_or_else(|| format!("unclosed '{{' in template {text:?}"))?;
            let column = rest[open + 1..open + close].trim();
            if column.is_empty() {
                return Err(format!("empty placeholder in template {text:?}"));
            }
            parts.push(Part::Column(column.to_string()));
            rest = &rest[open + close + 1..];
        }
        if rest.contains('}') {
            return Err(format!("unmatched '}}' in template {text:?}"));
        }
        if !rest.is_empty() {
            parts.push(Part::Text(rest.to_string()));
        }
        Ok(Template { parts })
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().filter_map(|p| match p {
            Part::Column(c) => Some(c.as_str()),
            Part::Text(_) => None,
        })
    }

    /// Substitutes cell values, passing each through `encode`. Returns `None`
    /// when any referenced cell is empty (NULL).
    pub fn render(&self, lookup: impl Fn(&str) -> Option<String>, encode: impl Fn(&str) -> String) -> Option<String> {
        let mut out = String::new();
        for part in &self.parts {
            match part {
                Part::Text(t) => out.push_str(t),
                Part::Column(c) => {
                    let value = lookup(c)?;
                    if value.is_empty() {
                        return None;
                    }
                    out.push_str(&encode(&value));
                }
            }
        }
        Some(out)
    }

    fn prefix_with(&mut self, namespace: &str) {
        match self.parts.first_mut() {
            Some(Part::Text(t)) => t.insert_str(0, namespace),
            _ => self.parts.insert(0, Part::Text(namespace.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectSpec {
    /// Cell text as a literal of the given datatype (or language).
    Literal {
        template: Template,
        datatype: Iri,
        language: Option<String>,
    },
    /// Cell values substituted (percent-encoded) into an IRI template.
    Iri(Template),
    Constant(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyMapping {
    pub predicate: Iri,
    pub object: ObjectSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRule {
    pub table: String,
    pub columns: Vec<String>,
    pub subject: Template,
    pub type_iri: Option<Iri>,
    pub properties: Vec<PropertyMapping>,
}

/// Parses the line-oriented mapping language:
///
/// ```text
/// prefix ex: <http://semaps.example/ns#>
/// table markers columns id,creator,lat
///   subject ex:marker/{id}
///   type ex:Marker
///   property ex:hasCreator iri ex:user/{creator}
///   property ex:lat literal {lat} xsd:decimal
///   property ex:source constant "crowd"
/// ```
///
/// `rdf`, `rdfs`, `owl` and `xsd` are predeclared.
pub fn parse_mapping(text: &str) -> Result<Vec<MappingRule>, MappingError> {
    let mut prefixes: HashMap<String, String> = [
        ("rdf", rdf::NS),
        ("rdfs", rdfs::NS),
        ("owl", owl::NS),
        ("xsd", xsd::NS),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    let mut rules: Vec<MappingRule> = Vec::new();
    let mut pending: Option<(MappingRule, usize, bool)> = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let syntax = |message: String| MappingError::Syntax { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens = tokenize(trimmed).map_err(syntax)?;
        let keyword = tokens[0].as_str();
        match keyword {
            "prefix" => {
                let [_, name, iri] = tokens.as_slice() else {
                    return Err(syntax("expected: prefix NAME: <IRI>".into()));
                };
                let name = name
                    .strip_suffix(':')
                    .ok_or_else(|| syntax("prefix name must end with ':'".into()))?;
                let iri = strip_angle(iri).ok_or_else(|| syntax("namespace must be an <IRI>".into()))?;
                if !is_absolute_iri(iri) {
                    return Err(MappingError::RelativeIri { line, iri: iri.to_string() });
                }
                prefixes.insert(name.to_string(), iri.to_string());
            }
            "table" => {
                if let Some(done) = pending.take() {
                    rules.push(finish(done)?);
                }
                let [_, name, kw, cols] = tokens.as_slice() else {
                    return Err(syntax("expected: table NAME columns a,b,c".into()));
                };
                if kw != "columns" {
                    return Err(syntax("expected 'columns' after the table name".into()));
                }
                let columns: Vec<String> = cols
                    .split(',')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(str::to_string)
                    .collect();
                if columns.is_empty() {
                    return Err(syntax("table declares no columns".into()));
                }
                pending = Some((
                    MappingRule {
                        table: name.clone(),
                        columns,
                        subject: Template { parts: Vec::new() },
                        type_iri: None,
                        properties: Vec::new(),
                    },
                    line,
                    false,
                ));
            }
            "subject" | "type" | "property" => {
                let Some((rule, _, has_subject)) = pending.as_mut() else {
                    return Err(syntax(format!("'{keyword}' outside of a table block")));
                };
                match keyword {
                    "subject" => {
                        let [_, template] = tokens.as_slice() else {
                            return Err(syntax("expected: subject TEMPLATE".into()));
                        };
                        rule.subject = iri_template(template, &prefixes, &rule.columns, line)?;
                        *has_subject = true;
                    }
                    "type" => {
                        let [_, iri] = tokens.as_slice() else {
                            return Err(syntax("expected: type IRI".into()));
                        };
                        rule.type_iri = Some(constant_iri(iri, &prefixes, line)?);
                    }
                    _ => {
                        let mapping = property(&tokens, &prefixes, &rule.columns, line)?;
                        rule.properties.push(mapping);
                    }
                }
            }
            other => return Err(syntax(format!("unknown keyword {other:?}"))),
        }
    }
    if let Some(done) = pending.take() {
        rules.push(finish(done)?);
    }
    Ok(rules)
}

fn finish((rule, line, has_subject): (MappingRule, usize, bool)) -> Result<MappingRule, MappingError> {
    if !has_subject {
        return Err(MappingError::Syntax {
            line,
            message: format!("table {} has no subject template", rule.table),
        });
    }
    Ok(rule)
}

fn property(
    tokens: &[String],
    prefixes: &HashMap<String, String>,
    columns: &[String],
    line: usize,
) -> Result<PropertyMapping, MappingError> {
    let syntax = |message: &str| MappingError::Syntax {
        line,
        message: message.to_string(),
    };
    if tokens.len() < 4 {
        return Err(syntax("expected: property PREDICATE (iri|literal|constant) ..."));
    }
    let predicate = constant_iri(&tokens[1], prefixes, line)?;
    let object = match tokens[2].as_str() {
        "iri" => {
            if tokens.len() != 4 {
                return Err(syntax("expected: property PREDICATE iri TEMPLATE"));
            }
            ObjectSpec::Iri(iri_template(&tokens[3], prefixes, columns, line)?)
        }
        "literal" => {
            if tokens.len() > 5 {
                return Err(syntax("expected: property PREDICATE literal TEMPLATE [DATATYPE|@lang]"));
            }
            let body = unquote(&tokens[3]).unwrap_or(&tokens[3]);
            let template = Template::parse(body).map_err(|m| syntax(&m))?;
            check_columns(&template, columns, line)?;
            let (datatype, language) = match tokens.get(4) {
                None => (Iri::new_unchecked(xsd::STRING), None),
                Some(tag) if tag.starts_with('@') => {
                    let lang = &tag[1..];
                    Literal::lang("", lang).map_err(|_| syntax("invalid language tag"))?;
                    (Iri::new_unchecked(rdf::LANG_STRING), Some(lang.to_ascii_lowercase()))
                }
                Some(dt) => (constant_iri(dt, prefixes, line)?, None),
            };
            ObjectSpec::Literal {
                template,
                datatype,
                language,
            }
        }
        "constant" => {
            let value = &tokens[3];
            let term = if let Some(s) = unquote(value) {
                match tokens.get(4) {
                    None => Term::string(s),
                    Some(tag) if tag.starts_with('@') => Term::Literal(
                        Literal::lang(s, &tag[1..]).map_err(|_| syntax("invalid language tag"))?,
                    ),
                    Some(dt) => Term::Literal(Literal::typed(s, constant_iri(dt, prefixes, line)?)),
                }
            } else {
                if tokens.len() != 4 {
                    return Err(syntax("expected: property PREDICATE constant TERM"));
                }
                Term::Iri(constant_iri(value, prefixes, line)?)
            };
            ObjectSpec::Constant(term)
        }
        other => return Err(syntax(&format!("unknown object kind {other:?}"))),
    };
    Ok(PropertyMapping { predicate, object })
}

fn check_columns(template: &Template, columns: &[String], line: usize) -> Result<(), MappingError> {
    for c in template.columns() {
        if !columns.iter().any(|d| d == c) {
            return Err(MappingError::UnknownColumn {
                line,
                column: c.to_string(),
            });
        }
    }
    Ok(())
}

fn expand_prefixed<'a>(
    text: &'a str,
    prefixes: &HashMap<String, String>,
    line: usize,
) -> Result<(String, &'a str), MappingError> {
    if let Some(inner) = strip_angle(text) {
        return Ok((String::new(), inner));
    }
    let (prefix, local) = text.split_once(':').ok_or_else(|| MappingError::Syntax {
        line,
        message: format!("expected <IRI> or prefixed name, found {text:?}"),
    })?;
    let ns = prefixes.get(prefix).ok_or_else(|| MappingError::UnknownPrefix {
        line,
        prefix: prefix.to_string(),
    })?;
    Ok((ns.clone(), local))
}

fn iri_template(
    text: &str,
    prefixes: &HashMap<String, String>,
    columns: &[String],
    line: usize,
) -> Result<Template, MappingError> {
    let (ns, rest) = expand_prefixed(text, prefixes, line)?;
    let mut template = Template::parse(rest).map_err(|message| MappingError::Syntax { line, message })?;
    check_columns(&template, columns, line)?;
    template.prefix_with(&ns);
    // Validate with a representative substitution.
    let sample = template
        .render(|_| Some("x".to_string()), str::to_string)
        .unwrap_or_default();
    if !is_absolute_iri(&sample) {
        return Err(MappingError::RelativeIri { line, iri: sample });
    }
    Ok(template)
}

fn constant_iri(text: &str, prefixes: &HashMap<String, String>, line: usize) -> Result<Iri, MappingError> {
    let (ns, rest) = expand_prefixed(text, prefixes, line)?;
    let full = format!("{ns}{rest}");
    Iri::new(full.clone()).map_err(|_| MappingError::RelativeIri { line, iri: full })
}

fn strip_angle(text: &str) -> Option<&str> {
    text.strip_prefix('<')?.strip_suffix('>')
}

fn unquote(text: &str) -> Option<&str> {
    text.strip_prefix('"')?.strip_suffix('"')
}

/// Splits on whitespace, keeping `"..."` and `<...>` tokens intact.
fn tokenize(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            break;
        }
        let mut token = String::new();
        let closer = match c {
            '"' => Some('"'),
            '<' => Some('>'),
            _ => None,
        };
        if let Some(closer) = closer {
            token.push(chars.next().expect("peeked"));
            let mut closed = false;
            for ch in chars.by_ref() {
                token.push(ch);
                if ch == closer {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(format!("unterminated {c}...{closer}"));
            }
        } else {
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                token.push(ch);
                chars.next();
            }
        }
        tokens.push(token);
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MARKERS: &str = "\
# markers published from the authoring tool's table
prefix ex: <http://semaps.example/ns#>
table markers columns id,creator,lat,lon,label,created
  subject ex:marker/{id}
  type ex:Marker
  property ex:hasCreator iri ex:user/{creator}
  property ex:lat literal {lat} xsd:decimal
  property ex:lon literal {lon} xsd:decimal
  property ex:label literal {label} xsd:string
  property ex:created literal {created} xsd:dateTime
  property ex:origin constant \"crowd\"
";

    #[test]
    fn minimal_mapping() {
        let rules = parse_mapping(
            "prefix ex: <urn:x/>\ntable t columns id,name\nsubject ex:t/{id}\nproperty ex:name literal {name}\n",
        )
        .unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].properties.len(), 1);
        assert!(rules[0].type_iri.is_none());
    }

    #[test]
    fn markers_mapping_has_six_properties() {
        let rules = parse_mapping(MARKERS).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].properties.len(), 6);
        assert_eq!(rules[0].type_iri.as_ref().unwrap().as_str(), "http://semaps.example/ns#Marker");
        assert_eq!(rules[0].columns.len(), 6);
    }

    #[test]
    fn undeclared_template_column() {
        let err = parse_mapping("prefix ex: <urn:x/>\ntable t columns name\nsubject ex:t/{id}\n").unwrap_err();
        assert_eq!(err, MappingError::UnknownColumn { line: 3, column: "id".into() });
    }

    #[test]
    fn relative_and_malformed() {
        assert!(matches!(
            parse_mapping("table t columns id\nsubject <t/{id}>\n"),
            Err(MappingError::RelativeIri { line: 2, .. })
        ));
        assert!(matches!(
            parse_mapping("table t columns id\nsubject zz:t/{id}\n"),
            Err(MappingError::UnknownPrefix { line: 2, .. })
        ));
        assert!(matches!(parse_mapping("subject <urn:x/{id}>\n"), Err(MappingError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse_mapping("table t columns id\nproperty <urn:p> literal {id}\n"),
            Err(MappingError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_mapping("table t columns id\nsubject <urn:x/{id>\n"),
            Err(MappingError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_mapping("table t columns id\nsubject <urn:x/{id}>\nproperty <urn:p> blob {id}\n"),
            Err(MappingError::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn tokenizer_keeps_quoted_strings() {
        assert_eq!(
            tokenize("property ex:p constant \"two words\" # trailing").unwrap(),
            vec!["property", "ex:p", "constant", "\"two words\""]
        );
        assert!(tokenize("subject <urn:open").is_err());
    }
}
