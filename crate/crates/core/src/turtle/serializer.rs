use std::collections::BTreeMap;
use std::fmt::Write;

use crate::rdf::{escape_string, Iri, Literal, Term, Triple};
use crate::vocab::{rdf, xsd};

/// Prefix name → namespace IRI.
pub type PrefixMap = BTreeMap<String, String>;

/// Writes triples as Turtle, grouped by subject and fully sorted, so equal
/// triple sets always produce identical bytes.
pub fn serialize_turtle<'a, I>(triples: I, prefixes: &PrefixMap) -> String
where
    I: IntoIterator<Item = &'a Triple>,
{
    let prefixes: Vec<(&str, &str)> = prefixes
        .iter()
        .filter(|(name, ns)| valid_prefix_name(name) && !ns.is_empty())
        .map(|(n, ns)| (n.as_str(), ns.as_str()))
        .collect();
    let mut out = String::new();
    for (name, ns) in &prefixes {
        let _ = writeln!(out, "@prefix {name}: <{}> .", escape_iri(ns));
    }

    let mut sorted: Vec<&Triple> = triples.into_iter().collect();
    sorted.sort();
    sorted.dedup();

    let writer = TermWriter { prefixes: &prefixes };
    let mut current_subject: Option<&Term> = None;
    let mut current_predicate: Option<&Term> = None;
    for t in sorted {
        if current_subject != Some(&t.subject) {
            if current_subject.is_some() {
                out.push_str(" .\n");
            }
            out.push('\n');
            out.push_str(&writer.term(&t.subject));
            out.push(' ');
            out.push_str(&writer.predicate(&t.predicate));
            current_subject = Some(&t.subject);
            current_predicate = Some(&t.predicate);
        } else if current_predicate != Some(&t.predicate) {
            out.push_str(" ;\n    ");
            out.push_str(&writer.predicate(&t.predicate));
            current_predicate = Some(&t.predicate);
        } else {
            out.push(',');
        }
        out.push(' ');
        out.push_str(&writer.term(&t.object));
    }
    if current_subject.is_some() {
        out.push_str(" .\n");
    }
    out
}

struct TermWriter<'a> {
    prefixes: &'a [(&'a str, &'a str)],
}

impl TermWriter<'_> {
    fn predicate(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) if iri.as_str() == rdf::TYPE => "a".to_string(),
            other => self.term(other),
        }
    }

    fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::Blank(b) => format!("_:{}", b.label()),
            Term::Literal(lit) => self.literal(lit),
        }
    }

    fn iri(&self, iri: &Iri) -> String {
        let value = iri.as_str();
        let best = self
            .prefixes
            .iter()
            .filter(|(_, ns)| value.starts_with(ns) && valid_local_name(&value[ns.len()..]))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)));
        match best {
            Some((name, ns)) => format!("{name}:{}", &value[ns.len()..]),
            None => format!("<{}>", escape_iri(value)),
        }
    }

    fn literal(&self, lit: &Literal) -> String {
        let lexical = lit.lexical();
        if let Some(lang) = lit.language() {
            return format!("\"{}\"@{lang}", escape_string(lexical));
        }
        match lit.datatype().as_str() {
            xsd::STRING => format!("\"{}\"", escape_string(lexical)),
            xsd::INTEGER if is_integer_shorthand(lexical) => lexical.to_string(),
            xsd::DECIMAL if is_decimal_shorthand(lexical) => lexical.to_string(),
            _ => format!("\"{}\"^^{}", escape_string(lexical), self.iri(lit.datatype())),
        }
    }
}

fn is_integer_shorthand(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

fn is_decimal_shorthand(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            int.chars().all(|c| c.is_ascii_digit())
                && !frac.is_empty()
                && frac.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

fn valid_prefix_name(name: &str) -> bool {
    if name.is_empty() {
        return true;
    }
    name.starts_with(|c: char| c.is_alphabetic())
        && !name.ends_with('.')
        && name.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Local names the parser reads back unchanged. Colons are excluded to keep
/// the output unambiguous.
fn valid_local_name(local: &str) -> bool {
    if local.is_empty() {
        return true;
    }
    !local.ends_with('.')
        && !local.starts_with(['-', '.'])
        && local.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn escape_iri(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        if c.is_whitespace()
            || c.is_control()
            || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turtle::parse_turtle;

    fn prefixes() -> PrefixMap {
        [("ex", "urn:x/"), ("xsd", xsd::NS)]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn layout_is_grouped_and_sorted() {
        let text = "@prefix ex: <urn:x/> .\n\
                    ex:b ex:q \"z\", \"y\" ; ex:p 2.5 .\n\
                    ex:a a ex:C .";
        let triples = parse_turtle(text, "").unwrap();
        let out = serialize_turtle(&triples, &prefixes());
        let expected = "@prefix ex: <urn:x/> .\n\
                        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
                        \n\
                        ex:a a ex:C .\n\
                        \n\
                        ex:b ex:p 2.5 ;\n    ex:q \"y\", \"z\" .\n";
        assert_eq!(out, expected);
    }

    #[test]
    fn unsafe_local_names_fall_back_to_full_iris() {
        let triples = parse_turtle("<urn:x/marker/1> <urn:x/p> <urn:x/a:b> .", "").unwrap();
        let out = serialize_turtle(&triples, &prefixes());
        assert!(out.contains("<urn:x/marker/1> ex:p <urn:x/a:b> ."), "{out}");
    }

    #[test]
    fn typed_literals_use_prefixed_datatypes() {
        let triples = parse_turtle(
            "<urn:s> <urn:p> \"2026-01-01T00:00:00Z\"^^<http://www.w3.org/2001/XMLSchema#dateTime>, \"1e3\"^^<http://www.w3.org/2001/XMLSchema#double> .",
            "",
        )
        .unwrap();
        let out = serialize_turtle(&triples, &prefixes());
        assert!(out.contains("\"1e3\"^^xsd:double"));
        assert!(out.contains("\"2026-01-01T00:00:00Z\"^^xsd:dateTime"));
    }

    #[test]
    fn odd_characters_survive() {
        let text = "<urn:s> <urn:p> \"quote \\\" back \\\\ nl \\n ctl \\u0001\" ; <urn:q> <urn:a\\u007Cb> .";
        let triples = parse_turtle(text, "").unwrap();
        let out = serialize_turtle(&triples, &PrefixMap::new());
        assert_eq!(parse_turtle(&out, "").unwrap().len(), 2);
        let mut a = triples.clone();
        let mut b = parse_turtle(&out, "").unwrap();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}
