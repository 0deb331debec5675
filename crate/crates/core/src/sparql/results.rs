//! SPARQL 1.1 query results in the JSON format.

use serde_json::{json, Map, Value};

use super::ast::{Binding, QueryResults};
use crate::rdf::{BlankNode, Iri, Literal, Term};
use crate::vocab::xsd;

pub fn term_to_json(term: &Term) -> Value {
    match term {
        Term::Iri(iri) => json!({"type": "uri", "value": iri.as_str()}),
        Term::Blank(b) => json!({"type": "bnode", "value": b.label()}),
        Term::Literal(lit) => {
            let mut obj = Map::new();
            obj.insert("type".into(), json!("literal"));
            obj.insert("value".into(), json!(lit.lexical()));
            if let Some(lang) = lit.language() {
                obj.insert("xml:lang".into(), json!(lang));
            } else if !lit.is_plain_string() {
                obj.insert("datatype".into(), json!(lit.datatype().as_str()));
            }
            Value::Object(obj)
        }
    }
}

pub fn to_json(results: &QueryResults) -> Value {
    let bindings: Vec<Value> = results
        .bindings
        .iter()
        .map(|b| {
            let obj: Map<String, Value> = results
                .variables
                .iter()
                .filter_map(|v| b.get(v).map(|t| (v.clone(), term_to_json(t))))
                .collect();
            Value::Object(obj)
        })
        .collect();
    json!({
        "head": {"vars": results.variables},
        "results": {"bindings": bindings},
    })
}

pub fn term_from_json(value: &Value) -> Result<Term, String> {
    let kind = value.get("type").and_then(Value::as_str).ok_or("binding without type")?;
    let text = value
        .get("value")
        .and_then(Value::as_str)
        .ok_or("binding without value")?;
    match kind {
        "uri" => Iri::new(text).map(Term::Iri).map_err(|e| e.to_string()),
        "bnode" => BlankNode::new(text).map(Term::Blank).map_err(|e| e.to_string()),
        "literal" | "typed-literal" => {
            if let Some(lang) = value.get("xml:lang").and_then(Value::as_str) {
                Literal::lang(text, lang).map(Term::Literal).map_err(|e| e.to_string())
            } else {
                let datatype = value
                    .get("datatype")
                    .and_then(Value::as_str)
                    .unwrap_or(xsd::STRING);
                let datatype = Iri::new(datatype).map_err(|e| e.to_string())?;
                Ok(Term::Literal(Literal::typed(text, datatype)))
            }
        }
        other => Err(format!("unknown term type {other:?}")),
    }
}

/// Reads a SPARQL JSON results document. Unbound variables are simply absent
/// from the corresponding binding.
pub fn from_json(value: &Value) -> Result<QueryResults, String> {
    let variables: Vec<String> = value
        .pointer("/head/vars")
        .and_then(Value::as_array)
        .ok_or("missing head.vars")?
        .iter()
        .map(|v| v.as_str().map(str::to_string).ok_or("non-string variable name"))
        .collect::<Result<_, _>>()?;
    let rows = value
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or("missing results.bindings")?;
    let mut bindings = Vec::with_capacity(rows.len());
    for row in rows {
        let obj = row.as_object().ok_or("binding row is not an object")?;
        let mut binding = Binding::default();
        for (var, term) in obj {
            binding.0.insert(var.clone(), term_from_json(term)?);
        }
        bindings.push(binding);
    }
    Ok(QueryResults { variables, bindings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape_and_round_trip() {
        let mut binding = Binding::default();
        binding.0.insert("s".into(), Term::iri("urn:a").unwrap());
        binding.0.insert("l".into(), Term::Literal(Literal::lang("olá", "pt").unwrap()));
        binding.0.insert("n".into(), Term::Literal(Literal::integer(3)));
        binding.0.insert("b".into(), Term::blank("b1").unwrap());
        binding.0.insert("x".into(), Term::string("plain"));
        let results = QueryResults {
            variables: vec!["s".into(), "l".into(), "n".into(), "b".into(), "x".into()],
            bindings: vec![binding],
        };
        let value = to_json(&results);
        assert_eq!(value["head"]["vars"], json!(["s", "l", "n", "b", "x"]));
        let row = &value["results"]["bindings"][0];
        assert_eq!(row["s"], json!({"type": "uri", "value": "urn:a"}));
        assert_eq!(row["l"]["xml:lang"], json!("pt"));
        assert_eq!(row["n"]["datatype"], json!(xsd::INTEGER));
        assert_eq!(row["b"]["type"], json!("bnode"));
        assert!(row["x"].get("datatype").is_none());
        assert_eq!(from_json(&value).unwrap(), results);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(from_json(&json!({"results": {"bindings": []}})).is_err());
        assert!(from_json(&json!({"head": {"vars": ["s"]}, "results": {"bindings": [{"s": {"type": "uri"}}]}})).is_err());
        assert!(from_json(&json!({"head": {"vars": ["s"]}, "results": {"bindings": [{"s": {"type": "uri", "value": "rel"}}]}})).is_err());
    }
}
