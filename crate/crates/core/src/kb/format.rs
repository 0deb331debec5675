use std::fs;
use std::path::Path;

use super::*;

/// Reads a knowledge graph from the concepts and relations files.
pub fn load_kb(concepts: &Path, relations: &Path) -> Result<KnowledgeGraph, KbError> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| KbError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })
    };
    parse_kb(&read(concepts)?, &read(relations)?)
}

/// Parses both file bodies.
///
/// Concepts: `id<TAB>lemma<TAB>lang<TAB>iri;iri;...`. Relations: an optional
/// `!relations: Name,Name` header, then
/// `name<TAB>source lemma<TAB>target lemma<TAB>Pre|Pos<TAB>lang`.
/// Blank lines and `#` comments are ignored in both.
pub fn parse_kb(concepts: &str, relations: &str) -> Result<KnowledgeGraph, KbError> {
    let mut graph = KnowledgeGraph::new();
    for (n, line) in concepts.lines().enumerate() {
        let line_no = n + 1;
        if is_skippable(line) {
            continue;
        }
        let concept = parse_concept_line(line, line_no)?;
        graph
            .add_concept(concept)
            .map_err(|key| KbError::DuplicateConcept { line: line_no, key })?;
    }

    let mut seen_relation = false;
    for (n, line) in relations.lines().enumerate() {
        let line_no = n + 1;
        if is_skippable(line) {
            continue;
        }
        if let Some(header) = line.trim().strip_prefix("!relations:") {
            if seen_relation {
                return Err(relation_error(line_no, "the '!relations:' header must precede all relations"));
            }
            for name in header.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(relation_error(line_no, &format!("invalid relation name {name:?}")));
                }
                graph.declare_relation(name);
            }
            continue;
        }
        seen_relation = true;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(relation_error(
                line_no,
                &format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let name = canonical_relation_name(fields[0]);
        if !graph.knows_relation(name) {
            return Err(KbError::UnknownRelation {
                line: line_no,
                name: fields[0].to_string(),
            });
        }
        let polarity: Polarity = fields[3].parse().map_err(|e: String| relation_error(line_no, &e))?;
        let language: Language = fields[4].parse().map_err(|e: String| relation_error(line_no, &e))?;
        let endpoint = |lemma: &str| {
            graph
                .lookup(lemma, language)
                .map(|c| c.id)
                .ok_or_else(|| KbError::DanglingEndpoint {
                    line: line_no,
                    lemma: lemma.to_string(),
                    language,
                })
        };
        let relation = InferentialRelation {
            name: name.to_string(),
            source: endpoint(fields[1])?,
            target: endpoint(fields[2])?,
            polarity,
        };
        if !graph.add_relation(relation) {
            return Err(KbError::DuplicateRelation { line: line_no });
        }
    }
    Ok(graph)
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn relation_error(line: usize, message: &str) -> KbError {
    KbError::Parse {
        file: "relations",
        line,
        message: message.to_string(),
    }
}

fn parse_concept_line(line: &str, line_no: usize) -> Result<Concept, KbError> {
    let err = |message: String| KbError::Parse {
        file: "concepts",
        line: line_no,
        message,
    };
    let fields: Vec<&str> = line.split('\t').collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(err(format!("expected 3 or 4 tab-separated fields, found {}", fields.len())));
    }
    let id = fields[0]
        .trim()
        .parse::<u64>()
        .ok()
        .filter(|&id| id > 0)
        .ok_or_else(|| err(format!("id must be a positive integer, found {:?}", fields[0])))?;
    let lemma = fields[1].trim();
    if lemma.is_empty() {
        return Err(err("empty lemma".into()));
    }
    let language: Language = fields[2].parse().map_err(err)?;
    let external_links = fields
        .get(3)
        .map(|links| {
            links
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| Iri::new(s).map_err(|e| err(e.to_string())))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?
        .unwrap_or_default();
    Ok(Concept {
        id: ConceptId(id),
        lemma: lemma.to_string(),
        language,
        external_links,
    })
}

/// Renders the graph back into the two file formats.
pub fn serialize_kb(graph: &KnowledgeGraph) -> (String, String) {
    let mut concepts = String::from("# id\tlemma\tlang\texternal links\n");
    for c in graph.concepts() {
        let links: Vec<&str> = c.external_links.iter().map(Iri::as_str).collect();
        concepts.push_str(&format!("{}\t{}\t{}\t{}\n", c.id, c.lemma, c.language, links.join(";")));
    }
    let mut relations = String::new();
    let declared: Vec<&str> = graph.declared_relations().collect();
    if !declared.is_empty() {
        relations.push_str(&format!("!relations: {}\n", declared.join(",")));
    }
    for r in graph.relations() {
        let source = graph.concept(r.source).expect("relation endpoints exist");
        let target = graph.concept(r.target).expect("relation endpoints exist");
        relations.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.name, source.lemma, target.lemma, r.polarity, source.language
        ));
    }
    (concepts, relations)
}

pub fn save_kb(graph: &KnowledgeGraph, concepts: &Path, relations: &Path) -> std::io::Result<()> {
    let (c, r) = serialize_kb(graph);
    fs::write(concepts, c)?;
    fs::write(relations, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_concept_without_relations() {
        let g = parse_kb("1\tpolitician\ten\thttp://dbpedia.org/resource/Politician\n", "").unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.relation_count(), 0);
    }

    #[test]
    fn dangling_endpoint_names_the_lemma() {
        let err = parse_kb("1\tpolitician\ten\n", "CapableOf\tpolitician\tto fly\tPre\ten\n").unwrap_err();
        assert_eq!(
            err,
            KbError::DanglingEndpoint {
                line: 1,
                lemma: "to fly".into(),
                language: Language::En
            }
        );
        assert!(err.to_string().contains("to fly"));
    }

    #[test]
    fn duplicate_concepts_and_bad_lines() {
        assert!(matches!(
            parse_kb("1\ta\ten\n2\t A \ten\n", ""),
            Err(KbError::DuplicateConcept { line: 2, .. })
        ));
        assert!(matches!(
            parse_kb("1\ta\ten\n1\tb\ten\n", ""),
            Err(KbError::DuplicateConcept { line: 2, .. })
        ));
        // Same lemma in different languages is fine.
        assert!(parse_kb("1\ta\ten\n2\ta\tpt\n", "").is_ok());
        assert!(matches!(parse_kb("x\ta\ten\n", ""), Err(KbError::Parse { line: 1, .. })));
        assert!(matches!(parse_kb("1\ta\tfr\n", ""), Err(KbError::Parse { line: 1, .. })));
        assert!(matches!(parse_kb("1\ta\ten\tnot-an-iri\n", ""), Err(KbError::Parse { .. })));
    }

    #[test]
    fn relation_vocabulary_is_header_declared() {
        let concepts = "1\ta\ten\n2\tb\ten\n";
        assert!(matches!(
            parse_kb(concepts, "Desires\ta\tb\tPos\ten\n"),
            Err(KbError::UnknownRelation { line: 1, .. })
        ));
        let g = parse_kb(concepts, "# vocabulary\n!relations: Desires, HasSubevent\nDesires\ta\tb\tPos\ten\n").unwrap();
        assert_eq!(g.relation_count(), 1);
        assert!(matches!(
            parse_kb(concepts, "IsA\ta\tb\tPos\ten\n!relations: Desires\n"),
            Err(KbError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_kb(concepts, "IsA\ta\tb\tMaybe\ten\n"),
            Err(KbError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_kb(concepts, "IsA\ta\tb\tPos\ten\nIsA\ta\tb\tPos\ten\n"),
            Err(KbError::DuplicateRelation { line: 2 })
        ));
    }

    #[test]
    fn propriety_of_is_canonicalized() {
        let g = parse_kb("1\ta\ten\n2\tb\ten\n", "ProprietyOf\ta\tb\tPre\ten\n").unwrap();
        assert_eq!(g.relations()[0].name, "PropertyOf");
    }

    #[test]
    fn save_and_reload_is_identical() {
        let concepts = "3\tcorrupção\tpt\thttp://dbpedia.org/resource/Corruption\n1\ta\ten\t\n2\tb\ten\turn:x;urn:y\n";
        let relations = "!relations: Desires\nDesires\ta\tb\tPos\ten\nIsA\tb\ta\tPre\ten\n";
        let g = parse_kb(concepts, relations).unwrap();
        let (c, r) = serialize_kb(&g);
        let again = parse_kb(&c, &r).unwrap();
        assert_eq!(serialize_kb(&again), (c, r));
        assert_eq!(again.concepts().collect::<Vec<_>>(), g.concepts().collect::<Vec<_>>());
        assert_eq!(again.relations(), g.relations());
    }
}
