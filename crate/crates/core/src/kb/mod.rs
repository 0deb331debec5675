//! The common-sense inferential knowledge graph.
//!
//! Concepts are natural-language lemmas in one language; relations are
//! directed tuples `(name, source, target, Pre|Pos)` stating a precondition
//! or postcondition of using the source concept. The graph is immutable once
//! loaded and is shared read-only by the services.

mod format;

pub use format::{load_kb, parse_kb, save_kb, serialize_kb};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{Iri, Literal, Term, Triple};
use crate::text;
use crate::vocab::{self, rdf};

/// Relation names every graph understands without a header declaration.
pub const SEEDED_RELATIONS: &[&str] = &[
    "CapableOf",
    "PropertyOf",
    "EffectOf",
    "IsA",
    "UsedFor",
    "PartOf",
    "AtLocation",
    "MotivatedByGoal",
    "Causes",
    "DefinedAs",
];

pub const MAX_CANDIDATES: usize = 10;
pub const MAX_EXPANSION_DEPTH: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub u64);

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Pt,
}

impl Language {
    pub fn tag(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Pt => "pt",
        }
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "pt" => Ok(Language::Pt),
            other => Err(format!("unsupported language tag {other:?}")),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Pre,
    Pos,
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Pre" => Ok(Polarity::Pre),
            "Pos" => Ok(Polarity::Pos),
            other => Err(format!("polarity must be Pre or Pos, found {other:?}")),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Pre => "Pre",
            Polarity::Pos => "Pos",
        })
    }
}

/// Maps spelling variants onto the canonical relation name.
pub fn canonical_relation_name(name: &str) -> &str {
    match name {
        "ProprietyOf" => "PropertyOf",
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Concept {
    pub id: ConceptId,
    pub lemma: String,
    pub language: Language,
    pub external_links: Vec<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct InferentialRelation {
    pub name: String,
    pub source: ConceptId,
    pub target: ConceptId,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatchKind {
    Exact,
    Normalized,
    TokenOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub concept_id: ConceptId,
    pub score: f64,
    pub match_kind: MatchKind,
}

/// One concept reached by [`KnowledgeGraph::expand`], annotated with the
/// relation that first (shallowest) reached it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Expansion {
    pub target: ConceptId,
    pub relation: String,
    pub polarity: Polarity,
    pub depth: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("{file} line {line}: {message}")]
    Parse {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("relations line {line}: no concept with lemma {lemma:?} ({language})")]
    DanglingEndpoint {
        line: usize,
        lemma: String,
        language: Language,
    },
    #[error("concepts line {line}: duplicate concept {key}")]
    DuplicateConcept { line: usize, key: String },
    #[error("relations line {line}: unknown relation name {name:?} (declare it in a '!relations:' header)")]
    UnknownRelation { line: usize, name: String },
    #[error("relations line {line}: duplicate relation")]
    DuplicateRelation { line: usize },
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("expansion depth {0} out of range 1..=3")]
    DepthOutOfRange(u8),
    #[error("expression is empty")]
    EmptyExpression,
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    concepts: std::collections::BTreeMap<ConceptId, Concept>,
    lemma_index: HashMap<(String, Language), ConceptId>,
    relations: Vec<InferentialRelation>,
    outgoing: HashMap<ConceptId, Vec<usize>>,
    incoming: HashMap<ConceptId, Vec<usize>>,
    relation_names: BTreeSet<String>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        KnowledgeGraph {
            relation_names: SEEDED_RELATIONS.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub(crate) fn declare_relation(&mut self, name: &str) {
        self.relation_names
            .insert(canonical_relation_name(name).to_string());
    }

    pub fn knows_relation(&self, name: &str) -> bool {
        self.relation_names.contains(canonical_relation_name(name))
    }

    /// Relation names beyond the seeded set (those a header must declare).
    pub fn declared_relations(&self) -> impl Iterator<Item = &str> {
        self.relation_names
            .iter()
            .map(String::as_str)
            .filter(|n| !SEEDED_RELATIONS.contains(n))
    }

    pub(crate) fn add_concept(&mut self, concept: Concept) -> Result<(), String> {
        let key = (text::normalize(&concept.lemma), concept.language);
        if self.concepts.contains_key(&concept.id) {
            return Err(format!("id {}", concept.id));
        }
        if self.lemma_index.contains_key(&key) {
            return Err(format!("{:?} ({})", concept.lemma, concept.language));
        }
        self.lemma_index.insert(key, concept.id);
        self.concepts.insert(concept.id, concept);
        Ok(())
    }

    /// Adds a relation; returns `false` if the same tuple is already present.
    pub(crate) fn add_relation(&mut self, relation: InferentialRelation) -> bool {
        if self
            .outgoing
            .get(&relation.source)
            .is_some_and(|ids| ids.iter().any(|&i| self.relations[i] == relation))
        {
            return false;
        }
        let idx = self.relations.len();
        self.outgoing.entry(relation.source).or_default().push(idx);
        self.incoming.entry(relation.target).or_default().push(idx);
        self.relations.push(relation);
        true
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn concept(&self, id: ConceptId) -> Option<&Concept> {
        self.concepts.get(&id)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn relations(&self) -> &[InferentialRelation] {
        &self.relations
    }

    pub fn lookup(&self, lemma: &str, language: Language) -> Option<&Concept> {
        self.lemma_index
            .get(&(text::normalize(lemma), language))
            .and_then(|id| self.concepts.get(id))
    }

    fn require(&self, id: ConceptId) -> Result<&Concept, KbError> {
        self.concepts.get(&id).ok_or(KbError::UnknownConcept(id))
    }

    /// Ranks the concepts of `language` against a designer's expression.
    ///
    /// Exact lemma match scores 1.0, a match after normalization 0.9, and
    /// otherwise `0.8 × |shared tokens| / |token union|` when positive.
    /// Ties are broken by lemma then id; at most [`MAX_CANDIDATES`] are returned.
    pub fn characterize(&self, expression: &str, language: Language) -> Result<Vec<Candidate>, KbError> {
        if expression.trim().is_empty() {
            return Err(KbError::EmptyExpression);
        }
        let normalized = text::normalize(expression);
        let query_tokens = text::tokens(expression);
        let mut scored: Vec<(Candidate, &str)> = self
            .concepts
            .values()
            .filter(|c| c.language == language)
            .filter_map(|c| {
                let (score, match_kind) = if c.lemma == expression {
                    (1.0, MatchKind::Exact)
                } else if text::normalize(&c.lemma) == normalized {
                    (0.9, MatchKind::Normalized)
                } else {
                    let lemma_tokens = text::tokens(&c.lemma);
                    let shared = lemma_tokens.intersection(&query_tokens).count();
                    let union = lemma_tokens.union(&query_tokens).count();
                    if shared == 0 {
                        return None;
                    }
                    (0.8 * shared as f64 / union as f64, MatchKind::TokenOverlap)
                };
                Some((
                    Candidate {
                        concept_id: c.id,
                        score,
                        match_kind,
                    },
                    c.lemma.as_str(),
                ))
            })
            .collect();
        scored.sort_by(|(a, la), (b, lb)| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| la.cmp(lb))
                .then_with(|| a.concept_id.cmp(&b.concept_id))
        });
        scored.truncate(MAX_CANDIDATES);
        Ok(scored.into_iter().map(|(c, _)| c).collect())
    }

    /// Outgoing relations of a concept, optionally filtered, ordered by
    /// (name, target lemma).
    pub fn relations_of(
        &self,
        id: ConceptId,
        name: Option<&str>,
        polarity: Option<Polarity>,
    ) -> Result<Vec<&InferentialRelation>, KbError> {
        self.require(id)?;
        let name = name.map(canonical_relation_name);
        let mut out: Vec<&InferentialRelation> = self
            .outgoing
            .get(&id)
            .into_iter()
            .flatten()
            .map(|&i| &self.relations[i])
            .filter(|r| name.is_none_or(|n| r.name == n) && polarity.is_none_or(|p| r.polarity == p))
            .collect();
        out.sort_by(|a, b| {
            a.name
                .cmp(&b.name)
                .then_with(|| self.concepts[&a.target].lemma.cmp(&self.concepts[&b.target].lemma))
                .then_with(|| a.polarity.cmp(&b.polarity))
                .then_with(|| a.target.cmp(&b.target))
        });
        Ok(out)
    }

    /// Relations pointing at a concept.
    pub fn relations_into(&self, id: ConceptId) -> Result<Vec<&InferentialRelation>, KbError> {
        self.require(id)?;
        let mut out: Vec<&InferentialRelation> = self
            .incoming
            .get(&id)
            .into_iter()
            .flatten()
            .map(|&i| &self.relations[i])
            .collect();
        out.sort();
        Ok(out)
    }

    /// Breadth-first closure over outgoing relations up to `depth` hops.
    ///
    /// The seed is excluded. Each reached concept carries the relation of the
    /// first path that reached it; output is in discovery order (by depth,
    /// then by the `relations_of` order of the frontier).
    pub fn expand(&self, seed: ConceptId, depth: u8) -> Result<Vec<Expansion>, KbError> {
        self.require(seed)?;
        if !(1..=MAX_EXPANSION_DEPTH).contains(&depth) {
            return Err(KbError::DepthOutOfRange(depth));
        }
        let mut seen: BTreeSet<ConceptId> = BTreeSet::from([seed]);
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(seed, 0u8)]);
        while let Some((node, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for rel in self.relations_of(node, None, None)? {
                if seen.insert(rel.target) {
                    out.push(Expansion {
                        target: rel.target,
                        relation: rel.name.clone(),
                        polarity: rel.polarity,
                        depth: d + 1,
                    });
                    queue.push_back((rel.target, d + 1));
                }
            }
        }
        Ok(out)
    }

    /// IRI of a concept when the graph is published as RDF.
    pub fn concept_iri(base: &str, id: ConceptId) -> Iri {
        Iri::new_unchecked(vocab::join(base, &format!("concept/{id}")))
    }

    /// Publishes the graph as triples under `base`: one node per concept
    /// (lemma, language, external links) and one node per relation tuple.
    pub fn to_triples(&self, base: &str) -> Vec<Triple> {
        let v = vocab::Namespace::new(base);
        let rdf_type = Iri::new_unchecked(rdf::TYPE);
        let mut out = Vec::new();
        for c in self.concepts.values() {
            let iri = Self::concept_iri(base, c.id);
            out.push(Triple::from_iris(&iri, &rdf_type, v.term("Concept")));
            out.push(Triple::from_iris(
                &iri,
                &v.lemma(),
                Literal::lang(c.lemma.clone(), c.language.tag()).expect("valid tag"),
            ));
            for link in &c.external_links {
                out.push(Triple::from_iris(&iri, &v.external_link(), link.clone()));
            }
        }
        for r in &self.relations {
            let node = v.term(&format!(
                "relation/{}-{}-{}-{}",
                r.source, r.name, r.target, r.polarity
            ));
            out.push(Triple::from_iris(&node, &rdf_type, v.term("InferentialRelation")));
            out.push(Triple::from_iris(&node, &v.term("relationName"), Term::string(r.name.clone())));
            out.push(Triple::from_iris(&node, &v.term("source"), Self::concept_iri(base, r.source)));
            out.push(Triple::from_iris(&node, &v.term("target"), Self::concept_iri(base, r.target)));
            out.push(Triple::from_iris(&node, &v.term("polarity"), Term::string(r.polarity.to_string())));
        }
        out
    }
}
