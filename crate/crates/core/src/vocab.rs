//! IRI constants for the standard vocabularies and the platform namespace.

use crate::rdf::Iri;

pub const DEFAULT_BASE: &str = "http://semaps.example/ns#";

pub mod rdf {
    pub const NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod rdfs {
    pub const NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const SUB_CLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
}

pub mod owl {
    pub const NS: &str = "http://www.w3.org/2002/07/owl#";
    pub const CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
}

pub mod xsd {
    pub const NS: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

    const NUMERIC_LOCAL: &[&str] = &[
        "integer",
        "decimal",
        "double",
        "float",
        "int",
        "long",
        "short",
        "byte",
        "nonNegativeInteger",
        "nonPositiveInteger",
        "positiveInteger",
        "negativeInteger",
        "unsignedInt",
        "unsignedLong",
        "unsignedShort",
        "unsignedByte",
    ];

    pub fn is_numeric(datatype: &str) -> bool {
        datatype
            .strip_prefix(NS)
            .is_some_and(|local| NUMERIC_LOCAL.contains(&local))
    }
}

/// Vocabulary of the linked-data fixture datasets and remote sources.
pub mod lod {
    pub const NS: &str = "http://semaps.example/lod#";
    pub const ABOUT: &str = "http://semaps.example/lod#about";
    pub const LABEL: &str = "http://semaps.example/lod#label";
    pub const LAT: &str = "http://semaps.example/lod#lat";
    pub const LON: &str = "http://semaps.example/lod#lon";
    pub const SNIPPET: &str = "http://semaps.example/lod#snippet";
    pub const SOURCE: &str = "http://semaps.example/lod#source";
}

/// Appends `path` to a namespace, inserting `/` unless the namespace already
/// ends with `#` or `/`.
pub fn join(base: &str, path: &str) -> String {
    if base.ends_with('#') || base.ends_with('/') {
        format!("{base}{path}")
    } else {
        format!("{base}/{path}")
    }
}

/// Platform-namespace terms, derived from the configured base namespace.
#[derive(Debug, Clone)]
pub struct Namespace {
    base: String,
}

macro_rules! platform_terms {
    ($($name:ident => $local:literal),* $(,)?) => {
        impl Namespace {
            $(
                pub fn $name(&self) -> Iri {
                    self.term($local)
                }
            )*
        }
    };
}

impl Namespace {
    pub fn new(base: impl Into<String>) -> Self {
        Namespace { base: base.into() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn term(&self, path: &str) -> Iri {
        Iri::new_unchecked(join(&self.base, path))
    }
}

platform_terms! {
    crowd_map => "CrowdMap",
    marker_class => "Marker",
    provenance_class => "Provenance",
    vote_class => "Vote",
    wiki_user => "WikiUser",
    wiki_user_account => "WikiUserAccount",
    has_creator => "hasCreator",
    topic => "topic",
    lat => "lat",
    lon => "lon",
    created => "created",
    description => "description",
    links_to_concept => "linksToConcept",
    kb_concept => "kbConcept",
    title => "title",
    owner => "owner",
    west => "west",
    south => "south",
    east => "east",
    north => "north",
    has_class => "hasClass",
    has_marker => "hasMarker",
    provenance_of => "provenanceOf",
    source_type => "sourceType",
    reliability => "reliability",
    confirmations => "confirmations",
    refutations => "refutations",
    vote_on => "voteOn",
    voter => "voter",
    verdict => "verdict",
    name => "name",
    knows => "knows",
    login => "login",
    account_of => "accountOf",
    reputation => "reputation",
    lemma => "lemma",
    language => "language",
    external_link => "externalLink",
}
