//! Viewport-scoped linked-data search driven by knowledge-base expansion.
//!
//! A search expands the seed concept through its inferential relations,
//! asks every enabled source for resources `about` any external link of the
//! expanded concepts (falling back to label containment for resources that
//! carry no `about` link at all), filters by viewport and groups the result
//! by the concept that brought each resource in.

mod source;

pub use source::{FetchError, FetchFailure, FixtureRunner, LodSource, QueryRunner, RemoteRunner, SourceKind};

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::geo::{self, Viewport};
use crate::kb::{ConceptId, KbError, KnowledgeGraph, Polarity};
use crate::rdf::{Iri, Term};
use crate::sparql::QueryResults;
use crate::text;
use crate::vocab::lod;

pub const DIRECT_GROUP: &str = "direct";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);
pub const MAX_IN_FLIGHT: usize = 4;
/// Row cap for the label-fallback queries.
const FALLBACK_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LodResource {
    pub uri: Iri,
    pub label: String,
    pub source: String,
    pub matched_concept: ConceptId,
    pub matched_lemma: String,
    /// Relation that brought the concept in, or `"direct"` for the seed.
    pub relation: String,
    pub depth: u8,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub snippet: Option<String>,
    /// Set for resources kept without coordinates.
    pub unlocated: bool,
    pub distance_km: Option<f64>,
}

impl LodResource {
    fn coordinates(&self) -> Option<(f64, f64)> {
        self.lat.zip(self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultGroup {
    pub label: String,
    pub concept_id: ConceptId,
    pub relation: String,
    pub polarity: Option<Polarity>,
    pub depth: u8,
    pub resources: Vec<LodResource>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradedSource {
    pub name: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub concept_id: ConceptId,
    pub depth: u8,
    pub viewport: Option<Viewport>,
    pub groups: Vec<ResultGroup>,
    pub degraded_sources: Vec<DegradedSource>,
}

impl SearchResult {
    pub fn group(&self, label: &str) -> Option<&ResultGroup> {
        self.groups.iter().find(|g| g.label == label)
    }

    pub fn resources(&self) -> impl Iterator<Item = &LodResource> {
        self.groups.iter().flat_map(|g| g.resources.iter())
    }
}

#[derive(Debug, Error)]
pub enum LodError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("LOD source {name}: {message}")]
    Source { name: String, message: String },
}

/// How a fetched resource was matched.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchedBy {
    Link(Iri),
    /// The resource has no `about` link; its label contains this lemma.
    Label(String),
}

/// One row of a source's answer.
#[derive(Debug, Clone, PartialEq)]
pub struct FetchedResource {
    pub uri: Iri,
    pub label: String,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub snippet: Option<String>,
    pub matched_by: Vec<MatchedBy>,
}

fn about_query(link: &Iri, projection: &str, predicate: &str) -> String {
    format!(
        "SELECT ?r ?{projection} WHERE {{ ?r <{}> {link} . ?r <{predicate}> ?{projection} }}",
        lod::ABOUT
    )
}

fn single_value_query(resource: &Iri, predicate: &str) -> String {
    format!("SELECT ?v WHERE {{ {resource} <{predicate}> ?v }}")
}

fn pairs(results: &QueryResults, key: &str, value: &str) -> Vec<(Iri, Term)> {
    results
        .bindings
        .iter()
        .filter_map(|b| Some((b.get(key)?.as_iri()?.clone(), b.get(value)?.clone())))
        .collect()
}

fn literal_text(term: &Term) -> Option<String> {
    term.as_literal().map(|l| l.lexical().to_string())
}

fn number(term: &Term) -> Option<f64> {
    let lit = term.as_literal()?;
    lit.numeric_value().or_else(|| lit.lexical().trim().parse().ok())
}

#[derive(Default)]
struct Partial {
    label: Option<String>,
    lat: Option<f64>,
    lon: Option<f64>,
    snippet: Option<String>,
    matched_by: Vec<MatchedBy>,
}

impl Partial {
    fn keep_min<T: PartialOrd>(slot: &mut Option<T>, value: Option<T>) {
        if let Some(v) = value {
            if slot.as_ref().is_none_or(|cur| v < *cur) {
                *slot = Some(v);
            }
        }
    }
}

/// Runs the lookup queries against one source. `lemmas` drive the label
/// fallback for resources without any `about` link.
pub fn fetch_from_source(
    runner: &dyn QueryRunner,
    links: &[Iri],
    lemmas: &[String],
) -> Result<Vec<FetchedResource>, FetchFailure> {
    let mut found: BTreeMap<Iri, Partial> = BTreeMap::new();
    for link in links {
        let labels = runner.select(&about_query(link, "label", lod::LABEL))?;
        for (uri, label) in pairs(&labels, "r", "label") {
            let entry = found.entry(uri).or_default();
            Partial::keep_min(&mut entry.label, literal_text(&label));
            if !entry.matched_by.contains(&MatchedBy::Link(link.clone())) {
                entry.matched_by.push(MatchedBy::Link(link.clone()));
            }
        }
        for (predicate, var) in [(lod::LAT, "lat"), (lod::LON, "lon"), (lod::SNIPPET, "snippet")] {
            let rows = runner.select(&about_query(link, var, predicate))?;
            for (uri, value) in pairs(&rows, "r", var) {
                let Some(entry) = found.get_mut(&uri) else {
                    continue;
                };
                match var {
                    "lat" => Partial::keep_min(&mut entry.lat, number(&value)),
                    "lon" => Partial::keep_min(&mut entry.lon, number(&value)),
                    _ => Partial::keep_min(&mut entry.snippet, literal_text(&value)),
                }
            }
        }
    }

    if !lemmas.is_empty() {
        let normalized: Vec<(String, &String)> = lemmas.iter().map(|l| (text::normalize(l), l)).collect();
        let all_labels = runner.select(&format!(
            "SELECT ?r ?label WHERE {{ ?r <{}> ?label }} LIMIT {FALLBACK_LIMIT}",
            lod::LABEL
        ))?;
        let linked = runner.select(&format!(
            "SELECT ?r WHERE {{ ?r <{}> ?c }} LIMIT {FALLBACK_LIMIT}",
            lod::ABOUT
        ))?;
        let linked: std::collections::HashSet<Iri> = linked
            .bindings
            .iter()
            .filter_map(|b| b.get("r")?.as_iri().cloned())
            .collect();
        for (uri, label) in pairs(&all_labels, "r", "label") {
            if linked.contains(&uri) {
                continue;
            }
            let Some(label) = literal_text(&label) else {
                continue;
            };
            let haystack = text::normalize(&label);
            for (needle, lemma) in &normalized {
                if !needle.is_empty() && haystack.contains(needle.as_str()) {
                    let entry = found.entry(uri.clone()).or_default();
                    Partial::keep_min(&mut entry.label, Some(label.clone()));
                    let m = MatchedBy::Label((*lemma).clone());
                    if !entry.matched_by.contains(&m) {
                        entry.matched_by.push(m);
                    }
                }
            }
        }
        let fallback: Vec<Iri> = found
            .iter()
            .filter(|(_, p)| p.matched_by.iter().all(|m| matches!(m, MatchedBy::Label(_))))
            .map(|(uri, _)| uri.clone())
            .collect();
        for uri in fallback {
            let first = |predicate: &str| -> Result<Option<Term>, FetchFailure> {
                let rows = runner.select(&single_value_query(&uri, predicate))?;
                Ok(rows.bindings.iter().filter_map(|b| b.get("v").cloned()).min())
            };
            let lat = first(lod::LAT)?.as_ref().and_then(number);
            let lon = first(lod::LON)?.as_ref().and_then(number);
            let snippet = first(lod::SNIPPET)?.as_ref().and_then(literal_text);
            let entry = found.get_mut(&uri).expect("collected above");
            entry.lat = lat;
            entry.lon = lon;
            entry.snippet = snippet;
        }
    }

    Ok(found
        .into_iter()
        .map(|(uri, p)| {
            let (lat, lon) = match (p.lat, p.lon) {
                (Some(lat), Some(lon)) if geo::check_latitude(lat).is_ok() && geo::check_longitude(lon).is_ok() => {
                    (Some(lat), Some(lon))
                }
                (None, None) => (None, None),
                _ => {
                    tracing::debug!(%uri, "dropping incomplete or out-of-range coordinates");
                    (None, None)
                }
            };
            let mut matched_by = p.matched_by;
            matched_by.sort();
            FetchedResource {
                label: p.label.unwrap_or_else(|| uri.as_str().to_string()),
                uri,
                lat,
                lon,
                snippet: p.snippet,
                matched_by,
            }
        })
        .collect())
}

/// Sorts located resources by distance from `center` (lat, lon); resources
/// without coordinates follow in their input order.
pub fn geo_sort(mut resources: Vec<LodResource>, center: (f64, f64)) -> Vec<LodResource> {
    for r in &mut resources {
        r.distance_km = r.coordinates().map(|(lat, lon)| geo::distance_km(center.0, center.1, lat, lon));
    }
    resources.sort_by(|a, b| match (a.distance_km, b.distance_km) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    resources
}

/// One member of the expansion set, in group order.
struct Target<'a> {
    concept: ConceptId,
    lemma: &'a str,
    links: &'a [Iri],
    relation: String,
    polarity: Option<Polarity>,
    depth: u8,
}

struct Configured {
    source: LodSource,
    runner: Arc<dyn QueryRunner>,
}

/// The search service over a fixed list of sources.
#[derive(Clone)]
pub struct LodService {
    sources: Arc<Vec<Configured>>,
}

impl std::fmt::Debug for LodService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.sources.iter().map(|c| &c.source)).finish()
    }
}

impl LodService {
    /// Builds runners for the configured sources. Enabled fixture sources
    /// must be readable now.
    pub fn new(sources: Vec<LodSource>, timeout: Duration) -> Result<Self, LodError> {
        let mut configured = Vec::new();
        for source in sources {
            let runner: Arc<dyn QueryRunner> = match &source.kind {
                SourceKind::Fixture(path) => {
                    let runner = FixtureRunner::new(path.clone());
                    if source.enabled {
                        runner.check().map_err(|e| LodError::Source {
                            name: source.name.clone(),
                            message: e.to_string(),
                        })?;
                    }
                    Arc::new(runner)
                }
                SourceKind::Remote(endpoint) => Arc::new(RemoteRunner::new(endpoint.clone(), timeout)),
            };
            configured.push(Configured { source, runner });
        }
        Ok(LodService {
            sources: Arc::new(configured),
        })
    }

    /// A service over caller-supplied runners (always enabled).
    pub fn from_runners(runners: Vec<(String, Arc<dyn QueryRunner>)>) -> Self {
        let sources = runners
            .into_iter()
            .map(|(name, runner)| Configured {
                source: LodSource {
                    name,
                    kind: SourceKind::Remote(String::new()),
                    enabled: true,
                },
                runner,
            })
            .collect();
        LodService {
            sources: Arc::new(sources),
        }
    }

    pub fn sources(&self) -> impl Iterator<Item = &LodSource> {
        self.sources.iter().map(|c| &c.source)
    }

    pub fn search(
        &self,
        kb: &KnowledgeGraph,
        concept: ConceptId,
        viewport: Option<Viewport>,
        depth: u8,
    ) -> Result<SearchResult, LodError> {
        let seed = kb.concept(concept).ok_or(KbError::UnknownConcept(concept))?;
        let expansion = kb.expand(concept, depth)?;
        let mut targets = vec![Target {
            concept,
            lemma: &seed.lemma,
            links: &seed.external_links,
            relation: DIRECT_GROUP.to_string(),
            polarity: None,
            depth: 0,
        }];
        for e in &expansion {
            let c = kb.concept(e.target).expect("expansion targets exist");
            targets.push(Target {
                concept: e.target,
                lemma: &c.lemma,
                links: &c.external_links,
                relation: e.relation.clone(),
                polarity: Some(e.polarity),
                depth: e.depth,
            });
        }
        let mut links: Vec<Iri> = targets.iter().flat_map(|t| t.links.iter().cloned()).collect();
        links.sort();
        links.dedup();
        let lemmas: Vec<String> = targets.iter().map(|t| t.lemma.to_string()).collect();

        let enabled: Vec<&Configured> = self.sources.iter().filter(|c| c.source.enabled).collect();
        let mut outcomes: Vec<Result<Vec<FetchedResource>, FetchFailure>> = Vec::new();
        for chunk in enabled.chunks(MAX_IN_FLIGHT) {
            let results: Vec<_> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|c| scope.spawn(|| fetch_from_source(c.runner.as_ref(), &links, &lemmas)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(FetchFailure::Unavailable("worker panicked".into()))))
                    .collect()
            });
            outcomes.extend(results);
        }

        let target_by_link: HashMap<&Iri, usize> = {
            let mut map = HashMap::new();
            for (i, t) in targets.iter().enumerate() {
                for link in t.links {
                    map.entry(link).or_insert(i);
                }
            }
            map
        };
        let target_by_lemma: HashMap<&str, usize> = {
            let mut map = HashMap::new();
            for (i, t) in targets.iter().enumerate() {
                map.entry(t.lemma).or_insert(i);
            }
            map
        };

        // uri -> (target index, source order, resource)
        let mut best: BTreeMap<Iri, (usize, usize, FetchedResource, &str)> = BTreeMap::new();
        let mut degraded = Vec::new();
        for (order, (configured, outcome)) in enabled.iter().zip(outcomes).enumerate() {
            let name = configured.source.name.as_str();
            let fetched = match outcome {
                Ok(fetched) => fetched,
                Err(failure) => {
                    let error = FetchError {
                        source_name: name.to_string(),
                        failure,
                    };
                    tracing::warn!(%error, "LOD source degraded");
                    degraded.push(DegradedSource {
                        name: name.to_string(),
                        error: error.failure.to_string(),
                    });
                    continue;
                }
            };
            for resource in fetched {
                let target = resource
                    .matched_by
                    .iter()
                    .filter_map(|m| match m {
                        MatchedBy::Link(link) => target_by_link.get(link).copied(),
                        MatchedBy::Label(lemma) => target_by_lemma.get(lemma.as_str()).copied(),
                    })
                    .min();
                let Some(target) = target else {
                    continue;
                };
                let replace = best
                    .get(&resource.uri)
                    .is_none_or(|(t, o, _, _)| (target, order) < (*t, *o));
                if replace {
                    best.insert(resource.uri.clone(), (target, order, resource, name));
                }
            }
        }

        let mut grouped: Vec<Vec<LodResource>> = vec![Vec::new(); targets.len()];
        for (_, (target, _, r, source)) in best {
            let located = r.lat.is_some() && r.lon.is_some();
            if let (Some(v), true) = (&viewport, located) {
                if !v.contains(r.lat.expect("located"), r.lon.expect("located")) {
                    continue;
                }
            }
            let t = &targets[target];
            grouped[target].push(LodResource {
                uri: r.uri,
                label: r.label,
                source: source.to_string(),
                matched_concept: t.concept,
                matched_lemma: t.lemma.to_string(),
                relation: t.relation.clone(),
                depth: t.depth,
                lat: r.lat,
                lon: r.lon,
                snippet: r.snippet,
                unlocated: !located,
                distance_km: None,
            });
        }

        let groups = targets
            .iter()
            .zip(grouped)
            .map(|(t, resources)| {
                let resources = match &viewport {
                    Some(v) => geo_sort(resources, v.center()),
                    None => resources,
                };
                ResultGroup {
                    label: if t.depth == 0 {
                        DIRECT_GROUP.to_string()
                    } else {
                        t.lemma.to_string()
                    },
                    concept_id: t.concept,
                    relation: t.relation.clone(),
                    polarity: t.polarity,
                    depth: t.depth,
                    resources,
                }
            })
            .collect();
        Ok(SearchResult {
            concept_id: concept,
            depth,
            viewport,
            groups,
            degraded_sources: degraded,
        })
    }
}
