//! Independent reference computations over the raw fixture files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use semaps_core::rdf::Term;
use semaps_core::turtle::parse_turtle;

/// Haversine distance in km on a sphere of radius 6371 km.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6371.0 * a.sqrt().asin()
}

#[derive(Debug, Clone)]
pub struct RawConcept {
    pub id: u64,
    pub lemma: String,
    pub lang: String,
    pub links: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RawRelation {
    pub name: String,
    pub source: String,
    pub target: String,
    pub polarity: String,
    pub lang: String,
}

fn data_lines(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#') && !l.starts_with('!'))
        .map(|l| l.split('\t').map(|f| f.trim().to_string()).collect())
        .collect()
}

pub fn raw_concepts(kb_dir: &Path) -> Vec<RawConcept> {
    data_lines(&kb_dir.join("concepts.tsv"))
        .into_iter()
        .map(|r| RawConcept {
            id: r[0].parse().unwrap(),
            lemma: r[1].clone(),
            lang: r[2].clone(),
            links: r
                .get(3)
                .map(|l| l.split(';').filter(|x| !x.is_empty()).map(str::to_string).collect())
                .unwrap_or_default(),
        })
        .collect()
}

pub fn raw_relations(kb_dir: &Path) -> Vec<RawRelation> {
    data_lines(&kb_dir.join("relations.tsv"))
        .into_iter()
        .map(|r| RawRelation {
            name: r[0].clone(),
            source: r[1].clone(),
            target: r[2].clone(),
            polarity: r[3].clone(),
            lang: r[4].clone(),
        })
        .collect()
}

/// One expansion target: group label, lemma and external links.
#[derive(Debug, Clone)]
pub struct Target {
    pub label: String,
    pub lemma: String,
    pub links: Vec<String>,
}

/// The seed plus its one-hop neighbours, read straight from the TSV files.
pub fn one_hop_targets(kb_dir: &Path, lemma: &str, lang: &str) -> Vec<Target> {
    let concepts = raw_concepts(kb_dir);
    let find = |l: &str| concepts.iter().find(|c| c.lemma == l && c.lang == lang).unwrap().clone();
    let seed = find(lemma);
    let mut out = vec![Target {
        label: "direct".into(),
        lemma: seed.lemma.clone(),
        links: seed.links.clone(),
    }];
    for r in raw_relations(kb_dir) {
        if r.source == lemma && r.lang == lang && !out.iter().any(|t| t.lemma == r.target) {
            let c = find(&r.target);
            out.push(Target {
                label: c.lemma.clone(),
                lemma: c.lemma,
                links: c.links,
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct LodItem {
    pub uri: String,
    pub about: Vec<String>,
    pub label: Option<String>,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

const LOD: &str = "http://semaps.example/lod#";

/// Every subject of a fixture dataset that has a label or an `about` link.
pub fn lod_items(file: &Path) -> Vec<LodItem> {
    let text = std::fs::read_to_string(file).unwrap();
    let mut by_subject: BTreeMap<String, LodItem> = BTreeMap::new();
    for t in parse_turtle(&text, "http://fixture.example/").unwrap() {
        let Term::Iri(s) = &t.subject else { continue };
        let item = by_subject.entry(s.as_str().to_string()).or_insert_with(|| LodItem {
            uri: s.as_str().to_string(),
            about: vec![],
            label: None,
            lat: None,
            lon: None,
        });
        let value = t.object.lexical_form().to_string();
        match t.predicate.lexical_form().strip_prefix(LOD) {
            Some("about") => item.about.push(value),
            Some("label") => item.label = Some(value),
            Some("lat") => item.lat = value.parse().ok(),
            Some("lon") => item.lon = value.parse().ok(),
            _ => {}
        }
    }
    by_subject
        .into_values()
        .filter(|i| i.label.is_some() || !i.about.is_empty())
        .collect()
}

fn fold(text: &str) -> String {
    text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Expected group membership by linear scan: each resource goes to the first
/// target it is linked to (or, with no links at all, whose lemma its label
/// contains); located resources outside `bbox` (west, south, east, north) are
/// dropped, unlocated ones kept.
pub fn expected_groups(
    sources: &[&Path],
    targets: &[Target],
    bbox: Option<(f64, f64, f64, f64)>,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut best: BTreeMap<String, (usize, usize, LodItem)> = BTreeMap::new();
    for (order, file) in sources.iter().enumerate() {
        for item in lod_items(file) {
            let target = if item.about.is_empty() {
                let label = fold(item.label.as_deref().unwrap_or(""));
                targets.iter().position(|t| label.contains(&fold(&t.lemma)))
            } else {
                targets.iter().position(|t| t.links.iter().any(|l| item.about.contains(l)))
            };
            let Some(target) = target else { continue };
            let replace = best.get(&item.uri).is_none_or(|(t, o, _)| (target, order) < (*t, *o));
            if replace {
                best.insert(item.uri.clone(), (target, order, item));
            }
        }
    }
    let mut out: BTreeMap<String, BTreeSet<String>> =
        targets.iter().map(|t| (t.label.clone(), BTreeSet::new())).collect();
    for (uri, (target, _, item)) in best {
        if let (Some((w, s, e, n)), Some(lat), Some(lon)) = (bbox, item.lat, item.lon) {
            if !(lat >= s && lat <= n && lon >= w && lon <= e) {
                continue;
            }
        }
        out.get_mut(&targets[target].label).unwrap().insert(uri);
    }
    out
}
