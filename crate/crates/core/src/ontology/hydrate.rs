use std::collections::HashMap;

use chrono::DateTime;

use super::*;

type Result<T> = std::result::Result<T, OntologyError>;

fn broken(message: impl Into<String>) -> OntologyError {
    OntologyError::Hydration(message.into())
}

struct Reader<'a> {
    ns: &'a Namespace,
    store: &'a TripleStore,
}

impl Reader<'_> {
    fn subjects_of_type(&self, class: Iri) -> Vec<Iri> {
        self.store
            .matching(None, Some(&Iri::new_unchecked(rdf::TYPE).into()), Some(&class.into()))
            .into_iter()
            .filter_map(|t| t.subject.as_iri().cloned())
            .collect()
    }

    fn objects(&self, subject: &Iri, predicate: Iri) -> Vec<Term> {
        self.store
            .matching(Some(&subject.clone().into()), Some(&predicate.into()), None)
            .into_iter()
            .map(|t| t.object)
            .collect()
    }

    fn object(&self, subject: &Iri, predicate: Iri) -> Result<Term> {
        let what = predicate.as_str().to_string();
        let mut found = self.objects(subject, predicate);
        match found.len() {
            1 => Ok(found.pop().expect("one")),
            n => Err(broken(format!("{subject} has {n} values for <{what}>, expected 1"))),
        }
    }

    fn iri(&self, subject: &Iri, predicate: Iri) -> Result<Iri> {
        match self.object(subject, predicate)? {
            Term::Iri(iri) => Ok(iri),
            other => Err(broken(format!("{subject}: expected an IRI, found {other}"))),
        }
    }

    fn text(&self, subject: &Iri, predicate: Iri) -> Result<String> {
        match self.object(subject, predicate)? {
            Term::Literal(lit) => Ok(lit.lexical().to_string()),
            other => Err(broken(format!("{subject}: expected a literal, found {other}"))),
        }
    }

    fn number<T: FromStr>(&self, subject: &Iri, predicate: Iri) -> Result<T> {
        let text = self.text(subject, predicate)?;
        text.parse()
            .map_err(|_| broken(format!("{subject}: {text:?} is not a number")))
    }

    /// Numeric id of a minted IRI `<base><kind>/<id>`.
    fn id(&self, iri: &Iri, kind: &str) -> Result<u64> {
        let prefix = self.ns.term(&format!("{kind}/"));
        iri.as_str()
            .strip_prefix(prefix.as_str())
            .and_then(|rest| rest.parse().ok())
            .ok_or_else(|| broken(format!("{iri} is not a minted {kind} IRI")))
    }
}

impl Ontology {
    /// Rebuilds the registry from a store produced by this module (for
    /// instance a reloaded Turtle snapshot). Triples that do not describe
    /// registry entities are kept as they are.
    pub fn hydrate(base: &str, reliability: ReliabilityTable, store: TripleStore) -> Result<Self> {
        let mut out = Ontology::new(base, reliability);
        let ns = out.ns.clone();
        let r = Reader { ns: &ns, store: &store };

        for iri in r.subjects_of_type(ns.wiki_user()) {
            let id = r.id(&iri, "user")?;
            let friends = r
                .objects(&iri, ns.knows())
                .iter()
                .filter_map(Term::as_iri)
                .map(|f| r.id(f, "user"))
                .collect::<Result<_>>()?;
            let display_name = r.text(&iri, ns.name())?;
            out.users.insert(
                id,
                WikiUser {
                    id,
                    iri,
                    display_name,
                    friends,
                },
            );
        }

        for iri in r.subjects_of_type(ns.wiki_user_account()) {
            let id = r.id(&iri, "account")?;
            let user_id = r.id(&r.iri(&iri, ns.account_of())?, "user")?;
            if !out.users.contains_key(&user_id) {
                return Err(broken(format!("{iri} belongs to a missing user")));
            }
            let login = r.text(&iri, ns.login())?;
            let reputation = r.number(&iri, ns.reputation())?;
            out.logins.insert(login.clone(), id);
            out.accounts.insert(
                id,
                WikiUserAccount {
                    id,
                    iri,
                    login,
                    user_id,
                    reputation,
                },
            );
        }

        let mut class_ids: HashMap<Iri, u64> = HashMap::new();
        for iri in r.subjects_of_type(ns.crowd_map()) {
            let id = r.id(&iri, "map")?;
            let owner = r.id(&r.iri(&iri, ns.owner())?, "account")?;
            let viewport = Viewport::new(
                r.number(&iri, ns.west())?,
                r.number(&iri, ns.south())?,
                r.number(&iri, ns.east())?,
                r.number(&iri, ns.north())?,
            )?;
            let mut classes = BTreeSet::new();
            for class_iri in r.objects(&iri, ns.has_class()) {
                let Term::Iri(class_iri) = class_iri else {
                    return Err(broken(format!("{iri} has a non-IRI class")));
                };
                let class = read_class(&r, class_iri, id)?;
                class_ids.insert(class.class_iri.clone(), class.id);
                classes.insert(class.id);
                out.classes.insert(class.id, class);
            }
            let title = r.text(&iri, ns.title())?;
            out.maps.insert(
                id,
                CrowdMap {
                    id,
                    iri,
                    title,
                    owner,
                    viewport,
                    classes,
                },
            );
        }

        for map in out.maps.values() {
            for marker_iri in r.objects(&map.iri, ns.has_marker()) {
                let Term::Iri(iri) = marker_iri else {
                    return Err(broken(format!("{} has a non-IRI marker", map.iri)));
                };
                let id = r.id(&iri, "marker")?;
                let class_iri = r.iri(&iri, ns.topic())?;
                let class_id = *class_ids
                    .get(&class_iri)
                    .ok_or_else(|| broken(format!("{iri} refers to unknown class {class_iri}")))?;
                let created = r.text(&iri, ns.created())?;
                let created = DateTime::parse_from_rfc3339(&created)
                    .map_err(|e| broken(format!("{iri}: bad timestamp {created:?}: {e}")))?
                    .with_timezone(&Utc);
                let prov = ns.term(&format!("provenance/{id}"));
                let source_type = r.text(&prov, ns.source_type())?;
                let provenance = Provenance {
                    source_type: source_type.parse().map_err(broken)?,
                    reliability: r.number(&prov, ns.reliability())?,
                    confirmations: r.number(&prov, ns.confirmations())?,
                    refutations: r.number(&prov, ns.refutations())?,
                };
                let record = MarkerRecord {
                    id,
                    map_id: map.id,
                    class_id,
                    creator: r.id(&r.iri(&iri, ns.has_creator())?, "account")?,
                    lat: r.number(&iri, ns.lat())?,
                    lon: r.number(&iri, ns.lon())?,
                    created,
                    description: r.text(&iri, ns.description())?,
                    provenance,
                    iri,
                };
                out.markers.insert(id, record);
            }
        }

        for iri in r.subjects_of_type(ns.vote_class()) {
            let marker = r.id(&r.iri(&iri, ns.vote_on())?, "marker")?;
            let account = r.id(&r.iri(&iri, ns.voter())?, "account")?;
            let verdict = match r.text(&iri, ns.verdict())?.as_str() {
                "confirm" => Verdict::Confirm,
                "refute" => Verdict::Refute,
                other => return Err(broken(format!("{iri}: unknown verdict {other:?}"))),
            };
            out.votes.insert((marker, account), verdict);
        }

        out.store = store;
        Ok(out)
    }
}

fn read_class(r: &Reader<'_>, iri: Iri, map_id: u64) -> Result<ConceptClass> {
    let ns = r.ns;
    let id = iri
        .as_str()
        .strip_prefix(ns.term("class/").as_str())
        .and_then(|rest| rest.rsplit('-').next())
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| broken(format!("{iri} is not a minted class IRI")))?;
    let parent = r.iri(&iri, Iri::new_unchecked(rdfs::SUB_CLASS_OF))?;
    let top_class = TopClass::ALL
        .into_iter()
        .find(|t| t.iri(ns) == parent)
        .ok_or_else(|| broken(format!("{iri} is not a subclass of a top class")))?;
    let mut external_links: Vec<Iri> = r
        .objects(&iri, ns.links_to_concept())
        .into_iter()
        .filter_map(|t| t.as_iri().cloned())
        .collect();
    external_links.sort();
    Ok(ConceptClass {
        id,
        label: r.text(&iri, Iri::new_unchecked(rdfs::LABEL))?,
        top_class,
        kb_concept_id: ConceptId(r.number(&iri, ns.kb_concept())?),
        map_id,
        external_links,
        class_iri: iri,
    })
}
