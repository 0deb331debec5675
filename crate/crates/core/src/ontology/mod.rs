//! Crowd maps, on-demand concept classes, markers with provenance, users and
//! accounts. Every mutation is materialized as triples in the platform store;
//! the in-memory registry is an index over those triples and can be rebuilt
//! from them with [`Ontology::hydrate`].

mod hydrate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{self, GeoError, Viewport};
use crate::kb::ConceptId;
use crate::rdf::{Iri, Literal, StoreError, Term, Triple, TripleStore};
use crate::text;
use crate::vocab::{owl, rdf, rdfs, xsd, Namespace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TopClass {
    Person,
    Organization,
    Event,
    Complaint,
    ArtisticProduction,
    Building,
    CommercialEstablishment,
}

impl TopClass {
    pub const ALL: [TopClass; 7] = [
        TopClass::Person,
        TopClass::Organization,
        TopClass::Event,
        TopClass::Complaint,
        TopClass::ArtisticProduction,
        TopClass::Building,
        TopClass::CommercialEstablishment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopClass::Person => "Person",
            TopClass::Organization => "Organization",
            TopClass::Event => "Event",
            TopClass::Complaint => "Complaint",
            TopClass::ArtisticProduction => "ArtisticProduction",
            TopClass::Building => "Building",
            TopClass::CommercialEstablishment => "CommercialEstablishment",
        }
    }

    pub fn iri(self, ns: &Namespace) -> Iri {
        ns.term(&format!("top/{}", self.name()))
    }
}

impl FromStr for TopClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TopClass::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown top class {s:?}"))
    }
}

impl fmt::Display for TopClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceType {
    DirectWitness,
    SecondHand,
    OfficialRecord,
    MediaReport,
    Anonymous,
}

impl SourceType {
    pub const ALL: [SourceType; 5] = [
        SourceType::DirectWitness,
        SourceType::SecondHand,
        SourceType::OfficialRecord,
        SourceType::MediaReport,
        SourceType::Anonymous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceType::DirectWitness => "DirectWitness",
            SourceType::SecondHand => "SecondHand",
            SourceType::OfficialRecord => "OfficialRecord",
            SourceType::MediaReport => "MediaReport",
            SourceType::Anonymous => "Anonymous",
        }
    }

    fn default_reliability(self) -> f64 {
        match self {
            SourceType::DirectWitness => 0.8,
            SourceType::SecondHand => 0.4,
            SourceType::OfficialRecord => 0.9,
            SourceType::MediaReport => 0.6,
            SourceType::Anonymous => 0.2,
        }
    }
}

impl FromStr for SourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown source type {s:?}"))
    }
}

impl fmt::Display for SourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Base reliability assigned to a new marker by source type.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityTable(BTreeMap<SourceType, f64>);

impl Default for ReliabilityTable {
    fn default() -> Self {
        ReliabilityTable(SourceType::ALL.into_iter().map(|s| (s, s.default_reliability())).collect())
    }
}

impl ReliabilityTable {
    pub fn with_override(mut self, source: SourceType, value: f64) -> Result<Self, OntologyError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(OntologyError::invalid(
                "reliability",
                format!("{source} reliability {value} is outside [0, 1]"),
            ));
        }
        self.0.insert(source, value);
        Ok(self)
    }

    pub fn get(&self, source: SourceType) -> f64 {
        self.0[&source]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Confirm,
    Refute,
}

impl Verdict {
    fn name(self) -> &'static str {
        match self {
            Verdict::Confirm => "confirm",
            Verdict::Refute => "refute",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptClass {
    pub id: u64,
    pub class_iri: Iri,
    pub label: String,
    pub top_class: TopClass,
    pub kb_concept_id: ConceptId,
    pub map_id: u64,
    pub external_links: Vec<Iri>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_type: SourceType,
    pub reliability: f64,
    pub confirmations: u64,
    pub refutations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerRecord {
    pub id: u64,
    pub iri: Iri,
    pub map_id: u64,
    pub class_id: u64,
    pub creator: u64,
    pub lat: f64,
    pub lon: f64,
    pub created: DateTime<Utc>,
    pub description: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WikiUser {
    pub id: u64,
    pub iri: Iri,
    pub display_name: String,
    pub friends: BTreeSet<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WikiUserAccount {
    pub id: u64,
    pub iri: Iri,
    pub login: String,
    pub user_id: u64,
    pub reputation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrowdMap {
    pub id: u64,
    pub iri: Iri,
    pub title: String,
    pub owner: u64,
    pub viewport: Viewport,
    pub classes: BTreeSet<u64>,
}

/// Result of a vote: the marker's updated provenance and its creator's reputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteOutcome {
    pub marker_id: u64,
    pub provenance: Provenance,
    pub creator: u64,
    pub reputation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Map,
    Class,
    Marker,
    Account,
    User,
    KbConcept,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Map => "map",
            EntityKind::Class => "concept class",
            EntityKind::Marker => "marker",
            EntityKind::Account => "account",
            EntityKind::User => "user",
            EntityKind::KbConcept => "knowledge-base concept",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OntologyError {
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("unknown {kind} {id}")]
    NotFound { kind: EntityKind, id: u64 },
    #[error("map {map} already has a class labelled {label:?}")]
    DuplicateLabel { map: u64, label: String },
    #[error("login {0:?} is already taken")]
    DuplicateLogin(String),
    #[error("account {account} already voted on marker {marker}")]
    DuplicateVote { marker: u64, account: u64 },
    #[error("account {0} cannot vote on its own marker")]
    SelfVote(u64),
    #[error("user {0} cannot befriend themselves")]
    SelfFriendship(u64),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("store does not describe a consistent registry: {0}")]
    Hydration(String),
}

impl OntologyError {
    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        OntologyError::Invalid {
            field,
            message: message.into(),
        }
    }
}

/// Laplace-smoothed confirmation ratio over all of a creator's markers.
pub fn reputation(confirmations: u64, refutations: u64) -> f64 {
    (1.0 + confirmations as f64) / (2.0 + confirmations as f64 + refutations as f64)
}

fn decimal(value: f64) -> Term {
    Literal::decimal(value).into()
}

fn timestamp_literal(at: &DateTime<Utc>) -> Term {
    Literal::typed(
        at.to_rfc3339_opts(SecondsFormat::Millis, true),
        Iri::new_unchecked(xsd::DATE_TIME),
    )
    .into()
}

/// The ontology registry bound to its backing store.
#[derive(Debug, Clone)]
pub struct Ontology {
    ns: Namespace,
    store: TripleStore,
    reliability: ReliabilityTable,
    maps: BTreeMap<u64, CrowdMap>,
    classes: BTreeMap<u64, ConceptClass>,
    markers: BTreeMap<u64, MarkerRecord>,
    users: BTreeMap<u64, WikiUser>,
    accounts: BTreeMap<u64, WikiUserAccount>,
    logins: HashMap<String, u64>,
    votes: BTreeMap<(u64, u64), Verdict>,
}

impl Ontology {
    pub fn new(base: &str, reliability: ReliabilityTable) -> Self {
        Ontology {
            ns: Namespace::new(base),
            store: TripleStore::new(),
            reliability,
            maps: BTreeMap::new(),
            classes: BTreeMap::new(),
            markers: BTreeMap::new(),
            users: BTreeMap::new(),
            accounts: BTreeMap::new(),
            logins: HashMap::new(),
            votes: BTreeMap::new(),
        }
    }

    pub fn namespace(&self) -> &Namespace {
        &self.ns
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }

    /// Adds triples that are not registry entities (imports, published KB).
    pub fn import<I: IntoIterator<Item = Triple>>(&mut self, triples: I) -> Result<usize, OntologyError> {
        Ok(self.store.load_document(triples)?)
    }

    pub fn map(&self, id: u64) -> Result<&CrowdMap, OntologyError> {
        self.maps.get(&id).ok_or(OntologyError::NotFound {
            kind: EntityKind::Map,
            id,
        })
    }

    pub fn class(&self, id: u64) -> Result<&ConceptClass, OntologyError> {
        self.classes.get(&id).ok_or(OntologyError::NotFound {
            kind: EntityKind::Class,
            id,
        })
    }

    pub fn marker(&self, id: u64) -> Result<&MarkerRecord, OntologyError> {
        self.markers.get(&id).ok_or(OntologyError::NotFound {
            kind: EntityKind::Marker,
            id,
        })
    }

    pub fn account(&self, id: u64) -> Result<&WikiUserAccount, OntologyError> {
        self.accounts.get(&id).ok_or(OntologyError::NotFound {
            kind: EntityKind::Account,
            id,
        })
    }

    pub fn user(&self, id: u64) -> Result<&WikiUser, OntologyError> {
        self.users.get(&id).ok_or(OntologyError::NotFound {
            kind: EntityKind::User,
            id,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &ConceptClass> {
        self.classes.values()
    }

    pub fn markers(&self) -> impl Iterator<Item = &MarkerRecord> {
        self.markers.values()
    }

    fn next_id<V>(map: &BTreeMap<u64, V>) -> u64 {
        map.keys().next_back().map_or(1, |last| last + 1)
    }

    fn add(&mut self, subject: &Iri, predicate: Iri, object: impl Into<Term>) -> Result<(), OntologyError> {
        self.store.insert(Triple::from_iris(subject, &predicate, object))?;
        Ok(())
    }

    /// Creates a user and its account under the same id.
    pub fn create_account(&mut self, login: &str, display_name: &str) -> Result<WikiUserAccount, OntologyError> {
        let login = login.trim();
        if login.is_empty() {
            return Err(OntologyError::invalid("login", "must not be empty"));
        }
        if self.logins.contains_key(login) {
            return Err(OntologyError::DuplicateLogin(login.to_string()));
        }
        let display_name = match display_name.trim() {
            "" => login,
            name => name,
        };
        let id = Self::next_id(&self.accounts);
        let user_iri = self.ns.term(&format!("user/{id}"));
        let account_iri = self.ns.term(&format!("account/{id}"));
        let rdf_type = Iri::new_unchecked(rdf::TYPE);
        self.add(&user_iri, rdf_type.clone(), self.ns.wiki_user())?;
        self.add(&user_iri, self.ns.name(), Term::string(display_name))?;
        self.add(&account_iri, rdf_type, self.ns.wiki_user_account())?;
        self.add(&account_iri, self.ns.login(), Term::string(login))?;
        self.add(&account_iri, self.ns.account_of(), user_iri.clone())?;
        self.add(&account_iri, self.ns.reputation(), decimal(reputation(0, 0)))?;
        let account = WikiUserAccount {
            id,
            iri: account_iri,
            login: login.to_string(),
            user_id: id,
            reputation: reputation(0, 0),
        };
        self.users.insert(
            id,
            WikiUser {
                id,
                iri: user_iri,
                display_name: display_name.to_string(),
                friends: BTreeSet::new(),
            },
        );
        self.accounts.insert(id, account.clone());
        self.logins.insert(login.to_string(), id);
        Ok(account)
    }

    /// Symmetric friendship; adding an existing one is a no-op.
    pub fn add_friend(&mut self, a: u64, b: u64) -> Result<(), OntologyError> {
        if a == b {
            return Err(OntologyError::SelfFriendship(a));
        }
        let a_iri = self.user(a)?.iri.clone();
        let b_iri = self.user(b)?.iri.clone();
        self.add(&a_iri, self.ns.knows(), b_iri.clone())?;
        self.add(&b_iri, self.ns.knows(), a_iri)?;
        self.users.get_mut(&a).expect("checked").friends.insert(b);
        self.users.get_mut(&b).expect("checked").friends.insert(a);
        Ok(())
    }

    pub fn create_map(&mut self, title: &str, owner: u64, viewport: Option<Viewport>) -> Result<CrowdMap, OntologyError> {
        let title = title.trim();
        if title.is_empty() {
            return Err(OntologyError::invalid("title", "must not be empty"));
        }
        let owner_iri = self.account(owner)?.iri.clone();
        let viewport = viewport.unwrap_or(Viewport::WORLD);
        let id = Self::next_id(&self.maps);
        let iri = self.ns.term(&format!("map/{id}"));
        self.add(&iri, Iri::new_unchecked(rdf::TYPE), self.ns.crowd_map())?;
        self.add(&iri, self.ns.title(), Term::string(title))?;
        self.add(&iri, self.ns.owner(), owner_iri)?;
        self.add(&iri, self.ns.west(), decimal(viewport.west))?;
        self.add(&iri, self.ns.south(), decimal(viewport.south))?;
        self.add(&iri, self.ns.east(), decimal(viewport.east))?;
        self.add(&iri, self.ns.north(), decimal(viewport.north))?;
        let map = CrowdMap {
            id,
            iri,
            title: title.to_string(),
            owner,
            viewport,
            classes: BTreeSet::new(),
        };
        self.maps.insert(id, map.clone());
        Ok(map)
    }

    /// Mints an OWL class for a marker type, linked to a knowledge-base
    /// concept whose external links the caller has already resolved.
    pub fn create_concept(
        &mut self,
        map_id: u64,
        label: &str,
        top_class: TopClass,
        kb_concept_id: ConceptId,
        mut external_links: Vec<Iri>,
    ) -> Result<ConceptClass, OntologyError> {
        external_links.sort();
        external_links.dedup();
        let label = label.trim();
        if label.is_empty() {
            return Err(OntologyError::invalid("label", "must not be empty"));
        }
        let map_iri = self.map(map_id)?.iri.clone();
        let normalized = text::normalize(label);
        let duplicate = self.maps[&map_id]
            .classes
            .iter()
            .any(|c| text::normalize(&self.classes[c].label) == normalized);
        if duplicate {
            return Err(OntologyError::DuplicateLabel {
                map: map_id,
                label: label.to_string(),
            });
        }
        let id = Self::next_id(&self.classes);
        let class_iri = self.ns.term(&format!("class/{}-{id}", text::slug(label)));
        self.add(&class_iri, Iri::new_unchecked(rdf::TYPE), Iri::new_unchecked(owl::CLASS))?;
        self.add(&class_iri, Iri::new_unchecked(rdfs::SUB_CLASS_OF), top_class.iri(&self.ns))?;
        self.add(&class_iri, Iri::new_unchecked(rdfs::LABEL), Term::string(label))?;
        self.add(&class_iri, self.ns.kb_concept(), Literal::integer(kb_concept_id.0 as i64))?;
        for link in &external_links {
            self.add(&class_iri, self.ns.links_to_concept(), link.clone())?;
        }
        self.add(&map_iri, self.ns.has_class(), class_iri.clone())?;
        let class = ConceptClass {
            id,
            class_iri,
            label: label.to_string(),
            top_class,
            kb_concept_id,
            map_id,
            external_links,
        };
        self.classes.insert(id, class.clone());
        self.maps.get_mut(&map_id).expect("checked").classes.insert(id);
        Ok(class)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn create_marker(
        &mut self,
        map_id: u64,
        class_id: u64,
        creator: u64,
        lat: f64,
        lon: f64,
        description: &str,
        source_type: SourceType,
        created: DateTime<Utc>,
    ) -> Result<MarkerRecord, OntologyError> {
        geo::check_latitude(lat)?;
        geo::check_longitude(lon)?;
        let map_iri = self.map(map_id)?.iri.clone();
        let class = self.class(class_id)?;
        if class.map_id != map_id {
            return Err(OntologyError::invalid(
                "class_id",
                format!("class {class_id} belongs to map {}, not {map_id}", class.map_id),
            ));
        }
        let class_iri = class.class_iri.clone();
        let creator_iri = self.account(creator)?.iri.clone();
        let created = created.trunc_subsecs(3);
        if created > Utc::now() {
            return Err(OntologyError::invalid("created", "timestamp lies in the future"));
        }
        let id = Self::next_id(&self.markers);
        let iri = self.ns.term(&format!("marker/{id}"));
        let provenance = Provenance {
            source_type,
            reliability: self.reliability.get(source_type),
            confirmations: 0,
            refutations: 0,
        };
        self.add(&iri, Iri::new_unchecked(rdf::TYPE), class_iri.clone())?;
        self.add(&iri, self.ns.has_creator(), creator_iri)?;
        self.add(&iri, self.ns.topic(), class_iri)?;
        self.add(&iri, self.ns.lat(), decimal(lat))?;
        self.add(&iri, self.ns.lon(), decimal(lon))?;
        self.add(&iri, self.ns.created(), timestamp_literal(&created))?;
        self.add(&iri, self.ns.description(), Term::string(description))?;
        self.add(&map_iri, self.ns.has_marker(), iri.clone())?;
        let prov_iri = self.ns.term(&format!("provenance/{id}"));
        self.add(&prov_iri, Iri::new_unchecked(rdf::TYPE), self.ns.provenance_class())?;
        self.add(&prov_iri, self.ns.provenance_of(), iri.clone())?;
        self.add(&prov_iri, self.ns.source_type(), Term::string(source_type.name()))?;
        self.add(&prov_iri, self.ns.reliability(), decimal(provenance.reliability))?;
        self.add(&prov_iri, self.ns.confirmations(), Literal::integer(0))?;
        self.add(&prov_iri, self.ns.refutations(), Literal::integer(0))?;
        let marker = MarkerRecord {
            id,
            iri,
            map_id,
            class_id,
            creator,
            lat,
            lon,
            created,
            description: description.to_string(),
            provenance,
        };
        self.markers.insert(id, marker.clone());
        Ok(marker)
    }

    /// Markers of a map inside the viewport (bounds inclusive), by id.
    pub fn markers_in(&self, map_id: u64, viewport: &Viewport) -> Result<Vec<&MarkerRecord>, OntologyError> {
        self.map(map_id)?;
        Ok(self
            .markers
            .values()
            .filter(|m| m.map_id == map_id && viewport.contains(m.lat, m.lon))
            .collect())
    }

    pub fn vote(&mut self, marker_id: u64, account: u64, verdict: Verdict) -> Result<VoteOutcome, OntologyError> {
        let marker = self.marker(marker_id)?;
        let (marker_iri, creator) = (marker.iri.clone(), marker.creator);
        let voter_iri = self.account(account)?.iri.clone();
        if creator == account {
            return Err(OntologyError::SelfVote(account));
        }
        if self.votes.contains_key(&(marker_id, account)) {
            return Err(OntologyError::DuplicateVote {
                marker: marker_id,
                account,
            });
        }
        let vote_iri = self.ns.term(&format!("vote/{marker_id}-{account}"));
        self.add(&vote_iri, Iri::new_unchecked(rdf::TYPE), self.ns.vote_class())?;
        self.add(&vote_iri, self.ns.vote_on(), marker_iri)?;
        self.add(&vote_iri, self.ns.voter(), voter_iri)?;
        self.add(&vote_iri, self.ns.verdict(), Term::string(verdict.name()))?;
        self.votes.insert((marker_id, account), verdict);

        let provenance = {
            let p = &mut self.markers.get_mut(&marker_id).expect("checked").provenance;
            match verdict {
                Verdict::Confirm => p.confirmations += 1,
                Verdict::Refute => p.refutations += 1,
            }
            p.clone()
        };
        let prov_iri: Term = self.ns.term(&format!("provenance/{marker_id}")).into();
        self.store.set_object(
            &prov_iri,
            &self.ns.confirmations().into(),
            Literal::integer(provenance.confirmations as i64).into(),
        )?;
        self.store.set_object(
            &prov_iri,
            &self.ns.refutations().into(),
            Literal::integer(provenance.refutations as i64).into(),
        )?;
        let reputation = self.recompute_reputation(creator)?;
        Ok(VoteOutcome {
            marker_id,
            provenance,
            creator,
            reputation,
        })
    }

    fn recompute_reputation(&mut self, account: u64) -> Result<f64, OntologyError> {
        let (conf, refu) = self
            .markers
            .values()
            .filter(|m| m.creator == account)
            .fold((0, 0), |(c, r), m| {
                (c + m.provenance.confirmations, r + m.provenance.refutations)
            });
        let value = reputation(conf, refu);
        let entry = self.accounts.get_mut(&account).expect("creator exists");
        entry.reputation = value;
        let iri: Term = entry.iri.clone().into();
        self.store.set_object(&iri, &self.ns.reputation().into(), decimal(value))?;
        Ok(value)
    }
}
