use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{BlankNode, Position, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("invalid {position}: {reason}")]
    InvalidTerm { position: Position, reason: String },
}

type TripleId = usize;

/// Set of triples with subject, predicate and object indexes.
///
/// Triples live in a slot vector; each index maps a term to the ids of the
/// slots holding it in that position. Removed slots are recycled.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    slots: Vec<Option<Triple>>,
    free: Vec<TripleId>,
    ids: HashMap<Triple, TripleId>,
    by_subject: HashMap<Term, BTreeSet<TripleId>>,
    by_predicate: HashMap<Term, BTreeSet<TripleId>>,
    by_object: HashMap<Term, BTreeSet<TripleId>>,
    next_blank: u64,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.ids.contains_key(triple)
    }

    /// Adds a triple. Returns `false` if it was already present.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        triple.validate()?;
        if self.ids.contains_key(&triple) {
            return Ok(false);
        }
        if let Term::Blank(b) = &triple.subject {
            self.observe_blank(b);
        }
        if let Term::Blank(b) = &triple.object {
            self.observe_blank(b);
        }
        let id = match self.free.pop() {
            Some(id) => id,
            None => {
                self.slots.push(None);
                self.slots.len() - 1
            }
        };
        self.by_subject.entry(triple.subject.clone()).or_default().insert(id);
        self.by_predicate.entry(triple.predicate.clone()).or_default().insert(id);
        self.by_object.entry(triple.object.clone()).or_default().insert(id);
        self.ids.insert(triple.clone(), id);
        self.slots[id] = Some(triple);
        Ok(true)
    }

    pub fn insert_all<I>(&mut self, triples: I) -> Result<usize, StoreError>
    where
        I: IntoIterator<Item = Triple>,
    {
        let mut added = 0;
        for t in triples {
            if self.insert(t)? {
                added += 1;
            }
        }
        Ok(added)
    }

    /// Inserts a parsed document, relabelling its blank nodes with labels
    /// fresh to this store so that documents never share blank nodes.
    pub fn load_document<I>(&mut self, triples: I) -> Result<usize, StoreError>
    where
        I: IntoIterator<Item = Triple>,
    {
        let mut renamed: HashMap<BlankNode, BlankNode> = HashMap::new();
        let mut relabel = |store: &mut Self, term: Term| match term {
            Term::Blank(b) => Term::Blank(
                renamed
                    .entry(b)
                    .or_insert_with(|| store.fresh_blank())
                    .clone(),
            ),
            other => other,
        };
        let mut added = 0;
        for t in triples {
            let subject = relabel(self, t.subject);
            let object = relabel(self, t.object);
            if self.insert(Triple {
                subject,
                predicate: t.predicate,
                object,
            })? {
                added += 1;
            }
        }
        Ok(added)
    }

    /// Mints a blank node label not used anywhere in this store.
    pub fn fresh_blank(&mut self) -> BlankNode {
        loop {
            let label = format!("b{}", self.next_blank);
            self.next_blank += 1;
            let node = BlankNode::new(label).expect("generated label is valid");
            let term = Term::Blank(node.clone());
            if !self.by_subject.contains_key(&term) && !self.by_object.contains_key(&term) {
                return node;
            }
        }
    }

    fn observe_blank(&mut self, b: &BlankNode) {
        if let Some(n) = b.label().strip_prefix('b').and_then(|n| n.parse::<u64>().ok()) {
            self.next_blank = self.next_blank.max(n + 1);
        }
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        let Some(id) = self.ids.remove(triple) else {
            return false;
        };
        Self::unindex(&mut self.by_subject, &triple.subject, id);
        Self::unindex(&mut self.by_predicate, &triple.predicate, id);
        Self::unindex(&mut self.by_object, &triple.object, id);
        self.slots[id] = None;
        self.free.push(id);
        true
    }

    fn unindex(index: &mut HashMap<Term, BTreeSet<TripleId>>, term: &Term, id: TripleId) {
        if let Some(ids) = index.get_mut(term) {
            ids.remove(&id);
            if ids.is_empty() {
                index.remove(term);
            }
        }
    }

    /// Removes every triple matching the pattern, returning how many went.
    pub fn remove_matching(
        &mut self,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> usize {
        let doomed = self.matching(s, p, o);
        for t in &doomed {
            self.remove(t);
        }
        doomed.len()
    }

    /// Returns the triples agreeing with every bound position, sorted by
    /// subject, predicate and object.
    pub fn matching(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let candidates = [
            s.map(|t| self.by_subject.get(t)),
            p.map(|t| self.by_predicate.get(t)),
            o.map(|t| self.by_object.get(t)),
        ];
        let mut out: Vec<Triple> = if candidates.iter().all(Option::is_none) {
            self.ids.keys().cloned().collect()
        } else {
            // A bound position with no index entry means no match at all.
            if candidates.iter().any(|c| matches!(c, Some(None))) {
                return Vec::new();
            }
            let smallest = candidates
                .iter()
                .flatten()
                .flatten()
                .min_by_key(|ids| ids.len())
                .expect("at least one bound position");
            smallest
                .iter()
                .filter_map(|id| self.slots[*id].as_ref())
                .filter(|t| {
                    s.is_none_or(|s| &t.subject == s)
                        && p.is_none_or(|p| &t.predicate == p)
                        && o.is_none_or(|o| &t.object == o)
                })
                .cloned()
                .collect()
        };
        out.sort();
        out
    }

    /// All triples in deterministic order.
    pub fn triples(&self) -> Vec<Triple> {
        self.matching(None, None, None)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.ids.keys()
    }

    /// Number of triples with the given subject.
    pub fn subject_degree(&self, subject: &Term) -> usize {
        self.by_subject.get(subject).map_or(0, BTreeSet::len)
    }

    /// First object for (subject, predicate) in sort order.
    pub fn object_of(&self, subject: &Term, predicate: &Term) -> Option<Term> {
        self.matching(Some(subject), Some(predicate), None)
            .into_iter()
            .next()
            .map(|t| t.object)
    }

    /// Replaces every (subject, predicate, *) triple with a single new object.
    pub fn set_object(
        &mut self,
        subject: &Term,
        predicate: &Term,
        object: Term,
    ) -> Result<(), StoreError> {
        self.remove_matching(Some(subject), Some(predicate), None);
        self.insert(Triple::new(subject.clone(), predicate.clone(), object)?)?;
        Ok(())
    }

    /// Checks that the three indexes describe exactly the stored triple set.
    pub fn indexes_consistent(&self) -> bool {
        let live: BTreeSet<TripleId> = self.ids.values().copied().collect();
        let slots_ok = self.slots.iter().enumerate().all(|(id, slot)| match slot {
            Some(t) => self.ids.get(t) == Some(&id),
            None => !live.contains(&id),
        });
        let index_ok = |index: &HashMap<Term, BTreeSet<TripleId>>, pick: fn(&Triple) -> &Term| {
            let mut seen = BTreeSet::new();
            for (term, ids) in index {
                for id in ids {
                    match self.slots.get(*id).and_then(Option::as_ref) {
                        Some(t) if pick(t) == term => {
                            seen.insert(*id);
                        }
                        _ => return false,
                    }
                }
            }
            seen == live
        };
        slots_ok
            && index_ok(&self.by_subject, |t| &t.subject)
            && index_ok(&self.by_predicate, |t| &t.predicate)
            && index_ok(&self.by_object, |t| &t.object)
    }
}

impl FromIterator<Triple> for TripleStore {
    /// Panics on invalid triples; use [`TripleStore::insert_all`] for fallible input.
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut store = TripleStore::new();
        store.insert_all(iter).expect("valid triples");
        store
    }
}
