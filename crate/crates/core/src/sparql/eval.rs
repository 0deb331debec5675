use std::cmp::Ordering;
use std::collections::BTreeMap;

use tracing::debug;

use super::ast::*;
use crate::rdf::{Term, TripleStore};

type Solution = BTreeMap<String, Term>;

/// Evaluates a query: left-to-right join of the patterns with bound-variable
/// substitution, then filters, projection, sorting and the limit.
pub fn evaluate(store: &TripleStore, query: &SelectQuery) -> Vec<Binding> {
    let mut solutions: Vec<Solution> = vec![Solution::new()];
    for pattern in &query.patterns {
        let mut next = Vec::new();
        for solution in &solutions {
            extend(store, pattern, solution, &mut next);
        }
        solutions = next;
        if solutions.is_empty() {
            break;
        }
    }

    let mut rows: Vec<Vec<Term>> = solutions
        .into_iter()
        .filter(|s| query.filters.iter().all(|f| filter_holds(f, s)))
        .map(|s| {
            query
                .projection
                .iter()
                .map(|v| s.get(v).cloned().expect("projected variables are bound by patterns"))
                .collect()
        })
        .collect();
    rows.sort();
    if let Some(limit) = query.limit {
        rows.truncate(limit);
    }
    rows.into_iter()
        .map(|row| Binding(query.projection.iter().cloned().zip(row).collect()))
        .collect()
}

/// Evaluates and packages the result with the projection order.
pub fn execute(store: &TripleStore, query: &SelectQuery) -> QueryResults {
    QueryResults {
        variables: query.projection.clone(),
        bindings: evaluate(store, query),
    }
}

fn resolve<'a>(term: &'a PatternTerm, solution: &'a Solution) -> Option<&'a Term> {
    match term {
        PatternTerm::Term(t) => Some(t),
        PatternTerm::Var(v) => solution.get(v),
    }
}

fn extend(store: &TripleStore, pattern: &TriplePattern, solution: &Solution, out: &mut Vec<Solution>) {
    let s = resolve(&pattern.subject, solution);
    let p = resolve(&pattern.predicate, solution);
    let o = resolve(&pattern.object, solution);
    // Literal subjects and non-IRI predicates can never match.
    if s.is_some_and(Term::is_literal) || p.is_some_and(|p| p.as_iri().is_none()) {
        return;
    }
    'triples: for triple in store.matching(s, p, o) {
        let mut extended = solution.clone();
        for (position, value) in pattern
            .positions()
            .into_iter()
            .zip([&triple.subject, &triple.predicate, &triple.object])
        {
            if let PatternTerm::Var(v) = position {
                match extended.get(v) {
                    Some(existing) if existing != value => continue 'triples,
                    Some(_) => {}
                    None => {
                        extended.insert(v.clone(), value.clone());
                    }
                }
            }
        }
        out.push(extended);
    }
}

fn filter_holds(filter: &FilterExpr, solution: &Solution) -> bool {
    filter.conjuncts.iter().all(|c| {
        let Some(term) = solution.get(&c.variable) else {
            return false;
        };
        match compare(term, &c.value) {
            Some(ordering) => c.op.holds(ordering),
            None => {
                debug!(variable = %c.variable, value = %term, "filter type error, binding dropped");
                false
            }
        }
    })
}

/// Orders a bound term against a filter constant, `None` on a type error.
pub(crate) fn compare(term: &Term, value: &FilterValue) -> Option<Ordering> {
    match value {
        FilterValue::Numeric(n) => {
            let x = term.as_literal()?.numeric_value()?;
            x.partial_cmp(n)
        }
        FilterValue::Str(s) => {
            let lit = term.as_literal().filter(|l| l.is_string_like())?;
            Some(lit.lexical().cmp(s.as_str()))
        }
        FilterValue::Term(t) => Some(if term == t {
            Ordering::Equal
        } else {
            Ordering::Less
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Iri, Literal, Triple};
    use crate::sparql::parse_query;
    use crate::vocab::xsd;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn iri(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    fn int(n: i64) -> Term {
        Term::Literal(Literal::integer(n))
    }

    fn store_of(triples: &[(Term, Term, Term)]) -> TripleStore {
        triples
            .iter()
            .map(|(s, p, o)| Triple::new(s.clone(), p.clone(), o.clone()).unwrap())
            .collect()
    }

    #[test]
    fn empty_store_yields_nothing() {
        let q = parse_query("SELECT ?s WHERE { ?s ?p ?o }").unwrap();
        assert!(evaluate(&TripleStore::new(), &q).is_empty());
    }

    #[test]
    fn limit_takes_first_in_order() {
        let store = store_of(&[
            (iri("urn:c"), iri("urn:p"), int(1)),
            (iri("urn:a"), iri("urn:p"), int(2)),
            (iri("urn:b"), iri("urn:p"), int(3)),
        ]);
        let all = evaluate(&store, &parse_query("SELECT ?s WHERE { ?s <urn:p> ?o }").unwrap());
        let one = evaluate(&store, &parse_query("SELECT ?s WHERE { ?s <urn:p> ?o } LIMIT 1").unwrap());
        assert_eq!(one.len(), 1);
        assert_eq!(one[0], all[0]);
        assert_eq!(one[0].get("s"), Some(&iri("urn:a")));
    }

    #[test]
    fn numeric_filters_drop_non_numeric_bindings() {
        let store = store_of(&[
            (iri("urn:m1"), iri("urn:lat"), Term::Literal(Literal::decimal(40.0))),
            (iri("urn:m2"), iri("urn:lat"), Term::Literal(Literal::decimal(36.5))),
            (iri("urn:m3"), iri("urn:lat"), Term::string("41")),
            (
                iri("urn:m4"),
                iri("urn:lat"),
                Term::Literal(Literal::typed("41.9", Iri::new(xsd::DOUBLE).unwrap())),
            ),
        ]);
        let q = parse_query("SELECT ?m WHERE { ?m <urn:lat> ?y . FILTER(?y >= 37.0) FILTER(?y <= 42.5) }")
            .unwrap();
        let got: Vec<Term> = evaluate(&store, &q).into_iter().map(|b| b.0["m"].clone()).collect();
        assert_eq!(got, vec![iri("urn:m1"), iri("urn:m4")]);
    }

    #[test]
    fn string_and_term_filters() {
        let store = store_of(&[
            (iri("urn:a"), iri("urn:name"), Term::string("alpha")),
            (iri("urn:b"), iri("urn:name"), Term::string("beta")),
            (iri("urn:c"), iri("urn:name"), iri("urn:gamma")),
        ]);
        let q = parse_query("SELECT ?s WHERE { ?s <urn:name> ?n FILTER(?n > \"alpha\") }").unwrap();
        assert_eq!(evaluate(&store, &q).len(), 1);
        let q = parse_query("SELECT ?s WHERE { ?s <urn:name> ?n FILTER(?n != <urn:gamma>) }").unwrap();
        assert_eq!(evaluate(&store, &q).len(), 2);
    }

    #[test]
    fn repeated_variable_within_pattern() {
        let store = store_of(&[
            (iri("urn:a"), iri("urn:p"), iri("urn:a")),
            (iri("urn:a"), iri("urn:p"), iri("urn:b")),
        ]);
        let q = parse_query("SELECT ?x WHERE { ?x <urn:p> ?x }").unwrap();
        assert_eq!(evaluate(&store, &q).len(), 1);
    }

    // Nested-loop join oracle: every combination of one triple per pattern.
    fn nested_loop(store: &TripleStore, q: &SelectQuery) -> Vec<Vec<Term>> {
        let triples = store.triples();
        let mut rows = Vec::new();
        let mut stack: Vec<usize> = vec![0; q.patterns.len()];
        if q.patterns.is_empty() {
            return rows;
        }
        loop {
            let mut assignment: BTreeMap<&str, &Term> = BTreeMap::new();
            let mut ok = true;
            'outer: for (pattern, &ti) in q.patterns.iter().zip(&stack) {
                let t = &triples[ti];
                for (pt, value) in pattern.positions().into_iter().zip([&t.subject, &t.predicate, &t.object]) {
                    match pt {
                        PatternTerm::Term(term) if term != value => {
                            ok = false;
                            break 'outer;
                        }
                        PatternTerm::Var(v) => {
                            if let Some(prev) = assignment.insert(v.as_str(), value) {
                                if prev != value {
                                    ok = false;
                                    break 'outer;
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
            if ok {
                rows.push(q.projection.iter().map(|v| assignment[v.as_str()].clone()).collect());
            }
            let mut k = 0;
            loop {
                if k == stack.len() {
                    rows.sort();
                    return rows;
                }
                stack[k] += 1;
                if stack[k] < triples.len() {
                    break;
                }
                stack[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn two_pattern_join_matches_nested_loop_oracle() {
        // 20-triple fixture: a small social graph with ages.
        let mut triples = Vec::new();
        for i in 0..6 {
            triples.push((iri(&format!("urn:u{i}")), iri("urn:knows"), iri(&format!("urn:u{}", (i + 1) % 6))));
            triples.push((iri(&format!("urn:u{i}")), iri("urn:knows"), iri(&format!("urn:u{}", (i + 3) % 6))));
            triples.push((iri(&format!("urn:u{i}")), iri("urn:age"), int(20 + i as i64)));
        }
        triples.push((iri("urn:u0"), iri("urn:name"), Term::string("zero")));
        triples.push((iri("urn:u1"), iri("urn:name"), Term::string("one")));
        let store = store_of(&triples);
        assert_eq!(store.len(), 20);
        let q = parse_query("SELECT ?a ?b ?n WHERE { ?a <urn:knows> ?b . ?b <urn:age> ?n }").unwrap();
        let got: Vec<Vec<Term>> = evaluate(&store, &q)
            .into_iter()
            .map(|b| q.projection.iter().map(|v| b.0[v].clone()).collect())
            .collect();
        let want = nested_loop(&store, &q);
        assert_eq!(want.len(), 12);
        assert_eq!(got, want);
    }

    fn arb_store() -> impl Strategy<Value = Vec<(u8, u8, u8, bool)>> {
        prop::collection::vec((0u8..6, 0u8..3, 0u8..8, any::<bool>()), 0..60)
    }

    fn build(spec: &[(u8, u8, u8, bool)]) -> TripleStore {
        spec.iter()
            .map(|&(s, p, o, lit)| {
                let object = if lit { int(o as i64) } else { iri(&format!("urn:n{o}")) };
                Triple::new(iri(&format!("urn:n{s}")), iri(&format!("urn:p{p}")), object).unwrap()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn adding_a_triple_never_removes_bindings(spec in arb_store(), extra in (0u8..6, 0u8..3, 0u8..8, any::<bool>())) {
            let q = parse_query("SELECT ?a ?c WHERE { ?a <urn:p0> ?b . ?b ?p ?c }").unwrap();
            let before = evaluate(&build(&spec), &q);
            let mut bigger = spec.clone();
            bigger.push(extra);
            let after: HashSet<Vec<Term>> = evaluate(&build(&bigger), &q)
                .into_iter()
                .map(|b| b.0.into_values().collect())
                .collect();
            for b in before {
                prop_assert!(after.contains(&b.0.into_values().collect::<Vec<_>>()));
            }
        }

        #[test]
        fn bindings_cover_exactly_the_projection(spec in arb_store()) {
            let q = parse_query("SELECT ?c ?a WHERE { ?a ?p ?b . ?b ?q ?c }").unwrap();
            for b in evaluate(&build(&spec), &q) {
                let vars: Vec<&str> = b.variables().collect();
                prop_assert_eq!(vars, vec!["a", "c"]);
            }
        }
    }
}
