//! Random SELECT queries with a brute-force evaluator.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use semaps_core::rdf::{Term, Triple};

use super::generate::query_term;

#[derive(Debug, Clone)]
pub enum Slot {
    Var(String),
    Const(Term),
}

#[derive(Debug, Clone)]
pub enum Constant {
    Number(f64, String),
    Text(String),
    Exact(Term),
}

#[derive(Debug, Clone)]
pub struct Cmp {
    pub var: String,
    pub op: &'static str,
    pub value: Constant,
    /// Written as `constant op var` with the operator mirrored.
    pub flipped: bool,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub projection: Vec<String>,
    pub patterns: Vec<[Slot; 3]>,
    /// Each filter is a conjunction.
    pub filters: Vec<Vec<Cmp>>,
    pub limit: Option<usize>,
}

const VARS: [&str; 4] = ["a", "b", "c", "d"];

fn slot_text(slot: &Slot) -> String {
    match slot {
        Slot::Var(v) => format!("?{v}"),
        Slot::Const(Term::Iri(i)) => format!("<{}>", i.as_str()),
        Slot::Const(Term::Literal(l)) if l.datatype().as_str().ends_with("#integer") => l.lexical().to_string(),
        Slot::Const(Term::Literal(l)) => format!("\"{}\"", l.lexical()),
        Slot::Const(other) => panic!("unexpected constant {other:?}"),
    }
}

fn mirror(op: &str) -> &'static str {
    match op {
        "<" => ">",
        "<=" => ">=",
        ">" => "<",
        ">=" => "<=",
        "=" => "=",
        _ => "!=",
    }
}

impl Case {
    pub fn text(&self) -> String {
        let mut q = format!(
            "SELECT {} WHERE {{ ",
            self.projection.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" ")
        );
        let patterns: Vec<String> = self
            .patterns
            .iter()
            .map(|p| p.iter().map(slot_text).collect::<Vec<_>>().join(" "))
            .collect();
        q.push_str(&patterns.join(" . "));
        for f in &self.filters {
            let parts: Vec<String> = f
                .iter()
                .map(|c| {
                    let constant = match &c.value {
                        Constant::Number(_, text) => text.clone(),
                        Constant::Text(s) => format!("\"{s}\""),
                        Constant::Exact(t) => slot_text(&Slot::Const(t.clone())),
                    };
                    if c.flipped {
                        format!("{constant} {} ?{}", mirror(c.op), c.var)
                    } else {
                        format!("?{} {} {constant}", c.var, c.op)
                    }
                })
                .collect();
            q.push_str(&format!(" FILTER({})", parts.join(" && ")));
        }
        q.push_str(" }");
        if let Some(n) = self.limit {
            q.push_str(&format!(" LIMIT {n}"));
        }
        q
    }
}

fn pattern_slot(rng: &mut ChaCha8Rng, position: usize, var_prob: f64) -> Slot {
    if rng.gen_bool(var_prob) {
        Slot::Var(VARS.choose(rng).unwrap().to_string())
    } else {
        let mut t = query_term(rng, position);
        // Blank nodes cannot be written as query constants; only integers and
        // plain strings are written as literal constants.
        while t.as_iri().is_none()
            && !t
                .as_literal()
                .is_some_and(|l| l.is_plain_string() || l.datatype().as_str().ends_with("#integer"))
        {
            t = query_term(rng, position);
        }
        Slot::Const(t)
    }
}

fn vars_of(p: &[Slot; 3]) -> Vec<String> {
    p.iter()
        .filter_map(|s| match s {
            Slot::Var(v) => Some(v.clone()),
            Slot::Const(_) => None,
        })
        .collect()
}

pub fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let count = rng.gen_range(1..=3);
    let mut patterns: Vec<[Slot; 3]> = Vec::new();
    while patterns.len() < count {
        let p = [
            pattern_slot(rng, 0, 0.6),
            pattern_slot(rng, 1, 0.2),
            pattern_slot(rng, 2, 0.6),
        ];
        let vars = vars_of(&p);
        let has_const = vars.len() < 3;
        let seen: Vec<String> = patterns.iter().flat_map(vars_of).collect();
        let connected = patterns.is_empty() || vars.iter().any(|v| seen.contains(v));
        // Keeps the brute-force enumeration small: the first pattern has a
        // constant, later ones share a variable.
        if has_const && connected && !vars.is_empty() {
            patterns.push(p);
        }
    }
    let mut bound: Vec<String> = patterns.iter().flat_map(vars_of).collect();
    bound.sort();
    bound.dedup();
    let mut projection: Vec<String> = bound.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
    if projection.is_empty() {
        projection.push(bound[0].clone());
    }
    projection.shuffle(rng);

    let filters = (0..rng.gen_range(0..=2))
        .map(|_| {
            (0..rng.gen_range(1..=2))
                .map(|_| {
                    let var = bound.choose(rng).unwrap().clone();
                    let (op, value) = match rng.gen_range(0..3) {
                        0 => {
                            let n = rng.gen_range(0..40) as f64 / 2.0;
                            let text = if n.fract() == 0.0 { format!("{}", n as i64) } else { format!("{n}") };
                            (*["=", "!=", "<", "<=", ">", ">="].choose(rng).unwrap(), Constant::Number(n, text))
                        }
                        1 => (
                            *["=", "!=", "<", "<=", ">", ">="].choose(rng).unwrap(),
                            Constant::Text(format!("s{}", rng.gen_range(0..6))),
                        ),
                        _ => (
                            *["=", "!="].choose(rng).unwrap(),
                            Constant::Exact(Term::iri(format!("urn:n{}", rng.gen_range(0..12))).unwrap()),
                        ),
                    };
                    Cmp { var, op, value, flipped: rng.gen_bool(0.2) }
                })
                .collect()
        })
        .collect();
    let limit = rng.gen_bool(0.2).then(|| rng.gen_range(1..10));
    Case { projection, patterns, filters, limit }
}

fn numeric(term: &Term) -> Option<f64> {
    let lit = term.as_literal()?;
    let dt = lit.datatype().as_str();
    let numeric = ["integer", "decimal", "double", "float"]
        .iter()
        .any(|local| dt == format!("http://www.w3.org/2001/XMLSchema#{local}"));
    if numeric {
        lit.lexical().parse().ok()
    } else {
        None
    }
}

fn holds(op: &str, ord: Ordering) -> bool {
    match op {
        "=" => ord == Ordering::Equal,
        "!=" => ord != Ordering::Equal,
        "<" => ord == Ordering::Less,
        "<=" => ord != Ordering::Greater,
        ">" => ord == Ordering::Greater,
        _ => ord != Ordering::Less,
    }
}

fn cmp_ok(c: &Cmp, term: &Term) -> bool {
    match &c.value {
        Constant::Number(n, _) => numeric(term).and_then(|x| x.partial_cmp(n)).is_some_and(|o| holds(c.op, o)),
        Constant::Text(s) => term
            .as_literal()
            .filter(|l| l.is_string_like())
            .is_some_and(|l| holds(c.op, l.lexical().chars().cmp(s.chars()))),
        Constant::Exact(t) => (term == t) == (c.op == "="),
    }
}

/// Enumerates every combination of one store triple per pattern.
pub fn brute_force(store: &[Triple], case: &Case) -> Vec<Vec<Term>> {
    let mut rows = Vec::new();
    let mut assignment: BTreeMap<String, Term> = BTreeMap::new();
    walk(store, case, 0, &mut assignment, &mut rows);
    rows.sort();
    if let Some(n) = case.limit {
        rows.truncate(n);
    }
    rows
}

fn walk(store: &[Triple], case: &Case, i: usize, assignment: &mut BTreeMap<String, Term>, rows: &mut Vec<Vec<Term>>) {
    if i == case.patterns.len() {
        let keep = case
            .filters
            .iter()
            .all(|f| f.iter().all(|c| cmp_ok(c, &assignment[&c.var])));
        if keep {
            rows.push(case.projection.iter().map(|v| assignment[v].clone()).collect());
        }
        return;
    }
    for t in store {
        let values = [&t.subject, &t.predicate, &t.object];
        let mut added = Vec::new();
        let mut ok = true;
        for (slot, value) in case.patterns[i].iter().zip(values) {
            match slot {
                Slot::Const(c) => ok &= c == value,
                Slot::Var(v) => match assignment.get(v) {
                    Some(existing) => ok &= existing == value,
                    None => {
                        assignment.insert(v.clone(), value.clone());
                        added.push(v.clone());
                    }
                },
            }
            if !ok {
                break;
            }
        }
        if ok {
            walk(store, case, i + 1, assignment, rows);
        }
        for v in added {
            assignment.remove(&v);
        }
    }
}
