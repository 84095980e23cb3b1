//! Shared test helpers: a brute-force query oracle independent of the
//! store's join path, seeded random store/query generators, and the
//! randomized vote-sequence invariant driver.

#![allow(dead_code)] // each test target uses a subset of these helpers

pub mod votes;

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crossvote::store::{Binding, KnowledgeStore, Pattern, Range, Term, Value};

/// Enumerate every assignment of the query's variables over the store's
/// value universe and keep those under which all patterns are asserted
/// facts. Deliberately naive; must stay independent of `match_patterns`.
pub fn brute_force_match(store: &KnowledgeStore, query: &[Pattern]) -> Vec<Binding> {
    let mut universe: BTreeSet<Value> = BTreeSet::new();
    for (_, args) in store.all_facts() {
        universe.extend(args.iter().cloned());
    }
    let universe: Vec<Value> = universe.into_iter().collect();

    let mut vars: Vec<String> = Vec::new();
    for p in query {
        for v in p.variables() {
            if !vars.iter().any(|x| x == v) {
                vars.push(v.to_string());
            }
        }
    }
    vars.sort();

    let is_fact = |predicate: &str, args: &[Value]| -> bool {
        store.facts_of(predicate).any(|t| t.as_slice() == args)
    };
    let grounded = |pattern: &Pattern, binding: &Binding| -> Vec<Value> {
        pattern
            .terms
            .iter()
            .map(|t| match t {
                Term::Const(v) => v.clone(),
                Term::Var(name) => binding[name].clone(),
            })
            .collect()
    };

    let mut results: BTreeSet<Binding> = BTreeSet::new();
    let k = vars.len();
    let n = universe.len();
    if k > 0 && n == 0 {
        return Vec::new();
    }
    let mut indices = vec![0usize; k];
    loop {
        let binding: Binding = vars
            .iter()
            .cloned()
            .zip(indices.iter().map(|&i| universe[i].clone()))
            .collect();
        if query
            .iter()
            .all(|p| is_fact(&p.predicate, &grounded(p, &binding)))
        {
            results.insert(binding);
        }
        // odometer over the universe
        let mut pos = 0;
        loop {
            if pos == k {
                return results.into_iter().collect();
            }
            indices[pos] += 1;
            if indices[pos] < n {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
}

pub struct RandomKb {
    pub store: KnowledgeStore,
    pub entities: Vec<String>,
    pub predicates: Vec<String>,
}

/// Small random store: one entity class, a few binary predicates with
/// entity or integer ranges, up to `max_triples` facts over at most
/// `max_entities` entities.
pub fn random_store(rng: &mut ChaCha8Rng, max_entities: usize, max_triples: usize) -> RandomKb {
    let mut store = KnowledgeStore::new();
    store.define_class("Thing", None, vec![]).unwrap();
    store.define_class("E", Some("Thing"), vec![]).unwrap();

    let n_preds = rng.gen_range(2..=4);
    let mut predicates = Vec::new();
    for i in 0..n_preds {
        let name = format!("p{i}");
        let range = if rng.gen_bool(0.25) {
            Range::Int
        } else {
            Range::Class("E".into())
        };
        store.define_property(&name, "E", range, false).unwrap();
        predicates.push(name);
    }

    let n_entities = rng.gen_range(1..=max_entities);
    let entities: Vec<String> = (0..n_entities).map(|i| format!("e{i}")).collect();
    for e in &entities {
        store.assert_is_a(e, "E").unwrap();
    }

    let n_triples = rng.gen_range(0..=max_triples);
    for _ in 0..n_triples {
        let subject = &entities[rng.gen_range(0..entities.len())];
        let predicate = &predicates[rng.gen_range(0..predicates.len())];
        let object = match store.property(predicate).unwrap().range {
            Range::Int => Value::Int(rng.gen_range(0..5)),
            _ => Value::entity(&entities[rng.gen_range(0..entities.len())]),
        };
        store.assert_triple(subject, predicate, object).unwrap();
    }
    RandomKb {
        store,
        entities,
        predicates,
    }
}

/// Random conjunctive query over the store's predicates: up to `max_patterns`
/// binary patterns sharing up to `max_vars` variables.
pub fn random_query(
    rng: &mut ChaCha8Rng,
    kb: &RandomKb,
    max_patterns: usize,
    max_vars: usize,
) -> Vec<Pattern> {
    let vars: Vec<String> = ["x", "y", "z"]
        .iter()
        .take(max_vars)
        .map(|s| s.to_string())
        .collect();
    let n = rng.gen_range(1..=max_patterns);
    let mut query = Vec::new();
    for _ in 0..n {
        // occasionally query the built-in isa predicate
        let predicate = if rng.gen_bool(0.1) {
            "isa".to_string()
        } else {
            kb.predicates[rng.gen_range(0..kb.predicates.len())].clone()
        };
        let mut terms = Vec::new();
        for _ in 0..2 {
            if rng.gen_bool(0.6) {
                terms.push(Term::Var(vars[rng.gen_range(0..vars.len())].clone()));
            } else if rng.gen_bool(0.7) {
                terms.push(Term::Const(Value::entity(
                    &kb.entities[rng.gen_range(0..kb.entities.len())],
                )));
            } else {
                terms.push(Term::Const(Value::Int(rng.gen_range(0..5))));
            }
        }
        query.push(Pattern::new(predicate, terms));
    }
    query
}
