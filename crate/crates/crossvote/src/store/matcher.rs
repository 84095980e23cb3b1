//! Conjunctive pattern matching over the fact set.
//!
//! A query is a list of patterns joined on shared variables. The result is
//! the set of bindings under which every pattern is a ground asserted fact,
//! returned in a deterministic order (lexicographic over binding values).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{KnowledgeStore, StoreError, Value};

/// One slot of a pattern: a named variable or a ground value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    /// Variable name without the `?` sigil.
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(value: Value) -> Self {
        Term::Const(value)
    }
}

/// A single predicate pattern, e.g. `IsOn(?tl, road1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl Pattern {
    pub fn new(predicate: impl Into<String>, terms: Vec<Term>) -> Self {
        Pattern {
            predicate: predicate.into(),
            terms,
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match t {
                Term::Var(v) => write!(f, "?{v}")?,
                Term::Const(c) => write!(f, "{c}")?,
            }
        }
        write!(f, ")")
    }
}

/// Map from variable name to the value it is bound to. Every binding returned
/// for a query covers every variable occurring in that query.
pub type Binding = BTreeMap<String, Value>;

fn extend(binding: &Binding, pattern: &Pattern, args: &[Value]) -> Option<Binding> {
    if pattern.terms.len() != args.len() {
        return None;
    }
    let mut out = binding.clone();
    for (term, value) in pattern.terms.iter().zip(args) {
        match term {
            Term::Const(c) => {
                if c != value {
                    return None;
                }
            }
            Term::Var(name) => match out.get(name) {
                Some(bound) if bound != value => return None,
                Some(_) => {}
                None => {
                    out.insert(name.clone(), value.clone());
                }
            },
        }
    }
    Some(out)
}

impl KnowledgeStore {
    /// Evaluate a conjunctive query with natural-join semantics.
    pub fn match_patterns(&self, query: &[Pattern]) -> Result<Vec<Binding>, StoreError> {
        if query.is_empty() {
            return Err(StoreError::EmptyQuery);
        }
        for p in query {
            if !self.has_predicate(&p.predicate) {
                return Err(StoreError::UnknownProperty(p.predicate.clone()));
            }
        }
        let mut partial: Vec<Binding> = vec![Binding::new()];
        for pattern in query {
            let mut next = Vec::new();
            for binding in &partial {
                for args in self.facts_of(&pattern.predicate) {
                    if let Some(extended) = extend(binding, pattern, args) {
                        next.push(extended);
                    }
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        partial.sort();
        partial.dedup();
        Ok(partial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Range;

    fn road_store() -> KnowledgeStore {
        let mut s = KnowledgeStore::new();
        s.define_class("Thing", None, vec![]).unwrap();
        s.define_class("TrafficLight", Some("Thing"), vec![])
            .unwrap();
        s.define_class("Road", Some("Thing"), vec![]).unwrap();
        s.define_property("IsOn", "TrafficLight", Range::Class("Road".into()), false)
            .unwrap();
        for tl in ["TL1", "TL2"] {
            s.assert_is_a(tl, "TrafficLight").unwrap();
        }
        s.assert_is_a("road1", "Road").unwrap();
        s
    }

    #[test]
    fn empty_store_yields_no_bindings() {
        let s = road_store();
        let q = [Pattern::new(
            "IsOn",
            vec![Term::var("tl"), Term::var("road")],
        )];
        assert!(s.match_patterns(&q).unwrap().is_empty());
    }

    #[test]
    fn direct_enumeration() {
        let mut s = road_store();
        s.assert_triple("TL1", "IsOn", Value::entity("road1"))
            .unwrap();
        s.assert_triple("TL2", "IsOn", Value::entity("road1"))
            .unwrap();
        let q = [Pattern::new(
            "IsOn",
            vec![Term::var("tl"), Term::constant(Value::entity("road1"))],
        )];
        let bindings = s.match_patterns(&q).unwrap();
        assert_eq!(bindings.len(), 2);
        assert_eq!(bindings[0]["tl"], Value::entity("TL1"));
        assert_eq!(bindings[1]["tl"], Value::entity("TL2"));
    }

    #[test]
    fn unknown_predicate_errors() {
        let s = road_store();
        let q = [Pattern::new("Nope", vec![Term::var("x"), Term::var("y")])];
        assert!(matches!(
            s.match_patterns(&q),
            Err(StoreError::UnknownProperty(_))
        ));
    }

    #[test]
    fn empty_query_errors() {
        let s = road_store();
        assert_eq!(s.match_patterns(&[]), Err(StoreError::EmptyQuery));
    }

    #[test]
    fn join_on_shared_variable() {
        let mut s = road_store();
        s.define_class("Intersection", Some("Thing"), vec![])
            .unwrap();
        s.define_property(
            "ConnectedTo",
            "Road",
            Range::Class("Intersection".into()),
            false,
        )
        .unwrap();
        s.assert_is_a("int1", "Intersection").unwrap();
        s.assert_triple("TL1", "IsOn", Value::entity("road1"))
            .unwrap();
        s.assert_triple("road1", "ConnectedTo", Value::entity("int1"))
            .unwrap();
        let q = [
            Pattern::new("IsOn", vec![Term::var("tl"), Term::var("r")]),
            Pattern::new("ConnectedTo", vec![Term::var("r"), Term::var("i")]),
        ];
        let bindings = s.match_patterns(&q).unwrap();
        assert_eq!(bindings.len(), 1);
        assert_eq!(bindings[0]["i"], Value::entity("int1"));
    }

    #[test]
    fn repeated_variable_in_one_pattern() {
        let mut s = KnowledgeStore::new();
        s.define_class("Thing", None, vec![]).unwrap();
        s.define_class("Seg", Some("Thing"), vec![]).unwrap();
        s.define_property("IsAtRight", "Seg", Range::Class("Seg".into()), false)
            .unwrap();
        s.assert_is_a("a", "Seg").unwrap();
        s.assert_is_a("b", "Seg").unwrap();
        s.assert_triple("a", "IsAtRight", Value::entity("b"))
            .unwrap();
        s.assert_triple("a", "IsAtRight", Value::entity("a"))
            .unwrap();
        let q = [Pattern::new(
            "IsAtRight",
            vec![Term::var("x"), Term::var("x")],
        )];
        let bindings = s.match_patterns(&q).unwrap();
        assert_eq!(bindings.len(), 1);
        assert_eq!(bindings[0]["x"], Value::entity("a"));
    }

    #[test]
    fn isa_is_queryable() {
        let s = road_store();
        let q = [Pattern::new(
            "isa",
            vec![
                Term::var("x"),
                Term::constant(Value::entity("TrafficLight")),
            ],
        )];
        let bindings = s.match_patterns(&q).unwrap();
        assert_eq!(bindings.len(), 2);
    }
}
