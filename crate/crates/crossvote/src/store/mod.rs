//! Typed entity–relation store with class hierarchy, property signatures,
//! min-cardinality / has-value restrictions and conjunctive pattern matching.
//!
//! The store is deliberately closed-world: restrictions are checked against
//! asserted facts only, and entities acquire class membership through explicit
//! `isa` assertions. Mutations take `&mut self`; reads take `&self` and return
//! owned snapshots, so a store behind a lock follows a single-writer,
//! multi-reader discipline for free.

mod matcher;
mod textfmt;

pub use matcher::{Binding, Pattern, Term};
pub use textfmt::KbParseError;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved predicate for instance-of facts.
pub const ISA: &str = "isa";

/// A value an entity can be related to: another entity, an integer or a string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    Entity(String),
    Int(i64),
    Str(String),
}

impl Value {
    pub fn entity(name: impl Into<String>) -> Self {
        Value::Entity(name.into())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Entity(e) => write!(f, "{e}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// Range of a property position: a class of entities or a literal kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Range {
    Class(String),
    Int,
    Str,
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Range::Class(c) => write!(f, "{c}"),
            Range::Int => write!(f, "integer"),
            Range::Str => write!(f, "string"),
        }
    }
}

/// Class-level constraint checked by [`KnowledgeStore::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restriction {
    pub on_property: String,
    pub kind: RestrictionKind,
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictionKind {
    /// The instance must carry at least `n` distinct values for the property.
    MinCardinality(u32),
    /// The instance must carry this specific value for the property. When the
    /// value names a defined class, any instance of that class satisfies it.
    HasValue(Value),
}

impl Restriction {
    pub fn min_cardinality(property: impl Into<String>, n: u32) -> Self {
        Restriction {
            on_property: property.into(),
            kind: RestrictionKind::MinCardinality(n),
            comment: None,
        }
    }

    pub fn has_value(property: impl Into<String>, value: Value) -> Self {
        Restriction {
            on_property: property.into(),
            kind: RestrictionKind::HasValue(value),
            comment: None,
        }
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comment = Some(comment.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDef {
    pub name: String,
    pub parent: Option<String>,
    pub restrictions: Vec<Restriction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDef {
    pub name: String,
    pub domain: String,
    /// Middle-argument range for ternary (function-style) relations.
    pub via: Option<Range>,
    pub range: Range,
    pub functional: bool,
}

impl PropertyDef {
    /// Number of argument positions facts of this property carry.
    pub fn arity(&self) -> usize {
        if self.via.is_some() {
            3
        } else {
            2
        }
    }
}

/// One unsatisfied restriction, reported by [`KnowledgeStore::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    MinCardinality {
        class: String,
        property: String,
        required: u32,
        found: usize,
    },
    HasValue {
        class: String,
        property: String,
        expected: Value,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MinCardinality {
                class,
                property,
                required,
                found,
            } => write!(
                f,
                "MinCardinality violation on {property}: required {required}, found {found} (class {class})"
            ),
            Violation::HasValue {
                class,
                property,
                expected,
            } => write!(
                f,
                "HasValue violation on {property}: expected {expected} (class {class})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("class {0} is already defined")]
    DuplicateClass(String),
    #[error("property {0} is already defined")]
    DuplicateProperty(String),
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("unknown property {0}")]
    UnknownProperty(String),
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("domain violation: {subject} is not an instance of {expected} (property {property})")]
    DomainViolation {
        subject: String,
        property: String,
        expected: String,
    },
    #[error("range violation: {value} does not conform to {expected} (property {property})")]
    RangeViolation {
        value: String,
        property: String,
        expected: String,
    },
    #[error("functional property {property} already holds {existing} for {subject}")]
    FunctionalConflict {
        subject: String,
        property: String,
        existing: String,
    },
    #[error("property {property} expects {expected} arguments, got {found}")]
    ArityMismatch {
        property: String,
        expected: usize,
        found: usize,
    },
    #[error("query has no patterns")]
    EmptyQuery,
    #[error("restriction on {class}: {detail}")]
    BadRestriction { class: String, detail: String },
}

type Result<T> = std::result::Result<T, StoreError>;

/// The store: schema (classes + properties) and ground facts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeStore {
    classes: BTreeMap<String, ClassDef>,
    properties: BTreeMap<String, PropertyDef>,
    /// predicate -> set of argument tuples. `isa` facts live here too.
    facts: BTreeMap<String, BTreeSet<Vec<Value>>>,
}

impl KnowledgeStore {
    pub fn new() -> Self {
        Self::default()
    }

    // ---- schema -----------------------------------------------------------

    pub fn define_class(
        &mut self,
        name: &str,
        parent: Option<&str>,
        restrictions: Vec<Restriction>,
    ) -> Result<()> {
        if self.classes.contains_key(name) {
            return Err(StoreError::DuplicateClass(name.to_string()));
        }
        if let Some(p) = parent {
            if !self.classes.contains_key(p) {
                return Err(StoreError::UnknownClass(p.to_string()));
            }
        }
        // Parent chains stay acyclic because a class can only point at an
        // already-defined parent, and definitions are never rewired.
        self.classes.insert(
            name.to_string(),
            ClassDef {
                name: name.to_string(),
                parent: parent.map(str::to_string),
                restrictions: Vec::new(),
            },
        );
        for r in restrictions {
            if let Err(e) = self.add_restriction(name, r) {
                self.classes.remove(name);
                return Err(e);
            }
        }
        Ok(())
    }

    /// Attach a restriction to an existing class.
    pub fn add_restriction(&mut self, class: &str, restriction: Restriction) -> Result<()> {
        if !self.classes.contains_key(class) {
            return Err(StoreError::UnknownClass(class.to_string()));
        }
        let prop = self
            .properties
            .get(&restriction.on_property)
            .ok_or_else(|| StoreError::UnknownProperty(restriction.on_property.clone()))?
            .clone();
        if let RestrictionKind::HasValue(v) = &restriction.kind {
            self.check_range(&prop.name, &prop.range, v)?;
        }
        self.classes
            .get_mut(class)
            .expect("checked above")
            .restrictions
            .push(restriction);
        Ok(())
    }

    pub fn define_property(
        &mut self,
        name: &str,
        domain: &str,
        range: Range,
        functional: bool,
    ) -> Result<()> {
        self.define_property_inner(name, domain, None, range, functional)
    }

    /// Ternary function-style relation: `name(subject, via, result)`.
    pub fn define_function_property(
        &mut self,
        name: &str,
        domain: &str,
        via: Range,
        range: Range,
    ) -> Result<()> {
        self.define_property_inner(name, domain, Some(via), range, false)
    }

    fn define_property_inner(
        &mut self,
        name: &str,
        domain: &str,
        via: Option<Range>,
        range: Range,
        functional: bool,
    ) -> Result<()> {
        if self.properties.contains_key(name) || name == ISA {
            return Err(StoreError::DuplicateProperty(name.to_string()));
        }
        if !self.classes.contains_key(domain) {
            return Err(StoreError::UnknownClass(domain.to_string()));
        }
        for r in [&range].into_iter().chain(via.as_ref()) {
            if let Range::Class(c) = r {
                if !self.classes.contains_key(c) {
                    return Err(StoreError::UnknownClass(c.clone()));
                }
            }
        }
        self.properties.insert(
            name.to_string(),
            PropertyDef {
                name: name.to_string(),
                domain: domain.to_string(),
                via,
                range,
                functional,
            },
        );
        Ok(())
    }

    // ---- assertion --------------------------------------------------------

    /// Declare `entity` an instance of `class`. Idempotent.
    pub fn assert_is_a(&mut self, entity: &str, class: &str) -> Result<()> {
        if !self.classes.contains_key(class) {
            return Err(StoreError::UnknownClass(class.to_string()));
        }
        self.facts
            .entry(ISA.to_string())
            .or_default()
            .insert(vec![Value::entity(entity), Value::entity(class)]);
        Ok(())
    }

    /// Assert a binary fact. Idempotent: re-asserting leaves the store unchanged.
    pub fn assert_triple(&mut self, subject: &str, predicate: &str, object: Value) -> Result<()> {
        if predicate == ISA {
            let class = match &object {
                Value::Entity(c) => c.clone(),
                other => {
                    return Err(StoreError::RangeViolation {
                        value: other.to_string(),
                        property: ISA.to_string(),
                        expected: "class".to_string(),
                    })
                }
            };
            return self.assert_is_a(subject, &class);
        }
        let prop = self.property(predicate)?.clone();
        if prop.arity() != 2 {
            return Err(StoreError::ArityMismatch {
                property: predicate.to_string(),
                expected: prop.arity(),
                found: 2,
            });
        }
        self.check_domain(subject, &prop)?;
        self.check_range(predicate, &prop.range, &object)?;
        let tuple = vec![Value::entity(subject), object];
        if prop.functional {
            let existing = self
                .facts
                .get(predicate)
                .into_iter()
                .flatten()
                .find(|t| t[0] == tuple[0] && t[1] != tuple[1]);
            if let Some(t) = existing {
                return Err(StoreError::FunctionalConflict {
                    subject: subject.to_string(),
                    property: predicate.to_string(),
                    existing: t[1].to_string(),
                });
            }
        }
        self.facts
            .entry(predicate.to_string())
            .or_default()
            .insert(tuple);
        Ok(())
    }

    /// Assert a ternary fact for a function-style relation.
    pub fn assert_ternary(
        &mut self,
        subject: &str,
        predicate: &str,
        via: Value,
        object: Value,
    ) -> Result<()> {
        let prop = self.property(predicate)?.clone();
        let via_range = prop.via.clone().ok_or_else(|| StoreError::ArityMismatch {
            property: predicate.to_string(),
            expected: prop.arity(),
            found: 3,
        })?;
        self.check_domain(subject, &prop)?;
        self.check_range(predicate, &via_range, &via)?;
        self.check_range(predicate, &prop.range, &object)?;
        self.facts
            .entry(predicate.to_string())
            .or_default()
            .insert(vec![Value::entity(subject), via, object]);
        Ok(())
    }

    /// Remove a binary fact. Returns whether it was present.
    pub fn retract_triple(&mut self, subject: &str, predicate: &str, object: &Value) -> bool {
        let tuple = vec![Value::entity(subject), object.clone()];
        self.facts
            .get_mut(predicate)
            .map(|set| set.remove(&tuple))
            .unwrap_or(false)
    }

    /// Replace the value of a functional property, asserting if absent.
    pub fn set_functional_value(
        &mut self,
        subject: &str,
        predicate: &str,
        object: Value,
    ) -> Result<()> {
        let prop = self.property(predicate)?.clone();
        if !prop.functional {
            return Err(StoreError::FunctionalConflict {
                subject: subject.to_string(),
                property: predicate.to_string(),
                existing: "non-functional property".to_string(),
            });
        }
        let old: Vec<Value> = self
            .facts
            .get(predicate)
            .into_iter()
            .flatten()
            .filter(|t| t[0] == Value::entity(subject))
            .map(|t| t[1].clone())
            .collect();
        for o in old {
            self.retract_triple(subject, predicate, &o);
        }
        self.assert_triple(subject, predicate, object)
    }

    // ---- lookups ----------------------------------------------------------

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.get(name)
    }

    pub fn property(&self, name: &str) -> Result<&PropertyDef> {
        self.properties
            .get(name)
            .ok_or_else(|| StoreError::UnknownProperty(name.to_string()))
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.classes.values()
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyDef> {
        self.properties.values()
    }

    pub fn has_predicate(&self, name: &str) -> bool {
        name == ISA || self.properties.contains_key(name)
    }

    /// Total number of asserted facts (including `isa`).
    pub fn fact_count(&self) -> usize {
        self.facts.values().map(BTreeSet::len).sum()
    }

    pub fn facts_of(&self, predicate: &str) -> impl Iterator<Item = &Vec<Value>> {
        self.facts.get(predicate).into_iter().flatten()
    }

    pub fn all_facts(&self) -> impl Iterator<Item = (&str, &Vec<Value>)> {
        self.facts
            .iter()
            .flat_map(|(p, set)| set.iter().map(move |t| (p.as_str(), t)))
    }

    /// Classes the entity was directly asserted into.
    pub fn classes_of(&self, entity: &str) -> Vec<String> {
        let key = Value::entity(entity);
        self.facts_of(ISA)
            .filter(|t| t[0] == key)
            .filter_map(|t| match &t[1] {
                Value::Entity(c) => Some(c.clone()),
                _ => None,
            })
            .collect()
    }

    /// Entities with at least one `isa` assertion, sorted.
    pub fn entities(&self) -> Vec<String> {
        self.facts_of(ISA)
            .filter_map(|t| match &t[0] {
                Value::Entity(e) => Some(e.clone()),
                _ => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// True when `sub` equals `sup` or transitively descends from it.
    pub fn is_subclass_of(&self, sub: &str, sup: &str) -> bool {
        let mut cur = Some(sub);
        while let Some(c) = cur {
            if c == sup {
                return true;
            }
            cur = self.classes.get(c).and_then(|d| d.parent.as_deref());
        }
        false
    }

    fn instance_of(&self, entity: &str, class: &str) -> bool {
        self.classes_of(entity)
            .iter()
            .any(|c| self.is_subclass_of(c, class))
    }

    fn check_domain(&self, subject: &str, prop: &PropertyDef) -> Result<()> {
        if self.instance_of(subject, &prop.domain) {
            Ok(())
        } else {
            Err(StoreError::DomainViolation {
                subject: subject.to_string(),
                property: prop.name.clone(),
                expected: prop.domain.clone(),
            })
        }
    }

    fn check_range(&self, property: &str, range: &Range, value: &Value) -> Result<()> {
        let ok = match (range, value) {
            (Range::Int, Value::Int(_)) => true,
            (Range::Str, Value::Str(_)) => true,
            (Range::Class(c), Value::Entity(e)) => {
                // Either an instance of the range class, or a class used as a
                // value (the schema listings do this for negotiation objects).
                self.instance_of(e, c)
                    || (self.classes.contains_key(e) && self.is_subclass_of(e, c))
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(StoreError::RangeViolation {
                value: value.to_string(),
                property: property.to_string(),
                expected: range.to_string(),
            })
        }
    }

    // ---- validation -------------------------------------------------------

    /// Check `entity` against every restriction declared on its classes and
    /// their ancestors. Empty result means conformant.
    pub fn validate(&self, entity: &str) -> Result<Vec<Violation>> {
        let direct = self.classes_of(entity);
        if direct.is_empty() {
            return Err(StoreError::UnknownEntity(entity.to_string()));
        }
        let mut chain: BTreeSet<String> = BTreeSet::new();
        for c in &direct {
            let mut cur = Some(c.as_str());
            while let Some(name) = cur {
                chain.insert(name.to_string());
                cur = self.classes.get(name).and_then(|d| d.parent.as_deref());
            }
        }
        let mut violations = Vec::new();
        for class in &chain {
            let Some(def) = self.classes.get(class) else {
                continue;
            };
            for r in &def.restrictions {
                match &r.kind {
                    RestrictionKind::MinCardinality(n) => {
                        let found = self
                            .facts_of(&r.on_property)
                            .filter(|t| t.len() == 2 && t[0] == Value::entity(entity))
                            .count();
                        if (found as u32) < *n {
                            violations.push(Violation::MinCardinality {
                                class: class.clone(),
                                property: r.on_property.clone(),
                                required: *n,
                                found,
                            });
                        }
                    }
                    RestrictionKind::HasValue(expected) => {
                        let satisfied = self
                            .facts_of(&r.on_property)
                            .filter(|t| t.len() == 2 && t[0] == Value::entity(entity))
                            .any(|t| self.value_meets(&t[1], expected));
                        if !satisfied {
                            violations.push(Violation::HasValue {
                                class: class.clone(),
                                property: r.on_property.clone(),
                                expected: expected.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(violations)
    }

    /// Validate every declared entity; returns (entity, violation) pairs.
    pub fn validate_all(&self) -> Vec<(String, Violation)> {
        let mut out = Vec::new();
        for e in self.entities() {
            if let Ok(vs) = self.validate(&e) {
                out.extend(vs.into_iter().map(|v| (e.clone(), v)));
            }
        }
        out
    }

    fn value_meets(&self, actual: &Value, expected: &Value) -> bool {
        if actual == expected {
            return true;
        }
        match (expected, actual) {
            (Value::Entity(class), Value::Entity(e)) if self.classes.contains_key(class) => {
                self.instance_of(e, class)
            }
            _ => false,
        }
    }
}
